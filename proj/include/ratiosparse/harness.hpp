#pragma once

#include "ratiosparse/core.hpp"
#include "ratiosparse/datagen.hpp"
#include "ratiosparse/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ratiosparse {

enum class Outcome { kSuccess, kModelFailure, kAlgorithmFailure };
std::string to_string(Outcome o);

/// Monte Carlo experiment over a (p, q) x k grid. Matrix and signal seeds of
/// each trial are derived from (base_seed, k, trial) and shared by every
/// (p, q) pair, so parameter choices are compared on identical instances.
struct ExperimentPlan {
  MatrixSpec matrix;
  SignalSpec signal;  ///< template: n, k and seed are set per trial
  std::vector<int> sparsity_grid;
  std::vector<std::pair<double, double>> param_grid;
  int trials_per_cell = 1;
  std::uint64_t base_seed = 0;
  double success_tol = 1e-3;
  DlpaConfig solver;
  double timeout_s = 30.0;      ///< per solve; 0 disables
  bool record_timing = false;   ///< wall_ms is 0 unless set, keeping outputs reproducible

  void validate() const;
};

/// JSON plan. Keys: matrix, signal, sparsity_grid, param_grid (list of
/// [p, q]) or p_grid and q_grid, trials_per_cell, base_seed, success_tol,
/// solver, timeout_s, record_timing. Without a signal block the magnitude
/// range and separation follow the protocol of the matrix kind.
ExperimentPlan parse_plan(const std::string& json_text);

struct TrialRecord {
  double p = 0.0;
  double q = 0.0;
  int k = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kAlgorithmFailure;
  double rel_error = 0.0;
  double snr_db = 0.0;
  double alpha_final = 0.0;
  int outer_iters = 0;
  double wall_ms = 0.0;
  std::string diagnostic;  ///< set when the trial threw
};

struct CellAggregate {
  double p = 0.0;
  double q = 0.0;
  int k = 0;
  int trials = 0;
  double success_rate = 0.0;
  double model_failure_rate = 0.0;
  double algorithm_failure_rate = 0.0;
  double mean_snr_db = 0.0;
  std::optional<double> mean_snr_db_success;
  double mean_rel_error = 0.0;
  double mean_outer_iters = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;  ///< ordered by (p, q) pair, k, trial
  std::vector<CellAggregate> cells; ///< ordered by (p, q) pair, k
};

/// Default feasibility gate: 1e-6 (1 + ||b||).
double outcome_feasibility_tolerance(const VectorRef& b);

/// success if the relative error is below success_tol; otherwise
/// model_failure if x_hat is feasible within feas_tol and has a smaller ratio
/// than the ground truth; otherwise algorithm_failure.
Outcome classify_outcome(const VectorRef& x_hat, const ProblemInstance& instance, const RatioParams& params,
                         double success_tol, std::optional<double> feas_tol = std::nullopt);

/// 20 log10(||x*|| / ||x_hat - x*||), capped at 400 dB.
double snr_db(const VectorRef& x_hat, const VectorRef& x_star);
inline constexpr double kSnrCapDb = 400.0;

/// Runs every trial on a pool of `workers` threads. Results do not depend on
/// the worker count.
ExperimentResult run_experiment(const ExperimentPlan& plan, int workers = 1);

std::vector<CellAggregate> aggregate(const std::vector<TrialRecord>& trials);

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials);
void write_aggregate_json(std::ostream& os, const std::vector<CellAggregate>& cells);

/// One row per (p, q): rates and SNR averaged uniformly over the k grid.
void write_heatmap_csv(std::ostream& os, const std::vector<CellAggregate>& cells);

}  // namespace ratiosparse

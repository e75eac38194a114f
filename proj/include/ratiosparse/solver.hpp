#pragma once

#include "ratiosparse/core.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ratiosparse {

/// Settings of the prox-linear Dinkelbach method and its inner ADMM.
struct DlpaConfig {
  double beta_prox = 1.0;     ///< proximal weight beta (initial value in adaptive mode)
  double rho0 = 1.0;          ///< initial ADMM penalty
  double rho_growth = 1.05;   ///< per-inner-iteration continuation factor
  double rho_max = 1e4;       ///< continuation cap
  int outer_max = 200;
  double outer_tol = 1e-8;
  int inner_max = 2000;
  double inner_tol = 1e-8;    ///< residual tolerance, scaled by sqrt(n)
  bool adaptive_beta = true;  ///< double beta and retry whenever a step would raise the ratio
  double time_limit_s = 0.0;  ///< wall-clock budget per solve; 0 disables

  void validate() const;
};

/// JSON object with any of the DlpaConfig field names; missing fields keep
/// the values in `base`.
DlpaConfig parse_dlpa_config(const std::string& json_text, DlpaConfig base = {});
std::string to_json(const DlpaConfig& config);

/// Precomputed P_A = A^T (A A^T)^+ (the pseudo-inverse of A, n x m) used by
/// every projection onto {x : A x = b}. Immutable and shareable.
class AffineProjector {
 public:
  explicit AffineProjector(const MatrixRef& A, double rcond = 1e-12);

  const Matrix& A() const noexcept { return A_; }
  const Matrix& pinv() const noexcept { return pinv_; }
  Eigen::Index rank() const noexcept { return rank_; }

  /// psi - P_A (A psi - b).
  Vector project(const VectorRef& psi, const VectorRef& b) const;

  /// P_A b.
  Vector min_norm_point(const VectorRef& b) const { return pinv_ * b; }

 private:
  Matrix A_;
  Matrix pinv_;
  Eigen::Index rank_ = 0;
};

/// Minimum-norm point of {x : A x = b}. Throws kInfeasible when b is not in
/// the range of A.
Vector min_norm_feasible(const ProblemInstance& instance);

/// c = alpha * grad(||.||_q^p)(x) = alpha p ||x||_q^(p-q) sign(x) |x|^(q-1).
Vector linearization_coefficient(const VectorRef& x, double alpha, const RatioParams& params);

/// ||x||_p^p - <c, x> + (beta/2) ||x - anchor||^2, the prox-linear subproblem
/// objective restricted to the feasible set.
double subproblem_objective(const VectorRef& x, const VectorRef& anchor, const VectorRef& c,
                            double p, double beta);

/// ADMM variables carried between calls (warm start).
struct InnerState {
  Vector y;
  Vector u;
  double rho = 1.0;
};

struct InnerResult {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool restored = false;  ///< returned point came from the support-restricted y projection
  bool kept_anchor = false;  ///< no candidate beat the anchor, which is returned unchanged
};

class Deadline {
 public:
  explicit Deadline(double seconds);
  bool expired() const;
  void check() const;

 private:
  std::optional<std::chrono::steady_clock::time_point> until_;
};

/// Approximately solves
///   min ||x||_p^p - <c, x> + (beta/2)||x - anchor||^2  s.t.  A x = b
/// by ADMM on the split y = x. The x-step is an affine projection, the y-step
/// the elementwise l_p proximal map. The returned point is the feasible
/// candidate with the lowest objective among: the final x iterate, the final y
/// restored onto the feasible set over its own support, and the anchor itself.
InnerResult inner_admm_solve(const AffineProjector& projector, const VectorRef& b,
                             const VectorRef& anchor, const VectorRef& c, double p, double beta,
                             const DlpaConfig& config, InnerState& state,
                             const Deadline& deadline = Deadline(0.0));

/// Convenience overload on an instance with a cold start.
InnerResult inner_admm_solve(const ProblemInstance& instance, const VectorRef& x_k,
                             const VectorRef& c_k, double p, const DlpaConfig& config);

enum class StopReason { kGapTol, kStepTol, kMaxIter };
std::string_view to_string(StopReason r);

enum class Initialization { kProvided, kL1Baseline, kMinNorm };
std::string_view to_string(Initialization i);

struct IterationLog {
  double alpha = 0.0;       ///< ratio after the step
  double delta = 0.0;       ///< Dinkelbach gap (normalized units)
  double step_norm = 0.0;   ///< ||x^(k+1) - x^(k)||_2 (original units)
  double x_norm = 0.0;      ///< ||x^(k+1)||_2 (original units)
  double beta = 0.0;        ///< proximal weight used for the accepted step
  int inner_iterations = 0; ///< summed over beta retries
};

/// Outer-loop state of the Dinkelbach iteration.
struct SolverState {
  Vector x;            ///< current iterate (normalized units)
  double alpha = 0.0;
  double delta = 0.0;
  int k = 0;
  InnerState inner;
  std::vector<IterationLog> history;
};

struct SolveResult {
  Vector x_hat;
  double alpha_initial = 0.0;
  double alpha_final = 0.0;
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::kMaxIter;
  double stationarity_residual = 0.0;
  double beta_final = 0.0;
  double max_feasibility_violation = 0.0;  ///< max ||A x - b|| over reported iterates
  double step_sq_sum = 0.0;                ///< sum of squared normalized steps
  bool bounded_iterates = true;            ///< false if ||x|| grew by more than 1e6x
  Initialization initialization = Initialization::kProvided;
  std::vector<IterationLog> history;
};

/// Prox-linear Dinkelbach method for min ||x||_p^p / ||x||_q^p s.t. A x = b.
///
/// Internally the problem is rescaled so the starting point has unit l_q norm
/// (the ratio is scale invariant, so iterates map back exactly). Without x0 the
/// start is the l1 baseline, or the minimum-norm point if that fails.
SolveResult dlpa_solve(const ProblemInstance& instance, const RatioParams& params,
                       const DlpaConfig& config = {},
                       const std::optional<Vector>& x0 = std::nullopt);

/// Same, reusing a projector built from instance.A().
SolveResult dlpa_solve(const ProblemInstance& instance, const AffineProjector& projector,
                       const RatioParams& params, const DlpaConfig& config,
                       const std::optional<Vector>& x0 = std::nullopt);

struct L1BaselineResult {
  Vector x;
  int iterations = 0;
  bool converged = false;
  bool fell_back = false;  ///< min-norm point returned instead
};

/// Basis pursuit min ||x||_1 s.t. A x = b through the same ADMM (p = 1,
/// c = 0, beta = 0). Falls back to the minimum-norm point on failure.
L1BaselineResult l1_baseline_detailed(const ProblemInstance& instance, const DlpaConfig& config = {});

L1BaselineResult l1_baseline_detailed(const ProblemInstance& instance, const AffineProjector& projector,
                                      const DlpaConfig& config = {});

inline Vector l1_baseline_solve(const ProblemInstance& instance, const DlpaConfig& config = {}) {
  return l1_baseline_detailed(instance, config).x;
}

/// Feasibility tolerance used for every reported iterate: 1e-8 (1 + ||b||).
double feasibility_tolerance(const VectorRef& b);

}  // namespace ratiosparse

#pragma once

#include "ratiosparse/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ratiosparse {

/// Inputs shared by the recovery-guarantee calculators.
struct TheoryInput {
  RatioParams params{1.0, 2.0};
  int k = 1;             ///< sparsity level
  int t = 1;             ///< block size of the RIP/ROP bounds
  double beta = 1.0;     ///< bound on ||x||_p / ||x||_q of the signal
  double delta_2k = 0.0;
  double delta_k = 0.0;
  double delta_kt = 0.0; ///< delta_(k+t)
  double theta_kt = 0.0; ///< restricted orthogonality constant theta_(k,t)
  double epsilon = 0.0;  ///< noise radius
  Eigen::Index n = 0;    ///< ambient dimension; 0 skips the k, t range checks

  void validate() const;
};

/// Largest ||x||_p / ||x||_q over k-sparse x: k^(1/p - 1/q).
double worst_case_beta(const RatioParams& params, int k);

/// kappa = ||x||_p^p ||x||_inf^(q-p) / ||x||_q^q.
double gnrc(const VectorRef& x, const RatioParams& params);

/// Root in (0, 1) of (q-1)(s-1) v^q + q v^(q-1) - 1 (1 when s = 1).
double uniform_gnrc_root(double q, int s);

/// K_(1,q,s) = (1 + (s-1) x) / (1 + (s-1) x^q), x = uniform_gnrc_root(q, s):
/// the largest gnrc (p = 1) of any s-sparse vector.
double uniform_gnrc_bound(double q, int s);

/// Ceiling on the null space constant mu that makes x0 a strict local
/// minimizer: 1 / (1 + kappa_(1,q)(x0)) when p = 1, otherwise 1.
double local_optimality_mu_threshold(const VectorRef& x0, const RatioParams& params);

struct ZeroPointResult {
  double z0 = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double residual = 0.0;  ///< |f(z0)|
};

/// f(z) = z^q - a z^p - a - 1 with a = beta^p k^(-(q-p)/q).
double fpq_value(double z, const TheoryInput& input);

/// Unique positive zero of fpq_value, by bisection on [z_low, z_high] and a
/// Newton polish.
ZeroPointResult fpq_zero(const TheoryInput& input);

struct RicThreshold {
  double z0 = 0.0;
  double psi = 0.0;  ///< only set by ric_threshold_new
  double t = 0.0;    ///< T2 (new) or T1 (Zhu)
  double delta = 0.0;
};

/// Psi = beta^p (1 + z0^p) + k^((q-p)/q),
/// T2 = k^(2/min(q,2) - (2q+2-2p)/q) Psi^2, delta_new = 1 / sqrt(1 + T2).
RicThreshold ric_threshold_new(const TheoryInput& input);

/// T1 = 3^(2-2p) k^(2/min(q,2) - (2-2p)/q) (beta (1+z0) k^(-1/p) + k^(-1/q))^(2p),
/// delta_zhu = 1 / sqrt(1 + T1).
RicThreshold ric_threshold_zhu(const TheoryInput& input);

/// Error bound B_o for delta_2k below delta_new; kNotApplicable otherwise.
double error_bound_new(const TheoryInput& input);

/// Error bound B_z for delta_2k below delta_zhu; kNotApplicable otherwise.
double error_bound_zhu(const TheoryInput& input);

/// Constants of the k-RIP plus (k,t)-ROP bound.
struct T6Constants {
  double a_p = 0.0;
  double vartheta_q = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  double psi = 0.0;
  std::optional<double> c1;
  std::optional<double> c2;
  bool eta_ok = false;  ///< eta < 1
  bool psi_ok = false;  ///< psi < 1
  bool applicable() const { return eta_ok && psi_ok; }
};

/// Constants of the (k+t)-RIP-only bound.
struct T6RipConstants {
  double a_p = 0.0;
  double vartheta_q = 0.0;
  double rho_p = 0.0;
  double alpha_pq = 0.0;
  double eta = 0.0;
  double tau = 0.0;
  double psi = 0.0;
  double c_p = 0.0;
  std::optional<double> c1;
  std::optional<double> c2;
  bool eta_ok = false;
  bool psi_ok = false;
  bool applicable() const { return eta_ok && psi_ok; }
};

T6Constants t6_constants(const TheoryInput& input);
T6RipConstants t6rip_constants(const TheoryInput& input);

struct BoundReport {
  double z0 = 0.0;
  double psi = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double delta_new = 0.0;
  double delta_zhu = 0.0;
  std::optional<double> b_o;
  std::optional<double> b_z;
  std::optional<T6Constants> t6;
  std::optional<T6RipConstants> t6rip;
};

/// Every calculator above on one input. The block-size constants are filled
/// only when 1 <= k < n and t <= n - k hold (or n is 0).
BoundReport bound_report(const TheoryInput& input);

/// Exact restricted isometry constant of order s by enumerating every
/// support. Refuses (kInvalidArgument) when C(n, s) exceeds 1e6.
double exact_ric(const MatrixRef& A, int s);

struct NullspaceEstimate {
  double estimate = 0.0;   ///< upper estimate of inf ||h||_p / ||h||_q over ker(A)
  bool certified = false;  ///< exact, because dim ker(A) = 1
  Eigen::Index kernel_dim = 0;
};

/// Multi-start projected gradient over the unit sphere of ker(A). Restarts
/// begin at projected coordinate vectors and at seeded random directions.
NullspaceEstimate nullspace_ratio_estimate(const MatrixRef& A, const RatioParams& params,
                                           int restarts = 64, std::uint64_t seed = 0);

enum class RecoveryCondition { kSatisfiedCertified, kViolated, kInconclusive };
std::string to_string(RecoveryCondition c);

struct RecoveryCheck {
  RecoveryCondition status = RecoveryCondition::kInconclusive;
  double estimate = 0.0;
  double threshold = 0.0;  ///< 3^(1/p) s^(1/p - 1/q)
  bool certified = false;
};

RecoveryCheck check_uniform_recovery_condition(const MatrixRef& A, const RatioParams& params,
                                               int s, int restarts = 64);

/// "worst" selects worst_case_beta for each (p, q, k).
using BetaChoice = std::variant<double, std::string>;
/// "auto" selects 0.9 min(delta_new, delta_zhu) for each point.
using DeltaChoice = std::variant<double, std::string>;

/// Cartesian product of theory inputs. An empty t list means t = k.
struct TheoryGrid {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<int> k;
  std::vector<int> t;
  std::vector<BetaChoice> beta;
  std::vector<DeltaChoice> delta_2k;
  std::vector<double> delta_k{0.0};
  std::vector<double> delta_kt{0.0};
  std::vector<double> theta_kt{0.0};
  std::vector<double> epsilon{1.0};
  Eigen::Index n = 0;

  std::size_t size() const;
};

/// JSON grid: every field is a number (string choice) or a list of them.
/// Required: p, q, k. Defaults: beta 1, delta_2k "auto", t = k, epsilon 1,
/// delta_k/delta_kt/theta_kt 0, n 0.
TheoryGrid parse_theory_grid(const std::string& json_text);

/// The 180-point sweep grid used by the ordering checks.
TheoryGrid default_sweep_grid();

struct TheoryRow {
  TheoryInput input;
  BoundReport report;
};

std::vector<TheoryRow> run_theory_grid(const TheoryGrid& grid);

/// One CSV row per input with a header line.
void write_theory_csv(std::ostream& os, const std::vector<TheoryRow>& rows);

}  // namespace ratiosparse

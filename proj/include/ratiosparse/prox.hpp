#pragma once

namespace ratiosparse {

/// Parameters of the scalar proximal map of |y|^p with penalty rho:
///   argmin_y |y|^p + (rho/2) (y - t)^2.
struct GstParams {
  double p = 0.5;
  double rho = 1.0;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;

  void validate() const;
};

/// Generalized soft-thresholding threshold
///   tau = beta_p + p beta_p^(p-1) / rho,  beta_p = (2 (1-p) / rho)^(1/(2-p)).
/// Defined for 0 < p < 1 only; p = 1 is the plain soft threshold 1/rho.
double gst_threshold(const GstParams& params);

/// beta_p, the smallest nonzero magnitude the GST map can return.
double gst_min_magnitude(const GstParams& params);

struct GstOutcome {
  double value = 0.0;
  int newton_iterations = 0;
  bool bisected = false;  ///< Newton left the bracket or did not converge.
  bool flagged = false;   ///< Bracket was invalid; value forced to 0.
};

/// Global minimizer of |y|^p + (rho/2)(y - t)^2 for 0 < p < 1. Zero when
/// |t| <= tau (the tie |t| == tau resolves to 0); otherwise sign(t) z where
/// z + (p/rho) z^(p-1) = |t|, z in (beta_p, |t|], found by Newton from z = |t|
/// with a bisection safeguard.
GstOutcome gst_solve(double t, const GstParams& params);

inline double gst_apply(double t, const GstParams& params) { return gst_solve(t, params).value; }

/// GST map with the threshold precomputed, for elementwise application with
/// fixed (p, rho). Also handles p = 1 as the soft threshold 1/rho.
class GstMap {
 public:
  explicit GstMap(const GstParams& params);

  GstOutcome solve(double t) const;
  double operator()(double t) const { return solve(t).value; }

  double threshold() const noexcept { return tau_; }
  double min_magnitude() const noexcept { return beta_p_; }

 private:
  GstParams params_;
  double beta_p_;
  double tau_;
};

/// sign(t) max(|t| - lambda, 0).
double soft_threshold(double t, double lambda);

/// Proximal map of |y|^p / rho for any p in (0, 1]: soft threshold at p = 1,
/// GST otherwise.
double prox_lp(double t, double p, double rho);

}  // namespace ratiosparse

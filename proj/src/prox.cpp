#include "ratiosparse/prox.hpp"

#include "ratiosparse/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ratiosparse {

void GstParams::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "GST: p must lie in (0, 1]");
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw Error(ErrorCode::kInvalidArgument, "GST: rho must be positive");
  }
  if (!(newton_tol > 0.0) || newton_max_iter < 1) {
    throw Error(ErrorCode::kInvalidArgument, "GST: invalid Newton settings");
  }
}

double gst_min_magnitude(const GstParams& params) {
  params.validate();
  return std::pow(2.0 * (1.0 - params.p) / params.rho, 1.0 / (2.0 - params.p));
}

double gst_threshold(const GstParams& params) {
  params.validate();
  if (params.p == 1.0) {
    throw Error(ErrorCode::kDomain, "gst_threshold: p = 1 is the soft threshold");
  }
  const double beta_p = gst_min_magnitude(params);
  return beta_p + params.p * std::pow(beta_p, params.p - 1.0) / params.rho;
}

GstOutcome gst_solve(double t, const GstParams& params) {
  return GstMap(params).solve(t);
}

GstMap::GstMap(const GstParams& params) : params_(params) {
  params_.validate();
  if (params_.p < 1.0) {
    beta_p_ = gst_min_magnitude(params_);
    tau_ = gst_threshold(params_);
  } else {
    beta_p_ = 0.0;
    tau_ = 1.0 / params_.rho;
  }
}

GstOutcome GstMap::solve(double t) const {
  if (!std::isfinite(t)) throw Error(ErrorCode::kDomain, "gst_apply: non-finite input");
  GstOutcome out;
  if (params_.p == 1.0) {
    out.value = soft_threshold(t, tau_);
    return out;
  }
  const double target = std::abs(t);
  if (target <= tau_) return out;

  const double p = params_.p;
  const double c = p / params_.rho;
  const auto h = [&](double z) { return z + c * std::pow(z, p - 1.0); };
  const auto dh = [&](double z) { return 1.0 - c * (1.0 - p) * std::pow(z, p - 2.0); };
  const auto& params = params_;

  double lo = beta_p_;
  double hi = target;
  if (!(h(lo) <= target && lo < hi)) {
    out.flagged = true;
    return out;
  }

  // h is convex and increasing on [beta_p, inf), so Newton from the right
  // decreases monotonically towards the root.
  const double tol = params.newton_tol * std::max(1.0, target);
  double z = hi;
  bool converged = false;
  for (int it = 0; it < params.newton_max_iter; ++it) {
    ++out.newton_iterations;
    const double r = h(z) - target;
    if (std::abs(r) <= tol) {
      converged = true;
      break;
    }
    if (r > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    double next = z - r / dh(z);
    if (!(next > lo && next < hi)) {
      out.bisected = true;
      next = 0.5 * (lo + hi);
    }
    z = next;
  }
  if (!converged) {
    out.bisected = true;
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) > target ? hi : lo) = mid;
    }
    z = 0.5 * (lo + hi);
  }
  out.value = std::copysign(std::min(z, target), t);
  return out;
}

double soft_threshold(double t, double lambda) {
  return sign(t) * std::max(std::abs(t) - lambda, 0.0);
}

double prox_lp(double t, double p, double rho) {
  if (p == 1.0) return soft_threshold(t, 1.0 / rho);
  return GstMap(GstParams{p, rho}).solve(t).value;
}

}  // namespace ratiosparse

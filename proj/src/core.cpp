#include "ratiosparse/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ratiosparse {

namespace {

void require_finite(const VectorRef& x, const char* what) {
  if (!x.allFinite()) {
    throw Error(ErrorCode::kDomain, std::string(what) + ": non-finite entry");
  }
}

}  // namespace

RatioParams::RatioParams(double p, double q) : p_(p), q_(q) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "RatioParams: p must lie in (0, 1]");
  }
  if (!(q > 1.0) || !std::isfinite(q)) {
    throw Error(ErrorCode::kInvalidArgument, "RatioParams: q must be a finite value > 1");
  }
}

double RatioParams::max_ratio(Eigen::Index n) const {
  return std::pow(static_cast<double>(n), 1.0 - p_ / q_);
}

ProblemInstance::ProblemInstance(Matrix A, Vector b, std::optional<Vector> ground_truth,
                                 double noise_radius, std::string id)
    : A_(std::move(A)),
      b_(std::move(b)),
      ground_truth_(std::move(ground_truth)),
      noise_radius_(noise_radius),
      id_(std::move(id)) {
  if (A_.rows() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "instance: A must have at least one row");
  }
  if (A_.cols() < A_.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "instance: A must satisfy n >= m");
  }
  if (b_.size() != A_.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "instance: b has wrong length");
  }
  if (!A_.allFinite() || !b_.allFinite()) {
    throw Error(ErrorCode::kDomain, "instance: non-finite entry in A or b");
  }
  if (b_.isZero(0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "instance: b must be nonzero");
  }
  if (!(noise_radius_ >= 0.0) || !std::isfinite(noise_radius_)) {
    throw Error(ErrorCode::kInvalidArgument, "instance: noise radius must be >= 0");
  }
  if (ground_truth_) {
    if (ground_truth_->size() != A_.cols()) {
      throw Error(ErrorCode::kInvalidArgument, "instance: ground truth has wrong length");
    }
    require_finite(*ground_truth_, "instance ground truth");
  }
}

double ProblemInstance::residual_norm(const VectorRef& x) const {
  return (A_ * x - b_).norm();
}

void SparsityProfile::validate(Eigen::Index n) const {
  if (k < 1 || static_cast<std::size_t>(k) != support.size()) {
    throw Error(ErrorCode::kInvalidArgument, "sparsity profile: card(support) != k");
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= n) {
      throw Error(ErrorCode::kInvalidArgument, "sparsity profile: support index out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (support[i] == support[j]) {
        throw Error(ErrorCode::kInvalidArgument, "sparsity profile: duplicate support index");
      }
    }
  }
  if (!(low > 0.0) || low > high) {
    throw Error(ErrorCode::kInvalidArgument, "sparsity profile: need 0 < low <= high");
  }
}

SparsityProfile SparsityProfile::of(const VectorRef& x) {
  SparsityProfile out;
  out.low = std::numeric_limits<double>::infinity();
  out.high = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      out.support.push_back(i);
      out.low = std::min(out.low, std::abs(x[i]));
      out.high = std::max(out.high, std::abs(x[i]));
    }
  }
  out.k = static_cast<int>(out.support.size());
  return out;
}

double lp_norm_pow(const VectorRef& x, double p) {
  if (!(p > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lp_norm_pow: p must be positive");
  }
  require_finite(x, "lp_norm_pow");
  if (p == 1.0) return x.lpNorm<1>();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) acc += std::pow(std::abs(x[i]), p);
  }
  return acc;
}

double lq_norm(const VectorRef& x, double q) {
  require_finite(x, "lq_norm");
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    acc += std::pow(std::abs(x[i]) / scale, q);
  }
  return scale * std::pow(acc, 1.0 / q);
}

double ratio_objective(const VectorRef& x, const RatioParams& params) {
  require_finite(x, "ratio_objective");
  if (x.size() == 0 || x.norm() < 1e-300) {
    throw Error(ErrorCode::kDomain, "ratio_objective: zero vector");
  }
  // Evaluated on x / ||x||_inf; the ratio is scale invariant.
  const double scale = x.cwiseAbs().maxCoeff();
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) / scale;
    if (a == 0.0) continue;
    num += std::pow(a, params.p());
    den += std::pow(a, params.q());
  }
  return num / std::pow(den, params.p() / params.q());
}

std::vector<Eigen::Index> top_k_indices(const VectorRef& x, Eigen::Index k) {
  if (k < 1 || k > x.size()) {
    throw Error(ErrorCode::kInvalidArgument, "best_k_split: k out of range");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      const double ma = std::abs(x[a]);
                      const double mb = std::abs(x[b]);
                      return ma > mb || (ma == mb && a < b);
                    });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

BestKSplit best_k_split(const VectorRef& x, Eigen::Index k) {
  require_finite(x, "best_k_split");
  BestKSplit out{Vector::Zero(x.size()), x};
  for (Eigen::Index i : top_k_indices(x, k)) {
    out.head[i] = x[i];
    out.tail[i] = 0.0;
  }
  return out;
}

}  // namespace ratiosparse

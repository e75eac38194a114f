#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ratiosparse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Vector>;
using MatrixRef = Eigen::Ref<const Matrix>;

enum class ErrorCode {
  kInvalidArgument = 1,
  kDomain,
  kInfeasible,
  kIo,
  kParse,
  kNotApplicable,
  kNotConverged,
  kInternal,
};

/// Library exception. Every error raised by ratiosparse carries a code so the
/// C API can map it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Exponent pair of the ratio objective ||x||_p^p / ||x||_q^p.
/// Requires 0 < p <= 1 and q > 1.
class RatioParams {
 public:
  RatioParams(double p, double q);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

  /// Largest value the ratio can take in dimension n, n^(1 - p/q).
  double max_ratio(Eigen::Index n) const;

 private:
  double p_;
  double q_;
};

/// Noiseless or noisy observation model b = A x + e with ||e||_2 <= noise_radius.
/// Immutable once constructed.
class ProblemInstance {
 public:
  ProblemInstance(Matrix A, Vector b, std::optional<Vector> ground_truth = {},
                  double noise_radius = 0.0, std::string id = {});

  const Matrix& A() const noexcept { return A_; }
  const Vector& b() const noexcept { return b_; }
  const std::optional<Vector>& ground_truth() const noexcept { return ground_truth_; }
  double noise_radius() const noexcept { return noise_radius_; }
  const std::string& id() const noexcept { return id_; }

  Eigen::Index rows() const noexcept { return A_.rows(); }
  Eigen::Index cols() const noexcept { return A_.cols(); }

  /// ||A x - b||_2.
  double residual_norm(const VectorRef& x) const;

 private:
  Matrix A_;
  Vector b_;
  std::optional<Vector> ground_truth_;
  double noise_radius_;
  std::string id_;
};

/// Support and magnitude range of a planted sparse signal.
struct SparsityProfile {
  int k = 1;
  std::vector<Eigen::Index> support;
  double low = 1.0;
  double high = 1.0;

  void validate(Eigen::Index n) const;

  /// Profile of the nonzero pattern of x (range is min/max nonzero magnitude).
  static SparsityProfile of(const VectorRef& x);
};

/// sum_i |x_i|^p, the p-th power of the l_p (quasi-)norm.
double lp_norm_pow(const VectorRef& x, double p);

/// (sum_i |x_i|^q)^(1/q).
double lq_norm(const VectorRef& x, double q);

/// ||x||_p^p / ||x||_q^p. Lies in [1, n^(1-p/q)] for nonzero x.
double ratio_objective(const VectorRef& x, const RatioParams& params);

struct BestKSplit {
  Vector head;
  Vector tail;
};

/// Splits x into its k largest-magnitude entries and the remainder.
/// Ties are broken towards the lower index.
BestKSplit best_k_split(const VectorRef& x, Eigen::Index k);

/// Indices of the k largest magnitudes, ordered by decreasing magnitude.
std::vector<Eigen::Index> top_k_indices(const VectorRef& x, Eigen::Index k);

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace ratiosparse

#pragma once

#include "ratiosparse/core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>

namespace ratiosparse {

enum class MatrixKind { kCorrelatedGaussian, kOversampledDct };
std::string to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(const std::string& name);

struct MatrixSpec {
  MatrixKind kind = MatrixKind::kCorrelatedGaussian;
  Eigen::Index m = 64;
  Eigen::Index n = 256;
  double r = 0.0;  ///< row correlation, Gaussian kind
  double F = 1.0;  ///< oversampling factor, DCT kind
  std::uint64_t seed = 0;

  void validate() const;
};

struct SignalSpec {
  Eigen::Index n = 256;
  int k = 1;
  double mag_low = 1.0;
  double mag_high = 1.0;
  Eigen::Index min_separation = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic stream for one seed. Produces the same sequence with any
/// standard library (mt19937_64 plus explicit transforms).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  double uniform();                          ///< [0, 1) with 53 random bits
  double normal();                           ///< standard normal (polar method)
  std::uint64_t below(std::uint64_t bound);  ///< uniform on [0, bound)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Mixes a base seed with indices into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

/// Correlated Gaussian: rows ~ N(0, (1-r) I + r 11^T).
/// Oversampled DCT: A_ij = cos(2 pi w_i j / F) / sqrt(m), j = 1..n, w_i ~ U[0, 1].
Matrix gen_matrix(const MatrixSpec& spec);

/// k-sparse vector: support uniform subject to pairwise index gaps of at
/// least min_separation (linear distance), magnitudes 10^U with U uniform on
/// [log10 mag_low, log10 mag_high], independent random signs.
Vector gen_signal(const SignalSpec& spec);

/// Noiseless instance b = A x*.
ProblemInstance gen_instance(const MatrixSpec& mspec, const SignalSpec& sspec);

/// Experiment protocol presets: Gaussian magnitudes in [1, 1e3] with no
/// separation; DCT magnitudes in [1, 1e5] with separation 2F.
std::pair<MatrixSpec, SignalSpec> gaussian_protocol(Eigen::Index m, Eigen::Index n, double r, int k,
                                                    std::uint64_t seed);
std::pair<MatrixSpec, SignalSpec> dct_protocol(Eigen::Index m, Eigen::Index n, double F, int k,
                                               std::uint64_t seed);

/// JSON objects. Missing fields keep the values already in `base`.
MatrixSpec parse_matrix_spec(const std::string& json_text, MatrixSpec base = {});
SignalSpec parse_signal_spec(const std::string& json_text, SignalSpec base = {});
std::string to_json(const MatrixSpec& spec);
std::string to_json(const SignalSpec& spec);

}  // namespace ratiosparse

#include "ratiosparse/datagen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

namespace ratiosparse {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json parse_object(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, std::string(what) + ": expected an object");
  return j;
}

}  // namespace

std::string to_string(MatrixKind kind) {
  return kind == MatrixKind::kCorrelatedGaussian ? "correlated_gaussian" : "oversampled_dct";
}

MatrixKind matrix_kind_from_string(const std::string& name) {
  if (name == "correlated_gaussian") return MatrixKind::kCorrelatedGaussian;
  if (name == "oversampled_dct") return MatrixKind::kOversampledDct;
  throw Error(ErrorCode::kParse, "unknown matrix kind '" + name + "'");
}

void MatrixSpec::validate() const {
  if (m < 1 || n < m) throw Error(ErrorCode::kInvalidArgument, "matrix spec: need 1 <= m <= n");
  if (kind == MatrixKind::kCorrelatedGaussian && !(r >= 0.0 && r < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "matrix spec: r must lie in [0, 1)");
  }
  if (kind == MatrixKind::kOversampledDct && !(F > 0.0 && std::isfinite(F))) {
    throw Error(ErrorCode::kInvalidArgument, "matrix spec: F must be positive");
  }
}

void SignalSpec::validate() const {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "signal spec: n must be positive");
  if (k < 1 || k > n) throw Error(ErrorCode::kInvalidArgument, "signal spec: need 1 <= k <= n");
  if (!(mag_low > 0.0) || !(mag_high >= mag_low) || !std::isfinite(mag_high)) {
    throw Error(ErrorCode::kInvalidArgument, "signal spec: need 0 < mag_low <= mag_high");
  }
  if (min_separation < 0) throw Error(ErrorCode::kInvalidArgument, "signal spec: negative separation");
  if (static_cast<Eigen::Index>(k) * std::max<Eigen::Index>(1, min_separation) > n) {
    throw Error(ErrorCode::kInvalidArgument, "signal spec: k * min_separation exceeds n");
  }
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::kInvalidArgument, "Rng::below: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(base);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

Matrix gen_matrix(const MatrixSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Matrix A(spec.m, spec.n);
  const double nd = static_cast<double>(spec.n);
  if (spec.kind == MatrixKind::kCorrelatedGaussian) {
    // (1-r) I + r 11^T = S^2 with S = sqrt(1-r) I + c 11^T.
    const double a = std::sqrt(1.0 - spec.r);
    const double c = (std::sqrt(1.0 - spec.r + spec.r * nd) - a) / nd;
    Vector z(spec.n);
    for (Eigen::Index i = 0; i < spec.m; ++i) {
      for (Eigen::Index j = 0; j < spec.n; ++j) z[j] = rng.normal();
      A.row(i) = (a * z.array() + c * z.sum()).matrix().transpose();
    }
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.m));
    for (Eigen::Index i = 0; i < spec.m; ++i) {
      const double w = rng.uniform();
      for (Eigen::Index j = 0; j < spec.n; ++j) {
        A(i, j) = scale * std::cos(2.0 * std::numbers::pi * w * static_cast<double>(j + 1) / spec.F);
      }
    }
  }
  return A;
}

Vector gen_signal(const SignalSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Eigen::Index gap = std::max<Eigen::Index>(1, spec.min_separation);
  // Sorted k-subset of [0, slots), then spread by (gap - 1) per rank.
  const auto slots = static_cast<std::uint64_t>(spec.n - (spec.k - 1) * (gap - 1));
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = slots - static_cast<std::uint64_t>(spec.k); j < slots; ++j) {
    const std::uint64_t v = rng.below(j + 1);
    if (!chosen.insert(v).second) chosen.insert(j);
  }
  const double lo = std::log10(spec.mag_low);
  const double hi = std::log10(spec.mag_high);
  Vector x = Vector::Zero(spec.n);
  Eigen::Index rank = 0;
  for (const auto v : chosen) {
    const auto idx = static_cast<Eigen::Index>(v) + rank * (gap - 1);
    ++rank;
    const double mag = spec.mag_low == spec.mag_high ? spec.mag_low : std::pow(10.0, lo + (hi - lo) * rng.uniform());
    x[idx] = (rng.bits() >> 63) ? -mag : mag;
  }
  return x;
}

ProblemInstance gen_instance(const MatrixSpec& mspec, const SignalSpec& sspec) {
  if (mspec.n != sspec.n) throw Error(ErrorCode::kInvalidArgument, "gen_instance: dimension mismatch");
  Matrix A = gen_matrix(mspec);
  Vector x = gen_signal(sspec);
  Vector b = A * x;
  std::string id = to_string(mspec.kind) + "-m" + std::to_string(mspec.m) + "-n" + std::to_string(mspec.n) +
                   "-k" + std::to_string(sspec.k) + "-s" + std::to_string(mspec.seed) + "-" +
                   std::to_string(sspec.seed);
  return ProblemInstance(std::move(A), std::move(b), std::move(x), 0.0, std::move(id));
}

std::pair<MatrixSpec, SignalSpec> gaussian_protocol(Eigen::Index m, Eigen::Index n, double r, int k,
                                                    std::uint64_t seed) {
  MatrixSpec ms{MatrixKind::kCorrelatedGaussian, m, n, r, 1.0, derive_seed(seed, 0)};
  SignalSpec ss{n, k, 1.0, 1e3, 0, derive_seed(seed, 1)};
  return {ms, ss};
}

std::pair<MatrixSpec, SignalSpec> dct_protocol(Eigen::Index m, Eigen::Index n, double F, int k,
                                               std::uint64_t seed) {
  MatrixSpec ms{MatrixKind::kOversampledDct, m, n, 0.0, F, derive_seed(seed, 0)};
  SignalSpec ss{n, k, 1.0, 1e5, static_cast<Eigen::Index>(std::ceil(2.0 * F)), derive_seed(seed, 1)};
  return {ms, ss};
}

MatrixSpec parse_matrix_spec(const std::string& json_text, MatrixSpec base) {
  const json j = parse_object(json_text, "matrix spec");
  try {
    if (j.contains("kind")) base.kind = matrix_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("m")) base.m = j.at("m").get<Eigen::Index>();
    if (j.contains("n")) base.n = j.at("n").get<Eigen::Index>();
    if (j.contains("r")) base.r = j.at("r").get<double>();
    if (j.contains("F")) base.F = j.at("F").get<double>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("matrix spec: ") + e.what());
  }
  return base;
}

SignalSpec parse_signal_spec(const std::string& json_text, SignalSpec base) {
  const json j = parse_object(json_text, "signal spec");
  try {
    if (j.contains("n")) base.n = j.at("n").get<Eigen::Index>();
    if (j.contains("k")) base.k = j.at("k").get<int>();
    if (j.contains("mag_low")) base.mag_low = j.at("mag_low").get<double>();
    if (j.contains("mag_high")) base.mag_high = j.at("mag_high").get<double>();
    if (j.contains("min_separation")) base.min_separation = j.at("min_separation").get<Eigen::Index>();
    if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("signal spec: ") + e.what());
  }
  return base;
}

std::string to_json(const MatrixSpec& spec) {
  json j{{"kind", to_string(spec.kind)}, {"m", spec.m}, {"n", spec.n}, {"seed", spec.seed}};
  if (spec.kind == MatrixKind::kCorrelatedGaussian) {
    j["r"] = spec.r;
  } else {
    j["F"] = spec.F;
  }
  return j.dump();
}

std::string to_json(const SignalSpec& spec) {
  return json{{"n", spec.n},
              {"k", spec.k},
              {"mag_low", spec.mag_low},
              {"mag_high", spec.mag_high},
              {"min_separation", spec.min_separation},
              {"seed", spec.seed}}
      .dump();
}

}  // namespace ratiosparse

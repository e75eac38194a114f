#include "ratiosparse/theory.hpp"

#include "ratiosparse/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace ratiosparse {

namespace {

using nlohmann::json;

double kd(int k) { return static_cast<double>(k); }

double ratio_pq(const VectorRef& h, const RatioParams& params) {
  return std::pow(ratio_objective(h, params), 1.0 / params.p());
}

}  // namespace

void TheoryInput::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (t < 1) throw Error(ErrorCode::kInvalidArgument, "t must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  for (double d : {delta_2k, delta_k, delta_kt}) {
    if (!(d >= 0.0 && d < 1.0)) throw Error(ErrorCode::kInvalidArgument, "RIC values must lie in [0, 1)");
  }
  if (!(theta_kt >= 0.0) || !std::isfinite(theta_kt)) {
    throw Error(ErrorCode::kInvalidArgument, "theta_kt must be nonnegative");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be nonnegative");
  }
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "n must be nonnegative");
}

double worst_case_beta(const RatioParams& params, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  return std::pow(kd(k), 1.0 / params.p() - 1.0 / params.q());
}

double gnrc(const VectorRef& x, const RatioParams& params) {
  const double inf = x.cwiseAbs().maxCoeff();
  if (!(inf > 0.0)) throw Error(ErrorCode::kDomain, "gnrc: zero vector");
  const Vector u = x / inf;
  return lp_norm_pow(u, params.p()) / lp_norm_pow(u, params.q());
}

double uniform_gnrc_root(double q, int s) {
  if (!(q > 1.0)) throw Error(ErrorCode::kInvalidArgument, "q must exceed 1");
  if (s < 1) throw Error(ErrorCode::kInvalidArgument, "s must be >= 1");
  if (s == 1) return 1.0;
  const double c = (q - 1.0) * (s - 1);
  const auto H = [&](double v) { return c * std::pow(v, q) + q * std::pow(v, q - 1.0) - 1.0; };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (H(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

double uniform_gnrc_bound(double q, int s) {
  if (s == 1) {
    uniform_gnrc_root(q, s);
    return 1.0;
  }
  const double x = uniform_gnrc_root(q, s);
  return (1.0 + (s - 1) * x) / (1.0 + (s - 1) * std::pow(x, q));
}

double local_optimality_mu_threshold(const VectorRef& x0, const RatioParams& params) {
  if (params.p() < 1.0) {
    gnrc(x0, params);
    return 1.0;
  }
  return 1.0 / (1.0 + gnrc(x0, RatioParams(1.0, params.q())));
}

double fpq_value(double z, const TheoryInput& input) {
  const double p = input.params.p();
  const double q = input.params.q();
  const double a = std::pow(input.beta, p) * std::pow(kd(input.k), -(q - p) / q);
  return std::pow(z, q) - a * std::pow(z, p) - a - 1.0;
}

ZeroPointResult fpq_zero(const TheoryInput& input) {
  input.validate();
  const double p = input.params.p();
  const double q = input.params.q();
  const double bp = std::pow(input.beta, p);
  const double a = bp * std::pow(kd(input.k), -(q - p) / q);
  ZeroPointResult out;
  out.bracket_low = std::pow(kd(input.k) * q, -1.0 / q) * std::pow(p * bp, 1.0 / (q - p));
  out.bracket_high = std::pow(1.0 + a, 2.0 / (q - p));
  const auto f = [&](double z) { return fpq_value(z, input); };
  double lo = out.bracket_low;
  double hi = out.bracket_high;
  if (!(lo < hi) || !(f(lo) < 0.0) || !(f(hi) > 0.0)) {
    throw Error(ErrorCode::kInternal, "fpq_zero: bracket does not enclose the root");
  }
  for (int it = 0; it < 400 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double d = q * std::pow(z, q - 1.0) - a * p * std::pow(z, p - 1.0);
    const double next = z - f(z) / d;
    if (std::isfinite(next) && next > out.bracket_low && next < out.bracket_high &&
        std::abs(f(next)) <= std::abs(f(z))) {
      z = next;
    }
  }
  out.z0 = z;
  out.residual = std::abs(f(z));
  return out;
}

RicThreshold ric_threshold_new(const TheoryInput& input) {
  const double p = input.params.p();
  const double q = input.params.q();
  const double k = kd(input.k);
  RicThreshold out;
  out.z0 = fpq_zero(input).z0;
  out.psi = std::pow(input.beta, p) * (1.0 + std::pow(out.z0, p)) + std::pow(k, (q - p) / q);
  out.t = std::pow(k, 2.0 / std::min(q, 2.0) - (2.0 * q + 2.0 - 2.0 * p) / q) * out.psi * out.psi;
  out.delta = 1.0 / std::sqrt(1.0 + out.t);
  return out;
}

RicThreshold ric_threshold_zhu(const TheoryInput& input) {
  const double p = input.params.p();
  const double q = input.params.q();
  const double k = kd(input.k);
  RicThreshold out;
  out.z0 = fpq_zero(input).z0;
  const double inner = input.beta * (1.0 + out.z0) * std::pow(k, -1.0 / p) + std::pow(k, -1.0 / q);
  out.t = std::pow(3.0, 2.0 - 2.0 * p) * std::pow(k, 2.0 / std::min(q, 2.0) - (2.0 - 2.0 * p) / q) *
          std::pow(inner, 2.0 * p);
  out.delta = 1.0 / std::sqrt(1.0 + out.t);
  return out;
}

namespace {

double error_bound(const TheoryInput& input, double psi, double t_term, const char* name) {
  const double p = input.params.p();
  const double q = input.params.q();
  const double k = kd(input.k);
  const double denom = 1.0 - input.delta_2k * std::sqrt(1.0 + t_term);
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kNotApplicable, std::string(name) + ": delta_2k is not below the threshold");
  }
  const double num = 2.0 * input.epsilon * std::sqrt(1.0 + input.delta_2k) *
                     (1.0 + std::pow(k, 1.0 / std::min(q, 2.0) - (2.0 - p + q) / (2.0 * q)) * std::sqrt(psi));
  return num / denom;
}

}  // namespace

double error_bound_new(const TheoryInput& input) {
  const RicThreshold r = ric_threshold_new(input);
  return error_bound(input, r.psi, r.t, "error_bound_new");
}

double error_bound_zhu(const TheoryInput& input) {
  const RicThreshold n = ric_threshold_new(input);
  const RicThreshold z = ric_threshold_zhu(input);
  return error_bound(input, n.psi, z.t, "error_bound_zhu");
}

T6Constants t6_constants(const TheoryInput& input) {
  input.validate();
  const double p = input.params.p();
  const double q = input.params.q();
  const double k = kd(input.k);
  const double t = kd(input.t);
  T6Constants c;
  c.a_p = std::pow(3.0, (1.0 - p) / p);
  c.vartheta_q = std::max(1.0 / q - 0.5, 0.0);
  c.eta = c.a_p * input.beta * std::pow(k, (p - 1.0) / p) * std::pow(t, c.vartheta_q - 0.5);
  c.eta_ok = c.eta < 1.0;
  const double numer = c.a_p * std::sqrt(k / t) + 0.25 * std::sqrt(t / k) +
                       c.a_p * input.beta * std::pow(k, (p - 1.0) / p + c.vartheta_q) / std::sqrt(t);
  c.tau = c.eta_ok ? numer / (1.0 - c.eta) : std::numeric_limits<double>::infinity();
  c.psi = c.eta_ok ? input.delta_k + c.tau * input.theta_kt : std::numeric_limits<double>::infinity();
  c.psi_ok = c.eta_ok && c.psi < 1.0;
  if (c.applicable()) {
    const double cp = c.a_p * std::pow(2.0, 1.0 / p) * std::pow(k, (p - 1.0) / p) / std::sqrt(t);
    c.c1 = cp * (1.0 - input.delta_k + input.theta_kt) / ((1.0 - c.eta) * (1.0 - c.psi));
    c.c2 = 2.0 * (1.0 + c.tau) * std::sqrt(1.0 + input.delta_k) / (1.0 - c.psi);
  }
  return c;
}

T6RipConstants t6rip_constants(const TheoryInput& input) {
  input.validate();
  const double p = input.params.p();
  const double q = input.params.q();
  const double k = kd(input.k);
  const double t = kd(input.t);
  T6RipConstants c;
  c.a_p = std::pow(3.0, (1.0 - p) / p);
  c.vartheta_q = std::max(1.0 / q - 0.5, 0.0);
  c.rho_p = c.a_p * std::sqrt(k / t) + 0.25 * std::sqrt(t / k);
  c.alpha_pq = c.a_p * input.beta * std::pow(k, (p - 1.0) / p + c.vartheta_q) / std::sqrt(t);
  c.eta = c.a_p * input.beta * std::pow(k, (p - 1.0) / p) * std::pow(t, c.vartheta_q - 0.5);
  c.c_p = c.a_p * std::pow(2.0, 1.0 / p) * std::pow(k, (p - 1.0) / p) / std::sqrt(t);
  c.eta_ok = c.eta < 1.0;
  c.tau = c.eta_ok ? (c.rho_p + c.alpha_pq) / (1.0 - c.eta) : std::numeric_limits<double>::infinity();
  c.psi = c.eta_ok ? input.delta_k + input.delta_kt * c.tau : std::numeric_limits<double>::infinity();
  c.psi_ok = c.eta_ok && c.psi < 1.0;
  if (c.applicable()) {
    c.c1 = c.c_p / (1.0 - c.eta) * (1.0 + (1.0 + c.tau) * input.delta_kt / (1.0 - c.psi));
    c.c2 = 2.0 * (1.0 + c.tau) * std::sqrt(1.0 + input.delta_k) / (1.0 - c.psi);
  }
  return c;
}

BoundReport bound_report(const TheoryInput& input) {
  input.validate();
  BoundReport r;
  const RicThreshold nw = ric_threshold_new(input);
  const RicThreshold zh = ric_threshold_zhu(input);
  r.z0 = nw.z0;
  r.psi = nw.psi;
  r.t1 = zh.t;
  r.t2 = nw.t;
  r.delta_new = nw.delta;
  r.delta_zhu = zh.delta;
  if (input.delta_2k < r.delta_new) r.b_o = error_bound(input, nw.psi, nw.t, "error_bound_new");
  if (input.delta_2k < r.delta_zhu) r.b_z = error_bound(input, nw.psi, zh.t, "error_bound_zhu");
  const bool block_ok = input.n == 0 || (input.k < input.n && input.t <= input.n - input.k);
  if (block_ok) {
    r.t6 = t6_constants(input);
    r.t6rip = t6rip_constants(input);
  }
  return r;
}

double exact_ric(const MatrixRef& A, int s) {
  const Eigen::Index n = A.cols();
  if (s < 1 || s > n) throw Error(ErrorCode::kInvalidArgument, "exact_ric: s must lie in [1, n]");
  double count = 1.0;
  for (int i = 0; i < s; ++i) count = count * static_cast<double>(n - i) / (i + 1);
  if (count > 1e6 + 0.5) {
    throw Error(ErrorCode::kInvalidArgument, "exact_ric: C(n, s) exceeds the 1e6 enumeration guard");
  }
  const Matrix gram = A.transpose() * A;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(s));
  std::iota(idx.begin(), idx.end(), 0);
  Matrix sub(s, s);
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  double delta = 0.0;
  while (true) {
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) sub(i, j) = gram(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    eig.compute(sub, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    delta = std::max({delta, ev[s - 1] - 1.0, 1.0 - ev[0]});
    int i = s - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return delta;
}

NullspaceEstimate nullspace_ratio_estimate(const MatrixRef& A, const RatioParams& params, int restarts,
                                           std::uint64_t seed) {
  if (restarts < 1) throw Error(ErrorCode::kInvalidArgument, "restarts must be positive");
  const Eigen::Index n = A.cols();
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double cutoff = 1e-12 * (sv.size() ? sv[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv[i] > cutoff;
  const Eigen::Index dim = n - rank;
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "nullspace_ratio_estimate: trivial kernel");
  const Matrix N = svd.matrixV().rightCols(dim);

  NullspaceEstimate out;
  out.kernel_dim = dim;
  if (dim == 1) {
    out.estimate = ratio_pq(N.col(0), params);
    out.certified = true;
    return out;
  }

  const double p = params.p();
  const double q = params.q();
  const auto value = [&](const Vector& w) { return ratio_pq(N * w, params); };
  const auto gradient = [&](const Vector& w) {
    const Vector h = N * w;
    const double P = lp_norm_pow(h, p);
    const double Q = lp_norm_pow(h, q);
    Vector g(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      const double a = std::abs(h[i]);
      g[i] = a == 0.0 ? 0.0 : sign(h[i]) * (std::pow(a, p - 1.0) / P - std::pow(a, q - 1.0) / Q);
    }
    Vector gw = N.transpose() * g;
    return Vector(gw - gw.dot(w) * w);
  };

  // Starting points: kernel projections of the coordinate vectors with the
  // largest projections, then random directions.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Vector row_norms = N.rowwise().norm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return row_norms[a] > row_norms[b]; });
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Vector w(dim);
    if (r < restarts / 2 && r < n && row_norms[order[static_cast<std::size_t>(r)]] > 1e-12) {
      w = N.row(order[static_cast<std::size_t>(r)]).transpose();
    } else {
      for (Eigen::Index i = 0; i < dim; ++i) w[i] = normal(rng);
    }
    w.normalize();
    double f = value(w);
    double step = 1.0;
    for (int it = 0; it < 100; ++it) {
      const Vector g = gradient(w);
      const double gn = g.norm();
      if (!(gn > 1e-14)) break;
      bool moved = false;
      for (step = std::min(1.0, 4.0 * step); step > 1e-12; step *= 0.5) {
        Vector trial = w - step * g / gn;
        trial.normalize();
        const double ft = value(trial);
        if (ft < f) {
          w = trial;
          f = ft;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    best = std::min(best, f);
  }
  out.estimate = best;
  return out;
}

std::string to_string(RecoveryCondition c) {
  switch (c) {
    case RecoveryCondition::kSatisfiedCertified: return "satisfied_certified";
    case RecoveryCondition::kViolated: return "violated";
    case RecoveryCondition::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

RecoveryCheck check_uniform_recovery_condition(const MatrixRef& A, const RatioParams& params, int s,
                                               int restarts) {
  if (s < 1) throw Error(ErrorCode::kInvalidArgument, "s must be >= 1");
  const NullspaceEstimate est = nullspace_ratio_estimate(A, params, restarts);
  RecoveryCheck out;
  out.estimate = est.estimate;
  out.certified = est.certified;
  out.threshold = std::pow(3.0, 1.0 / params.p()) * std::pow(kd(s), 1.0 / params.p() - 1.0 / params.q());
  if (est.estimate <= out.threshold) {
    out.status = RecoveryCondition::kViolated;
  } else if (est.certified) {
    out.status = RecoveryCondition::kSatisfiedCertified;
  } else {
    out.status = RecoveryCondition::kInconclusive;
  }
  return out;
}

std::size_t TheoryGrid::size() const {
  return p.size() * q.size() * k.size() * std::max<std::size_t>(t.size(), 1) * beta.size() *
         delta_2k.size() * delta_k.size() * delta_kt.size() * theta_kt.size() * epsilon.size();
}

namespace {

template <typename T>
std::vector<T> as_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

template <typename Choice>
std::vector<Choice> choice_list(const json& j, const char* key, const char* word) {
  std::vector<Choice> out;
  const auto one = [&](const json& v) {
    if (v.is_number()) {
      out.emplace_back(v.get<double>());
    } else if (v.is_string() && v.get<std::string>() == word) {
      out.emplace_back(v.get<std::string>());
    } else {
      throw Error(ErrorCode::kParse, std::string("theory grid: ") + key + " must be a number or \"" + word + "\"");
    }
  };
  if (j.is_array()) {
    for (const auto& v : j) one(v);
  } else {
    one(j);
  }
  return out;
}

}  // namespace

TheoryGrid parse_theory_grid(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("theory grid: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "theory grid: expected an object");
  TheoryGrid g;
  try {
    for (const char* key : {"p", "q", "k"}) {
      if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("theory grid: missing ") + key);
    }
    g.p = as_list<double>(j.at("p"));
    g.q = as_list<double>(j.at("q"));
    g.k = as_list<int>(j.at("k"));
    if (j.contains("t")) g.t = as_list<int>(j.at("t"));
    g.beta = j.contains("beta") ? choice_list<BetaChoice>(j.at("beta"), "beta", "worst")
                                : std::vector<BetaChoice>{1.0};
    g.delta_2k = j.contains("delta_2k") ? choice_list<DeltaChoice>(j.at("delta_2k"), "delta_2k", "auto")
                                        : std::vector<DeltaChoice>{std::string("auto")};
    if (j.contains("delta_k")) g.delta_k = as_list<double>(j.at("delta_k"));
    if (j.contains("delta_kt")) g.delta_kt = as_list<double>(j.at("delta_kt"));
    if (j.contains("theta_kt")) g.theta_kt = as_list<double>(j.at("theta_kt"));
    if (j.contains("epsilon")) g.epsilon = as_list<double>(j.at("epsilon"));
    if (j.contains("n")) g.n = j.at("n").get<Eigen::Index>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("theory grid: ") + e.what());
  }
  if (g.size() == 0) throw Error(ErrorCode::kParse, "theory grid: empty axis");
  return g;
}

TheoryGrid default_sweep_grid() {
  TheoryGrid g;
  g.p = {0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  g.q = {1.2, 1.6, 2.0, 2.5, 3.0};
  g.k = {1, 4, 16};
  g.beta = {1.0, std::string("worst")};
  g.delta_2k = {std::string("auto")};
  return g;
}

std::vector<TheoryRow> run_theory_grid(const TheoryGrid& grid) {
  if (grid.size() == 0) throw Error(ErrorCode::kInvalidArgument, "theory grid: empty axis");
  std::vector<TheoryRow> rows;
  rows.reserve(grid.size());
  for (double p : grid.p) {
    for (double q : grid.q) {
      const RatioParams params(p, q);
      for (int k : grid.k) {
        const std::vector<int> ts = grid.t.empty() ? std::vector<int>{k} : grid.t;
        for (int t : ts) {
          for (const auto& bc : grid.beta) {
            const double beta = std::holds_alternative<double>(bc) ? std::get<double>(bc)
                                                                   : worst_case_beta(params, k);
            for (const auto& dc : grid.delta_2k) {
              for (double dk : grid.delta_k) {
                for (double dkt : grid.delta_kt) {
                  for (double th : grid.theta_kt) {
                    for (double eps : grid.epsilon) {
                      TheoryInput in;
                      in.params = params;
                      in.k = k;
                      in.t = t;
                      in.beta = beta;
                      in.delta_k = dk;
                      in.delta_kt = dkt;
                      in.theta_kt = th;
                      in.epsilon = eps;
                      in.n = grid.n;
                      if (std::holds_alternative<double>(dc)) {
                        in.delta_2k = std::get<double>(dc);
                      } else {
                        const BoundReport pre = bound_report(in);
                        in.delta_2k = 0.9 * std::min(pre.delta_new, pre.delta_zhu);
                      }
                      rows.push_back({in, bound_report(in)});
                    }
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return rows;
}

void write_theory_csv(std::ostream& os, const std::vector<TheoryRow>& rows) {
  os << "p,q,k,t,beta,delta_2k,delta_k,delta_kt,theta_kt,epsilon,z0,psi,T1,T2,delta_new,delta_zhu,"
        "b_o,b_z,b_o_applicable,b_z_applicable,"
        "t6_eta,t6_tau,t6_psi,t6_c1,t6_c2,t6_applicable,"
        "t6rip_rho,t6rip_alpha,t6rip_eta,t6rip_tau,t6rip_psi,t6rip_cp,t6rip_c1,t6rip_c2,t6rip_applicable\n";
  const auto num = [&](double v) { os << ',' << io::format_double(v); };
  const auto opt = [&](const std::optional<double>& v) {
    os << ',';
    if (v) os << io::format_double(*v);
  };
  const auto flag = [&](bool b) { os << ',' << (b ? 1 : 0); };
  for (const auto& row : rows) {
    const auto& in = row.input;
    const auto& r = row.report;
    os << io::format_double(in.params.p());
    num(in.params.q());
    os << ',' << in.k << ',' << in.t;
    num(in.beta);
    num(in.delta_2k);
    num(in.delta_k);
    num(in.delta_kt);
    num(in.theta_kt);
    num(in.epsilon);
    num(r.z0);
    num(r.psi);
    num(r.t1);
    num(r.t2);
    num(r.delta_new);
    num(r.delta_zhu);
    opt(r.b_o);
    opt(r.b_z);
    flag(r.b_o.has_value());
    flag(r.b_z.has_value());
    if (r.t6) {
      num(r.t6->eta);
      opt(r.t6->eta_ok ? std::optional<double>(r.t6->tau) : std::nullopt);
      opt(r.t6->eta_ok ? std::optional<double>(r.t6->psi) : std::nullopt);
      opt(r.t6->c1);
      opt(r.t6->c2);
      flag(r.t6->applicable());
    } else {
      os << ",,,,,,0";
    }
    if (r.t6rip) {
      num(r.t6rip->rho_p);
      num(r.t6rip->alpha_pq);
      num(r.t6rip->eta);
      opt(r.t6rip->eta_ok ? std::optional<double>(r.t6rip->tau) : std::nullopt);
      opt(r.t6rip->eta_ok ? std::optional<double>(r.t6rip->psi) : std::nullopt);
      num(r.t6rip->c_p);
      opt(r.t6rip->c1);
      opt(r.t6rip->c2);
      flag(r.t6rip->applicable());
    } else {
      os << ",,,,,,,,,0";
    }
    os << '\n';
  }
}

}  // namespace ratiosparse

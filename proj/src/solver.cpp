#include "ratiosparse/solver.hpp"

#include "ratiosparse/prox.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>

namespace ratiosparse {

namespace {

constexpr double kBetaCap = 1e12;

// Basis pursuit converges faster under a gentler penalty schedule than the
// nonconvex subproblems.
constexpr double kL1RhoGrowth = 1.01;
constexpr double kL1RhoMax = 100.0;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

// Feasibility margin used when choosing candidates, tighter than the reported
// tolerance so rounding in the rescaling cannot push a point over it.
constexpr double kCandidateFeasFactor = 1e-9;

struct Candidate {
  Vector x;
  double objective;
};

enum class Completion { kByMagnitude, kByCorrelation };

// Feasible point supported on supp(y): least squares on those columns, and
// while the fit is not exact one more column joins the support (at most m).
// The new column is the largest remaining |x_i|, or the column most
// correlated with the current residual. Supports wider than m keep the m
// largest |y|.
std::optional<Vector> restore_on_support(const Matrix& A, const VectorRef& b, const VectorRef& y,
                                         const VectorRef& x, double feas_tol, Completion rule) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0) support.push_back(i);
  }
  if (static_cast<Eigen::Index>(support.size()) > m) support = top_k_indices(y, m);
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (auto i : support) in[static_cast<std::size_t>(i)] = 1;

  Vector residual = b;
  while (true) {
    if (!support.empty()) {
      Matrix As(m, static_cast<Eigen::Index>(support.size()));
      for (std::size_t j = 0; j < support.size(); ++j) As.col(static_cast<Eigen::Index>(j)) = A.col(support[j]);
      const Vector z = Eigen::ColPivHouseholderQR<Matrix>(As).solve(b);
      if (!z.allFinite()) return std::nullopt;
      residual = b - As * z;
      if (residual.norm() <= feas_tol) {
        Vector out = Vector::Zero(n);
        for (std::size_t j = 0; j < support.size(); ++j) out[support[j]] = z[static_cast<Eigen::Index>(j)];
        return out;
      }
    }
    if (static_cast<Eigen::Index>(support.size()) >= m) return std::nullopt;
    Eigen::Index pick = -1;
    double best = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in[static_cast<std::size_t>(i)]) continue;
      const double score = rule == Completion::kByMagnitude
                               ? std::abs(x[i])
                               : std::abs(A.col(i).dot(residual)) / A.col(i).norm();
      if (score > best) {
        best = score;
        pick = i;
      }
    }
    if (pick < 0) return std::nullopt;
    in[static_cast<std::size_t>(pick)] = 1;
    support.push_back(pick);
  }
}

}  // namespace

void DlpaConfig::validate() const {
  if (!positive_finite(beta_prox)) throw Error(ErrorCode::kInvalidArgument, "beta_prox must be positive");
  if (!positive_finite(rho0)) throw Error(ErrorCode::kInvalidArgument, "rho0 must be positive");
  if (!(rho_growth >= 1.0) || !std::isfinite(rho_growth)) {
    throw Error(ErrorCode::kInvalidArgument, "rho_growth must be >= 1");
  }
  if (!positive_finite(rho_max)) throw Error(ErrorCode::kInvalidArgument, "rho_max must be positive");
  if (outer_max < 1) throw Error(ErrorCode::kInvalidArgument, "outer_max must be positive");
  if (!positive_finite(outer_tol)) throw Error(ErrorCode::kInvalidArgument, "outer_tol must be positive");
  if (inner_max < 1) throw Error(ErrorCode::kInvalidArgument, "inner_max must be positive");
  if (!positive_finite(inner_tol)) throw Error(ErrorCode::kInvalidArgument, "inner_tol must be positive");
  if (!(time_limit_s >= 0.0) || !std::isfinite(time_limit_s)) {
    throw Error(ErrorCode::kInvalidArgument, "time_limit_s must be nonnegative");
  }
}

AffineProjector::AffineProjector(const MatrixRef& A, double rcond) : A_(A) {
  if (A_.rows() == 0 || A_.cols() == 0) throw Error(ErrorCode::kInvalidArgument, "empty matrix");
  Eigen::BDCSVD<Matrix> svd(A_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = rcond * (s.size() ? s[0] : 0.0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff) {
      inv[i] = 1.0 / s[i];
      ++rank_;
    }
  }
  pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Vector AffineProjector::project(const VectorRef& psi, const VectorRef& b) const {
  return psi - pinv_ * (A_ * psi - b);
}

double feasibility_tolerance(const VectorRef& b) { return 1e-8 * (1.0 + b.norm()); }

Vector min_norm_feasible(const ProblemInstance& instance) {
  const AffineProjector proj(instance.A());
  Vector v = proj.min_norm_point(instance.b());
  if (instance.residual_norm(v) > 1e-10 * instance.b().norm()) {
    throw Error(ErrorCode::kInfeasible, "b is not in the range of A");
  }
  return v;
}

Vector linearization_coefficient(const VectorRef& x, double alpha, const RatioParams& params) {
  const double p = params.p();
  const double q = params.q();
  const double nq = lq_norm(x, q);
  if (!(nq > 0.0)) throw Error(ErrorCode::kDomain, "linearization at x = 0");
  // alpha p ||x||_q^(p-q) |x_i|^(q-1) = alpha p ||x||_q^(p-1) (|x_i| / ||x||_q)^(q-1)
  const double scale = alpha * p * std::pow(nq, p - 1.0);
  Vector c(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    c[i] = x[i] == 0.0 ? 0.0 : scale * sign(x[i]) * std::pow(std::abs(x[i]) / nq, q - 1.0);
  }
  return c;
}

double subproblem_objective(const VectorRef& x, const VectorRef& anchor, const VectorRef& c,
                            double p, double beta) {
  return lp_norm_pow(x, p) - c.dot(x) + 0.5 * beta * (x - anchor).squaredNorm();
}

Deadline::Deadline(double seconds) {
  if (seconds > 0.0) {
    until_ = std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(seconds));
  }
}

bool Deadline::expired() const { return until_ && std::chrono::steady_clock::now() > *until_; }

void Deadline::check() const {
  if (expired()) throw Error(ErrorCode::kNotConverged, "time limit exceeded");
}

InnerResult inner_admm_solve(const AffineProjector& projector, const VectorRef& b,
                             const VectorRef& anchor, const VectorRef& c, double p, double beta,
                             const DlpaConfig& config, InnerState& state, const Deadline& deadline) {
  const Eigen::Index n = anchor.size();
  if (c.size() != n || b.size() != projector.A().rows() || n != projector.A().cols()) {
    throw Error(ErrorCode::kInvalidArgument, "inner_admm_solve: dimension mismatch");
  }
  if (!c.allFinite()) throw Error(ErrorCode::kDomain, "inner_admm_solve: non-finite coefficient");
  if (state.y.size() != n) state.y = anchor;
  if (state.u.size() != n) state.u = Vector::Zero(n);

  const double stop = config.inner_tol * std::sqrt(static_cast<double>(n));
  double rho = config.rho0;
  Vector x = anchor;
  Vector psi(n);
  Vector y_prev(n);
  InnerResult out;
  for (int it = 0; it < config.inner_max; ++it) {
    if ((it & 63) == 63) deadline.check();
    psi = (rho * state.y + beta * anchor - state.u + c) / (rho + beta);
    x = projector.project(psi, b);
    y_prev = state.y;
    const GstMap prox(GstParams{p, rho});
    for (Eigen::Index i = 0; i < n; ++i) state.y[i] = prox(x[i] + state.u[i] / rho);
    state.u += rho * (x - state.y);
    ++out.iterations;
    const double primal = (x - state.y).norm();
    const double dual = rho * (state.y - y_prev).norm();
    if (primal <= stop && dual <= stop) {
      out.converged = true;
      break;
    }
    rho = std::min(rho * config.rho_growth, config.rho_max);
  }
  state.rho = rho;

  const double feas_tol = kCandidateFeasFactor * (1.0 + b.norm());
  const auto objective = [&](const Vector& v) { return subproblem_objective(v, anchor, c, p, beta); };

  Candidate best{anchor, objective(anchor)};
  out.kept_anchor = true;
  const auto consider = [&](Vector v, bool restored) {
    if (!v.allFinite() || (projector.A() * v - b).norm() > feas_tol) return;
    const double f = objective(v);
    if (f < best.objective) {
      best = {std::move(v), f};
      out.kept_anchor = false;
      out.restored = restored;
    }
  };
  consider(x, false);
  for (const auto rule : {Completion::kByMagnitude, Completion::kByCorrelation}) {
    if (auto r = restore_on_support(projector.A(), b, state.y, x, feas_tol, rule)) {
      consider(std::move(*r), true);
    }
  }

  out.x = std::move(best.x);
  out.objective = best.objective;
  return out;
}

InnerResult inner_admm_solve(const ProblemInstance& instance, const VectorRef& x_k,
                             const VectorRef& c_k, double p, const DlpaConfig& config) {
  config.validate();
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must lie in (0, 1]");
  if (instance.residual_norm(x_k) > feasibility_tolerance(instance.b())) {
    throw Error(ErrorCode::kInvalidArgument, "inner_admm_solve: x_k is not feasible");
  }
  const AffineProjector proj(instance.A());
  InnerState state;
  return inner_admm_solve(proj, instance.b(), x_k, c_k, p, config.beta_prox, config, state);
}

DlpaConfig parse_dlpa_config(const std::string& json_text, DlpaConfig base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::kParse, "solver config: expected an object");
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("beta_prox", base.beta_prox);
    get("rho0", base.rho0);
    get("rho_growth", base.rho_growth);
    get("rho_max", base.rho_max);
    get("outer_max", base.outer_max);
    get("outer_tol", base.outer_tol);
    get("inner_max", base.inner_max);
    get("inner_tol", base.inner_tol);
    get("adaptive_beta", base.adaptive_beta);
    get("time_limit_s", base.time_limit_s);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("solver config: ") + e.what());
  }
  base.validate();
  return base;
}

std::string to_json(const DlpaConfig& c) {
  return nlohmann::json{{"beta_prox", c.beta_prox},     {"rho0", c.rho0},
                        {"rho_growth", c.rho_growth},   {"rho_max", c.rho_max},
                        {"outer_max", c.outer_max},     {"outer_tol", c.outer_tol},
                        {"inner_max", c.inner_max},     {"inner_tol", c.inner_tol},
                        {"adaptive_beta", c.adaptive_beta}, {"time_limit_s", c.time_limit_s}}
      .dump();
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::kGapTol: return "gap_tol";
    case StopReason::kStepTol: return "step_tol";
    case StopReason::kMaxIter: return "max_iter";
  }
  return "unknown";
}

std::string_view to_string(Initialization i) {
  switch (i) {
    case Initialization::kProvided: return "provided";
    case Initialization::kL1Baseline: return "l1_baseline";
    case Initialization::kMinNorm: return "min_norm";
  }
  return "unknown";
}

namespace {

L1BaselineResult l1_with_projector(const AffineProjector& proj, const VectorRef& b,
                                   const DlpaConfig& config, const Deadline& deadline) {
  L1BaselineResult out;
  const Vector v = proj.min_norm_point(b);
  const double vn = v.norm();
  if (!(vn > 0.0) || (proj.A() * v - b).norm() > 1e-10 * b.norm()) {
    throw Error(ErrorCode::kInfeasible, "b is not in the range of A");
  }
  const Vector bs = b / vn;
  const Vector vs = v / vn;
  DlpaConfig bp = config;
  bp.rho_growth = kL1RhoGrowth;
  bp.rho_max = std::max(config.rho0, kL1RhoMax);
  InnerState state{vs, Vector::Zero(v.size()), config.rho0};
  const Vector zero = Vector::Zero(v.size());
  const InnerResult r = inner_admm_solve(proj, bs, vs, zero, 1.0, 0.0, bp, state, deadline);
  out.iterations = r.iterations;
  out.converged = r.converged;
  if (r.kept_anchor) {
    out.fell_back = true;
    out.x = v;
    return out;
  }
  out.x = r.x * vn;
  return out;
}

}  // namespace

L1BaselineResult l1_baseline_detailed(const ProblemInstance& instance, const DlpaConfig& config) {
  config.validate();
  const AffineProjector proj(instance.A());
  return l1_with_projector(proj, instance.b(), config, Deadline(config.time_limit_s));
}

L1BaselineResult l1_baseline_detailed(const ProblemInstance& instance, const AffineProjector& projector,
                                      const DlpaConfig& config) {
  config.validate();
  if (projector.A().rows() != instance.rows() || projector.A().cols() != instance.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "projector does not match the instance");
  }
  return l1_with_projector(projector, instance.b(), config, Deadline(config.time_limit_s));
}

SolveResult dlpa_solve(const ProblemInstance& instance, const RatioParams& params,
                       const DlpaConfig& config, const std::optional<Vector>& x0) {
  config.validate();
  const AffineProjector proj(instance.A());
  return dlpa_solve(instance, proj, params, config, x0);
}

SolveResult dlpa_solve(const ProblemInstance& instance, const AffineProjector& proj,
                       const RatioParams& params, const DlpaConfig& config,
                       const std::optional<Vector>& x0) {
  config.validate();
  if (proj.A().rows() != instance.rows() || proj.A().cols() != instance.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "projector does not match the instance");
  }
  const Deadline deadline(config.time_limit_s);
  const Vector& b = instance.b();
  const double feas_tol = feasibility_tolerance(b);
  const Eigen::Index n = instance.cols();
  const double p = params.p();

  SolveResult result;
  Vector start;
  if (x0) {
    if (x0->size() != n || !x0->allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "x0 has wrong length or non-finite entries");
    }
    if (instance.residual_norm(*x0) > feas_tol) {
      throw Error(ErrorCode::kInvalidArgument, "x0 is not feasible");
    }
    start = *x0;
    result.initialization = Initialization::kProvided;
  } else {
    const L1BaselineResult l1 = l1_with_projector(proj, b, config, deadline);
    start = l1.x;
    result.initialization = l1.fell_back ? Initialization::kMinNorm : Initialization::kL1Baseline;
  }

  // Work with a copy scaled to unit l_q norm; the ratio is scale invariant.
  const double scale = lq_norm(start, params.q());
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::kDomain, "degenerate start");
  const Vector bs = b / scale;

  SolverState st;
  st.x = start / scale;
  st.alpha = ratio_objective(st.x, params);
  st.inner.y = st.x;
  st.inner.u = Vector::Zero(n);
  result.alpha_initial = st.alpha;
  const double max_ratio = params.max_ratio(n);
  const double x0_norm = st.x.norm();
  double beta = config.beta_prox;
  double lip = 0.0;
  Vector grad = linearization_coefficient(st.x, 1.0, params);
  double last_step = 0.0;
  result.stop_reason = StopReason::kMaxIter;

  for (st.k = 0; st.k < config.outer_max; ++st.k) {
    deadline.check();
    const Vector c = grad * st.alpha;
    IterationLog log;
    Vector x_next = st.x;
    double alpha_next = st.alpha;
    double delta = 0.0;
    while (true) {
      InnerState trial = st.inner;
      const InnerResult r = inner_admm_solve(proj, bs, st.x, c, p, beta, config, trial, deadline);
      log.inner_iterations += r.iterations;
      if (r.kept_anchor) {
        st.inner = trial;
        break;
      }
      const double h = lp_norm_pow(r.x, p);
      const double s = std::pow(lq_norm(r.x, params.q()), p);
      const double d = st.alpha * s - h;
      const double a = ratio_objective(r.x, params);
      if (d >= -1e-12 && a <= st.alpha + 1e-13) {
        x_next = r.x;
        alpha_next = a;
        delta = std::max(d, 0.0);
        st.inner = std::move(trial);
        break;
      }
      if (!config.adaptive_beta || beta * 2.0 > kBetaCap) {
        // Monotone safeguard: reject the step.
        st.inner.y = st.x;
        st.inner.u.setZero();
        break;
      }
      beta *= 2.0;
      st.inner.y = st.x;
      st.inner.u.setZero();
    }

    const double step = (x_next - st.x).norm();
    const double rel_step = step / st.x.norm();
    log.alpha = alpha_next;
    log.delta = delta;
    log.step_norm = step * scale;
    log.x_norm = x_next.norm() * scale;
    log.beta = beta;
    result.step_sq_sum += step * step;
    result.max_feasibility_violation =
        std::max(result.max_feasibility_violation, (instance.A() * x_next - bs).norm() * scale);
    if (x_next.norm() > 1e6 * x0_norm) result.bounded_iterates = false;
    if (!(alpha_next >= 1.0 - 1e-12 && alpha_next <= max_ratio + 1e-12) ||
        alpha_next > st.alpha + 1e-12 || delta < -1e-10) {
      throw Error(ErrorCode::kInternal, "descent invariant violated");
    }
    if (step > 0.0) {
      const Vector g_next = linearization_coefficient(x_next, 1.0, params);
      lip = std::max(lip, (g_next - grad).norm() / step);
      grad = g_next;
    }
    last_step = step;
    st.x = std::move(x_next);
    st.alpha = alpha_next;
    st.delta = delta;
    st.history.push_back(log);

    if (rel_step < config.outer_tol) {
      result.stop_reason = StopReason::kStepTol;
      ++st.k;
      break;
    }
    if (std::abs(delta) < config.outer_tol) {
      result.stop_reason = StopReason::kGapTol;
      ++st.k;
      break;
    }
  }

  result.x_hat = st.x * scale;
  result.alpha_final = ratio_objective(result.x_hat, params);
  result.iterations = st.k;
  result.converged = result.stop_reason != StopReason::kMaxIter;
  result.stationarity_residual = (beta + st.alpha * lip) * last_step;
  result.beta_final = beta;
  result.history = std::move(st.history);
  if (result.max_feasibility_violation > feas_tol) {
    throw Error(ErrorCode::kInternal, "feasibility invariant violated");
  }
  return result;
}

}  // namespace ratiosparse

#include "ratiosparse/solver.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ratiosparse;
using rs_test::vec;

namespace {

void check_close(const Vector& a, const Vector& b, double tol) {
  REQUIRE(a.size() == b.size());
  CHECK((a - b).norm() <= tol);
}

ProblemInstance planted(Eigen::Index m, Eigen::Index n, std::vector<std::pair<Eigen::Index, double>> entries,
                        std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Matrix A = rs_test::gaussian(m, n, gen);
  Vector x = Vector::Zero(n);
  for (auto [i, v] : entries) x[i] = v;
  Vector b = A * x;
  return ProblemInstance(std::move(A), std::move(b), std::move(x));
}

}  // namespace

TEST_CASE("min-norm feasible point") {
  check_close(min_norm_feasible(ProblemInstance(Matrix::Identity(3, 3), vec({1, 2, 3}))), vec({1, 2, 3}), 1e-14);

  Matrix row(1, 2);
  row << 1, 1;
  check_close(min_norm_feasible(ProblemInstance(row, vec({2}))), vec({1, 1}), 1e-14);

  Matrix padded = Matrix::Zero(2, 3);
  padded(0, 0) = 1;
  padded(1, 1) = 1;
  check_close(min_norm_feasible(ProblemInstance(padded, vec({1, 1}))), vec({1, 1, 0}), 1e-14);

  Matrix rank1(2, 2);
  rank1 << 1, 0, 1, 0;
  try {
    min_norm_feasible(ProblemInstance(rank1, vec({1, 2})));
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
  // consistent rank-deficient system is fine
  check_close(min_norm_feasible(ProblemInstance(rank1, vec({2, 2}))), vec({2, 0}), 1e-12);
}

TEST_CASE("affine projector") {
  std::mt19937_64 gen(4);
  const Matrix A = rs_test::gaussian(5, 12, gen);
  const AffineProjector proj(A);
  CHECK(proj.rank() == 5);
  const Vector b = A * Vector::Ones(12);
  for (int rep = 0; rep < 20; ++rep) {
    Vector psi(12);
    for (auto& v : psi) v = std::normal_distribution<double>()(gen);
    const Vector x = proj.project(psi, b);
    CHECK((A * x - b).norm() <= 1e-10);
    // idempotent, and the correction is orthogonal to the null space
    CHECK((proj.project(x, b) - x).norm() <= 1e-10);
    const Vector d = psi - x;
    Vector v(12);
    for (auto& e : v) e = std::normal_distribution<double>()(gen);
    const Vector h = proj.project(v, Vector::Zero(5));
    CHECK((A * h).norm() <= 1e-10);
    CHECK(std::abs(d.dot(h)) <= 1e-10 * (1 + d.norm() * h.norm()));
  }
}

TEST_CASE("linearization coefficient hand values") {
  check_close(linearization_coefficient(vec({1, 0, 0}), 1.0, RatioParams(1, 2)), vec({1, 0, 0}), 1e-15);
  check_close(linearization_coefficient(vec({3, 4}), 1.0, RatioParams(1, 2)), vec({0.6, 0.8}), 1e-15);
  check_close(linearization_coefficient(vec({1, 0}), 2.0, RatioParams(0.5, 2)), vec({1, 0}), 1e-15);
  check_close(linearization_coefficient(vec({-3, 4}), 1.0, RatioParams(1, 2)), vec({-0.6, 0.8}), 1e-15);
}

TEST_CASE("linearization coefficient matches finite differences") {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  for (double p : {0.3, 0.7, 1.0}) {
    for (double q : {1.3, 2.0, 3.5}) {
      const RatioParams params(p, q);
      Vector x(6);
      for (auto& v : x) v = nd(gen);
      const double alpha = 1.7;
      const Vector c = linearization_coefficient(x, alpha, params);
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = 1e-6;
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = alpha * (std::pow(lq_norm(xp, q), p) - std::pow(lq_norm(xm, q), p)) / (2 * h);
        CHECK(c[i] == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("subproblem objective") {
  CHECK(subproblem_objective(vec({1, -2}), vec({0, 0}), vec({1, 1}), 1.0, 2.0) ==
        doctest::Approx(3.0 + 1.0 + 5.0));
}

TEST_CASE("inner solve: zero coefficient and large beta stays at the anchor") {
  const auto inst = planted(4, 8, {{1, 2.0}, {5, -1.0}}, 9);
  const Vector xk = min_norm_feasible(inst);
  DlpaConfig cfg;
  InnerState st;
  const AffineProjector proj(inst.A());
  const auto r = inner_admm_solve(proj, inst.b(), xk, Vector::Zero(8), 0.5, 1e8, cfg, st);
  CHECK((r.x - xk).norm() <= 1e-6);
}

TEST_CASE("inner solve: singleton feasible set") {
  Matrix A(1, 1);
  A << 1.0;
  const ProblemInstance inst(A, vec({1}));
  for (double c : {-5.0, 0.0, 3.0}) {
    const auto r = inner_admm_solve(inst, vec({1}), vec({c}), 0.5, DlpaConfig{});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("inner solve: random feasible perturbations do not improve the objective") {
  const auto inst = planted(4, 8, {{2, 3.0}, {6, -1.0}}, 12);
  const RatioParams params(0.5, 2.0);
  const Vector xk = min_norm_feasible(inst);
  const double alpha = ratio_objective(xk, params);
  const Vector c = linearization_coefficient(xk, alpha, params);
  DlpaConfig cfg;
  const auto r = inner_admm_solve(inst, xk, c, params.p(), cfg);
  CHECK(inst.residual_norm(r.x) <= feasibility_tolerance(inst.b()));
  const double f0 = subproblem_objective(r.x, xk, c, params.p(), cfg.beta_prox);
  CHECK(f0 == doctest::Approx(r.objective).epsilon(1e-12));

  const AffineProjector proj(inst.A());
  std::mt19937_64 gen(13);
  std::normal_distribution<double> nd;
  int worse = 0;
  for (int i = 0; i < 10000; ++i) {
    Vector d(8);
    for (auto& v : d) v = nd(gen);
    d = proj.project(d, Vector::Zero(4));  // null-space direction
    d *= 1e-2 / d.norm();
    if (subproblem_objective(r.x + d, xk, c, params.p(), cfg.beta_prox) < f0 - 1e-12) ++worse;
  }
  CHECK(worse == 0);
}

TEST_CASE("dlpa: square invertible system stops after one step") {
  std::mt19937_64 gen(1);
  const Matrix A = rs_test::gaussian(5, 5, gen);
  const Vector b = vec({1, -2, 0.5, 3, 1});
  const ProblemInstance inst(A, b);
  const auto r = dlpa_solve(inst, RatioParams(0.5, 2.0));
  check_close(r.x_hat, A.lu().solve(b), 1e-9);
  CHECK(r.iterations == 1);
  CHECK(r.stop_reason == StopReason::kStepTol);
  CHECK(r.converged);
}

TEST_CASE("dlpa: planted 1-sparse signal from the min-norm start") {
  const auto inst = planted(4, 8, {{2, 10.0}}, 77);
  const auto r = dlpa_solve(inst, RatioParams(0.5, 2.0), DlpaConfig{}, min_norm_feasible(inst));
  const Vector& xs = *inst.ground_truth();
  CHECK((r.x_hat - xs).norm() / xs.norm() < 1e-3);
  CHECK(r.alpha_final == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.initialization == Initialization::kProvided);
}

TEST_CASE("dlpa: descent and feasibility on random instances") {
  std::mt19937_64 gen(100);
  std::uniform_int_distribution<int> mi(3, 10);
  std::uniform_real_distribution<double> pu(0.2, 1.0), qu(1.2, 3.0);
  for (int rep = 0; rep < 15; ++rep) {
    const Eigen::Index m = mi(gen);
    const Eigen::Index n = 2 * m + rep % 5;
    Matrix A = rs_test::gaussian(m, n, gen);
    Vector x = Vector::Zero(n);
    x[rep % n] = 1.5;
    x[(rep * 7 + 3) % n] -= 0.7;
    const ProblemInstance inst(A, A * x, x);
    const RatioParams params(pu(gen), qu(gen));
    const auto r = dlpa_solve(inst, params);
    double prev = r.alpha_initial;
    for (const auto& h : r.history) {
      CHECK(h.alpha <= prev + 1e-12);
      CHECK(h.delta >= -1e-10);
      prev = h.alpha;
    }
    CHECK(r.max_feasibility_violation <= feasibility_tolerance(inst.b()));
    CHECK(r.alpha_final >= 1.0 - 1e-12);
    CHECK(r.alpha_final <= params.max_ratio(n) + 1e-12);
    CHECK(r.alpha_final == doctest::Approx(ratio_objective(r.x_hat, params)).epsilon(1e-12));
    CHECK(r.bounded_iterates);
    CHECK(std::isfinite(r.step_sq_sum));
  }
}

TEST_CASE("dlpa: scale covariance") {
  // the solution for c b is c times the solution for b
  const auto inst = planted(6, 14, {{0, 1.0}, {9, -4.0}}, 31);
  const ProblemInstance scaled(inst.A(), 1e3 * inst.b());
  const RatioParams params(0.5, 1.5);
  const auto a = dlpa_solve(inst, params);
  const auto b = dlpa_solve(scaled, params);
  CHECK((b.x_hat - 1e3 * a.x_hat).norm() <= 1e-6 * b.x_hat.norm());
}

TEST_CASE("dlpa: infeasible and invalid inputs") {
  Matrix rank1(2, 2);
  rank1 << 1, 0, 1, 0;
  try {
    dlpa_solve(ProblemInstance(rank1, vec({1, 2})), RatioParams(0.5, 2));
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
  const ProblemInstance inst(Matrix::Identity(2, 3), vec({1, 1}));
  CHECK_THROWS_AS(dlpa_solve(inst, RatioParams(0.5, 2), DlpaConfig{}, vec({0, 0, 0})), Error);
  CHECK_THROWS_AS(dlpa_solve(inst, RatioParams(0.5, 2), DlpaConfig{}, vec({5, 0, 0})), Error);  // infeasible x0
  CHECK_THROWS_AS(dlpa_solve(inst, RatioParams(0.5, 2), DlpaConfig{}, vec({1, 1})), Error);     // wrong size
  DlpaConfig bad;
  bad.beta_prox = 0.0;
  CHECK_THROWS_AS(dlpa_solve(inst, RatioParams(0.5, 2), bad), Error);
}

TEST_CASE("dlpa: max_iter stop is reported as not converged") {
  const auto inst = planted(8, 24, {{1, 1.0}, {4, 1.0}, {10, -1.0}}, 5);
  DlpaConfig cfg;
  cfg.outer_max = 1;
  cfg.outer_tol = 1e-300;
  const auto r = dlpa_solve(inst, RatioParams(0.5, 2.0), cfg, min_norm_feasible(inst));
  if (r.stop_reason == StopReason::kMaxIter) {
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
  } else {
    CHECK(r.converged);
  }
}

TEST_CASE("l1 baseline") {
  check_close(l1_baseline_solve(ProblemInstance(Matrix::Identity(3, 3), vec({4, -1, 2}))), vec({4, -1, 2}), 1e-8);

  Matrix row(1, 2);
  row << 1, 1;
  const ProblemInstance seg(row, vec({2}));
  const Vector x = l1_baseline_solve(seg);
  CHECK(std::abs(x.lpNorm<1>() - 2.0) <= 1e-6);
  CHECK(std::abs(x.sum() - 2.0) <= 1e-8);

  const auto inst = planted(8, 16, {{11, 3.0}}, 42);
  const Vector xl = l1_baseline_solve(inst);
  const Vector& xs = *inst.ground_truth();
  CHECK((xl - xs).norm() / xs.norm() < 1e-4);
}

TEST_CASE("l1 baseline approaches the l1 minimum on random instances") {
  std::mt19937_64 gen(55);
  for (int rep = 0; rep < 5; ++rep) {
    const auto inst = planted(10, 30, {{rep, 2.0}, {rep + 10, -1.0}, {rep + 20, 0.5}}, 500 + rep);
    const auto r = l1_baseline_detailed(inst);
    CHECK(inst.residual_norm(r.x) <= feasibility_tolerance(inst.b()));
    // never worse in l1 than the min-norm point
    CHECK(r.x.lpNorm<1>() <= min_norm_feasible(inst).lpNorm<1>() + 1e-9);
  }
}

TEST_CASE("solver config JSON") {
  const DlpaConfig c = parse_dlpa_config(R"({"beta_prox": 2.5, "outer_max": 7, "adaptive_beta": false})");
  CHECK(c.beta_prox == 2.5);
  CHECK(c.outer_max == 7);
  CHECK_FALSE(c.adaptive_beta);
  CHECK(c.rho0 == DlpaConfig{}.rho0);
  const DlpaConfig back = parse_dlpa_config(to_json(c));
  CHECK(back.beta_prox == c.beta_prox);
  CHECK(back.outer_max == c.outer_max);
  CHECK(back.adaptive_beta == c.adaptive_beta);
  CHECK_THROWS_AS(parse_dlpa_config("[1]"), Error);
  CHECK_THROWS_AS(parse_dlpa_config(R"({"outer_max": "x"})"), Error);
  CHECK_THROWS_AS(parse_dlpa_config(R"({"rho_growth": 0.5})"), Error);
}

TEST_CASE("stop reason names") {
  CHECK(to_string(StopReason::kGapTol) == "gap_tol");
  CHECK(to_string(StopReason::kStepTol) == "step_tol");
  CHECK(to_string(StopReason::kMaxIter) == "max_iter");
}

#include "ratiosparse/theory.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace ratiosparse;
using rs_test::vec;

namespace {

TheoryInput input(double p, double q, int k, double beta) {
  TheoryInput in;
  in.params = RatioParams(p, q);
  in.k = k;
  in.t = k;
  in.beta = beta;
  return in;
}

TheoryInput worst(double p, double q, int k) {
  return input(p, q, k, worst_case_beta(RatioParams(p, q), k));
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("gnrc hand values") {
  CHECK(gnrc(vec({0, 1, 0}), RatioParams(0.4, 2.5)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gnrc(vec({1, 1}), RatioParams(1, 2)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gnrc(vec({2, 1}), RatioParams(1, 2)) == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("uniform gnrc bound") {
  for (double q : {1.5, 2.0, 3.0}) CHECK(uniform_gnrc_bound(q, 1) == 1.0);
  CHECK(uniform_gnrc_root(2.0, 2) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-13));
  CHECK(std::abs(uniform_gnrc_bound(2.0, 2) - (1.0 + std::sqrt(2.0)) / 2.0) <= 1e-12);
  const double x3 = (std::sqrt(3.0) - 1.0) / 2.0;
  CHECK(uniform_gnrc_root(2.0, 3) == doctest::Approx(x3).epsilon(1e-13));
  CHECK(uniform_gnrc_bound(2.0, 3) == doctest::Approx((1 + 2 * x3) / (1 + 2 * x3 * x3)).epsilon(1e-13));
  CHECK(uniform_gnrc_bound(2.0, 3) == doctest::Approx(1.366025).epsilon(1e-6));
}

TEST_CASE("uniform gnrc bound dominates sampled vectors") {
  std::mt19937_64 gen(40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 2; s <= 5; ++s) {
    for (double q : {1.5, 2.0, 3.0}) {
      const double K = uniform_gnrc_bound(q, s);
      Vector x(s);
      for (int rep = 0; rep < 5000; ++rep) {
        for (auto& v : x) v = u(gen);
        x[0] = 1.0;
        CHECK(gnrc(x, RatioParams(1.0, q)) <= K + 1e-9);
      }
      const double r = uniform_gnrc_root(q, s);
      Vector pat = Vector::Constant(s, r);
      pat[0] = 1.0;
      CHECK(std::abs(gnrc(pat, RatioParams(1.0, q)) - K) <= 1e-10);
    }
  }
}

TEST_CASE("local optimality threshold") {
  CHECK(local_optimality_mu_threshold(vec({1, 0, 0}), RatioParams(1, 2)) == doctest::Approx(0.5));
  CHECK(local_optimality_mu_threshold(vec({2, 1, 0, 0}), RatioParams(1, 2)) == doctest::Approx(1 / 2.2));
  CHECK(local_optimality_mu_threshold(vec({2, 1, 0, 0}), RatioParams(0.5, 2)) == 1.0);
}

TEST_CASE("zero point: analytic case") {
  const auto z = fpq_zero(input(1, 2, 1, 1));
  CHECK(std::abs(z.z0 - 2.0) <= 1e-12);
  CHECK(z.bracket_low == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(z.bracket_high == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(z.residual <= 1e-12);
  CHECK(fpq_value(2.0, input(1, 2, 1, 1)) == 0.0);
  CHECK(fpq_value(0.0, input(1, 2, 1, 1)) == -2.0);
}

TEST_CASE("zero point: worst-case beta reduces to z^q - z^p - 2") {
  for (double p : {0.2, 0.6, 1.0}) {
    for (double q : {1.3, 2.0, 4.0}) {
      for (int k : {1, 3, 9}) {
        const auto in = worst(p, q, k);
        const double z = fpq_zero(in).z0;
        CHECK(std::abs(std::pow(z, q) - std::pow(z, p) - 2.0) <= 1e-11);
      }
    }
  }
  CHECK(std::abs(fpq_zero(worst(1, 2, 7)).z0 - 2.0) <= 1e-12);
}

TEST_CASE("ric thresholds: analytic case") {
  const auto in = input(1, 2, 1, 1);
  const auto nw = ric_threshold_new(in);
  CHECK(nw.psi == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(nw.t == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(nw.delta == doctest::Approx(1.0 / std::sqrt(17.0)).epsilon(1e-13));
  CHECK(nw.delta == doctest::Approx(0.242536).epsilon(1e-6));
  const auto zh = ric_threshold_zhu(in);
  CHECK(zh.t == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(std::abs(zh.delta - nw.delta) <= 1e-12);
}

TEST_CASE("ric thresholds: limiting cases") {
  for (int k : {1, 5, 10}) {
    const double target = 1.0 / std::sqrt(1.0 + 9.0 * k);
    CHECK(std::abs(ric_threshold_new(worst(1, 100, k)).delta / target - 1.0) <= 0.02);
  }
  const double target = 1.0 / std::sqrt(10.0);
  CHECK(std::abs(ric_threshold_new(worst(0.01, 1.01, 1)).delta / target - 1.0) <= 0.02);
  CHECK(std::abs(ric_threshold_zhu(worst(0.01, 1.01, 1)).delta / target - 1.0) <= 0.02);
}

TEST_CASE("new threshold is strictly larger for p < 1") {
  for (double q : {1.2, 2.0, 3.0}) {
    for (int k : {1, 4, 16}) {
      for (double beta : {1.0, worst_case_beta(RatioParams(0.5, q), k)}) {
        const auto in = input(0.5, q, k, beta);
        CHECK(ric_threshold_new(in).delta > ric_threshold_zhu(in).delta);
      }
    }
  }
}

TEST_CASE("new threshold is nonincreasing in k under worst-case beta") {
  for (double p : {0.3, 0.7, 1.0}) {
    for (double q : {1.5, 2.0, 3.0}) {
      double prev = INFINITY;
      for (int k = 1; k <= 40; ++k) {
        const double d = ric_threshold_new(worst(p, q, k)).delta;
        CHECK(d <= prev + 1e-15);
        prev = d;
      }
    }
  }
}

TEST_CASE("error bounds: hand value and homogeneity") {
  auto in = input(1, 2, 1, 1);
  in.delta_2k = 0.1;
  in.epsilon = 1.0;
  const double expected = 2.0 * std::sqrt(1.1) * 3.0 / (1.0 - 0.1 * std::sqrt(17.0));
  CHECK(error_bound_new(in) == doctest::Approx(expected).epsilon(1e-12));
  // the rounded hand chain gives 10.7086; the unrounded expression is 10.70782
  CHECK(error_bound_new(in) == doctest::Approx(10.7086).epsilon(1e-4));
  CHECK(std::abs(error_bound_zhu(in) - error_bound_new(in)) <= 1e-10);
  auto twice = in;
  twice.epsilon = 2.0;
  CHECK(error_bound_new(twice) == 2.0 * error_bound_new(in));
  auto zero = in;
  zero.epsilon = 0.0;
  CHECK(error_bound_new(zero) == 0.0);
  CHECK(error_bound_zhu(zero) == 0.0);
}

TEST_CASE("error bounds: ordering and applicability") {
  auto in = worst(0.5, 2, 4);
  in.delta_2k = 0.05;
  in.epsilon = 1.0;
  CHECK(error_bound_zhu(in) >= error_bound_new(in));

  auto out_of_range = input(1, 2, 1, 1);
  out_of_range.delta_2k = 0.5;  // above 1/sqrt(17)
  out_of_range.epsilon = 1.0;
  try {
    error_bound_new(out_of_range);
    FAIL("expected not applicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotApplicable);
  }
  const auto rep = bound_report(out_of_range);
  CHECK_FALSE(rep.b_o.has_value());
  CHECK_FALSE(rep.b_z.has_value());
}

TEST_CASE("block-size constants") {
  TheoryInput in = input(1, 2, 4, 2);
  in.t = 4;
  in.delta_k = 0.1;
  in.theta_kt = 0.1;
  const auto c = t6_constants(in);
  CHECK(c.a_p == 1.0);
  CHECK(c.vartheta_q == 0.0);
  CHECK(c.eta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(c.eta_ok);
  CHECK_FALSE(c.applicable());

  TheoryInput r = input(1, 2, 3, 1);
  r.t = 3;
  CHECK(t6rip_constants(r).rho_p == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(t6rip_constants(r).a_p == 1.0);

  // vartheta_q = max(0, 1/q - 1/2) is positive for q < 2
  TheoryInput q15 = input(0.5, 1.5, 2, 1);
  CHECK(t6_constants(q15).vartheta_q == doctest::Approx(1.0 / 1.5 - 0.5));
  CHECK(t6_constants(q15).a_p == doctest::Approx(3.0));
}

TEST_CASE("block-size constants: c2 does not depend on epsilon") {
  TheoryInput in = input(0.8, 2.5, 2, 1.0);
  in.t = 6;
  in.delta_k = 0.05;
  in.theta_kt = 0.05;
  in.delta_kt = 0.05;
  in.epsilon = 1.0;
  const auto a = t6_constants(in);
  const auto ar = t6rip_constants(in);
  in.epsilon = 7.0;
  const auto b = t6_constants(in);
  const auto br = t6rip_constants(in);
  REQUIRE(a.applicable());
  CHECK(*a.c2 == *b.c2);
  if (ar.applicable()) CHECK(*ar.c2 == *br.c2);
}

TEST_CASE("block-size constants: psi with theta below psi with delta") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  for (int rep = 0; rep < 100; ++rep) {
    TheoryInput in = input(0.5 + 0.5 * u(gen), 2.0, 2, 1.0);
    in.t = 4;
    in.delta_k = u(gen);
    in.delta_kt = std::max(in.delta_k, u(gen));
    in.theta_kt = in.delta_kt * u(gen) * 5.0;  // theta <= delta_(k+t)
    const auto c = t6_constants(in);
    const double psi_delta = in.delta_k + in.delta_kt * c.tau;
    CHECK(c.psi <= psi_delta + 1e-15);
  }
}

TEST_CASE("exact ric oracle") {
  CHECK(exact_ric(Matrix::Identity(5, 5), 3) <= 1e-12);

  Matrix d(1, 1);
  d << 2.0;
  CHECK(exact_ric(d, 1) == doctest::Approx(3.0));

  Matrix h(1, 2);
  h << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(std::abs(exact_ric(h, 2) - 1.0) <= 1e-12);

  std::mt19937_64 gen(42);
  const Matrix Q = rs_test::gaussian(7, 7, gen).householderQr().householderQ();
  for (int s = 1; s <= 7; ++s) CHECK(exact_ric(Q, s) <= 1e-12);

  const Matrix G = rs_test::gaussian(6, 12, gen) / std::sqrt(6.0);
  double prev = 0.0;
  for (int s = 1; s <= 5; ++s) {
    const double ds = exact_ric(G, s);
    CHECK(ds >= prev);
    prev = ds;
  }
  CHECK_THROWS_AS(exact_ric(G, 0), Error);
  CHECK_THROWS_AS(exact_ric(Matrix::Zero(2, 40), 20), Error);  // enumeration guard
}

TEST_CASE("null space ratio estimate") {
  Matrix A(2, 3);
  A << 1, -1, 0, 0, 0, 1;
  auto est = nullspace_ratio_estimate(A, RatioParams(1, 2));
  CHECK(est.certified);
  CHECK(est.kernel_dim == 1);
  CHECK(std::abs(est.estimate - std::sqrt(2.0)) <= 1e-12);

  Matrix B(2, 3);
  B << 0, 1, 0, 0, 0, 1;
  est = nullspace_ratio_estimate(B, RatioParams(1, 2));
  CHECK(est.certified);
  CHECK(std::abs(est.estimate - 1.0) <= 1e-12);

  std::mt19937_64 gen(43);
  const Matrix G = rs_test::gaussian(4, 8, gen);
  for (double p : {0.5, 1.0}) {
    est = nullspace_ratio_estimate(G, RatioParams(p, 2));
    CHECK_FALSE(est.certified);
    CHECK(est.kernel_dim == 4);
    CHECK(est.estimate >= 1.0);
    CHECK(est.estimate <= std::pow(8.0, 1.0 / p - 0.5));
  }
  CHECK_THROWS_AS(nullspace_ratio_estimate(Matrix::Identity(3, 3), RatioParams(1, 2)), Error);
}

TEST_CASE("uniform recovery condition") {
  Matrix A(1, 2);
  A << 1, -1;
  auto c = check_uniform_recovery_condition(A, RatioParams(1, 2), 1);
  CHECK(c.threshold == doctest::Approx(3.0));
  CHECK(c.status == RecoveryCondition::kViolated);

  // all-ones kernel in dimension 16: ratio 4 > 3
  Matrix D = Matrix::Zero(15, 16);
  for (int i = 0; i < 15; ++i) {
    D(i, i) = 1.0;
    D(i, i + 1) = -1.0;
  }
  c = check_uniform_recovery_condition(D, RatioParams(1, 2), 1);
  CHECK(c.estimate == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.status == RecoveryCondition::kSatisfiedCertified);

  // 2-dimensional kernel, both basis vectors dense: estimate above threshold but not certified
  Matrix E = Matrix::Zero(14, 16);
  for (int i = 0; i < 7; ++i) {
    E(i, i) = 1.0;
    E(i, i + 1) = -1.0;
    E(7 + i, 8 + i) = 1.0;
    E(7 + i, 9 + i) = -1.0;
  }
  c = check_uniform_recovery_condition(E, RatioParams(1, 2), 1);
  CHECK(c.estimate > 2.0);
  CHECK(c.status != RecoveryCondition::kSatisfiedCertified);
  CHECK(to_string(RecoveryCondition::kInconclusive) == "inconclusive");
}

TEST_CASE("sweep grid orderings") {
  const auto grid = default_sweep_grid();
  CHECK(grid.size() == 180);
  const auto rows = run_theory_grid(grid);
  REQUIRE(rows.size() == 180);
  for (const auto& r : rows) {
    const auto& rep = r.report;
    CHECK(rep.t2 <= rep.t1 + 1e-10);
    CHECK(rep.delta_new >= rep.delta_zhu - 1e-12);
    if (r.input.params.p() == 1.0) CHECK(std::abs(rep.t1 - rep.t2) <= 1e-10);
    if (rep.b_o && rep.b_z) CHECK(*rep.b_o <= *rep.b_z + 1e-9);
    const auto z = fpq_zero(r.input);
    CHECK(z.bracket_low < z.z0);
    CHECK(z.z0 < z.bracket_high);
    CHECK(z.residual <= 1e-12);
  }
}

TEST_CASE("theory grid JSON and CSV") {
  const auto g = parse_theory_grid(R"({"p":[0.5,1],"q":[1.5,2,3],"k":[1,4],"beta":["worst",1]})");
  CHECK(g.size() == 24);
  const auto rows = run_theory_grid(g);
  CHECK(rows.size() == 24);
  std::ostringstream os;
  write_theory_csv(os, rows);
  CHECK(count_lines(os.str()) == 25);
  CHECK(os.str().rfind("p,q,k,t,beta,", 0) == 0);

  const auto one = run_theory_grid(parse_theory_grid(R"({"p":1,"q":2,"k":1,"beta":1})"));
  REQUIRE(one.size() == 1);
  CHECK(one[0].report.delta_new == doctest::Approx(0.242536).epsilon(1e-6));

  CHECK_THROWS_AS(parse_theory_grid(R"({"p":[0.5]})"), Error);
  CHECK_THROWS_AS(run_theory_grid(parse_theory_grid(R"({"p":[2],"q":[2],"k":[1]})")), Error);
  CHECK_THROWS_AS(parse_theory_grid("not json"), Error);
  CHECK_THROWS_AS(parse_theory_grid(R"({"p":[0.5],"q":[2],"k":[1],"beta":["best"]})"), Error);
}

TEST_CASE("input validation") {
  TheoryInput in = input(0.5, 2, 0, 1);
  CHECK_THROWS_AS(in.validate(), Error);
  in = input(0.5, 2, 2, 0);
  CHECK_THROWS_AS(in.validate(), Error);
  in = input(0.5, 2, 2, 1);
  in.delta_2k = 1.5;
  CHECK_THROWS_AS(in.validate(), Error);
}

#include "ratiosparse/harness.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace ratiosparse;
using rs_test::vec;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan plan;
  plan.matrix = {MatrixKind::kCorrelatedGaussian, 16, 48, 0.3, 1.0, 0};
  plan.signal = {48, 1, 1.0, 1e3, 0, 0};
  plan.sparsity_grid = {2, 5};
  plan.param_grid = {{0.5, 1.5}, {1.0, 2.0}};
  plan.trials_per_cell = 3;
  plan.base_seed = 17;
  return plan;
}

std::string csv(const ExperimentResult& r) {
  std::ostringstream os;
  write_trials_csv(os, r.trials);
  return os.str();
}

std::string agg_json(const ExperimentResult& r) {
  std::ostringstream os;
  write_aggregate_json(os, r.cells);
  return os.str();
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("classify outcome") {
  Matrix row(1, 2);
  row << 1, 1;
  const ProblemInstance inst(row, vec({1}), vec({0.5, 0.5}));
  const RatioParams params(1.0, 2.0);
  CHECK(classify_outcome(vec({0.5, 0.5}), inst, params, 1e-3) == Outcome::kSuccess);
  // feasible, far from x*, smaller ratio (1 < sqrt 2)
  CHECK(classify_outcome(vec({1.0, 0.0}), inst, params, 1e-3) == Outcome::kModelFailure);
  // infeasible with the smallest possible ratio
  CHECK(classify_outcome(vec({5.0, 0.0}), inst, params, 1e-3) == Outcome::kAlgorithmFailure);
  // feasible but with a larger ratio than x*
  const ProblemInstance sparse_truth(row, vec({1}), vec({1.0, 0.0}));
  CHECK(classify_outcome(vec({0.5, 0.5}), sparse_truth, params, 1e-3) == Outcome::kAlgorithmFailure);
  // rel_error exactly at the tolerance is not a success
  CHECK(classify_outcome(vec({0.5, 0.5}) * 1.5, inst, params, 0.5) != Outcome::kSuccess);

  const ProblemInstance no_gt(row, vec({1}));
  CHECK_THROWS_AS(classify_outcome(vec({1, 0}), no_gt, params, 1e-3), Error);
  CHECK(to_string(Outcome::kModelFailure) == "model_failure");
}

TEST_CASE("classify outcome: free coordinate") {
  // A = [1 0]; the second coordinate is unconstrained
  Matrix B = Matrix::Zero(1, 2);
  B(0, 0) = 1.0;
  const ProblemInstance free_tail(B, vec({1}), vec({1.0, 1.0}));
  const Vector x_hat = vec({1.0, 0.0});
  CHECK((x_hat - *free_tail.ground_truth()).norm() / free_tail.ground_truth()->norm() ==
        doctest::Approx(std::sqrt(0.5)));
  CHECK(classify_outcome(x_hat, free_tail, RatioParams(1, 2), 1e-3) == Outcome::kModelFailure);
}

TEST_CASE("snr") {
  CHECK(snr_db(vec({1, 2}), vec({1, 2})) == kSnrCapDb);
  CHECK(snr_db(vec({10, 1}), vec({10, 0})) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(snr_db(vec({6, 8}) + vec({1, 0}), vec({6, 8})) == doctest::Approx(20.0).epsilon(1e-14));
  const double a = snr_db(vec({1.1, -0.3, 2}), vec({1, 0, 2}));
  CHECK(snr_db(7.0 * vec({1.1, -0.3, 2}), 7.0 * vec({1, 0, 2})) == doctest::Approx(a).epsilon(1e-13));
  CHECK_THROWS_AS(snr_db(vec({1, 0}), vec({0, 0})), Error);
}

TEST_CASE("experiment: determinism, partition and worker independence") {
  const auto plan = small_plan();
  const auto a = run_experiment(plan, 1);
  const auto b = run_experiment(plan, 1);
  const auto c = run_experiment(plan, 3);
  REQUIRE(a.trials.size() == 2 * 2 * 3);
  REQUIRE(a.cells.size() == 4);
  CHECK(csv(a) == csv(b));
  CHECK(csv(a) == csv(c));
  CHECK(agg_json(a) == agg_json(c));
  for (const auto& cell : a.cells) {
    CHECK(cell.trials == 3);
    CHECK(std::abs(cell.success_rate + cell.model_failure_rate + cell.algorithm_failure_rate - 1.0) <= 1e-12);
  }
  // the same instance is shared by every (p, q) pair
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.trials[i].seed == a.trials[6 + i].seed);
}

TEST_CASE("experiment: single cell, single trial") {
  auto plan = small_plan();
  plan.sparsity_grid = {3};
  plan.param_grid = {{0.5, 2.0}};
  plan.trials_per_cell = 1;
  const auto r = run_experiment(plan);
  const std::string out = csv(r);
  CHECK(lines(out) == 2);
  CHECK(out.rfind("p,q,k,trial,seed,outcome,rel_error,snr_db,alpha_final,outer_iters,wall_ms\n", 0) == 0);
  CHECK(r.trials[0].wall_ms == 0.0);
}

TEST_CASE("experiment: timeouts are recorded as algorithm failures") {
  auto plan = small_plan();
  plan.timeout_s = 1e-9;
  plan.record_timing = true;
  const auto r = run_experiment(plan);
  for (const auto& t : r.trials) {
    CHECK(t.outcome == Outcome::kAlgorithmFailure);
    CHECK_FALSE(t.diagnostic.empty());
    CHECK(std::isnan(t.alpha_final));
  }
  for (const auto& c : r.cells) {
    CHECK(c.algorithm_failure_rate == 1.0);
    CHECK_FALSE(c.mean_snr_db_success.has_value());
  }
}

TEST_CASE("experiment: small-k cell at m=64, n=256") {
  ExperimentPlan plan;
  plan.matrix = {MatrixKind::kCorrelatedGaussian, 64, 256, 0.3, 1.0, 0};
  plan.signal = gaussian_protocol(64, 256, 0.3, 4, 0).second;
  plan.sparsity_grid = {4};
  plan.param_grid = {{0.5, 1.5}};
  plan.trials_per_cell = 20;
  plan.base_seed = 2024;
  const auto r = run_experiment(plan);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.cells[0].success_rate >= 0.9);
}

TEST_CASE("experiment: success rate does not grow with k beyond noise") {
  ExperimentPlan plan;
  plan.matrix = {MatrixKind::kCorrelatedGaussian, 24, 72, 0.3, 1.0, 0};
  plan.signal = gaussian_protocol(24, 72, 0.3, 1, 0).second;
  plan.sparsity_grid = {2, 5, 8, 11, 14};
  plan.param_grid = {{0.5, 1.5}, {1.0, 1.5}};
  plan.trials_per_cell = 20;
  plan.base_seed = 9;
  const auto r = run_experiment(plan);
  for (std::size_t i = 0; i + 1 < r.cells.size(); ++i) {
    const auto& a = r.cells[i];
    const auto& b = r.cells[i + 1];
    if (a.p != b.p || a.q != b.q) continue;
    const double n = a.trials;
    const double se = std::sqrt(std::max(a.success_rate * (1 - a.success_rate), 0.05 * 0.95) / n +
                                std::max(b.success_rate * (1 - b.success_rate), 0.05 * 0.95) / n);
    CHECK(b.success_rate <= a.success_rate + 1.96 * se);
  }
}

TEST_CASE("aggregate tables") {
  auto plan = small_plan();
  plan.param_grid = {{0.5, 1.5}, {0.5, 2.0}, {1.0, 1.5}, {1.0, 2.0}, {0.7, 3.0}, {0.7, 1.5}};
  plan.trials_per_cell = 1;
  const auto r = run_experiment(plan);
  std::ostringstream heat;
  write_heatmap_csv(heat, r.cells);
  CHECK(lines(heat.str()) == 1 + 6);
  CHECK(heat.str().rfind("p,q,success_rate,model_failure_rate,algorithm_failure_rate,mean_snr_db,mean_snr_db_success\n",
                         0) == 0);
  const std::string j = agg_json(r);
  CHECK(j.find("\"p=0.5,q=1.5,k=2\"") != std::string::npos);
  CHECK(j.find("success_rate") != std::string::npos);
}

TEST_CASE("aggregate over hand-made records") {
  std::vector<TrialRecord> recs(4);
  for (int i = 0; i < 4; ++i) {
    recs[i].p = 0.5;
    recs[i].q = 2.0;
    recs[i].k = 3;
    recs[i].trial = i;
  }
  recs[0].outcome = Outcome::kSuccess;
  recs[0].snr_db = 100;
  recs[1].outcome = Outcome::kSuccess;
  recs[1].snr_db = 200;
  recs[2].outcome = Outcome::kModelFailure;
  recs[2].snr_db = 10;
  recs[3].outcome = Outcome::kAlgorithmFailure;
  recs[3].snr_db = 0;
  const auto cells = aggregate(recs);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].success_rate == 0.5);
  CHECK(cells[0].model_failure_rate == 0.25);
  CHECK(cells[0].algorithm_failure_rate == 0.25);
  CHECK(cells[0].mean_snr_db == doctest::Approx(77.5));
  REQUIRE(cells[0].mean_snr_db_success);
  CHECK(*cells[0].mean_snr_db_success == doctest::Approx(150.0));
}

TEST_CASE("plan JSON") {
  const auto plan = parse_plan(R"({
    "matrix": {"kind": "oversampled_dct", "m": 16, "n": 64, "F": 2},
    "sparsity_grid": [2, 3],
    "p_grid": [0.5, 1.0], "q_grid": [1.5, 2, 3],
    "trials_per_cell": 4, "base_seed": 3})");
  CHECK(plan.param_grid.size() == 6);
  CHECK(plan.signal.min_separation == 4);
  CHECK(plan.signal.mag_high == 1e5);
  CHECK(plan.trials_per_cell == 4);
  CHECK(plan.success_tol == 1e-3);

  const auto g = parse_plan(R"({"matrix": {"m": 16, "n": 64, "r": 0.3}, "sparsity_grid": [2],
    "param_grid": [[0.5, 1.5]], "success_tol": 1e-4, "solver": {"outer_max": 5}})");
  CHECK(g.signal.mag_high == 1e3);
  CHECK(g.success_tol == 1e-4);
  CHECK(g.solver.outer_max == 5);

  CHECK_THROWS_AS(parse_plan("{}"), Error);
  CHECK_THROWS_AS(parse_plan(R"({"matrix": {"m": 16, "n": 64}, "sparsity_grid": [2]})"), Error);
  CHECK_THROWS_AS(parse_plan(R"({"matrix": {"m": 16, "n": 64}, "sparsity_grid": [], "param_grid": [[0.5, 2]]})"),
                  Error);
  CHECK_THROWS_AS(parse_plan(R"({"matrix": {"m": 16, "n": 64}, "sparsity_grid": [2], "param_grid": [[0.5]]})"),
                  Error);
  CHECK_THROWS_AS(
      parse_plan(R"({"matrix": {"m": 16, "n": 64}, "sparsity_grid": [2], "param_grid": [[0.5, 2]], "trials_per_cell": 0})"),
      Error);
  CHECK_THROWS_AS(parse_plan("nope"), Error);
}

#include "ratiosparse/harness.hpp"

#include "ratiosparse/io.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

namespace ratiosparse {

namespace {

using nlohmann::json;

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kModelFailure: return "model_failure";
    case Outcome::kAlgorithmFailure: return "algorithm_failure";
  }
  return "unknown";
}

SignalSpec signal_for(const ExperimentPlan& plan, int k, std::uint64_t trial_seed) {
  SignalSpec s = plan.signal;
  s.n = plan.matrix.n;
  s.k = k;
  s.seed = derive_seed(trial_seed, 1);
  return s;
}

MatrixSpec matrix_for(const ExperimentPlan& plan, std::uint64_t trial_seed) {
  MatrixSpec m = plan.matrix;
  m.seed = derive_seed(trial_seed, 0);
  return m;
}

}  // namespace

std::string to_string(Outcome o) { return outcome_name(o); }

void ExperimentPlan::validate() const {
  matrix.validate();
  if (sparsity_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "plan: empty sparsity grid");
  if (param_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "plan: empty parameter grid");
  if (trials_per_cell < 1) throw Error(ErrorCode::kInvalidArgument, "plan: trials_per_cell must be >= 1");
  if (!(success_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "plan: success_tol must be positive");
  if (!(timeout_s >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "plan: timeout_s must be >= 0");
  solver.validate();
  for (const auto& [p, q] : param_grid) RatioParams(p, q);
  for (int k : sparsity_grid) signal_for(*this, k, 0).validate();
}

ExperimentPlan parse_plan(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("plan: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "plan: expected an object");
  ExperimentPlan plan;
  try {
    if (!j.contains("matrix")) throw Error(ErrorCode::kParse, "plan: missing matrix");
    plan.matrix = parse_matrix_spec(j.at("matrix").dump());
    if (plan.matrix.kind == MatrixKind::kCorrelatedGaussian) {
      plan.signal = gaussian_protocol(plan.matrix.m, plan.matrix.n, plan.matrix.r, 1, 0).second;
    } else {
      plan.signal = dct_protocol(plan.matrix.m, plan.matrix.n, plan.matrix.F, 1, 0).second;
    }
    if (j.contains("signal")) plan.signal = parse_signal_spec(j.at("signal").dump(), plan.signal);
    if (!j.contains("sparsity_grid")) throw Error(ErrorCode::kParse, "plan: missing sparsity_grid");
    plan.sparsity_grid = j.at("sparsity_grid").get<std::vector<int>>();
    if (j.contains("param_grid")) {
      for (const auto& pq : j.at("param_grid")) {
        const auto v = pq.get<std::vector<double>>();
        if (v.size() != 2) throw Error(ErrorCode::kParse, "plan: param_grid entries must be [p, q]");
        plan.param_grid.emplace_back(v[0], v[1]);
      }
    } else if (j.contains("p_grid") && j.contains("q_grid")) {
      for (double p : j.at("p_grid").get<std::vector<double>>()) {
        for (double q : j.at("q_grid").get<std::vector<double>>()) plan.param_grid.emplace_back(p, q);
      }
    } else {
      throw Error(ErrorCode::kParse, "plan: need param_grid or p_grid and q_grid");
    }
    if (j.contains("trials_per_cell")) plan.trials_per_cell = j.at("trials_per_cell").get<int>();
    if (j.contains("base_seed")) plan.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("success_tol")) plan.success_tol = j.at("success_tol").get<double>();
    if (j.contains("solver")) plan.solver = parse_dlpa_config(j.at("solver").dump());
    if (j.contains("timeout_s")) plan.timeout_s = j.at("timeout_s").get<double>();
    if (j.contains("record_timing")) plan.record_timing = j.at("record_timing").get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("plan: ") + e.what());
  }
  try {
    plan.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  return plan;
}

double outcome_feasibility_tolerance(const VectorRef& b) { return 1e-6 * (1.0 + b.norm()); }

Outcome classify_outcome(const VectorRef& x_hat, const ProblemInstance& instance, const RatioParams& params,
                         double success_tol, std::optional<double> feas_tol) {
  const auto& gt = instance.ground_truth();
  if (!gt) throw Error(ErrorCode::kInvalidArgument, "classify_outcome: instance has no ground truth");
  if (x_hat.size() != gt->size()) throw Error(ErrorCode::kInvalidArgument, "classify_outcome: length mismatch");
  const double rel = (x_hat - *gt).norm() / gt->norm();
  if (rel < success_tol) return Outcome::kSuccess;
  const double tol = feas_tol.value_or(outcome_feasibility_tolerance(instance.b()));
  if (x_hat.allFinite() && x_hat.norm() > 0.0 && instance.residual_norm(x_hat) <= tol &&
      ratio_objective(x_hat, params) < ratio_objective(*gt, params)) {
    return Outcome::kModelFailure;
  }
  return Outcome::kAlgorithmFailure;
}

double snr_db(const VectorRef& x_hat, const VectorRef& x_star) {
  const double ref = x_star.norm();
  if (!(ref > 0.0)) throw Error(ErrorCode::kDomain, "snr_db: zero ground truth");
  const double err = (x_hat - x_star).norm();
  if (!(err > 0.0)) return kSnrCapDb;
  return std::min(kSnrCapDb, 20.0 * std::log10(ref / err));
}

ExperimentResult run_experiment(const ExperimentPlan& plan, int workers) {
  plan.validate();
  if (workers < 1) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
  const std::size_t npq = plan.param_grid.size();
  const std::size_t nk = plan.sparsity_grid.size();
  const auto ntrial = static_cast<std::size_t>(plan.trials_per_cell);
  std::vector<TrialRecord> records(npq * nk * ntrial);
  const auto slot = [&](std::size_t ipq, std::size_t ik, std::size_t t) { return (ipq * nk + ik) * ntrial + t; };

  DlpaConfig cfg = plan.solver;
  cfg.time_limit_s = plan.timeout_s;

  // One task per (k, trial): the instance and its l1 start are shared by all
  // (p, q) pairs.
  const auto run_task = [&](std::size_t task) {
    const std::size_t ik = task / ntrial;
    const std::size_t t = task % ntrial;
    const int k = plan.sparsity_grid[ik];
    const std::uint64_t seed = derive_seed(plan.base_seed, static_cast<std::uint64_t>(k), t);
    for (std::size_t ipq = 0; ipq < npq; ++ipq) {
      auto& r = records[slot(ipq, ik, t)];
      r.p = plan.param_grid[ipq].first;
      r.q = plan.param_grid[ipq].second;
      r.k = k;
      r.trial = static_cast<int>(t);
      r.seed = seed;
    }
    std::optional<ProblemInstance> inst;
    std::optional<AffineProjector> proj;
    std::optional<Vector> start;
    std::string setup_error;
    try {
      inst.emplace(gen_instance(matrix_for(plan, seed), signal_for(plan, k, seed)));
      proj.emplace(inst->A());
      start = l1_baseline_detailed(*inst, *proj, cfg).x;
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (std::size_t ipq = 0; ipq < npq; ++ipq) {
      auto& r = records[slot(ipq, ik, t)];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (!setup_error.empty()) throw Error(ErrorCode::kInternal, setup_error);
        const RatioParams params(r.p, r.q);
        const SolveResult res = dlpa_solve(*inst, *proj, params, cfg, start);
        const Vector& gt = *inst->ground_truth();
        r.rel_error = (res.x_hat - gt).norm() / gt.norm();
        r.snr_db = snr_db(res.x_hat, gt);
        r.alpha_final = res.alpha_final;
        r.outer_iters = res.iterations;
        r.outcome = classify_outcome(res.x_hat, *inst, params, plan.success_tol);
      } catch (const std::exception& e) {
        r.outcome = Outcome::kAlgorithmFailure;
        r.rel_error = 1.0;
        r.snr_db = 0.0;
        r.alpha_final = std::nan("");
        r.outer_iters = 0;
        r.diagnostic = e.what();
      }
      if (plan.record_timing) {
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
    }
  };

  const std::size_t ntasks = nk * ntrial;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t task = next++; task < ntasks; task = next++) run_task(task);
  };
  const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), ntasks);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.trials = std::move(records);
  result.cells = aggregate(result.trials);
  return result;
}

std::vector<CellAggregate> aggregate(const std::vector<TrialRecord>& trials) {
  std::vector<CellAggregate> cells;
  std::map<std::tuple<double, double, int>, std::size_t> index;
  std::vector<int> successes;
  std::vector<double> snr_success;
  for (const auto& r : trials) {
    const auto key = std::make_tuple(r.p, r.q, r.k);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      cells.push_back({});
      cells.back().p = r.p;
      cells.back().q = r.q;
      cells.back().k = r.k;
      successes.push_back(0);
      snr_success.push_back(0.0);
    }
    auto& c = cells[it->second];
    ++c.trials;
    c.mean_snr_db += r.snr_db;
    c.mean_rel_error += r.rel_error;
    c.mean_outer_iters += r.outer_iters;
    switch (r.outcome) {
      case Outcome::kSuccess:
        c.success_rate += 1.0;
        ++successes[it->second];
        snr_success[it->second] += r.snr_db;
        break;
      case Outcome::kModelFailure: c.model_failure_rate += 1.0; break;
      case Outcome::kAlgorithmFailure: c.algorithm_failure_rate += 1.0; break;
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    const double n = c.trials;
    c.success_rate /= n;
    c.model_failure_rate /= n;
    c.algorithm_failure_rate /= n;
    c.mean_snr_db /= n;
    c.mean_rel_error /= n;
    c.mean_outer_iters /= n;
    if (successes[i] > 0) c.mean_snr_db_success = snr_success[i] / successes[i];
  }
  return cells;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials) {
  os << "p,q,k,trial,seed,outcome,rel_error,snr_db,alpha_final,outer_iters,wall_ms\n";
  for (const auto& r : trials) {
    os << io::format_double(r.p) << ',' << io::format_double(r.q) << ',' << r.k << ',' << r.trial << ','
       << r.seed << ',' << outcome_name(r.outcome) << ',' << io::format_double(r.rel_error) << ','
       << io::format_double(r.snr_db) << ',' << io::format_double(r.alpha_final) << ',' << r.outer_iters
       << ',' << io::format_double(r.wall_ms) << '\n';
  }
}

namespace {

std::string cell_key(double p, double q, int k) {
  return "p=" + io::format_double(p) + ",q=" + io::format_double(q) + ",k=" + std::to_string(k);
}

}  // namespace

void write_aggregate_json(std::ostream& os, const std::vector<CellAggregate>& cells) {
  json out = json::object();
  for (const auto& c : cells) {
    json cell{{"p", c.p},
              {"q", c.q},
              {"k", c.k},
              {"trials", c.trials},
              {"success_rate", c.success_rate},
              {"model_failure_rate", c.model_failure_rate},
              {"algorithm_failure_rate", c.algorithm_failure_rate},
              {"mean_snr_db", c.mean_snr_db},
              {"mean_snr_db_success", c.mean_snr_db_success ? json(*c.mean_snr_db_success) : json(nullptr)},
              {"mean_rel_error", c.mean_rel_error},
              {"mean_outer_iters", c.mean_outer_iters}};
    out[cell_key(c.p, c.q, c.k)] = std::move(cell);
  }
  os << out.dump(2) << '\n';
}

void write_heatmap_csv(std::ostream& os, const std::vector<CellAggregate>& cells) {
  struct Acc {
    int cells = 0;
    double success = 0, model = 0, algorithm = 0, snr = 0, snr_success = 0;
    int success_cells = 0;
  };
  std::vector<std::pair<double, double>> order;
  std::map<std::pair<double, double>, Acc> acc;
  for (const auto& c : cells) {
    const auto key = std::make_pair(c.p, c.q);
    if (!acc.count(key)) order.push_back(key);
    auto& a = acc[key];
    ++a.cells;
    a.success += c.success_rate;
    a.model += c.model_failure_rate;
    a.algorithm += c.algorithm_failure_rate;
    a.snr += c.mean_snr_db;
    if (c.mean_snr_db_success) {
      a.snr_success += *c.mean_snr_db_success;
      ++a.success_cells;
    }
  }
  os << "p,q,success_rate,model_failure_rate,algorithm_failure_rate,mean_snr_db,mean_snr_db_success\n";
  for (const auto& key : order) {
    const auto& a = acc[key];
    os << io::format_double(key.first) << ',' << io::format_double(key.second) << ','
       << io::format_double(a.success / a.cells) << ',' << io::format_double(a.model / a.cells) << ','
       << io::format_double(a.algorithm / a.cells) << ',' << io::format_double(a.snr / a.cells) << ',';
    if (a.success_cells > 0) os << io::format_double(a.snr_success / a.success_cells);
    os << '\n';
  }
}

}  // namespace ratiosparse

#include "ratiosparse/ratiosparse.h"

#include "ratiosparse/core.hpp"
#include "ratiosparse/datagen.hpp"
#include "ratiosparse/harness.hpp"
#include "ratiosparse/io.hpp"
#include "ratiosparse/prox.hpp"
#include "ratiosparse/solver.hpp"
#include "ratiosparse/theory.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct rs_instance {
  ratiosparse::ProblemInstance value;
};

struct rs_result {
  ratiosparse::SolveResult value;
  std::string stop_reason;
  std::vector<double> trace;
};

namespace {

using namespace ratiosparse;

thread_local std::string g_last_error;

rs_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return RS_ERR_INVALID_ARGUMENT;
    case ErrorCode::kDomain: return RS_ERR_DOMAIN;
    case ErrorCode::kInfeasible: return RS_ERR_INFEASIBLE;
    case ErrorCode::kIo: return RS_ERR_IO;
    case ErrorCode::kParse: return RS_ERR_PARSE;
    case ErrorCode::kNotApplicable: return RS_ERR_NOT_APPLICABLE;
    case ErrorCode::kNotConverged: return RS_ERR_NOT_CONVERGED;
    case ErrorCode::kInternal: return RS_ERR_INTERNAL;
  }
  return RS_ERR_INTERNAL;
}

rs_status fail(rs_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
rs_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return RS_OK;
  } catch (const Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RS_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

DlpaConfig from_c(const rs_solver_config* c) {
  DlpaConfig d;
  if (!c) return d;
  d.beta_prox = c->beta_prox;
  d.rho0 = c->rho0;
  d.rho_growth = c->rho_growth;
  d.rho_max = c->rho_max;
  d.outer_max = c->outer_max;
  d.outer_tol = c->outer_tol;
  d.inner_max = c->inner_max;
  d.inner_tol = c->inner_tol;
  d.adaptive_beta = c->adaptive_beta != 0;
  d.time_limit_s = c->time_limit_s;
  return d;
}

void to_c(const DlpaConfig& d, rs_solver_config* c) {
  c->beta_prox = d.beta_prox;
  c->rho0 = d.rho0;
  c->rho_growth = d.rho_growth;
  c->rho_max = d.rho_max;
  c->outer_max = d.outer_max;
  c->outer_tol = d.outer_tol;
  c->inner_max = d.inner_max;
  c->inner_tol = d.inner_tol;
  c->adaptive_beta = d.adaptive_beta ? 1 : 0;
  c->time_limit_s = d.time_limit_s;
}

void copy_out(const Vector& v, double* out, size_t len) {
  require(out != nullptr, "output buffer is NULL");
  require(len >= static_cast<size_t>(v.size()), "output buffer too small");
  std::copy(v.data(), v.data() + v.size(), out);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

extern "C" {

const char* rs_version(void) { return "0.1.0"; }

const char* rs_status_string(rs_status status) {
  switch (status) {
    case RS_OK: return "ok";
    case RS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RS_ERR_DOMAIN: return "domain error";
    case RS_ERR_INFEASIBLE: return "infeasible";
    case RS_ERR_IO: return "i/o error";
    case RS_ERR_PARSE: return "parse error";
    case RS_ERR_NOT_APPLICABLE: return "not applicable";
    case RS_ERR_NOT_CONVERGED: return "not converged";
    case RS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* rs_last_error(void) { return g_last_error.c_str(); }

void rs_solver_config_default(rs_solver_config* config) {
  if (config) to_c(DlpaConfig{}, config);
}

rs_status rs_solver_config_from_json(const char* json, rs_solver_config* config) {
  return guarded([&] {
    require(json && config, "NULL argument");
    to_c(parse_dlpa_config(json, from_c(config)), config);
  });
}

rs_status rs_instance_create(size_t m, size_t n, const double* A, const double* b, const double* x_star,
                             rs_instance** out) {
  return guarded([&] {
    require(A && b && out, "NULL argument");
    require(m > 0 && n > 0, "empty dimensions");
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ni = static_cast<Eigen::Index>(n);
    Matrix Am = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(A, mi, ni);
    Vector bv = Eigen::Map<const Vector>(b, mi);
    std::optional<Vector> gt;
    if (x_star) gt = Eigen::Map<const Vector>(x_star, ni);
    *out = new rs_instance{ProblemInstance(std::move(Am), std::move(bv), std::move(gt))};
  });
}

rs_status rs_instance_load(const char* dir, rs_instance** out) {
  return guarded([&] {
    require(dir && out, "NULL argument");
    *out = new rs_instance{io::load_instance(dir)};
  });
}

rs_status rs_instance_save(const rs_instance* instance, const char* dir) {
  return guarded([&] {
    require(instance && dir, "NULL argument");
    io::save_instance(instance->value, dir);
  });
}

void rs_instance_free(rs_instance* instance) { delete instance; }

rs_status rs_instance_dims(const rs_instance* instance, size_t* m, size_t* n) {
  return guarded([&] {
    require(instance && m && n, "NULL argument");
    *m = static_cast<size_t>(instance->value.rows());
    *n = static_cast<size_t>(instance->value.cols());
  });
}

int rs_instance_has_ground_truth(const rs_instance* instance) {
  return instance && instance->value.ground_truth().has_value() ? 1 : 0;
}

rs_status rs_instance_ground_truth(const rs_instance* instance, double* out, size_t len) {
  return guarded([&] {
    require(instance != nullptr, "NULL argument");
    const auto& gt = instance->value.ground_truth();
    if (!gt) throw Error(ErrorCode::kInvalidArgument, "instance has no ground truth");
    copy_out(*gt, out, len);
  });
}

rs_status rs_solve(const rs_instance* instance, double p, double q, const rs_solver_config* config,
                   const double* x0, rs_result** out) {
  return guarded([&] {
    require(instance && out, "NULL argument");
    std::optional<Vector> start;
    if (x0) start = Eigen::Map<const Vector>(x0, instance->value.cols());
    auto* r = new rs_result{dlpa_solve(instance->value, RatioParams(p, q), from_c(config), start), {}, {}};
    r->stop_reason = std::string(to_string(r->value.stop_reason));
    r->trace.push_back(r->value.alpha_initial);
    for (const auto& h : r->value.history) r->trace.push_back(h.alpha);
    *out = r;
  });
}

rs_status rs_l1_baseline(const rs_instance* instance, const rs_solver_config* config, double* out, size_t len) {
  return guarded([&] {
    require(instance != nullptr, "NULL argument");
    copy_out(l1_baseline_solve(instance->value, from_c(config)), out, len);
  });
}

rs_status rs_min_norm_feasible(const rs_instance* instance, double* out, size_t len) {
  return guarded([&] {
    require(instance != nullptr, "NULL argument");
    copy_out(min_norm_feasible(instance->value), out, len);
  });
}

void rs_result_free(rs_result* result) { delete result; }

size_t rs_result_size(const rs_result* result) {
  return result ? static_cast<size_t>(result->value.x_hat.size()) : 0;
}

rs_status rs_result_x(const rs_result* result, double* out, size_t len) {
  return guarded([&] {
    require(result != nullptr, "NULL argument");
    copy_out(result->value.x_hat, out, len);
  });
}

double rs_result_alpha(const rs_result* result) { return result ? result->value.alpha_final : std::nan(""); }

int rs_result_iterations(const rs_result* result) { return result ? result->value.iterations : 0; }

int rs_result_converged(const rs_result* result) { return result && result->value.converged ? 1 : 0; }

const char* rs_result_stop_reason(const rs_result* result) { return result ? result->stop_reason.c_str() : ""; }

double rs_result_stationarity(const rs_result* result) {
  return result ? result->value.stationarity_residual : std::nan("");
}

size_t rs_result_trace_length(const rs_result* result) { return result ? result->trace.size() : 0; }

rs_status rs_result_alpha_trace(const rs_result* result, double* out, size_t len) {
  return guarded([&] {
    require(result != nullptr, "NULL argument");
    copy_out(Eigen::Map<const Vector>(result->trace.data(), static_cast<Eigen::Index>(result->trace.size())),
             out, len);
  });
}

rs_status rs_result_to_json(const rs_result* result, const rs_instance* instance, char** out) {
  return guarded([&] {
    require(result && out, "NULL argument");
    const SolveResult& r = result->value;
    nlohmann::json j;
    j["x_hat"] = std::vector<double>(r.x_hat.data(), r.x_hat.data() + r.x_hat.size());
    j["alpha_initial"] = r.alpha_initial;
    j["alpha_final"] = r.alpha_final;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["stop_reason"] = result->stop_reason;
    j["stationarity_residual"] = r.stationarity_residual;
    j["beta_final"] = r.beta_final;
    j["initialization"] = std::string(to_string(r.initialization));
    j["max_feasibility_violation"] = r.max_feasibility_violation;
    j["step_sq_sum"] = r.step_sq_sum;
    j["bounded_iterates"] = r.bounded_iterates;
    j["alpha_trace"] = result->trace;
    auto history = nlohmann::json::array();
    for (const auto& h : r.history) {
      history.push_back({{"alpha", h.alpha},
                         {"delta", h.delta},
                         {"step_norm", h.step_norm},
                         {"x_norm", h.x_norm},
                         {"beta", h.beta},
                         {"inner_iterations", h.inner_iterations}});
    }
    j["history"] = std::move(history);
    if (instance && instance->value.ground_truth()) {
      const Vector& gt = *instance->value.ground_truth();
      require(gt.size() == r.x_hat.size(), "instance does not match the result");
      j["rel_error"] = (r.x_hat - gt).norm() / gt.norm();
      j["snr_db"] = snr_db(r.x_hat, gt);
    }
    *out = dup_string(j.dump(2));
  });
}

void rs_string_free(char* s) { std::free(s); }

rs_status rs_ratio_objective(const double* x, size_t n, double p, double q, double* out) {
  return guarded([&] {
    require(x && out && n > 0, "invalid argument");
    *out = ratio_objective(Eigen::Map<const Vector>(x, static_cast<Eigen::Index>(n)), RatioParams(p, q));
  });
}

rs_status rs_gst_apply(double t, double p, double rho, double* out) {
  return guarded([&] {
    require(out != nullptr, "NULL argument");
    *out = prox_lp(t, p, rho);
  });
}

rs_status rs_gst_threshold(double p, double rho, double* out) {
  return guarded([&] {
    require(out != nullptr, "NULL argument");
    *out = GstMap(GstParams{p, rho}).threshold();
  });
}

rs_status rs_bound_report(const rs_bound_input* input, rs_bound_output* out) {
  return guarded([&] {
    require(input && out, "NULL argument");
    TheoryInput in;
    in.params = RatioParams(input->p, input->q);
    in.k = input->k;
    in.t = input->t;
    in.beta = input->beta > 0.0 ? input->beta : worst_case_beta(in.params, input->k);
    in.delta_2k = input->delta_2k;
    in.delta_k = input->delta_k;
    in.delta_kt = input->delta_kt;
    in.theta_kt = input->theta_kt;
    in.epsilon = input->epsilon;
    in.n = static_cast<Eigen::Index>(input->n);
    const BoundReport r = bound_report(in);
    const double nan = std::nan("");
    *out = rs_bound_output{};
    out->z0 = r.z0;
    out->psi = r.psi;
    out->t1 = r.t1;
    out->t2 = r.t2;
    out->delta_new = r.delta_new;
    out->delta_zhu = r.delta_zhu;
    out->has_b_o = r.b_o.has_value();
    out->b_o = r.b_o.value_or(nan);
    out->has_b_z = r.b_z.has_value();
    out->b_z = r.b_z.value_or(nan);
    if (r.t6) {
      out->t6_applicable = r.t6->applicable();
      out->t6_eta = r.t6->eta;
      out->t6_tau = r.t6->tau;
      out->t6_psi = r.t6->psi;
      out->t6_c1 = r.t6->c1.value_or(nan);
      out->t6_c2 = r.t6->c2.value_or(nan);
    }
    if (r.t6rip) {
      out->t6rip_applicable = r.t6rip->applicable();
      out->t6rip_rho = r.t6rip->rho_p;
      out->t6rip_alpha = r.t6rip->alpha_pq;
      out->t6rip_eta = r.t6rip->eta;
      out->t6rip_tau = r.t6rip->tau;
      out->t6rip_psi = r.t6rip->psi;
      out->t6rip_cp = r.t6rip->c_p;
      out->t6rip_c1 = r.t6rip->c1.value_or(nan);
      out->t6rip_c2 = r.t6rip->c2.value_or(nan);
    }
  });
}

rs_status rs_theory_run_grid(const char* grid_json, const char* out_path, size_t* rows) {
  return guarded([&] {
    require(grid_json && out_path, "NULL argument");
    const auto result = run_theory_grid(parse_theory_grid(grid_json));
    std::ostringstream os;
    write_theory_csv(os, result);
    write_file(out_path, os.str());
    if (rows) *rows = result.size();
  });
}

rs_status rs_exact_ric(const double* A, size_t m, size_t n, int s, double* out) {
  return guarded([&] {
    require(A && out && m > 0 && n > 0, "invalid argument");
    const Matrix Am = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        A, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    *out = exact_ric(Am, s);
  });
}

rs_status rs_bench_run(const char* plan_json, const char* out_dir, const rs_bench_options* options,
                       char** summary) {
  return guarded([&] {
    require(plan_json && out_dir, "NULL argument");
    ExperimentPlan plan = parse_plan(plan_json);
    int workers = 1;
    if (options) {
      workers = options->workers;
      if (options->record_timing >= 0) plan.record_timing = options->record_timing != 0;
      if (options->override_seed) plan.base_seed = options->base_seed;
    }
    require(workers >= 1, "workers must be >= 1");
    const ExperimentResult result = run_experiment(plan, workers);

    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
    std::ostringstream trials, agg, heat;
    write_trials_csv(trials, result.trials);
    write_aggregate_json(agg, result.cells);
    write_heatmap_csv(heat, result.cells);
    write_file(dir / "trials.csv", trials.str());
    write_file(dir / "aggregate.json", agg.str());
    write_file(dir / "heatmap.csv", heat.str());

    if (summary) {
      std::ostringstream os;
      char line[160];
      std::snprintf(line, sizeof line, "%6s %6s %4s %7s %9s %9s %9s %10s\n", "p", "q", "k", "trials", "success",
                    "model", "algorithm", "snr_db");
      os << line;
      for (const auto& c : result.cells) {
        std::snprintf(line, sizeof line, "%6.3g %6.3g %4d %7d %9.3f %9.3f %9.3f %10.2f\n", c.p, c.q, c.k,
                      c.trials, c.success_rate, c.model_failure_rate, c.algorithm_failure_rate, c.mean_snr_db);
        os << line;
      }
      *summary = dup_string(os.str());
    }
  });
}

rs_status rs_datagen(const char* matrix_json, const char* signal_json, int use_seed, uint64_t seed,
                     const char* out_dir) {
  return guarded([&] {
    require(matrix_json && signal_json && out_dir, "NULL argument");
    MatrixSpec ms = parse_matrix_spec(matrix_json);
    SignalSpec base = ms.kind == MatrixKind::kCorrelatedGaussian
                          ? gaussian_protocol(ms.m, ms.n, ms.r, 1, 0).second
                          : dct_protocol(ms.m, ms.n, ms.F, 1, 0).second;
    SignalSpec ss = parse_signal_spec(signal_json, base);
    if (use_seed) {
      ms.seed = derive_seed(seed, 0);
      ss.seed = derive_seed(seed, 1);
    }
    io::save_instance(gen_instance(ms, ss), out_dir);
  });
}

}  // extern "C"

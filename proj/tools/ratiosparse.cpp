// ratiosparse command-line tool. Talks to the library through the C API only.
//
// Exit codes: 0 success, 1 usage or input error, 2 non-convergence.

#include "ratiosparse/ratiosparse.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;

enum class LogLevel { kQuiet, kError, kInfo, kDebug };
LogLevel g_log = LogLevel::kInfo;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void info(const std::string& msg) {
  if (g_log >= LogLevel::kInfo) std::cerr << msg << '\n';
}

void debug(const std::string& msg) {
  if (g_log >= LogLevel::kDebug) std::cerr << "debug: " << msg << '\n';
}

// Non-OK status -> exit code, with the library's message on stderr.
int report(rs_status st, const std::string& context) {
  if (g_log >= LogLevel::kError) {
    std::cerr << "error: " << context << ": " << rs_status_string(st);
    const std::string detail = rs_last_error();
    if (!detail.empty()) std::cerr << ": " << detail;
    std::cerr << '\n';
  }
  return st == RS_ERR_NOT_CONVERGED ? kExitNotConverged : kExitInput;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Arguments holding JSON may be inline ("{...}") or a file path.
std::string json_arg(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  return read_text(arg);
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    json j = json::parse(json_arg(path));
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

template <typename T>
void fill_from(const json& cfg, const char* key, T& target, bool flag_set) {
  if (flag_set || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

// Spec or sub-config stored under `key`: an object, or a string naming a file.
std::string section(const json& cfg, const char* key) {
  const json& v = cfg.at(key);
  if (v.is_string()) return json_arg(v.get<std::string>());
  return v.dump();
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("RATIO_SPARSE_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used, 10);
    if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("RATIO_SPARSE_SEED is not an unsigned integer: ") + s);
  }
}

// flag > environment > file.
std::optional<std::uint64_t> resolve_seed(const CLI::Option* flag, std::uint64_t flag_value, const json& cfg) {
  if (flag->count() > 0) return flag_value;
  if (auto e = env_seed()) return e;
  if (cfg.contains("seed")) {
    try {
      return cfg.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      throw InputError(std::string("config key 'seed': ") + e.what());
    }
  }
  return std::nullopt;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text << '\n';
}

// ---- solve ---------------------------------------------------------------

struct SolveArgs {
  std::string config;
  std::string instance;
  double p = 0.5;
  double q = 1.5;
  double beta = 0.0;
  int outer_max = 0;
  std::string solver;
  std::string out;
  CLI::Option* p_opt = nullptr;
  CLI::Option* q_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* outer_opt = nullptr;
  CLI::Option* instance_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

int cmd_solve(SolveArgs& a) {
  const json cfg = load_config(a.config);
  fill_from(cfg, "instance", a.instance, a.instance_opt->count() > 0);
  fill_from(cfg, "p", a.p, a.p_opt->count() > 0);
  fill_from(cfg, "q", a.q, a.q_opt->count() > 0);
  fill_from(cfg, "out", a.out, a.out_opt->count() > 0);
  if (a.instance.empty()) throw InputError("solve: --instance is required");

  rs_solver_config sc;
  rs_solver_config_default(&sc);
  if (cfg.contains("solver")) {
    if (rs_status st = rs_solver_config_from_json(section(cfg, "solver").c_str(), &sc)) return report(st, "config");
  }
  if (!a.solver.empty()) {
    if (rs_status st = rs_solver_config_from_json(json_arg(a.solver).c_str(), &sc)) return report(st, "--solver");
  }
  if (a.beta_opt->count() > 0) sc.beta_prox = a.beta;
  if (a.outer_opt->count() > 0) sc.outer_max = a.outer_max;

  rs_instance* inst = nullptr;
  if (rs_status st = rs_instance_load(a.instance.c_str(), &inst)) return report(st, "loading " + a.instance);
  debug("loaded " + a.instance);

  rs_result* res = nullptr;
  rs_status st = rs_solve(inst, a.p, a.q, &sc, nullptr, &res);
  if (st != RS_OK) {
    rs_instance_free(inst);
    return report(st, "solve");
  }
  char* text = nullptr;
  st = rs_result_to_json(res, inst, &text);
  const bool converged = rs_result_converged(res) != 0;
  const std::string reason = rs_result_stop_reason(res);
  const int iters = rs_result_iterations(res);
  const double alpha = rs_result_alpha(res);
  rs_result_free(res);
  rs_instance_free(inst);
  if (st != RS_OK) return report(st, "serializing result");
  const std::string body = text;
  rs_string_free(text);
  write_output(a.out, body);

  char line[160];
  std::snprintf(line, sizeof line, "solve: %s after %d outer iterations, alpha = %.6g", reason.c_str(), iters,
                alpha);
  info(line);
  return converged ? kExitOk : kExitNotConverged;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string config;
  std::string plan;
  std::string out;
  int workers = 1;
  std::uint64_t seed = 0;
  bool timing = false;
  CLI::Option* plan_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* timing_opt = nullptr;
};

int cmd_bench(BenchArgs& a) {
  const json cfg = load_config(a.config);
  std::string plan_text;
  if (a.plan_opt->count() > 0) {
    plan_text = json_arg(a.plan);
  } else if (cfg.contains("plan")) {
    plan_text = section(cfg, "plan");
  } else {
    throw InputError("bench: --plan is required");
  }
  fill_from(cfg, "out", a.out, a.out_opt->count() > 0);
  fill_from(cfg, "workers", a.workers, a.workers_opt->count() > 0);
  if (a.out.empty()) throw InputError("bench: --out is required");
  if (a.workers < 1) throw InputError("bench: workers must be >= 1");

  rs_bench_options opt{};
  opt.workers = a.workers;
  opt.record_timing = a.timing_opt->count() > 0 ? 1 : -1;
  if (cfg.contains("record_timing") && a.timing_opt->count() == 0) {
    opt.record_timing = cfg.at("record_timing").get<bool>() ? 1 : 0;
  }
  if (auto seed = resolve_seed(a.seed_opt, a.seed, cfg)) {
    opt.override_seed = 1;
    opt.base_seed = *seed;
    debug("base seed " + std::to_string(*seed));
  }
  char* summary = nullptr;
  if (rs_status st = rs_bench_run(plan_text.c_str(), a.out.c_str(), &opt, &summary)) return report(st, "bench");
  std::cout << summary;
  rs_string_free(summary);
  info("bench: results written to " + a.out);
  return kExitOk;
}

// ---- theory --------------------------------------------------------------

struct TheoryArgs {
  std::string config;
  std::string grid;
  std::string out;
  CLI::Option* grid_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

int cmd_theory(TheoryArgs& a) {
  const json cfg = load_config(a.config);
  std::string grid_text;
  if (a.grid_opt->count() > 0) {
    grid_text = json_arg(a.grid);
  } else if (cfg.contains("grid")) {
    grid_text = section(cfg, "grid");
  } else {
    throw InputError("theory: --grid is required");
  }
  fill_from(cfg, "out", a.out, a.out_opt->count() > 0);
  if (a.out.empty()) throw InputError("theory: --out is required");
  std::size_t rows = 0;
  if (rs_status st = rs_theory_run_grid(grid_text.c_str(), a.out.c_str(), &rows)) return report(st, "theory");
  info("theory: " + std::to_string(rows) + " rows written to " + a.out);
  return kExitOk;
}

// ---- datagen -------------------------------------------------------------

struct DatagenArgs {
  std::string config;
  std::string matrix;
  std::string signal;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* matrix_opt = nullptr;
  CLI::Option* signal_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

int cmd_datagen(DatagenArgs& a) {
  const json cfg = load_config(a.config);
  std::string matrix_text, signal_text = "{}";
  if (a.matrix_opt->count() > 0) {
    matrix_text = json_arg(a.matrix);
  } else if (cfg.contains("matrix")) {
    matrix_text = section(cfg, "matrix");
  } else {
    throw InputError("datagen: --matrix is required");
  }
  if (a.signal_opt->count() > 0) {
    signal_text = json_arg(a.signal);
  } else if (cfg.contains("signal")) {
    signal_text = section(cfg, "signal");
  }
  fill_from(cfg, "out", a.out, a.out_opt->count() > 0);
  if (a.out.empty()) throw InputError("datagen: --out is required");
  const auto seed = resolve_seed(a.seed_opt, a.seed, cfg);
  if (rs_status st = rs_datagen(matrix_text.c_str(), signal_text.c_str(), seed ? 1 : 0, seed.value_or(0),
                                a.out.c_str())) {
    return report(st, "datagen");
  }
  info("datagen: instance written to " + a.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse recovery by lp/lq ratio minimization"};
  app.set_version_flag("--version", std::string(rs_version()));
  app.require_subcommand(1);

  std::string level = "info";
  app.add_option("--log-level", level, "quiet, error, info or debug")
      ->check(CLI::IsMember({"quiet", "error", "info", "debug"}));

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("--config", sa.config, "JSON run configuration (file or inline)");
  sa.instance_opt = solve->add_option("--instance", sa.instance, "Instance directory");
  sa.p_opt = solve->add_option("--p", sa.p, "Numerator exponent, 0 < p <= 1");
  sa.q_opt = solve->add_option("--q", sa.q, "Denominator exponent, q > 1");
  sa.beta_opt = solve->add_option("--beta", sa.beta, "Proximal weight");
  sa.outer_opt = solve->add_option("--outer-max", sa.outer_max, "Outer iteration cap");
  solve->add_option("--solver", sa.solver, "Solver configuration JSON (file or inline)");
  sa.out_opt = solve->add_option("--out", sa.out, "Result JSON path (default: standard output)");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a Monte Carlo experiment plan");
  bench->add_option("--config", ba.config, "JSON run configuration (file or inline)");
  ba.plan_opt = bench->add_option("--plan", ba.plan, "Plan JSON (file or inline)");
  ba.out_opt = bench->add_option("--out", ba.out, "Output directory");
  ba.workers_opt = bench->add_option("--workers", ba.workers, "Worker threads")->check(CLI::PositiveNumber);
  ba.seed_opt = bench->add_option("--seed", ba.seed, "Base seed override");
  ba.timing_opt = bench->add_flag("--record-timing", ba.timing, "Record wall time per trial");

  TheoryArgs ta;
  auto* theory = app.add_subcommand("theory", "Evaluate recovery bounds over a grid");
  theory->add_option("--config", ta.config, "JSON run configuration (file or inline)");
  ta.grid_opt = theory->add_option("--grid", ta.grid, "Grid JSON (file or inline)");
  ta.out_opt = theory->add_option("--out", ta.out, "Output CSV path");

  DatagenArgs da;
  auto* datagen = app.add_subcommand("datagen", "Generate one instance");
  datagen->add_option("--config", da.config, "JSON run configuration (file or inline)");
  da.matrix_opt = datagen->add_option("--matrix", da.matrix, "Matrix spec JSON (file or inline)");
  da.signal_opt = datagen->add_option("--signal", da.signal, "Signal spec JSON (file or inline)");
  da.out_opt = datagen->add_option("--out", da.out, "Output instance directory");
  da.seed_opt = datagen->add_option("--seed", da.seed, "Seed for matrix and signal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (level == "quiet") g_log = LogLevel::kQuiet;
  else if (level == "error") g_log = LogLevel::kError;
  else if (level == "debug") g_log = LogLevel::kDebug;

  try {
    if (solve->parsed()) return cmd_solve(sa);
    if (bench->parsed()) return cmd_bench(ba);
    if (theory->parsed()) return cmd_theory(ta);
    if (datagen->parsed()) return cmd_datagen(da);
  } catch (const InputError& e) {
    if (g_log >= LogLevel::kError) std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    if (g_log >= LogLevel::kError) std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

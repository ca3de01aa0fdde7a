// Command-line front end: train, evaluate, solve-inner, validate-queueing,
// gen-trace. Every run prints one JSON object on stdout; failures print
// {"error": {"code": ..., "message": ...}} and exit nonzero.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ranslice/config.hpp"
#include "ranslice/errors.hpp"
#include "ranslice/harness.hpp"
#include "ranslice/inner_solver.hpp"

namespace fs = std::filesystem;
using namespace ranslice;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kLibraryError = 1, kUsageError = 2, kValidationFailed = 3, kInternalError = 4 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string algo;
  std::optional<std::size_t> episodes;
  std::vector<std::string> checkpoints;
  std::string trace;
  std::string instance;
  std::uint64_t arrivals = 1000000;
  std::optional<std::size_t> days;
};

void print_error(const std::string& code, const std::string& message) {
  std::cout << json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

ExperimentConfig resolve_config(const Options& o, const fs::path& fallback_text_source = {}) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = load_config(o.config);
  } else if (!fallback_text_source.empty()) {
    cfg = parse_config(json::parse(read_text(fallback_text_source)).at("config").get<std::string>());
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.algo.empty()) cfg.algorithm = algorithm_from_string(o.algo);
  if (o.episodes) cfg.learner.episodes = *o.episodes;
  validate(cfg);
  return cfg;
}

fs::path base_dir(const Options& o) { return o.config.empty() ? fs::path{} : fs::path(o.config).parent_path(); }

fs::path out_dir(const Options& o) {
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

int run_train(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto dir = out_dir(o);
  auto env = build_environment(cfg, base_dir(o));
  const auto split = split_days(env.num_days());
  const auto t0 = std::chrono::steady_clock::now();
  auto result = train(env, cfg.algorithm, cfg.learner, split.train, cfg.seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_text(dir / "config.toml", to_toml(cfg));
  write_text(dir / "checkpoint.json", make_checkpoint(result.agent, cfg).dump() + "\n");
  write_learning_curve(dir / "learning_curve.csv", result.curve);
  write_text(dir / "seed.txt", std::to_string(cfg.seed) + "\n");

  json summary{{"command", "train"},
               {"algorithm", to_string(cfg.algorithm)},
               {"seed", cfg.seed},
               {"episodes", result.curve.size()},
               {"train_days", split.train},
               {"updates", result.agent.updates},
               {"final_mean_cost", result.curve.empty() ? 0.0 : result.curve.back().mean_cost},
               {"seconds", secs},
               {"out", dir.string()}};
  std::cout << summary.dump() << std::endl;
  return kOk;
}

int run_evaluate(const Options& o) {
  const fs::path first = o.checkpoints.empty() ? fs::path{} : fs::path(o.checkpoints.front());
  const auto cfg = resolve_config(o, first);
  const auto dir = out_dir(o);
  // Checkpoints are matched against cfg; the trace override only changes
  // what is rolled out.
  auto env_cfg = cfg;
  if (!o.trace.empty()) env_cfg.trace.source = fs::absolute(o.trace).string();
  auto env = build_environment(env_cfg, base_dir(o));
  const auto split = split_days(env.num_days());

  std::vector<Agent> agents;
  for (const auto& path : o.checkpoints) {
    agents.push_back(load_checkpoint(json::parse(read_text(path)), cfg));
  }
  if (agents.empty() && cfg.algorithm != Algorithm::Random) {
    throw Error(ErrorCode::ConfigError, "evaluate: --checkpoint is required unless --algo random");
  }
  bool has_random = false;
  for (const auto& a : agents) has_random = has_random || a.algorithm == Algorithm::Random;
  if (!has_random) {
    std::mt19937_64 rng(cfg.seed);
    agents.push_back(Agent::create(Algorithm::Random, cfg.learner, env.state_size(), env.topology().num_bs(),
                                   env.split_size(), rng));
  }

  EvaluationReport report;
  for (const auto& a : agents) report.policies.push_back(evaluate_agent(env, a, split.eval, cfg.seed));

  write_windows_csv(dir / "windows.csv", report);
  auto rj = report_json(report);
  rj["eval_days"] = split.eval;
  rj["seed"] = cfg.seed;
  write_text(dir / "report.json", rj.dump(2) + "\n");
  emit_plot_data(report, dir);

  rj["command"] = "evaluate";
  rj["out"] = dir.string();
  std::cout << rj.dump() << std::endl;
  return kOk;
}

int run_solve_inner(const Options& o) {
  if (o.instance.empty()) throw Error(ErrorCode::ConfigError, "solve-inner: --instance is required");
  json j;
  try {
    j = json::parse(read_text(o.instance));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instance: ") + e.what());
  }
  const auto inst = inner_instance_from_json(j);
  const auto sol = inst.service == kDelaySensitive ? solve_delay_sensitive(inst) : solve_delay_tolerant(inst);
  json out{{"command", "solve-inner"},
           {"service", inst.service == kDelaySensitive ? "u" : "e"},
           {"feasible", sol.feasible},
           {"beta", std::vector<double>(sol.beta.data(), sol.beta.data() + sol.beta.size())},
           {"objective_delay_s", sol.objective_delay_s},
           {"iterations", sol.iterations},
           {"kkt_residual", sol.kkt_residual}};
  if (!o.out.empty()) write_text(out_dir(o) / "solution.json", out.dump(2) + "\n");
  std::cout << out.dump() << std::endl;
  return kOk;
}

int run_validate_queueing(const Options& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cases = validate_queueing(o.arrivals, o.seed.value_or(1));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool pass = true;
  json list = json::array();
  for (const auto& c : cases) {
    pass = pass && c.pass;
    list.push_back(to_json(c));
  }
  json out{{"command", "validate-queueing"}, {"arrivals", o.arrivals}, {"cases", list}, {"pass", pass},
           {"seconds", secs}};
  if (!o.out.empty()) write_text(out_dir(o) / "queueing.json", out.dump(2) + "\n");
  std::cout << out.dump() << std::endl;
  return pass ? kOk : kValidationFailed;
}

int run_gen_trace(const Options& o) {
  auto cfg = resolve_config(o);
  if (o.seed) cfg.trace.seed = *o.seed;
  if (o.days) cfg.trace.days = *o.days;
  cfg.trace.source = "synthetic";
  validate(cfg);
  const auto dir = out_dir(o);
  const auto topo = build_topology(cfg.topology);
  const auto trace = build_trace(cfg, topo);
  write_trace_csv(dir / "trace.csv", trace);
  std::cout << json{{"command", "gen-trace"},  {"seed", cfg.trace.seed}, {"days", cfg.trace.days},
                    {"windows", trace.size()}, {"zones", topo.num_zones}, {"out", (dir / "trace.csv").string()}}
                   .dump()
            << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ranslice: two-layer RAN slicing simulator and learners"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::string> algos{"raws", "ddpg", "td3", "raws-wo", "random"};

  auto common = [&](CLI::App* sub, bool with_algo) {
    sub->add_option("--config", o.config, "experiment config (TOML)")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "run seed");
    sub->add_option("--out", o.out, "output directory");
    if (with_algo) sub->add_option("--algo", o.algo, "algorithm")->check(CLI::IsMember(algos));
  };

  auto* train_cmd = app.add_subcommand("train", "train a policy on the first third of the trace days");
  common(train_cmd, true);
  train_cmd->add_option("--episodes", o.episodes, "override learner.episodes");

  auto* eval_cmd = app.add_subcommand("evaluate", "roll out frozen policies on the remaining days");
  common(eval_cmd, true);
  eval_cmd->add_option("--checkpoint", o.checkpoints, "checkpoint.json (repeatable)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--trace", o.trace, "trace CSV replacing the configured source")->check(CLI::ExistingFile);

  auto* solve_cmd = app.add_subcommand("solve-inner", "solve one workload-distribution instance");
  common(solve_cmd, false);
  solve_cmd->add_option("--instance", o.instance, "instance JSON")->check(CLI::ExistingFile);

  auto* queue_cmd = app.add_subcommand("validate-queueing", "compare analytic delays with simulation");
  common(queue_cmd, false);
  queue_cmd->add_option("--arrivals", o.arrivals, "simulated arrivals per queue");

  auto* trace_cmd = app.add_subcommand("gen-trace", "write a synthetic density trace");
  common(trace_cmd, false);
  trace_cmd->add_option("--days", o.days, "override trace.days");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return kUsageError;
  }

  try {
    if (train_cmd->parsed()) return run_train(o);
    if (eval_cmd->parsed()) return run_evaluate(o);
    if (solve_cmd->parsed()) return run_solve_inner(o);
    if (queue_cmd->parsed()) return run_validate_queueing(o);
    if (trace_cmd->parsed()) return run_gen_trace(o);
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return kLibraryError;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return kInternalError;
  }
  return kUsageError;
}

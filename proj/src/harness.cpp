#include "ranslice/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ranslice/errors.hpp"
#include "ranslice/oracles.hpp"
#include "ranslice/service_model.hpp"

namespace ranslice {

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> data(m.data(), m.data() + m.size());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorCode::ParseError, "checkpoint matrix has the wrong number of entries");
  }
  return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json to_json(const Mlp& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    layers.push_back({{"weights", matrix_json(net.weights[l])}, {"biases", matrix_json(net.biases[l])}});
  }
  return {{"head", net.head == Head::Linear ? "linear" : "softmax_groups"},
          {"group_size", net.group_size},
          {"layers", layers}};
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp net;
  const auto head = j.at("head").get<std::string>();
  if (head != "linear" && head != "softmax_groups") throw Error(ErrorCode::ParseError, "unknown head " + head);
  net.head = head == "linear" ? Head::Linear : Head::SoftmaxGroups;
  net.group_size = j.at("group_size").get<Eigen::Index>();
  for (const auto& layer : j.at("layers")) {
    net.weights.push_back(matrix_from_json(layer.at("weights")));
    net.biases.push_back(matrix_from_json(layer.at("biases")).col(0));
  }
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    const bool chained = l == 0 || net.weights[l].cols() == net.weights[l - 1].rows();
    if (!chained || net.biases[l].size() != net.weights[l].rows()) {
      throw Error(ErrorCode::DimensionMismatch, "checkpoint layer shapes do not chain");
    }
  }
  if (net.weights.empty()) throw Error(ErrorCode::ParseError, "checkpoint network has no layers");
  return net;
}

nlohmann::json make_checkpoint(const Agent& agent, const ExperimentConfig& config) {
  nlohmann::json j;
  j["format"] = "ranslice-checkpoint-1";
  j["config_hash"] = hash_hex(config_hash(config));
  j["config"] = to_toml(config);
  j["algorithm"] = to_string(agent.algorithm);
  j["seed"] = config.seed;
  j["updates"] = agent.updates;
  j["actor"] = to_json(agent.actor);
  j["critic"] = to_json(agent.critic);
  if (agent.algorithm == Algorithm::Td3) j["critic2"] = to_json(agent.critic2);
  return j;
}

Agent load_checkpoint(const nlohmann::json& checkpoint, const ExperimentConfig& config) {
  try {
    const auto stored = checkpoint.at("config_hash").get<std::string>();
    const auto expected = hash_hex(config_hash(config));
    if (stored != expected) {
      throw Error(ErrorCode::CheckpointMismatch,
                  "checkpoint was trained with config " + stored + ", current config is " + expected);
    }
    Agent a;
    a.algorithm = algorithm_from_string(checkpoint.at("algorithm").get<std::string>());
    a.config = config.learner;
    a.updates = checkpoint.at("updates").get<std::size_t>();
    a.actor = mlp_from_json(checkpoint.at("actor"));
    a.critic = mlp_from_json(checkpoint.at("critic"));
    if (checkpoint.contains("critic2")) a.critic2 = mlp_from_json(checkpoint.at("critic2"));
    a.actor_target = a.actor;
    a.critic_target = a.critic;
    a.critic2_target = a.critic2;
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed checkpoint: ") + e.what());
  }
}

PolicyReport summarize_policy(const std::string& policy, std::vector<WindowRecord> records) {
  PolicyReport r;
  r.policy = policy;
  r.records = std::move(records);
  if (r.records.empty()) return r;

  double cost = 0.0, u = 0.0, delay = 0.0;
  std::vector<double> delays;
  std::size_t days = 0;
  std::size_t last_episode = static_cast<std::size_t>(-1);
  double running = 0.0;
  for (const auto& w : r.records) {
    if (w.episode != last_episode) {
      ++days;
      last_episode = w.episode;
    }
    cost -= w.reward;
    u += w.info.total_cost;
    running += w.info.total_cost;
    r.cumulative_cost.push_back(running);
    r.violations += w.info.qos_violation ? 1 : 0;
    r.unstable_u_windows += w.info.feasible_u ? 0 : 1;
    r.unstable_e_windows += w.info.feasible_e ? 0 : 1;
    r.delay_exceeded_windows += w.info.qos_violation && w.info.feasible_u && w.info.feasible_e ? 1 : 0;
    if (std::isfinite(w.info.delay_s)) {
      delays.push_back(w.info.delay_s);
      delay += w.info.delay_s;
    }
    r.mean_components.operation += w.info.cost.operation;
    r.mean_components.reconfiguration += w.info.cost.reconfiguration;
    r.mean_components.violation += w.info.cost.violation;
    r.mean_components.revenue += w.info.cost.revenue;
  }
  const auto n = static_cast<double>(r.records.size());
  r.num_days = days;
  r.mean_daily_cost = cost / static_cast<double>(days);
  r.mean_daily_u = u / static_cast<double>(days);
  r.violation_probability = static_cast<double>(r.violations) / n;
  r.mean_delay_s = delays.empty() ? 0.0 : delay / static_cast<double>(delays.size());
  r.mean_components.operation /= n;
  r.mean_components.reconfiguration /= n;
  r.mean_components.violation /= n;
  r.mean_components.revenue /= n;

  std::sort(delays.begin(), delays.end());
  for (std::size_t i = 0; i < delays.size(); ++i) {
    // Ties collapse onto the last occurrence so the CDF is a function.
    if (i + 1 < delays.size() && delays[i + 1] == delays[i]) continue;
    r.delay_cdf.emplace_back(delays[i], static_cast<double>(i + 1) / static_cast<double>(delays.size()));
  }
  return r;
}

PolicyReport evaluate_agent(Environment& env, const Agent& agent, const std::vector<std::size_t>& days,
                            std::uint64_t seed) {
  return summarize_policy(to_string(agent.algorithm), evaluate_policy(env, agent, days, seed));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_learning_curve(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& curve) {
  std::string s = "episode,day,mean_reward,mean_cost,violation_rate\n";
  for (const auto& m : curve) {
    s += std::to_string(m.episode) + "," + std::to_string(m.day) + "," + format_double(m.mean_reward) + "," +
         format_double(m.mean_cost) + "," + format_double(m.violation_rate) + "\n";
  }
  write_text(path, s);
}

void write_windows_csv(const std::filesystem::path& path, const EvaluationReport& report) {
  std::string s =
      "policy,day,step,window,reward,total_cost,operation,reconfiguration,violation,revenue,delay_s,"
      "feasible_u,feasible_e,qos_violation,shaping_impossible\n";
  for (const auto& p : report.policies) {
    for (const auto& w : p.records) {
      const auto& i = w.info;
      s += p.policy + "," + std::to_string(w.day) + "," + std::to_string(w.step) + "," +
           std::to_string(i.window_index) + "," + format_double(w.reward) + "," + format_double(i.total_cost) + "," +
           format_double(i.cost.operation) + "," + format_double(i.cost.reconfiguration) + "," +
           format_double(i.cost.violation) + "," + format_double(i.cost.revenue) + "," + format_double(i.delay_s) +
           "," + (i.feasible_u ? "1" : "0") + "," + (i.feasible_e ? "1" : "0") + "," + (i.qos_violation ? "1" : "0") +
           "," + (i.shaping_impossible ? "1" : "0") + "\n";
    }
  }
  write_text(path, s);
}

nlohmann::json report_json(const EvaluationReport& report) {
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& p : report.policies) {
    policies.push_back({{"policy", p.policy},
                        {"days", p.num_days},
                        {"windows", p.records.size()},
                        {"mean_daily_cost", p.mean_daily_cost},
                        {"mean_daily_total_cost_u", p.mean_daily_u},
                        {"violation_probability", p.violation_probability},
                        {"violations", p.violations},
                        {"unstable_u_windows", p.unstable_u_windows},
                        {"unstable_e_windows", p.unstable_e_windows},
                        {"delay_exceeded_windows", p.delay_exceeded_windows},
                        {"mean_delay_s", p.mean_delay_s},
                        {"mean_cost_components",
                         {{"operation", p.mean_components.operation},
                          {"reconfiguration", p.mean_components.reconfiguration},
                          {"violation", p.mean_components.violation},
                          {"revenue", p.mean_components.revenue}}}});
  }
  return {{"policies", policies}};
}

void emit_plot_data(const EvaluationReport& report, const std::filesystem::path& out_dir) {
  std::string cum = "policy,window,cumulative_cost\n";
  std::string cdf = "policy,delay_s,fraction\n";
  std::string table = "policy,windows,violations,violation_probability,unstable_u_windows,unstable_e_windows,"
      "delay_exceeded_windows\n";
  for (const auto& p : report.policies) {
    for (std::size_t t = 0; t < p.cumulative_cost.size(); ++t) {
      cum += p.policy + "," + std::to_string(t) + "," + format_double(p.cumulative_cost[t]) + "\n";
    }
    for (const auto& [d, f] : p.delay_cdf) cdf += p.policy + "," + format_double(d) + "," + format_double(f) + "\n";
    table += p.policy + "," + std::to_string(p.records.size()) + "," + std::to_string(p.violations) + "," +
             format_double(p.violation_probability) + "," + std::to_string(p.unstable_u_windows) + "," +
             std::to_string(p.unstable_e_windows) + "," +
             std::to_string(p.delay_exceeded_windows) + "\n";
  }
  write_text(out_dir / "cumulative_cost.csv", cum);
  write_text(out_dir / "delay_cdf.csv", cdf);
  write_text(out_dir / "violation_table.csv", table);
}

std::vector<QueueingCase> validate_queueing(std::uint64_t arrivals, std::uint64_t seed) {
  std::vector<QueueingCase> cases;
  const double mu = 20.0;
  for (auto [util, tol] : {std::pair{0.5, 0.02}, std::pair{0.9, 0.03}}) {
    QueueingCase c;
    c.name = "mm1_utilization_" + format_double(util);
    c.utilization = util;
    c.analytic_s = mm1_sojourn(mu, util * mu);
    c.simulated_s = oracles::simulate_mm1(util * mu, mu, arrivals, seed + cases.size()).mean_sojourn_s;
    c.tolerance = tol;
    cases.push_back(c);
  }

  {
    const ExperimentConfig cfg;
    const auto topo = build_topology(cfg.topology);
    const auto window =
        make_window(0, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(topo.num_zones), 40.0), cfg.env.flow);
    const auto profile =
        build_load_profile(topo, window, cfg.env.services, cfg.env.radio, compute_rates(cfg.env.radio, topo));
    auto decision = SlicingDecision::all_ones(topo.num_bs(), topo.num_overlapped());
    decision.spectrum.setConstant(6);
    decision.compute.setConstant(6);
    const double handover =
        handover_delay(topo, window, cfg.env.services[kDelaySensitive], cfg.env.radio.handover_delay_s);

    QueueingCase c;
    c.name = "highway_network_density_40";
    c.analytic_s = average_service_delay(profile, decision, handover);
    const Eigen::VectorXd load = profile.arrivals(kDelaySensitive, decision.split.col(kDelaySensitive));
    double sim = 0.0;
    std::uint64_t stream = seed + 100;
    for (Eigen::Index n = 0; n < load.size(); ++n) {
      const double mu_s = profile.spectrum_service_rate(n, kDelaySensitive, decision.spectrum(n, kDelaySensitive));
      const double mu_c = profile.compute_service_rate(kDelaySensitive, decision.compute(n, kDelaySensitive));
      c.utilization = std::max({c.utilization, load[n] / mu_s, load[n] / mu_c});
      const double d_s = oracles::simulate_mm1(load[n], mu_s, arrivals, stream++).mean_sojourn_s;
      const double d_c = oracles::simulate_mm1(load[n], mu_c, arrivals, stream++).mean_sojourn_s;
      sim += load[n] / profile.total_workload[kDelaySensitive] * (d_s + d_c);
    }
    c.simulated_s = handover + sim;
    c.tolerance = 0.05;
    cases.push_back(c);
  }

  for (auto& c : cases) {
    c.relative_error = std::abs(c.simulated_s - c.analytic_s) / c.analytic_s;
    c.pass = c.relative_error <= c.tolerance;
  }
  return cases;
}

nlohmann::json to_json(const QueueingCase& c) {
  return {{"name", c.name},           {"utilization", c.utilization},       {"analytic_s", c.analytic_s},
          {"simulated_s", c.simulated_s}, {"relative_error", c.relative_error}, {"tolerance", c.tolerance},
          {"pass", c.pass}};
}

}  // namespace ranslice

#include "ranslice/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <variant>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

using Number = double;
using Array = std::vector<double>;
using Value = std::variant<Number, bool, std::string, Array>;

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // Keep floats recognisable as floats.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, key + ": " + what);
}

struct Field {
  std::string key;  // section.name
  std::function<void(ExperimentConfig&, const Value&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Access>
Field real(std::string key, Access access) {
  return {key,
          [key, access](ExperimentConfig& c, const Value& v) {
            if (!std::holds_alternative<Number>(v)) config_error(key, "expected a number");
            access(c) = std::get<Number>(v);
          },
          [access](const ExperimentConfig& c) { return format_number(access(const_cast<ExperimentConfig&>(c))); }};
}

template <class T, class Access>
Field integer(std::string key, Access access) {
  return {key,
          [key, access](ExperimentConfig& c, const Value& v) {
            if (!std::holds_alternative<Number>(v)) config_error(key, "expected an integer");
            const double d = std::get<Number>(v);
            if (d != std::floor(d) || d < 0.0 || d > 9.007199254740992e15) {
              config_error(key, "expected a non-negative integer");
            }
            access(c) = static_cast<T>(d);
          },
          [access](const ExperimentConfig& c) {
            return std::to_string(access(const_cast<ExperimentConfig&>(c)));
          }};
}

template <class Access>
Field real_array(std::string key, Access access) {
  return {key,
          [key, access](ExperimentConfig& c, const Value& v) {
            if (!std::holds_alternative<Array>(v)) config_error(key, "expected an array of numbers");
            access(c) = std::get<Array>(v);
          },
          [access](const ExperimentConfig& c) {
            std::string s = "[";
            const auto& a = access(const_cast<ExperimentConfig&>(c));
            for (std::size_t i = 0; i < a.size(); ++i) s += (i ? ", " : "") + format_number(a[i]);
            return s + "]";
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    using C = ExperimentConfig;
    std::vector<Field> f;
    f.push_back(real("topology.road_length_km", [](C& c) -> double& { return c.topology.road_length_km; }));
    f.push_back(real("topology.zone_length_km", [](C& c) -> double& { return c.topology.zone_length_km; }));
    f.push_back(real_array("topology.bs_positions_km", [](C& c) -> std::vector<double>& { return c.topology.bs_positions_km; }));
    f.push_back(real("topology.coverage_radius_km", [](C& c) -> double& { return c.topology.coverage_radius_km; }));

    f.push_back(real("flow.free_flow_speed_kmh", [](C& c) -> double& { return c.env.flow.free_flow_speed_kmh; }));
    f.push_back(real("flow.max_density", [](C& c) -> double& { return c.env.flow.max_density; }));

    const char* names[kNumServices] = {"services.u", "services.e"};
    for (Eigen::Index k = 0; k < kNumServices; ++k) {
      const std::string p = names[k];
      f.push_back(real(p + ".task_size_bits", [k](C& c) -> double& { return c.env.services[k].task_size_bits; }));
      f.push_back(real(p + ".compute_cycles", [k](C& c) -> double& { return c.env.services[k].compute_cycles; }));
      f.push_back(real(p + ".arrival_rate", [k](C& c) -> double& { return c.env.services[k].arrival_rate; }));
      if (k != kDelaySensitive) continue;
      const std::string key = p + ".max_delay_s";
      f.push_back({key,
                   [key](C& c, const Value& v) {
                     if (!std::holds_alternative<Number>(v)) config_error(key, "expected a number");
                     c.env.services[kDelaySensitive].max_delay_s = std::get<Number>(v);
                   },
                   [](const C& c) { return format_number(c.env.services[kDelaySensitive].max_delay_s.value_or(0.0)); }});
    }

    f.push_back(real("radio.subcarrier_bw_hz", [](C& c) -> double& { return c.env.radio.subcarrier_bw_hz; }));
    f.push_back(real("radio.vm_cpu_hz", [](C& c) -> double& { return c.env.radio.vm_cpu_hz; }));
    f.push_back(real("radio.handover_delay_s", [](C& c) -> double& { return c.env.radio.handover_delay_s; }));
    f.push_back(real("radio.tx_power_w", [](C& c) -> double& { return c.env.radio.tx_power_w; }));
    f.push_back(real("radio.noise_dbm_per_hz", [](C& c) -> double& { return c.env.radio.noise_dbm_per_hz; }));
    f.push_back(real("radio.min_distance_km", [](C& c) -> double& { return c.env.radio.min_distance_km; }));
    f.push_back(real_array("radio.rate_override_bps", [](C& c) -> std::vector<double>& { return c.env.radio.rate_override_bps; }));

    f.push_back(integer<int>("capacity.spectrum", [](C& c) -> int& { return c.env.spectrum_capacity; }));
    f.push_back(integer<int>("capacity.compute", [](C& c) -> int& { return c.env.compute_capacity; }));

    f.push_back(real("cost.operation_spectrum", [](C& c) -> double& { return c.env.weights.operation_spectrum; }));
    f.push_back(real("cost.operation_compute", [](C& c) -> double& { return c.env.weights.operation_compute; }));
    f.push_back(real("cost.reconfig_spectrum", [](C& c) -> double& { return c.env.weights.reconfig_spectrum; }));
    f.push_back(real("cost.reconfig_compute", [](C& c) -> double& { return c.env.weights.reconfig_compute; }));
    f.push_back(real("cost.violation", [](C& c) -> double& { return c.env.weights.violation; }));
    f.push_back(real("cost.revenue", [](C& c) -> double& { return c.env.weights.revenue; }));
    f.push_back(real("cost.infeasibility", [](C& c) -> double& { return c.env.weights.infeasibility; }));

    f.push_back(real("learner.actor_lr", [](C& c) -> double& { return c.learner.actor_lr; }));
    f.push_back(real("learner.critic_lr", [](C& c) -> double& { return c.learner.critic_lr; }));
    {
      const std::string key = "learner.hidden";
      f.push_back({key,
                   [key](C& c, const Value& v) {
                     if (!std::holds_alternative<Array>(v)) config_error(key, "expected an array of layer widths");
                     c.learner.hidden.clear();
                     for (double w : std::get<Array>(v)) {
                       if (w != std::floor(w) || w < 1.0) config_error(key, "layer widths must be positive integers");
                       c.learner.hidden.push_back(static_cast<Eigen::Index>(w));
                     }
                   },
                   [](const C& c) {
                     std::string s = "[";
                     for (std::size_t i = 0; i < c.learner.hidden.size(); ++i) {
                       s += (i ? ", " : "") + std::to_string(c.learner.hidden[i]);
                     }
                     return s + "]";
                   }});
    }
    f.push_back(real("learner.gamma", [](C& c) -> double& { return c.learner.gamma; }));
    f.push_back(real("learner.tau", [](C& c) -> double& { return c.learner.tau; }));
    f.push_back(real("learner.sigma", [](C& c) -> double& { return c.learner.sigma; }));
    f.push_back(integer<std::size_t>("learner.minibatch", [](C& c) -> std::size_t& { return c.learner.minibatch; }));
    f.push_back(integer<std::size_t>("learner.buffer_capacity", [](C& c) -> std::size_t& { return c.learner.buffer_capacity; }));
    f.push_back(integer<std::size_t>("learner.episodes", [](C& c) -> std::size_t& { return c.learner.episodes; }));
    f.push_back(integer<std::size_t>("learner.policy_delay", [](C& c) -> std::size_t& { return c.learner.policy_delay; }));
    f.push_back(real("learner.target_noise", [](C& c) -> double& { return c.learner.target_noise; }));
    f.push_back(real("learner.noise_clip", [](C& c) -> double& { return c.learner.noise_clip; }));
    f.push_back(real("learner.reward_scale", [](C& c) -> double& { return c.learner.reward_scale; }));
    f.push_back(real("learner.grad_clip", [](C& c) -> double& { return c.learner.grad_clip; }));
    f.push_back(real("learner.uniform_pull", [](C& c) -> double& { return c.learner.uniform_pull; }));
    f.push_back(real("learner.output_init_scale", [](C& c) -> double& { return c.learner.output_init_scale; }));

    {
      const std::string key = "trace.source";
      f.push_back({key,
                   [key](C& c, const Value& v) {
                     if (!std::holds_alternative<std::string>(v)) config_error(key, "expected a string");
                     c.trace.source = std::get<std::string>(v);
                   },
                   [](const C& c) { return quote(c.trace.source); }});
    }
    f.push_back(integer<std::uint64_t>("trace.seed", [](C& c) -> std::uint64_t& { return c.trace.seed; }));
    f.push_back(integer<std::size_t>("trace.days", [](C& c) -> std::size_t& { return c.trace.days; }));
    f.push_back(integer<std::size_t>("trace.windows_per_day", [](C& c) -> std::size_t& { return c.trace.profile.windows_per_day; }));
    f.push_back(real("trace.base_density", [](C& c) -> double& { return c.trace.profile.base_density; }));
    f.push_back(real("trace.diurnal_amplitude", [](C& c) -> double& { return c.trace.profile.diurnal_amplitude; }));
    f.push_back(real("trace.phase_rad", [](C& c) -> double& { return c.trace.profile.phase_rad; }));
    f.push_back(real("trace.hotspot_center_km", [](C& c) -> double& { return c.trace.profile.hotspot_center_km; }));
    f.push_back(real("trace.hotspot_peak", [](C& c) -> double& { return c.trace.profile.hotspot_peak; }));
    f.push_back(real("trace.hotspot_width_km", [](C& c) -> double& { return c.trace.profile.hotspot_width_km; }));
    f.push_back(real("trace.noise_std", [](C& c) -> double& { return c.trace.profile.noise_std; }));

    f.push_back(integer<std::uint64_t>("run.seed", [](C& c) -> std::uint64_t& { return c.seed; }));
    {
      const std::string key = "run.algorithm";
      f.push_back({key,
                   [key](C& c, const Value& v) {
                     if (!std::holds_alternative<std::string>(v)) config_error(key, "expected a string");
                     try {
                       c.algorithm = algorithm_from_string(std::get<std::string>(v));
                     } catch (const Error& e) {
                       config_error(key, e.what());
                     }
                   },
                   [](const C& c) { return quote(to_string(c.algorithm)); }});
    }
    return f;
  }();
  return table;
}

// ---- parsing ----

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& text, double& out) {
  std::string t;
  for (char c : text) {
    if (c != '_') t += c;
  }
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  if (t == "inf") {
    out = HUGE_VAL;
    return true;
  }
  if (t == "-inf") {
    out = -HUGE_VAL;
    return true;
  }
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(t.data(), end, out);
  return !t.empty() && res.ec == std::errc() && res.ptr == end;
}

Value parse_value(const std::string& key, const std::string& text) {
  if (text.empty()) config_error(key, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') config_error(key, "unterminated string");
    std::string s;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) ++i;
      s += text[i];
    }
    return s;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '[') {
    if (text.back() != ']') config_error(key, "unterminated array");
    Array a;
    std::stringstream ss(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;  // trailing comma
      double d = 0.0;
      if (!parse_number(item, d)) config_error(key, "bad array element '" + item + "'");
      a.push_back(d);
    }
    return a;
  }
  double d = 0.0;
  if (!parse_number(text, d)) config_error(key, "cannot parse value '" + text + "'");
  return d;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) config_error(key, what);
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  env.services[kDelaySensitive] = {0.6e6, 6e8, 1.0, 0.1};
  env.services[kDelayTolerant] = {2e6, 2e8, 1.0, std::nullopt};
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key[f.key] = &f;

  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) config_error(where, "bad section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(where, "expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    const auto it = by_key.find(key);
    if (it == by_key.end()) config_error(key, "unknown key (" + where + ")");
    if (seen.count(key)) config_error(key, "duplicate key (" + where + ")");
    seen[key] = line_no;
    it->second->set(config, parse_value(key, trim(line.substr(eq + 1))));
  }
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_toml(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const auto dot = f.key.rfind('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      out += (out.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  const auto& t = c.topology;
  require(t.road_length_km > 0.0, "topology.road_length_km", "must be positive");
  require(t.zone_length_km > 0.0 && t.zone_length_km <= t.road_length_km, "topology.zone_length_km",
          "must be positive and at most the road length");
  require(!t.bs_positions_km.empty(), "topology.bs_positions_km", "needs at least one base station");
  for (double x : t.bs_positions_km) {
    require(x >= 0.0 && x <= t.road_length_km, "topology.bs_positions_km", "positions must lie on the road");
  }
  require(t.coverage_radius_km > 0.0, "topology.coverage_radius_km", "must be positive");

  require(c.env.flow.free_flow_speed_kmh > 0.0, "flow.free_flow_speed_kmh", "must be positive");
  require(c.env.flow.max_density > 0.0, "flow.max_density", "must be positive");

  const char* names[kNumServices] = {"services.u", "services.e"};
  for (Eigen::Index k = 0; k < kNumServices; ++k) {
    const auto& s = c.env.services[k];
    const std::string p = names[k];
    require(s.task_size_bits > 0.0, p + ".task_size_bits", "must be positive");
    require(s.compute_cycles > 0.0, p + ".compute_cycles", "must be positive");
    require(s.arrival_rate > 0.0, p + ".arrival_rate", "must be positive");
  }
  require(c.env.services[kDelaySensitive].max_delay_s.value_or(0.0) > 0.0, "services.u.max_delay_s",
          "must be positive");

  const auto& r = c.env.radio;
  require(r.subcarrier_bw_hz > 0.0, "radio.subcarrier_bw_hz", "must be positive");
  require(r.vm_cpu_hz > 0.0, "radio.vm_cpu_hz", "must be positive");
  require(r.handover_delay_s >= 0.0, "radio.handover_delay_s", "must be non-negative");
  require(r.tx_power_w > 0.0, "radio.tx_power_w", "must be positive");
  require(std::isfinite(r.noise_dbm_per_hz), "radio.noise_dbm_per_hz", "must be finite");
  require(r.min_distance_km > 0.0, "radio.min_distance_km", "must be positive");
  require(r.rate_override_bps.empty() || r.rate_override_bps.size() == t.bs_positions_km.size(),
          "radio.rate_override_bps", "needs one rate per base station or none");
  for (double v : r.rate_override_bps) require(v > 0.0, "radio.rate_override_bps", "rates must be positive");

  require(c.env.spectrum_capacity >= kNumServices, "capacity.spectrum", "must be at least the number of services (2)");
  require(c.env.compute_capacity >= kNumServices, "capacity.compute", "must be at least the number of services (2)");

  const auto& w = c.env.weights;
  for (auto [key, v] : {std::pair{"cost.operation_spectrum", w.operation_spectrum},
                        std::pair{"cost.operation_compute", w.operation_compute},
                        std::pair{"cost.reconfig_spectrum", w.reconfig_spectrum},
                        std::pair{"cost.reconfig_compute", w.reconfig_compute},
                        std::pair{"cost.violation", w.violation}, std::pair{"cost.revenue", w.revenue},
                        std::pair{"cost.infeasibility", w.infeasibility}}) {
    require(v >= 0.0 && std::isfinite(v), key, "must be finite and non-negative");
  }

  const auto& l = c.learner;
  require(l.actor_lr >= 0.0, "learner.actor_lr", "must be non-negative");
  require(l.critic_lr >= 0.0, "learner.critic_lr", "must be non-negative");
  require(!l.hidden.empty(), "learner.hidden", "needs at least one hidden layer");
  require(l.gamma > 0.0 && l.gamma < 1.0, "learner.gamma", "must be in (0, 1)");
  require(l.tau > 0.0 && l.tau <= 1.0, "learner.tau", "must be in (0, 1]");
  require(l.sigma >= 0.0, "learner.sigma", "must be non-negative");
  require(l.minibatch > 0, "learner.minibatch", "must be positive");
  require(l.buffer_capacity >= l.minibatch, "learner.buffer_capacity", "must hold at least one minibatch");
  require(l.episodes > 0, "learner.episodes", "must be positive");
  require(l.policy_delay > 0, "learner.policy_delay", "must be positive");
  require(l.target_noise >= 0.0, "learner.target_noise", "must be non-negative");
  require(l.noise_clip >= 0.0, "learner.noise_clip", "must be non-negative");
  require(l.reward_scale > 0.0, "learner.reward_scale", "must be positive");
  require(l.grad_clip > 0.0, "learner.grad_clip", "must be positive");
  require(l.uniform_pull >= 0.0, "learner.uniform_pull", "must be non-negative");
  require(l.output_init_scale > 0.0, "learner.output_init_scale", "must be positive");

  require(!c.trace.source.empty(), "trace.source", "must be \"synthetic\" or a CSV path");
  require(c.trace.days >= 2, "trace.days", "needs at least two days for the train/eval split");
  require(c.trace.profile.windows_per_day > 0, "trace.windows_per_day", "must be positive");
  require(c.trace.profile.noise_std >= 0.0, "trace.noise_std", "must be non-negative");
  require(c.trace.profile.hotspot_width_km > 0.0, "trace.hotspot_width_km", "must be positive");
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::string text = to_toml(config);
  for (const char* header : {"[learner]", "[run]"}) {
    const auto b = text.find(header);
    const auto e = text.find("\n[", b);
    text.erase(b, e == std::string::npos ? std::string::npos : e + 1 - b);
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, hash >>= 4) s[static_cast<std::size_t>(i)] = digits[hash & 0xF];
  return s;
}

Topology build_topology(const TopologyConfig& config) {
  return build_topology(config.road_length_km, config.zone_length_km, config.bs_positions_km,
                        config.coverage_radius_km);
}

Trace build_trace(const ExperimentConfig& config, const Topology& topology, const std::filesystem::path& base_dir) {
  if (config.trace.source == "synthetic") {
    return generate_synthetic_trace(config.trace.seed, config.trace.days, config.trace.profile, topology,
                                    config.env.flow);
  }
  std::filesystem::path path(config.trace.source);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return load_trace_csv(path, config.env.flow, topology.num_zones);
}

Environment build_environment(const ExperimentConfig& config, const std::filesystem::path& base_dir) {
  auto topo = build_topology(config.topology);
  auto trace = build_trace(config, topo, base_dir);
  EnvConfig env = config.env;
  env.windows_per_episode = config.trace.profile.windows_per_day;
  return Environment(std::move(topo), std::move(trace), env);
}

DaySplit split_days(std::size_t num_days) {
  if (num_days < 2) throw Error(ErrorCode::ConfigError, "trace.days: needs at least two days for the train/eval split");
  DaySplit s;
  const std::size_t n_train = std::max<std::size_t>(1, num_days / 3);
  for (std::size_t d = 0; d < num_days; ++d) (d < n_train ? s.train : s.eval).push_back(d);
  return s;
}

}  // namespace ranslice

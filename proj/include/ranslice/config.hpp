#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ranslice/environment.hpp"
#include "ranslice/learner.hpp"
#include "ranslice/topology.hpp"
#include "ranslice/traffic.hpp"

namespace ranslice {

struct TopologyConfig {
  double road_length_km = 5.0;
  double zone_length_km = 0.2;
  std::vector<double> bs_positions_km{0.5, 1.5, 2.5, 3.5, 4.5};
  double coverage_radius_km = 0.8;
};

struct TraceConfig {
  std::string source = "synthetic";  // or a CSV path
  std::uint64_t seed = 1;
  std::size_t days = 21;
  SyntheticProfile profile;
};

// Every key of the config file maps onto one field here. Defaults are the
// highway scenario of the reference experiments.
struct ExperimentConfig {
  TopologyConfig topology;
  EnvConfig env;
  LearnerConfig learner;
  TraceConfig trace;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::Raws;

  ExperimentConfig();
};

// TOML subset: [section] and [section.sub] headers, key = value with
// numbers, booleans, "strings" and flat numeric arrays, # comments. Unknown
// keys and bad values raise ConfigError naming the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text: every key, fixed order, shortest round-trip numbers.
// parse_config(to_toml(c)) reproduces c exactly.
std::string to_toml(const ExperimentConfig& config);

void validate(const ExperimentConfig& config);

// FNV-1a 64 over the canonical text without the [learner] and [run]
// sections: the scenario a policy was trained for, not how it was trained.
std::uint64_t config_hash(const ExperimentConfig& config);
std::string hash_hex(std::uint64_t hash);

Topology build_topology(const TopologyConfig& config);
// Synthetic trace or the CSV named by trace.source (relative paths resolve
// against base_dir).
Trace build_trace(const ExperimentConfig& config, const Topology& topology,
                  const std::filesystem::path& base_dir = {});
Environment build_environment(const ExperimentConfig& config, const std::filesystem::path& base_dir = {});

struct DaySplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> eval;
};
// First third of the days (at least one) for training, the rest for evaluation.
// Fewer than two days throws ConfigError.
DaySplit split_days(std::size_t num_days);

}  // namespace ranslice

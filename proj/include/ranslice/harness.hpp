#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranslice/config.hpp"
#include "ranslice/learner.hpp"

namespace ranslice {

nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& j);

// Networks, optimiser-free. Carries the config hash, the canonical config
// text, the algorithm and the seed.
nlohmann::json make_checkpoint(const Agent& agent, const ExperimentConfig& config);
// Throws CheckpointMismatch when the stored hash differs from config_hash(config).
Agent load_checkpoint(const nlohmann::json& checkpoint, const ExperimentConfig& config);

struct PolicyReport {
  std::string policy;
  std::vector<WindowRecord> records;

  std::size_t num_days = 0;
  double mean_daily_cost = 0.0;    // sum of -reward per day, averaged
  double mean_daily_u = 0.0;       // sum of U per day, averaged
  double violation_probability = 0.0;
  std::size_t violations = 0;
  std::size_t unstable_u_windows = 0;     // no stable split for the delay-sensitive service
  std::size_t unstable_e_windows = 0;     // same for the delay-tolerant service
  std::size_t delay_exceeded_windows = 0; // both stable, delay above D_th
  double mean_delay_s = 0.0;             // over stable windows
  CostBreakdown mean_components;         // per window
  std::vector<double> cumulative_cost;   // prefix sums of U
  std::vector<std::pair<double, double>> delay_cdf;  // (delay, fraction), stable windows
};

struct EvaluationReport {
  std::vector<PolicyReport> policies;
};

PolicyReport summarize_policy(const std::string& policy, std::vector<WindowRecord> records);

// Frozen rollout over days, then summary.
PolicyReport evaluate_agent(Environment& env, const Agent& agent, const std::vector<std::size_t>& days,
                            std::uint64_t seed);

// Doubles in shortest round-trip form, infinities as inf.
std::string format_double(double v);

void write_learning_curve(const std::filesystem::path& path, const std::vector<EpisodeMetrics>& curve);
// One row per window per policy.
void write_windows_csv(const std::filesystem::path& path, const EvaluationReport& report);
nlohmann::json report_json(const EvaluationReport& report);
// cumulative_cost.csv, delay_cdf.csv, violation_table.csv.
void emit_plot_data(const EvaluationReport& report, const std::filesystem::path& out_dir);

struct QueueingCase {
  std::string name;
  double utilization = 0.0;  // largest queue utilisation in the case
  double analytic_s = 0.0;
  double simulated_s = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Analytic M/M/1 delays against the discrete-event simulator: single queues
// at utilisation 0.5 and 0.9, and the default highway network at uniform
// density 40 with every S = C = 6 and split 1/2.
std::vector<QueueingCase> validate_queueing(std::uint64_t arrivals, std::uint64_t seed);
nlohmann::json to_json(const QueueingCase& c);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ranslice

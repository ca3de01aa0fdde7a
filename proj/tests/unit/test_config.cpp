#include <doctest.h>

#include <string>

#include "ranslice/config.hpp"
#include "ranslice/errors.hpp"

using namespace ranslice;

namespace {

ErrorCode code_of(const std::string& text, std::string* message = nullptr) {
  try {
    validate(parse_config(text));
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an error for: " << text);
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("canonical text round-trips") {
  ExperimentConfig c;
  c.seed = 42;
  c.algorithm = Algorithm::Td3;
  c.learner.hidden = {32, 16, 8};
  c.learner.sigma = 0.1234567890123;
  c.env.services[kDelaySensitive].arrival_rate = 1.2;
  c.trace.days = 9;
  c.trace.source = "trace.csv";
  const auto text = to_toml(c);
  const auto back = parse_config(text);
  CHECK(to_toml(back) == text);
  CHECK(back.seed == 42);
  CHECK(back.algorithm == Algorithm::Td3);
  CHECK(back.learner.sigma == c.learner.sigma);
  CHECK(back.learner.hidden == c.learner.hidden);
  CHECK(back.env.services[kDelaySensitive].arrival_rate == 1.2);
  CHECK(back.trace.source == "trace.csv");
}

TEST_CASE("empty text gives defaults") {
  CHECK(to_toml(parse_config("")) == to_toml(ExperimentConfig{}));
  CHECK(to_toml(parse_config("# nothing\n\n[run]\n")) == to_toml(ExperimentConfig{}));
}

TEST_CASE("defaults") {
  const ExperimentConfig c;
  CHECK(c.topology.bs_positions_km.size() == 5);
  CHECK(c.env.spectrum_capacity == 18);
  CHECK(c.env.compute_capacity == 18);
  CHECK(c.env.services[kDelaySensitive].max_delay_s.value() == doctest::Approx(0.1));
  CHECK_FALSE(c.env.services[kDelayTolerant].max_delay_s.has_value());
  CHECK(c.trace.days == 21);
  const auto split = split_days(21);
  CHECK(split.train.size() == 7);
  CHECK(split.eval.size() == 14);
  CHECK(split.eval.front() == 7);
  CHECK(split_days(2).train.size() == 1);
  CHECK_THROWS_AS(split_days(1), Error);
}

TEST_CASE("bad input names the field") {
  std::string msg;
  CHECK(code_of("[learner]\ngamma = 1.5\n", &msg) == ErrorCode::ConfigError);
  CHECK(msg.find("learner.gamma") != std::string::npos);
  CHECK(code_of("[learner]\nbogus = 1\n", &msg) == ErrorCode::ConfigError);
  CHECK(msg.find("learner.bogus") != std::string::npos);
  CHECK(code_of("[capacity]\nspectrum = \"many\"\n", &msg) == ErrorCode::ConfigError);
  CHECK(msg.find("capacity.spectrum") != std::string::npos);
  CHECK(code_of("[run]\nalgorithm = \"ppo\"\n") == ErrorCode::ConfigError);
  CHECK(code_of("[nowhere]\nx = 1\n") == ErrorCode::ConfigError);
  CHECK(code_of("[learner\n") == ErrorCode::ConfigError);
}

TEST_CASE("hash ignores learner and run sections") {
  ExperimentConfig a, b;
  b.learner.episodes = 7;
  b.learner.sigma = 0.3;
  b.seed = 99;
  b.algorithm = Algorithm::Random;
  CHECK(config_hash(a) == config_hash(b));
  b.env.services[kDelaySensitive].arrival_rate = 1.2;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hash_hex(0x1234) == "0000000000001234");
}

TEST_CASE("default environment shape") {
  auto env = build_environment(ExperimentConfig{});
  CHECK(env.topology().num_zones == 25);
  CHECK(env.topology().num_bs() == 5);
  CHECK(env.state_size() == 45);
  CHECK(env.num_days() == 21);
}

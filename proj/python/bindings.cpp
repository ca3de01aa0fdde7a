// Python module ranslice._core. Structured values cross the boundary as
// JSON or TOML text; the ranslice package parses them. Library errors raise
// RansliceError with args (code, message).

#include <optional>
#include <random>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "ranslice/config.hpp"
#include "ranslice/errors.hpp"
#include "ranslice/harness.hpp"
#include "ranslice/inner_solver.hpp"
#include "ranslice/service_model.hpp"

namespace py = pybind11;
using namespace ranslice;
using nlohmann::json;

namespace {

ExperimentConfig resolve(const std::string& text, std::optional<std::string> algorithm,
                         std::optional<std::uint64_t> seed, std::optional<std::size_t> episodes) {
  auto cfg = parse_config(text);
  if (algorithm) cfg.algorithm = algorithm_from_string(*algorithm);
  if (seed) cfg.seed = *seed;
  if (episodes) cfg.learner.episodes = *episodes;
  validate(cfg);
  return cfg;
}

std::string canonical(const std::string& text) {
  const auto cfg = parse_config(text);
  validate(cfg);
  return to_toml(cfg);
}

// Returns (checkpoint JSON, learning curve rows).
py::tuple train_policy(const std::string& config_text, std::optional<std::string> algorithm,
                       std::optional<std::uint64_t> seed, std::optional<std::size_t> episodes) {
  const auto cfg = resolve(config_text, algorithm, seed, episodes);
  TrainResult result = [&] {
    py::gil_scoped_release release;
    auto env = build_environment(cfg);
    return train(env, cfg.algorithm, cfg.learner, split_days(env.num_days()).train, cfg.seed);
  }();
  py::list curve;
  for (const auto& m : result.curve) {
    curve.append(py::make_tuple(m.episode, m.day, m.mean_reward, m.mean_cost, m.violation_rate));
  }
  return py::make_tuple(make_checkpoint(result.agent, cfg).dump(), curve);
}

std::string evaluate_checkpoint(const std::string& checkpoint, std::optional<std::string> config_text,
                                std::optional<std::uint64_t> seed) {
  const auto ckpt = json::parse(checkpoint);
  auto cfg = parse_config(config_text ? *config_text : ckpt.at("config").get<std::string>());
  if (seed) cfg.seed = *seed;
  validate(cfg);
  const auto agent = load_checkpoint(ckpt, cfg);
  py::gil_scoped_release release;
  auto env = build_environment(cfg);
  const auto split = split_days(env.num_days());
  EvaluationReport report;
  report.policies.push_back(evaluate_agent(env, agent, split.eval, cfg.seed));
  auto rj = report_json(report);
  rj["eval_days"] = split.eval;
  rj["seed"] = cfg.seed;
  return rj.dump();
}

std::string solve_inner(const std::string& instance) {
  const auto inst = inner_instance_from_json(json::parse(instance));
  const auto sol = inst.service == kDelaySensitive ? solve_delay_sensitive(inst) : solve_delay_tolerant(inst);
  return json{{"service", inst.service == kDelaySensitive ? "u" : "e"},
              {"feasible", sol.feasible},
              {"beta", std::vector<double>(sol.beta.data(), sol.beta.data() + sol.beta.size())},
              {"objective_delay_s", sol.objective_delay_s},
              {"iterations", sol.iterations},
              {"kkt_residual", sol.kkt_residual}}
      .dump();
}

std::string queueing(std::uint64_t arrivals, std::uint64_t seed) {
  json cases = json::array();
  {
    py::gil_scoped_release release;
    for (const auto& c : validate_queueing(arrivals, seed)) cases.push_back(to_json(c));
  }
  return cases.dump();
}

py::tuple decode(const Eigen::VectorXd& fractions, std::size_t num_bs, int spectrum_capacity, int compute_capacity) {
  const auto a = decode_action(fractions, num_bs, spectrum_capacity, compute_capacity);
  return py::make_tuple(a.spectrum, a.compute);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ranslice simulator and learners";

  static py::exception<Error> error(m, "RansliceError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error.ptr(), py::make_tuple(to_string(e.code()), e.what()).ptr());
    }
  });

  m.def("default_config", [] { return to_toml(ExperimentConfig{}); });
  m.def("canonical_config", &canonical, py::arg("text"));
  m.def("config_hash", [](const std::string& text) { return hash_hex(config_hash(parse_config(text))); },
        py::arg("text"));
  m.def("train", &train_policy, py::arg("config"), py::arg("algorithm") = py::none(), py::arg("seed") = py::none(),
        py::arg("episodes") = py::none());
  m.def("evaluate", &evaluate_checkpoint, py::arg("checkpoint"), py::arg("config") = py::none(),
        py::arg("seed") = py::none());
  m.def("solve_inner", &solve_inner, py::arg("instance"));
  m.def("validate_queueing", &queueing, py::arg("arrivals") = 1000000, py::arg("seed") = 1);
  m.def("decode_action", &decode, py::arg("fractions"), py::arg("num_bs"), py::arg("spectrum_capacity"),
        py::arg("compute_capacity"));
  m.def("mm1_sojourn", &mm1_sojourn, py::arg("service_rate"), py::arg("arrival_rate"));
}

#include "ranslice/inner_instance.hpp"

#include <vector>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::ParseError, std::string("instance: missing array '") + key + "'");
  }
  const auto raw = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(raw.data(), static_cast<Eigen::Index>(raw.size()));
}

}  // namespace

nlohmann::json to_json(const InnerInstance& inst) {
  nlohmann::json j;
  j["service"] = inst.service == kDelaySensitive ? "u" : "e";
  j["spectrum"] = vec_to_json(inst.spectrum);
  j["compute"] = vec_to_json(inst.compute);
  j["kappa_s"] = vec_to_json(inst.kappa_s);
  j["kappa_c"] = inst.kappa_c;
  j["chi"] = vec_to_json(inst.chi);
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < inst.psi.rows(); ++r) rows.push_back(vec_to_json(inst.psi.row(r).transpose()));
  j["psi"] = rows;
  j["total_workload"] = inst.total_workload;
  j["handover_delay_s"] = inst.handover_s;
  return j;
}

InnerInstance inner_instance_from_json(const nlohmann::json& j) {
  try {
    InnerInstance inst;
    const auto service = j.value("service", std::string("u"));
    if (service != "u" && service != "e") throw Error(ErrorCode::ParseError, "instance: service must be 'u' or 'e'");
    inst.service = service == "u" ? kDelaySensitive : kDelayTolerant;
    inst.spectrum = vec_from_json(j, "spectrum");
    inst.compute = vec_from_json(j, "compute");
    inst.kappa_s = vec_from_json(j, "kappa_s");
    inst.kappa_c = j.at("kappa_c").get<double>();
    inst.chi = vec_from_json(j, "chi");
    const Eigen::Index N = inst.chi.size();
    if (inst.spectrum.size() != N || inst.compute.size() != N || inst.kappa_s.size() != N) {
      throw Error(ErrorCode::DimensionMismatch, "instance: per-BS arrays differ in length");
    }
    const auto& rows = j.at("psi");
    inst.psi.resize(static_cast<Eigen::Index>(rows.size()), N);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto row = rows[r].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != N) {
        throw Error(ErrorCode::DimensionMismatch, "instance: psi row length differs from BS count");
      }
      for (Eigen::Index n = 0; n < N; ++n) inst.psi(static_cast<Eigen::Index>(r), n) = row[static_cast<std::size_t>(n)];
    }
    inst.total_workload = j.at("total_workload").get<double>();
    inst.handover_s = j.value("handover_delay_s", 0.0);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instance: ") + e.what());
  }
}

}  // namespace ranslice

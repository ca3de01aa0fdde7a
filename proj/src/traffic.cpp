#include "ranslice/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "ranslice/errors.hpp"

namespace ranslice {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

double fluid_flow_velocity(const FlowModel& model, double density) {
  if (!(density >= 0.0) || density > model.max_density) {
    std::ostringstream msg;
    msg << "density " << density << " outside [0, " << model.max_density << "]";
    throw Error(ErrorCode::OutOfRangeDensity, msg.str());
  }
  return model.free_flow_speed_kmh * (1.0 - density / model.max_density);
}

TrafficWindow make_window(std::size_t index, Eigen::VectorXd densities, const FlowModel& model) {
  TrafficWindow w;
  w.window_index = index;
  w.velocities.resize(densities.size());
  for (Eigen::Index m = 0; m < densities.size(); ++m) {
    w.velocities[m] = fluid_flow_velocity(model, densities[m]);
  }
  w.densities = std::move(densities);
  return w;
}

Trace load_trace_csv(const std::filesystem::path& path, const FlowModel& model, std::size_t num_zones) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trace file " + path.string());

  std::string line;
  std::size_t line_no = 0;
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": missing header");
  ++line_no;
  strip_cr(line);
  const auto header = split_commas(line);
  if (header.empty() || header[0] != "window") {
    throw Error(ErrorCode::ParseError, path.string() + ": header must start with 'window'");
  }
  if (header.size() - 1 != num_zones) {
    std::ostringstream msg;
    msg << path.string() << ": header has " << header.size() - 1 << " zones, expected " << num_zones;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }

  Trace trace;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() - 1 != num_zones) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": " << cells.size() - 1 << " zone columns, expected "
          << num_zones;
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    std::size_t index = 0;
    if (!parse_number(cells[0], index)) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": bad window index");
    }
    Eigen::VectorXd rho(static_cast<Eigen::Index>(num_zones));
    for (std::size_t m = 0; m < num_zones; ++m) {
      double v = 0.0;
      if (!parse_number(cells[m + 1], v)) {
        throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) +
                                               ": bad density in column " + std::to_string(m + 1));
      }
      rho[static_cast<Eigen::Index>(m)] = v;
    }
    trace.push_back(make_window(index, std::move(rho), model));
  }
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write trace file " + path.string());
  const Eigen::Index M = trace.empty() ? 0 : trace.front().densities.size();
  out << "window";
  for (Eigen::Index m = 0; m < M; ++m) out << ",zone_" << (m + 1);
  out << '\n';
  for (const auto& w : trace) {
    out << w.window_index;
    for (Eigen::Index m = 0; m < w.densities.size(); ++m) out << ',' << format_double(w.densities[m]);
    out << '\n';
  }
}

Trace generate_synthetic_trace(std::uint64_t seed, std::size_t days, const SyntheticProfile& profile,
                               const Topology& topology, const FlowModel& model) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto M = static_cast<Eigen::Index>(topology.num_zones);
  const std::size_t per_day = profile.windows_per_day;

  Eigen::VectorXd bump(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double dx = topology.zone_center_km(static_cast<std::size_t>(m)) - profile.hotspot_center_km;
    bump[m] = profile.hotspot_width_km > 0.0
                  ? profile.hotspot_peak *
                        std::exp(-dx * dx / (2.0 * profile.hotspot_width_km * profile.hotspot_width_km))
                  : 0.0;
  }

  Trace trace;
  trace.reserve(days * per_day);
  for (std::size_t t = 0; t < days * per_day; ++t) {
    const double hour = static_cast<double>(t % per_day) * 24.0 / static_cast<double>(per_day);
    const double diurnal =
        profile.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * hour / 24.0 + profile.phase_rad);
    Eigen::VectorXd rho(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      // draw unconditionally so the stream layout does not depend on noise_std
      const double eps = noise(rng);
      const double raw = profile.base_density + diurnal + bump[m] + profile.noise_std * eps;
      rho[m] = std::clamp(raw, 0.0, model.max_density);
    }
    trace.push_back(make_window(t, std::move(rho), model));
  }
  return trace;
}

}  // namespace ranslice

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "ranslice/errors.hpp"
#include "ranslice/traffic.hpp"
#include "support/fixtures.hpp"

using namespace ranslice;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ranslice_" + name);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("fluid flow velocity") {
  const FlowModel model;
  CHECK(fluid_flow_velocity(model, 0.0) == 120.0);
  CHECK(fluid_flow_velocity(model, 120.0) == 0.0);
  CHECK(fluid_flow_velocity(model, 60.0) == 60.0);
  CHECK(code_of([&] { fluid_flow_velocity(model, -1.0); }) == ErrorCode::OutOfRangeDensity);
  CHECK(code_of([&] { fluid_flow_velocity(model, 120.5); }) == ErrorCode::OutOfRangeDensity);
}

TEST_CASE("trace csv loading") {
  const FlowModel model;
  const auto path = temp_file("trace_ok.csv");
  {
    std::ofstream out(path);
    out << "window";
    for (int m = 1; m <= 25; ++m) out << ",zone_" << m;
    out << "\n0";
    for (int m = 0; m < 25; ++m) out << ",30";
    out << "\n3";
    for (int m = 0; m < 25; ++m) out << ",0";
    out << "\n";
  }
  const auto trace = load_trace_csv(path, model, 25);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].window_index == 0);
  CHECK(trace[0].densities.minCoeff() == 30.0);
  CHECK(trace[0].velocities.maxCoeff() == 90.0);
  CHECK(trace[0].velocities.minCoeff() == 90.0);
  CHECK(trace[1].window_index == 3);
  CHECK(trace[1].velocities.minCoeff() == 120.0);
}

TEST_CASE("trace csv errors") {
  const FlowModel model;
  const auto short_row = temp_file("trace_short.csv");
  {
    std::ofstream out(short_row);
    out << "window";
    for (int m = 1; m <= 25; ++m) out << ",zone_" << m;
    out << "\n0";
    for (int m = 0; m < 24; ++m) out << ",30";
    out << "\n";
  }
  CHECK(code_of([&] { load_trace_csv(short_row, model, 25); }) == ErrorCode::DimensionMismatch);

  const auto bad_number = temp_file("trace_bad.csv");
  {
    std::ofstream out(bad_number);
    out << "window,zone_1,zone_2\n0,30,abc\n";
  }
  CHECK(code_of([&] { load_trace_csv(bad_number, model, 2); }) == ErrorCode::ParseError);

  const auto too_dense = temp_file("trace_dense.csv");
  {
    std::ofstream out(too_dense);
    out << "window,zone_1,zone_2\n0,30,121\n";
  }
  CHECK(code_of([&] { load_trace_csv(too_dense, model, 2); }) == ErrorCode::OutOfRangeDensity);
}

TEST_CASE("degenerate synthetic profile is uniform") {
  const auto topo = testing::highway_topology();
  SyntheticProfile profile;
  profile.diurnal_amplitude = 0.0;
  profile.noise_std = 0.0;
  profile.hotspot_peak = 0.0;
  const auto trace = generate_synthetic_trace(1, 2, profile, topo, FlowModel{});
  REQUIRE(trace.size() == 48);
  for (const auto& w : trace) {
    CHECK(w.densities.minCoeff() == 40.0);
    CHECK(w.densities.maxCoeff() == 40.0);
  }
}

TEST_CASE("diurnal sinusoid stays within base +/- amplitude") {
  const auto topo = testing::highway_topology();
  SyntheticProfile profile;
  profile.noise_std = 0.0;
  profile.hotspot_peak = 0.0;
  const auto trace = generate_synthetic_trace(1, 1, profile, topo, FlowModel{});
  double lo = 1e9, hi = -1e9;
  for (const auto& w : trace) {
    lo = std::min(lo, w.densities.minCoeff());
    hi = std::max(hi, w.densities.maxCoeff());
  }
  CHECK(lo >= 10.0 - 1e-12);
  CHECK(hi <= 70.0 + 1e-12);
  // hour 12 with phase -pi/2 is the sin peak
  CHECK(trace[12].densities[0] == doctest::Approx(70.0).epsilon(1e-12));
  CHECK(trace[0].densities[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("synthetic trace determinism, bounds and csv round trip") {
  const auto topo = testing::highway_topology();
  SyntheticProfile profile;
  profile.noise_std = 20.0;
  profile.diurnal_amplitude = 60.0;
  const auto a = generate_synthetic_trace(42, 3, profile, topo, FlowModel{});
  const auto b = generate_synthetic_trace(42, 3, profile, topo, FlowModel{});
  const auto c = generate_synthetic_trace(43, 3, profile, topo, FlowModel{});
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].densities == b[t].densities);
    CHECK(a[t].densities.minCoeff() >= 0.0);
    CHECK(a[t].densities.maxCoeff() <= 120.0);
    differs = differs || a[t].densities != c[t].densities;
  }
  CHECK(differs);

  const auto path = temp_file("trace_roundtrip.csv");
  write_trace_csv(path, a);
  const auto back = load_trace_csv(path, FlowModel{}, topo.num_zones);
  REQUIRE(back.size() == a.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(back[t].window_index == a[t].window_index);
    CHECK(back[t].densities == a[t].densities);
  }
}

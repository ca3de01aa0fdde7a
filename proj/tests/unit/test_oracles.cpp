#include <doctest.h>

#include <cmath>

#include "ranslice/errors.hpp"
#include "ranslice/oracles.hpp"
#include "support/fixtures.hpp"

using namespace ranslice;

TEST_CASE("simulation input checks") {
  CHECK_THROWS_AS(oracles::simulate_mm1(10.0, 10.0, 1000, 1), Error);
  CHECK_THROWS_AS(oracles::simulate_mm1(0.0, 10.0, 1000, 1), Error);
  CHECK_THROWS_AS(oracles::simulate_mm1(1.0, 10.0, 5, 1), Error);
}

TEST_CASE("simulation is seeded and reports a sensible interval") {
  const auto a = oracles::simulate_mm1(5.0, 10.0, 100000, 3);
  const auto b = oracles::simulate_mm1(5.0, 10.0, 100000, 3);
  CHECK(a.mean_sojourn_s == b.mean_sojourn_s);
  CHECK(a.samples == 100000);
  CHECK(a.confidence_halfwidth_s > 0.0);
  CHECK(std::abs(a.mean_sojourn_s - 0.2) <= 4.0 * a.confidence_halfwidth_s);
}

TEST_CASE("grid oracle") {
  const auto inst = testing::symmetric_instance();
  const auto grid = oracles::grid_search_inner(inst, 0.01);
  CHECK(grid.feasible);
  CHECK(grid.points == 101);
  CHECK(grid.beta[0] == doctest::Approx(0.5));

  InnerInstance big = inst;
  big.psi = Eigen::MatrixXd::Zero(4, 2);
  CHECK_THROWS_AS(oracles::grid_search_inner(big, 0.1), Error);
}

TEST_CASE("reference delay is infinite on the stability boundary") {
  auto inst = testing::symmetric_instance(0.0, 10.0, 4.0, 1.0);
  inst.kappa_c = 0.0625;
  inst.chi.setConstant(16.0);  // exactly at compute capacity
  CHECK(std::isinf(oracles::reference_delay(inst, Eigen::VectorXd::Constant(1, 0.5))));
  CHECK(oracles::reference_stable(inst, Eigen::VectorXd::Constant(1, 0.5)));
}

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include <tsm/integrate.hpp>

using tsm::Scheme;

namespace {
std::array<double, 1> decay(double, const std::array<double, 1>& y) { return {-y[0]}; }

double endpoint_error(double dt) {
  std::array<double, 1> y{1.0};
  const int n = static_cast<int>(std::round(1.0 / dt));
  for (int k = 0; k < n; ++k) y = tsm::rk4_step(k * dt, y, dt, decay);
  return std::abs(y[0] - std::exp(-1.0));
}
}  // namespace

TEST_CASE("rk4 single step on ydot=-y") {
  const auto y = tsm::rk4_step(0.0, std::array<double, 1>{1.0}, 0.01, decay);
  CHECK(y[0] == Catch::Approx(0.99004983374916811).margin(1e-9));
}

TEST_CASE("euler single step is exact first order arithmetic") {
  const auto y = tsm::euler_step(0.0, std::array<double, 1>{1.0}, 0.01, decay);
  CHECK(y[0] == 0.99);
}

TEST_CASE("rk4 endpoint error scales ~dt^4") {
  const double e1 = endpoint_error(0.01);
  const double e2 = endpoint_error(0.005);
  const double ratio = e1 / e2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("integrate_step dispatches on scheme") {
  const std::array<double, 1> y0{1.0};
  CHECK(tsm::integrate_step(Scheme::euler, 0.0, y0, 0.01, decay)[0] == 0.99);
  CHECK(tsm::integrate_step(Scheme::rk4, 0.0, y0, 0.01, decay)[0] ==
        Catch::Approx(0.99004983374916811).margin(1e-12));
}

TEST_CASE("scheme name round trip") {
  CHECK(tsm::scheme_from_string("euler") == Scheme::euler);
  CHECK(tsm::scheme_from_string("rk4") == Scheme::rk4);
  CHECK(std::string(tsm::to_string(Scheme::rk4)) == "rk4");
  CHECK_THROWS(tsm::scheme_from_string("rk45"));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <tsm/estimator.hpp>

using tsm::EncoderModel;
using tsm::EstimatorParams;
using tsm::EstimatorState;

namespace {

constexpr double kStep = 2.0 * std::numbers::pi / 14400.0;  // n=3600, quadrature

struct Run {
  std::vector<double> x_est, v_est;
};

template <class F>
Run drive(const EstimatorParams& p, const EncoderModel& enc, F&& signal, double duration) {
  Run out;
  EstimatorState st;
  const int n = static_cast<int>(std::round(duration / p.T));
  for (int k = 0; k < n; ++k) {
    const double x = tsm::quantize(signal(k * p.T), enc);
    const auto r = tsm::estimator_step(st, x, p);
    st = r.next;
    out.x_est.push_back(r.x_est);
    out.v_est.push_back(r.v_est);
  }
  return out;
}

}  // namespace

TEST_CASE("quantize floor model") {
  const EncoderModel enc{3600};
  CHECK(enc.quantization_step() == Catch::Approx(kStep).margin(1e-18));
  CHECK(tsm::quantize(0.0, enc) == 0.0);
  CHECK(tsm::quantize(1e-3, enc) == Catch::Approx(0.0008726646259971648).epsilon(1e-15));
  for (double y : {0.013, 1.7, -0.4, 12.0, -3.138}) {
    const double q = tsm::quantize(y, enc);
    CHECK(y - q >= 0.0);
    CHECK(y - q < enc.quantization_step());
  }
}

TEST_CASE("dead_zone clips the quantization band") {
  const double band = std::numbers::pi / 7200.0;
  CHECK(tsm::dead_zone(1e-4, band) == 0.0);
  CHECK(tsm::dead_zone(1e-3, band) == Catch::Approx(0.00056366768700141768).epsilon(1e-14));
  for (double e : {0.3, -0.002, 5e-4, -5e-4, 0.0}) {
    CHECK(tsm::dead_zone(-e, band) == -tsm::dead_zone(e, band));
  }
}

TEST_CASE("estimator tracks a quantized ramp without spikes") {
  const EncoderModel enc{3600};
  const EstimatorParams p = tsm::estimator_params_for(3600, 0.01, 0.2, 20.0);
  const double slope = 0.5;
  const auto run = drive(p, enc, [&](double t) { return slope * t; }, 5.0);

  double max_v = 0.0;
  for (double v : run.v_est) max_v = std::max(max_v, std::abs(v));
  CHECK(max_v <= 1.2 * slope);

  // settled within 5% after 5*tau = 1 s
  const std::size_t k1s = 100;
  for (std::size_t k = k1s; k < run.v_est.size(); ++k) {
    CHECK(std::abs(run.v_est[k] - slope) <= 0.05 * slope);
  }
}

TEST_CASE("raw differencing of the quantized ramp spikes to step/T") {
  const EncoderModel enc{3600};
  const double T = 0.01, slope = 0.02;
  double prev = 0.0, max_raw = 0.0;
  for (int k = 1; k < 500; ++k) {
    const double q = tsm::quantize(slope * k * T, enc);
    max_raw = std::max(max_raw, std::abs(q - prev) / T);
    prev = q;
  }
  CHECK(max_raw > 2.0 * slope);  // the spikes the tracking loop exists to remove
}

TEST_CASE("estimator amplitude on a sinusoid matches the discrete filter response") {
  const EncoderModel enc{3600};
  const EstimatorParams p = tsm::estimator_params_for(3600, 0.01, 0.2, 20.0);
  const double A = 0.4, w = 0.4 * std::numbers::pi;
  const auto run = drive(p, enc, [&](double t) { return A * std::sin(w * t); }, 30.0);

  double peak = 0.0;
  for (std::size_t k = 2500; k < run.v_est.size(); ++k) peak = std::max(peak, std::abs(run.v_est[k]));

  // H(z) = (z-1)/((tau+T) z - tau) applied to x_est ~ x
  const std::complex<double> z = std::polar(1.0, w * p.T);
  const double gain = std::abs((z - 1.0) / ((p.tau + p.T) * z - p.tau));
  CHECK(peak == Catch::Approx(A * gain).epsilon(0.03));

  // position estimate lags by about v/K plus the deadband
  double perr = 0.0;
  for (std::size_t k = 2500; k < run.x_est.size(); ++k)
    perr = std::max(perr, std::abs(run.x_est[k] - A * std::sin(w * k * p.T)));
  CHECK(perr <= A * w / p.K + p.deadband + enc.quantization_step() + 1e-6);
}

TEST_CASE("constant input: estimate freezes and v decays geometrically") {
  const EstimatorParams p = tsm::estimator_params_for(3600, 0.01, 0.2, 20.0);
  EstimatorState st;
  st.x_est = 1.0;
  const auto r1 = tsm::estimator_step(st, 1.0, p);
  CHECK(r1.x_est == 1.0);  // error inside the dead zone

  std::vector<double> vs;
  EstimatorState s2 = r1.next;
  for (int k = 0; k < 10; ++k) {
    const auto r = tsm::estimator_step(s2, 1.0, p);
    s2 = r.next;
    vs.push_back(r.v_est);
  }
  const double ratio = p.tau / (p.tau + p.T);
  for (std::size_t k = 1; k < vs.size(); ++k)
    CHECK(vs[k] == Catch::Approx(vs[k - 1] * ratio).margin(1e-15));
}

TEST_CASE("steady position offset stays within one deadband plus one step") {
  const EncoderModel enc{3600};
  const EstimatorParams p = tsm::estimator_params_for(3600, 0.01, 0.2, 20.0);
  EstimatorState st;
  const double x = 0.73;
  const double q = tsm::quantize(x, enc);
  for (int k = 0; k < 2000; ++k) st = tsm::estimator_step(st, q, p).next;
  CHECK(std::abs(q - st.x_est) <= p.deadband + enc.quantization_step());
}

TEST_CASE("tustin discretization also settles on the ramp") {
  const EncoderModel enc{3600};
  const EstimatorParams p =
      tsm::estimator_params_for(3600, 0.01, 0.2, 20.0, tsm::FilterDisc::tustin);
  const auto run = drive(p, enc, [&](double t) { return 0.5 * t; }, 5.0);
  for (std::size_t k = 150; k < run.v_est.size(); ++k)
    CHECK(std::abs(run.v_est[k] - 0.5) <= 0.05 * 0.5);
  CHECK(tsm::filter_disc_from_string("tustin") == tsm::FilterDisc::tustin);
  CHECK(tsm::filter_disc_from_string("backward_euler") == tsm::FilterDisc::backward_euler);
  CHECK_THROWS(tsm::filter_disc_from_string("trapezoid"));
}

TEST_CASE("estimator is deterministic") {
  const EncoderModel enc{3600};
  const EstimatorParams p = tsm::estimator_params_for(3600, 0.01, 0.2, 20.0);
  const auto a = drive(p, enc, [](double t) { return 0.3 * std::sin(2.0 * t) + 0.1 * t; }, 3.0);
  const auto b = drive(p, enc, [](double t) { return 0.3 * std::sin(2.0 * t) + 0.1 * t; }, 3.0);
  REQUIRE(a.v_est.size() == b.v_est.size());
  for (std::size_t k = 0; k < a.v_est.size(); ++k) {
    CHECK(a.v_est[k] == b.v_est[k]);
    CHECK(a.x_est[k] == b.x_est[k]);
  }
}

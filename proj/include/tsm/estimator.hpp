#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tsm {

// Low-noise velocity estimation from a quantized encoder: a dead-zone tracking
// loop integrates K*dead_zone(x_encoder - x_est) into x_est, then the filtered
// differentiator G(s) = s/(tau*s + 1), discretized at the sample period T,
// produces v_est. Raw differencing of the quantized signal spikes by a full
// count per sample; the dead zone swallows the quantization noise instead.

enum class FilterDisc { backward_euler, tustin };

inline FilterDisc filter_disc_from_string(const std::string& s) {
  if (s == "backward_euler") return FilterDisc::backward_euler;
  if (s == "tustin") return FilterDisc::tustin;
  throw std::invalid_argument("estimator.filter_disc: unknown value '" + s + "'");
}

inline const char* to_string(FilterDisc d) {
  return d == FilterDisc::backward_euler ? "backward_euler" : "tustin";
}

struct EncoderModel {
  long cycles_per_rev = 3600;  // quadrature: 4n counts per revolution
  double quantization_step() const { return 2.0 * std::numbers::pi / (4.0 * static_cast<double>(cycles_per_rev)); }
};

inline double quantize(double y, const EncoderModel& enc) {
  const double step = enc.quantization_step();
  return std::floor(y / step) * step;
}

inline double dead_zone(double e, double deadband) {
  if (std::abs(e) <= deadband) return 0.0;
  return e - std::copysign(deadband, e);
}

struct EstimatorParams {
  double T = 0.01;
  double tau = 0.2;
  double K = 20.0;  // requires K*T < 2 for the discrete tracking loop
  double deadband = std::numbers::pi / (2.0 * 3600.0);
  FilterDisc disc = FilterDisc::backward_euler;
};

inline EstimatorParams estimator_params_for(long cycles, double T, double tau, double K,
                                            FilterDisc disc = FilterDisc::backward_euler) {
  return {T, tau, K, std::numbers::pi / (2.0 * static_cast<double>(cycles)), disc};
}

// Discrete G(s) = s/(tau*s+1) acting on a sampled signal.
struct DerivFilter {
  double w = 0.0;       // backward-Euler low-pass state
  double v_prev = 0.0;  // tustin memory
  double x_prev = 0.0;

  double step(double x, double T, double tau, FilterDisc d) {
    if (d == FilterDisc::backward_euler) {
      const double v = (x - w) / (tau + T);
      w = (tau * w + T * x) / (tau + T);
      return v;
    }
    const double v = ((2.0 * tau - T) * v_prev + 2.0 * (x - x_prev)) / (2.0 * tau + T);
    v_prev = v;
    x_prev = x;
    return v;
  }
};

struct EstimatorState {
  double x_est = 0.0;
  DerivFilter dx;
};

struct EstimatorResult {
  double x_est;
  double v_est;
  EstimatorState next;
};

inline EstimatorResult estimator_step(EstimatorState st, double x_encoder, const EstimatorParams& p) {
  st.x_est += p.T * p.K * dead_zone(x_encoder - st.x_est, p.deadband);
  const double v = st.dx.step(st.x_est, p.T, p.tau, p.disc);
  return {st.x_est, v, st};
}

}  // namespace tsm

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "integrate.hpp"
#include "plant.hpp"

namespace tsm {

// Adaptive backstepping controller with sigma-modification leakage:
//   xi1 = x1 - y_r,  xi2 = x2 - ydot_r + alpha_v1*xi1,  xi1' = xi2 - alpha_v1*xi1
//   ubar = yddot_r - alpha_v1*xi1' - xi1 - alpha_v2*xi2 - Theta_hat^T varphi
//   u = (r_i/r_o)*(m_hat*ubar - D_star_hat*tanh(xi2/epsilon))
//   Theta_hat' = k_theta*xi2*varphi - sigma1*Theta_hat
//   m_hat'     = -k_m*xi2*ubar - sigma2*m_hat
//   D_star_hat'= k_D*xi2*tanh(xi2/epsilon) - sigma3*D_star_hat

struct ControllerGains {
  double alpha_v1 = 10.0;
  double alpha_v2 = 15.0;
  double k_theta = 0.5;
  double k_m = 0.5;
  double k_D = 1.0;
  double sigma1 = 0.01;
  double sigma2 = 0.01;
  double sigma3 = 0.01;
  double epsilon = 0.05;
};

struct AdaptiveState {
  Vec3 theta_hat{0.0, 0.0, 0.0};
  double m_hat = 0.0;
  double D_star_hat = 0.0;
};

struct ReferenceTrajectory {
  double amplitude = 0.4;
  double omega = 0.4 * std::numbers::pi;  // y_r(t) = amplitude*sin(omega*t)
};

struct RefSample {
  double y_r;
  double ydot_r;
  double yddot_r;
};

inline RefSample ref_sample(const ReferenceTrajectory& r, double t) {
  const double s = std::sin(r.omega * t);
  const double c = std::cos(r.omega * t);
  return {r.amplitude * s, r.amplitude * r.omega * c, -r.amplitude * r.omega * r.omega * s};
}

struct ErrorCoordinates {
  double xi1;
  double xi2;
  double xi1_dot;  // always the identity xi2 - alpha_v1*xi1, never differenced
};

inline ErrorCoordinates error_coords(const PlantState& s, const RefSample& ref, const ControllerGains& g) {
  const double xi1 = s.y - ref.y_r;
  const double xi2 = s.ydot - ref.ydot_r + g.alpha_v1 * xi1;
  return {xi1, xi2, xi2 - g.alpha_v1 * xi1};
}

inline double virtual_control(const ErrorCoordinates& e, const RefSample& ref, const Vec3& varphi,
                              const AdaptiveState& a, const ControllerGains& g) {
  return ref.yddot_r - g.alpha_v1 * e.xi1_dot - e.xi1 - g.alpha_v2 * e.xi2 - dot(a.theta_hat, varphi);
}

inline double control_input(double ubar, const ErrorCoordinates& e, const AdaptiveState& a,
                            const ControllerGains& g, const PlantParams& p) {
  return (p.r_i / p.r_o) * (a.m_hat * ubar - a.D_star_hat * std::tanh(e.xi2 / g.epsilon));
}

struct AdaptiveRates {
  Vec3 theta_hat_dot;
  double m_hat_dot;
  double D_star_hat_dot;
};

inline AdaptiveRates adapt_rates(const AdaptiveState& a, const ErrorCoordinates& e, const Vec3& varphi,
                                 double ubar, const ControllerGains& g) {
  return {{g.k_theta * e.xi2 * varphi[0] - g.sigma1 * a.theta_hat[0],
           g.k_theta * e.xi2 * varphi[1] - g.sigma1 * a.theta_hat[1],
           g.k_theta * e.xi2 * varphi[2] - g.sigma1 * a.theta_hat[2]},
          -g.k_m * e.xi2 * ubar - g.sigma2 * a.m_hat,
          g.k_D * e.xi2 * std::tanh(e.xi2 / g.epsilon) - g.sigma3 * a.D_star_hat};
}

struct ControlStepResult {
  double u;
  AdaptiveState next;
};

// One controller sample: u from the current estimates, then the adaptive state
// advanced over dt with plant state, reference, and signals held.
inline ControlStepResult controller_step(const PlantState& s, const RefSample& ref, const ActuatorSignal& sig,
                                         const AdaptiveState& a, const ControllerGains& g, const PlantParams& p,
                                         double dt, Scheme sc = Scheme::rk4) {
  if (!(dt > 0.0)) throw std::invalid_argument("controller_step: dt must be > 0");
  const ErrorCoordinates e = error_coords(s, ref, g);
  const Vec3 varphi = regressor(sig, s);
  const double u = control_input(virtual_control(e, ref, varphi, a, g), e, a, g, p);

  auto f = [&](double, const std::array<double, 5>& v) {
    const AdaptiveState st{{v[0], v[1], v[2]}, v[3], v[4]};
    const double ub = virtual_control(e, ref, varphi, st, g);
    const AdaptiveRates r = adapt_rates(st, e, varphi, ub, g);
    return std::array<double, 5>{r.theta_hat_dot[0], r.theta_hat_dot[1], r.theta_hat_dot[2], r.m_hat_dot,
                                 r.D_star_hat_dot};
  };
  const std::array<double, 5> v0{a.theta_hat[0], a.theta_hat[1], a.theta_hat[2], a.m_hat, a.D_star_hat};
  const std::array<double, 5> v1 = integrate_step(sc, 0.0, v0, dt, f);
  return {u, AdaptiveState{{v1[0], v1[1], v1[2]}, v1[3], v1[4]}};
}

}  // namespace tsm

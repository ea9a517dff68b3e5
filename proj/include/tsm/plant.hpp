#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "friction.hpp"

namespace tsm {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Distal joint driven through the tendon-sheath pair:
//   m*yddot + c*ydot = r_o*(u/r_i - F) - T_e - T_d
// with states x = [y, ydot]. The regressor decomposition rewrites the
// acceleration as (1/m)*((r_o/r_i)*u + D) + Theta^T varphi where
//   varphi = [phi*x_i, xdot_i, ydot], Theta = [-r_o k_x/m, -r_o upsilon/m, -c/m],
//   D = -r_o*(k_zeta*zeta + F0) - T_e - T_d.

struct PlantParams {
  double m = 0.0349;   // > 0
  double c = 0.0105;   // >= 0
  double r_i = 0.025;  // > 0
  double r_o = 0.025;  // > 0
  double k_e = 0.4185; // >= 0, elastic environment T_e = k_e*y
};

struct PlantState {
  double y = 0.0;
  double ydot = 0.0;
};

struct DisturbanceModel {
  double amplitude = 0.2;
  double omega = 0.2 * std::numbers::pi;  // T_d(t) = amplitude*sin(omega*t)
};

inline double environment_torque(double y, double k_e) { return k_e * y; }

inline double disturbance_torque(double t, const DisturbanceModel& d) {
  return d.amplitude * std::sin(d.omega * t);
}

struct PlantDeriv {
  double ydot;
  double yddot;
};

inline PlantDeriv plant_derivative(const PlantState& s, double u, double F, double T_e, double T_d,
                                   const PlantParams& p) {
  if (!(p.m > 0.0)) throw std::invalid_argument("plant.m: must be > 0");
  return {s.ydot, (p.r_o * (u / p.r_i - F) - T_e - T_d - p.c * s.ydot) / p.m};
}

inline Vec3 regressor(const ActuatorSignal& sig, const PlantState& s) {
  return {shape_phi(sig) * sig.x_i, sig.xdot_i, s.ydot};
}

// Rigid transmission: the actuator side follows the joint through the pulley ratio.
inline ActuatorSignal actuator_kinematics(const PlantState& s, double yddot, const PlantParams& p) {
  const double g = p.r_o / p.r_i;
  return {g * s.y, g * s.ydot, g * yddot};
}

inline Vec3 theta_true(const FrictionParams& fp, const PlantParams& pp) {
  return {-pp.r_o * fp.k_x / pp.m, -pp.r_o * fp.upsilon / pp.m, -pp.c / pp.m};
}

inline double lumped_disturbance(double zeta, double T_e, double T_d, const FrictionParams& fp,
                                 const PlantParams& pp) {
  return -pp.r_o * (fp.k_zeta * zeta + fp.F0) - T_e - T_d;
}

struct RegressorDecomposition {
  Vec3 varphi;
  double D;
  Vec3 Theta;
};

inline RegressorDecomposition make_decomposition(const ActuatorSignal& sig, const PlantState& s, double zeta,
                                                 double T_e, double T_d, const FrictionParams& fp,
                                                 const PlantParams& pp) {
  return {regressor(sig, s), lumped_disturbance(zeta, T_e, T_d, fp, pp), theta_true(fp, pp)};
}

}  // namespace tsm

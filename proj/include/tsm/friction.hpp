#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "integrate.hpp"

namespace tsm {

// Bouc-Wen-type dynamic friction model for a tendon-sheath transmission:
//   F    = k_x*phi*x_i + k_zeta*zeta + upsilon*xdot_i + F0
//   zeta' = rho*(xdot_i - sigma*|xdot_i|*|zeta|^(n-1)*zeta + (sigma-1)*xdot_i*|zeta|^n)
//   phi  = (e^{2 xdot_i} + tanh(x_i) tanh(xddot_i)) / (e^{2 xdot_i} + 1)

struct FrictionParams {
  double k_x = 0.01083;
  double k_zeta = 0.14368;
  double rho = 54.658;     // > 0
  double sigma = 1.58;     // > 0.5
  double n_exp = 2.0458;   // >= 1
  double upsilon = 0.02686;
  double F0 = 0.0099;
};

struct FrictionState {
  double zeta = 0.0;  // |zeta| <= 1 is invariant under the state ODE when |zeta(0)| <= 1
};

struct ActuatorSignal {
  double x_i = 0.0;
  double xdot_i = 0.0;
  double xddot_i = 0.0;
};

// Evaluated as (1+tanh(xd))/2 + tanh(x)*tanh(xdd)*(1-tanh(xd))/2, which is
// algebraically identical but does not overflow for large |xdot_i|.
inline double shape_phi(const ActuatorSignal& sig) {
  const double tv = std::tanh(sig.xdot_i);
  return 0.5 * ((1.0 + tv) + std::tanh(sig.x_i) * std::tanh(sig.xddot_i) * (1.0 - tv));
}

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Grouped as rho*(xd*(1-|z|^n) + sigma*|z|^n*(xd - |xd|*sign(z))) so that
// zeta = +-1 under matching-sign velocity yields exactly zero.
inline double zeta_rate(const FrictionState& st, const ActuatorSignal& sig, const FrictionParams& p) {
  const double azn = std::pow(std::abs(st.zeta), p.n_exp);
  const double xd = sig.xdot_i;
  return p.rho * (xd * (1.0 - azn) + p.sigma * azn * (xd - std::abs(xd) * sign_of(st.zeta)));
}

inline double friction_force(const FrictionState& st, const ActuatorSignal& sig, const FrictionParams& p) {
  return p.k_x * shape_phi(sig) * sig.x_i + p.k_zeta * st.zeta + p.upsilon * sig.xdot_i + p.F0;
}

// Drives x_i(t) = amplitude*sin(2*pi*freq*t) and integrates zeta; one (x_i, F)
// pair per step. The last cycle closes onto itself once transients die out.
inline std::vector<std::pair<double, double>> hysteresis_loop(const FrictionParams& p, double amplitude,
                                                              double freq, int cycles, double dt,
                                                              Scheme sc = Scheme::rk4) {
  if (!(dt > 0.0)) throw std::invalid_argument("hysteresis_loop: dt must be > 0");
  if (amplitude < 0.0) throw std::invalid_argument("hysteresis_loop: amplitude must be >= 0");
  if (!(freq > 0.0)) throw std::invalid_argument("hysteresis_loop: freq must be > 0");
  if (cycles < 2) throw std::invalid_argument("hysteresis_loop: cycles must be >= 2");

  const double w = 2.0 * std::numbers::pi * freq;
  auto drive = [&](double t) {
    return ActuatorSignal{amplitude * std::sin(w * t), amplitude * w * std::cos(w * t),
                          -amplitude * w * w * std::sin(w * t)};
  };
  auto f = [&](double t, const std::array<double, 1>& z) {
    return std::array<double, 1>{zeta_rate(FrictionState{z[0]}, drive(t), p)};
  };

  const auto nsteps = static_cast<std::size_t>(std::ceil(cycles / freq / dt - 1e-9));
  std::vector<std::pair<double, double>> out;
  out.reserve(nsteps);
  std::array<double, 1> z{0.0};
  for (std::size_t k = 0; k < nsteps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const ActuatorSignal sig = drive(t);
    out.emplace_back(sig.x_i, friction_force(FrictionState{z[0]}, sig, p));
    z = integrate_step(sc, t, z, dt, f);
  }
  return out;
}

}  // namespace tsm

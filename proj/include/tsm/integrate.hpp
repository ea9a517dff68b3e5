#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsm {

enum class Scheme { euler, rk4 };

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "euler") return Scheme::euler;
  if (s == "rk4") return Scheme::rk4;
  throw std::invalid_argument("sim.integrator: unknown scheme '" + s + "'");
}

inline const char* to_string(Scheme s) { return s == Scheme::euler ? "euler" : "rk4"; }

template <class F, std::size_t N>
concept DerivativeFn = requires(F f, double t, const std::array<double, N>& s) {
  { f(t, s) } -> std::convertible_to<std::array<double, N>>;
};

template <std::size_t N, class F>
  requires DerivativeFn<F, N>
std::array<double, N> euler_step(double t, const std::array<double, N>& s, double dt, F&& f) {
  const std::array<double, N> k = f(t, s);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = s[i] + dt * k[i];
  return out;
}

template <std::size_t N, class F>
  requires DerivativeFn<F, N>
std::array<double, N> rk4_step(double t, const std::array<double, N>& s, double dt, F&& f) {
  std::array<double, N> tmp;
  const std::array<double, N> k1 = f(t, s);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
  const std::array<double, N> k2 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
  const std::array<double, N> k3 = f(t + 0.5 * dt, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = s[i] + dt * k3[i];
  const std::array<double, N> k4 = f(t + dt, tmp);
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

template <std::size_t N, class F>
  requires DerivativeFn<F, N>
std::array<double, N> integrate_step(Scheme sc, double t, const std::array<double, N>& s, double dt, F&& f) {
  if (sc == Scheme::euler) return euler_step<N>(t, s, dt, f);
  return rk4_step<N>(t, s, dt, f);
}

}  // namespace tsm

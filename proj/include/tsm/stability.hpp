#pragma once

#include <algorithm>
#include <cmath>
#include <ranges>
#include <stdexcept>
#include <vector>

#include "controller.hpp"
#include "plant.hpp"

namespace tsm {

// Lyapunov machinery for the closed loop. With estimate errors
// Theta_err = Theta - Theta_hat, m_err = m - m_hat, D_err = D* - D_star_hat:
//   V = xi1^2/2 + xi2^2/2 + Theta_err^T Theta_err/(2 k_theta)
//       + m_err^2/(2 m k_m) + D_err^2/(2 m k_D)
// and along trajectories V(t) <= (V(0) - Psi/rho) e^{-rho t} + Psi/rho with
//   Psi = (sigma1/2k_theta) Theta^T Theta + 0.2785 eps D*/m
//         + (sigma2/2k_m) m + (sigma3/(2 m k_D)) D*^2
//   rho = min{2 alpha_v1, 2 alpha_v2, sigma1, sigma2, sigma3}
// giving the ultimate tracking-error radius sqrt(2 Psi/rho).

struct GroundTruth {
  Vec3 Theta{0.0, 0.0, 0.0};
  double m = 0.0;
  double D_star = 0.0;
};

struct CertificateInputs {
  GroundTruth truth;
  ControllerGains gains;
  Vec3 theta_err{0.0, 0.0, 0.0};
  double m_err = 0.0;
  double D_err = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

inline double lyapunov_value(const CertificateInputs& ci) {
  if (!(ci.truth.m > 0.0)) throw std::invalid_argument("lyapunov_value: m must be > 0");
  const ControllerGains& g = ci.gains;
  return 0.5 * ci.xi1 * ci.xi1 + 0.5 * ci.xi2 * ci.xi2 + dot(ci.theta_err, ci.theta_err) / (2.0 * g.k_theta) +
         ci.m_err * ci.m_err / (2.0 * ci.truth.m * g.k_m) + ci.D_err * ci.D_err / (2.0 * ci.truth.m * g.k_D);
}

struct PsiRho {
  double Psi;
  double rho;
};

inline PsiRho psi_rho(const ControllerGains& g, const GroundTruth& gt) {
  if (!(gt.m > 0.0)) throw std::invalid_argument("psi_rho: m must be > 0");
  const double Psi = (g.sigma1 / (2.0 * g.k_theta)) * dot(gt.Theta, gt.Theta) +
                     0.2785 * g.epsilon * gt.D_star / gt.m + (g.sigma2 / (2.0 * g.k_m)) * gt.m +
                     (g.sigma3 / (2.0 * gt.m * g.k_D)) * gt.D_star * gt.D_star;
  const double rho = std::min({2.0 * g.alpha_v1, 2.0 * g.alpha_v2, g.sigma1, g.sigma2, g.sigma3});
  return {Psi, rho};
}

inline double v_envelope(double t, double V0, double Psi, double rho) {
  return (V0 - Psi / rho) * std::exp(-rho * t) + Psi / rho;
}

inline double ultimate_bound(double Psi, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("ultimate_bound: rho must be > 0");
  return std::sqrt(2.0 * Psi / rho);
}

// |x| - x*tanh(x/eps) <= 0.2785*eps for all real x; residual is lhs minus the cap.
inline double tanh_inequality_residual(double xi2, double eps) {
  return std::abs(xi2) - xi2 * std::tanh(xi2 / eps) - 0.2785 * eps;
}

template <std::ranges::input_range R>
double tanh_inequality_check(const R& xi2_samples, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("tanh_inequality_check: eps must be > 0");
  double worst = -0.2785 * eps;
  for (double x : xi2_samples) worst = std::max(worst, tanh_inequality_residual(x, eps));
  return worst;
}

// Young step err*hat <= true^2/2 - err^2/2 (err = true - hat); returns lhs - rhs <= 0.
inline double young_step_residual(double true_val, double hat_val) {
  const double err = true_val - hat_val;
  return err * hat_val - 0.5 * true_val * true_val + 0.5 * err * err;
}

inline double young_step_residual(const Vec3& true_v, const Vec3& hat_v) {
  const Vec3 err{true_v[0] - hat_v[0], true_v[1] - hat_v[1], true_v[2] - hat_v[2]};
  return dot(err, hat_v) - 0.5 * dot(true_v, true_v) + 0.5 * dot(err, err);
}

struct Violation {
  double t;
  double V;
  double bound;
};

struct CertificateReport {
  double V0 = 0.0;
  double Psi = 0.0;
  double rho_cert = 0.0;
  double ultimate_bound = 0.0;
  double tol = 0.0;
  double sup_abs_D = 0.0;
  double D_star = 0.0;
  bool d_bound_ok = true;
  double final_second_max_abs_e = 0.0;
  bool final_error_in_bound = true;
  std::vector<double> V_series;
  std::vector<double> bound_series;
  std::vector<Violation> violations;

  bool pass() const { return violations.empty() && d_bound_ok && final_error_in_bound; }
};

// Post-hoc certificate over a trace. Record type must expose t, e_r, xi1, xi2,
// theta_hat, m_hat, D_star_hat, zeta, T_e, T_d. Checks the integrated envelope
// (never a differenced V), that the assumed D* dominated the realized |D|, and
// that the final second of tracking error sits inside the ultimate-bound set.
template <class Trace>
CertificateReport check_decrease(const Trace& trace, const GroundTruth& gt, const ControllerGains& g,
                                 const FrictionParams& fp, const PlantParams& pp) {
  if (std::ranges::empty(trace)) throw std::invalid_argument("check_decrease: empty trace (no ground truth to certify)");

  CertificateReport rep;
  const PsiRho pr = psi_rho(g, gt);
  rep.Psi = pr.Psi;
  rep.rho_cert = pr.rho;
  rep.ultimate_bound = ultimate_bound(pr.Psi, pr.rho);
  rep.D_star = gt.D_star;

  const double t0 = std::ranges::begin(trace)->t;
  double t_end = t0;
  for (const auto& r : trace) t_end = r.t;

  bool first = true;
  for (const auto& r : trace) {
    CertificateInputs ci;
    ci.truth = gt;
    ci.gains = g;
    ci.theta_err = {gt.Theta[0] - r.theta_hat[0], gt.Theta[1] - r.theta_hat[1], gt.Theta[2] - r.theta_hat[2]};
    ci.m_err = gt.m - r.m_hat;
    ci.D_err = gt.D_star - r.D_star_hat;
    ci.xi1 = r.xi1;
    ci.xi2 = r.xi2;
    const double V = lyapunov_value(ci);
    if (first) {
      rep.V0 = V;
      rep.tol = 1e-6 + 1e-3 * V;
      first = false;
    }
    const double bound = v_envelope(r.t - t0, rep.V0, rep.Psi, rep.rho_cert);
    rep.V_series.push_back(V);
    rep.bound_series.push_back(bound);
    if (!(V <= bound + rep.tol)) rep.violations.push_back({r.t, V, bound});

    rep.sup_abs_D = std::max(rep.sup_abs_D, std::abs(lumped_disturbance(r.zeta, r.T_e, r.T_d, fp, pp)));
    if (r.t >= t_end - 1.0) rep.final_second_max_abs_e = std::max(rep.final_second_max_abs_e, std::abs(r.e_r));
  }
  rep.d_bound_ok = rep.sup_abs_D <= gt.D_star;
  rep.final_error_in_bound = rep.final_second_max_abs_e <= rep.ultimate_bound;
  return rep;
}

}  // namespace tsm

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <tsm/engine.hpp>

using tsm::ScenarioConfig;
using tsm::SimResult;

namespace {

const SimResult& baseline_run() {
  static const SimResult res = tsm::run_scenario(tsm::scenarios::baseline());
  return res;
}

}  // namespace

TEST_CASE("mse basics") {
  CHECK(tsm::mse(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(tsm::mse(std::vector<double>{0.1, -0.1}) == Catch::Approx(0.01).margin(1e-18));
  CHECK_THROWS(tsm::mse(std::vector<double>{}));

  std::mt19937 rng(12);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> v(1000);
  for (double& x : v) x = d(rng);
  double acc = 0.0;
  for (double x : v) acc += x * x;
  const double naive = acc / static_cast<double>(v.size());
  CHECK(std::abs(tsm::mse(v) - naive) <= 1e-15 * naive);
}

TEST_CASE("ground truth assembly") {
  const auto gt = tsm::ground_truth(tsm::scenarios::baseline());
  CHECK(gt.Theta[0] == Catch::Approx(-0.0077578796561604581).epsilon(1e-14));
  CHECK(gt.Theta[1] == Catch::Approx(-0.019240687679083095).epsilon(1e-14));
  CHECK(gt.Theta[2] == Catch::Approx(-0.3008595988538682).epsilon(1e-14));
  CHECK(gt.m == 0.0349);
  CHECK(gt.D_star == Catch::Approx(0.4549395).epsilon(1e-14));
}

TEST_CASE("run_scenario trace structure") {
  const auto& res = baseline_run();
  const auto& cfg = tsm::scenarios::baseline();
  REQUIRE(res.status == tsm::SimStatus::ok);
  const auto n = static_cast<std::size_t>(std::ceil(cfg.sim.duration / cfg.sim.dt - 1e-9));
  REQUIRE(res.trace.size() == n);
  for (std::size_t k = 1; k < 200; ++k) {
    CHECK(res.trace[k].t > res.trace[k - 1].t);
    CHECK(res.trace[k].t == Catch::Approx(k * cfg.sim.dt).margin(1e-12));
  }
  CHECK(res.metrics.n_records == n);
}

TEST_CASE("baseline regression: tracking quality") {
  const auto& res = baseline_run();
  CHECK(res.metrics.mse == Catch::Approx(1.394957e-5).epsilon(0.02));
  CHECK(res.metrics.max_abs_error == Catch::Approx(0.012728).epsilon(0.02));
}

TEST_CASE("baseline certificate holds") {
  const auto& res = baseline_run();
  const auto& rep = res.certificate;
  CHECK(rep.violations.empty());
  CHECK(rep.d_bound_ok);
  CHECK(rep.sup_abs_D < rep.D_star);
  CHECK(rep.final_second_max_abs_e < rep.ultimate_bound);
  CHECK(rep.pass());
  CHECK(res.metrics.certify_pass);
  CHECK(rep.V0 == Catch::Approx(3.2173633342074113).epsilon(1e-10));
  CHECK(rep.ultimate_bound == Catch::Approx(6.5181267389819713).epsilon(1e-12));
}

TEST_CASE("young steps hold pointwise on the baseline trace") {
  const auto& res = baseline_run();
  const auto gt = tsm::ground_truth(tsm::scenarios::baseline());
  for (std::size_t k = 0; k < res.trace.size(); k += 7) {
    const auto& r = res.trace[k];
    CHECK(tsm::young_step_residual(gt.Theta, r.theta_hat) <= 1e-12);
    CHECK(tsm::young_step_residual(gt.m, r.m_hat) <= 1e-12);
    CHECK(tsm::young_step_residual(gt.D_star, r.D_star_hat) <= 1e-12);
  }
}

TEST_CASE("byte-identical traces across repeated runs") {
  ScenarioConfig cfg = tsm::scenarios::baseline();
  cfg.sim.duration = 5.0;
  const auto a = tsm::run_scenario(cfg);
  const auto b = tsm::run_scenario(cfg);
  std::ostringstream sa, sb;
  tsm::write_trace_csv(sa, a.trace);
  tsm::write_trace_csv(sb, b.trace);
  REQUIRE(sa.str() == sb.str());
  CHECK(sa.str().substr(0, sa.str().find('\n')) == tsm::trace_csv_header);
}

TEST_CASE("divergence is detected and reported") {
  ScenarioConfig cfg = tsm::scenarios::baseline();
  cfg.sim.duration = 2.0;
  cfg.gains.k_theta = 1e12;
  const auto res = tsm::run_scenario(cfg);
  CHECK(res.status == tsm::SimStatus::diverged);
  CHECK(res.diverged_at > 0.0);
  CHECK(res.diverged_at <= 2.0 + 1e-9);
  CHECK(!res.metrics.certify_pass);
  CHECK(res.trace.size() < 2000);
}

TEST_CASE("estimated signal source stays bounded at soft gains") {
  ScenarioConfig cfg = tsm::scenarios::baseline();
  cfg.sim.signal_source = tsm::SignalSource::estimated;
  cfg.gains.alpha_v1 = 1.0;
  cfg.gains.alpha_v2 = 2.0;
  cfg.gains.k_theta = cfg.gains.k_m = 0.05;
  cfg.gains.k_D = 0.05;
  cfg.estimator.tau = 0.05;
  const auto res = tsm::run_scenario(cfg);
  REQUIRE(res.status == tsm::SimStatus::ok);
  CHECK(res.metrics.mse > 0.02);
  CHECK(res.metrics.mse < 0.06);
  CHECK(res.metrics.max_abs_error < 1.0);
  // estimator columns are live in this mode
  bool any_est = false;
  for (const auto& r : res.trace) any_est = any_est || r.v_est != 0.0;
  CHECK(any_est);
}

TEST_CASE("estimated signal source at stiff gains diverges and says so") {
  ScenarioConfig cfg = tsm::scenarios::baseline();
  cfg.sim.signal_source = tsm::SignalSource::estimated;
  cfg.sim.duration = 5.0;
  const auto res = tsm::run_scenario(cfg);
  CHECK(res.status == tsm::SimStatus::diverged);
  CHECK(res.diverged_at < 5.0);
}

TEST_CASE("no growth trend at 10x duration") {
  ScenarioConfig cfg = tsm::scenarios::baseline();
  cfg.sim.duration = 300.0;
  const auto res = tsm::run_scenario(cfg);
  REQUIRE(res.status == tsm::SimStatus::ok);

  struct Sup {
    double xi1 = 0.0, xi2 = 0.0, th = 0.0, m = 0.0, D = 0.0;
    void absorb(const tsm::TraceRecord& r) {
      xi1 = std::max(xi1, std::abs(r.xi1));
      xi2 = std::max(xi2, std::abs(r.xi2));
      th = std::max(th, std::sqrt(tsm::dot(r.theta_hat, r.theta_hat)));
      m = std::max(m, std::abs(r.m_hat));
      D = std::max(D, std::abs(r.D_star_hat));
    }
  };
  Sup all, settled, last;
  for (const auto& r : res.trace) {
    all.absorb(r);
    // leakage equilibrates on the 1/sigma = 100 s scale; compare windows after it
    if (r.t >= 150.0 && r.t < 180.0) settled.absorb(r);
    if (r.t >= 270.0) last.absorb(r);
  }
  CHECK(all.xi1 <= 0.02);
  CHECK(all.xi2 <= 0.6);
  CHECK(all.th <= 0.1);
  CHECK(all.m <= 0.25);
  CHECK(all.D <= 0.7);
  CHECK(last.xi1 <= 1.1 * settled.xi1);
  CHECK(last.xi2 <= 1.1 * settled.xi2);
  CHECK(last.th <= 1.1 * settled.th);
  CHECK(last.m <= 1.1 * settled.m);
  CHECK(last.D <= 1.1 * settled.D);
}

TEST_CASE("metrics and certificate serialize with their key fields") {
  const auto& res = baseline_run();
  const auto mj = tsm::metrics_to_json(tsm::scenarios::baseline(), res);
  CHECK(mj.contains("mse"));
  CHECK(mj.contains("max_abs_error"));
  CHECK(mj.contains("certify_pass"));
  CHECK(mj["status"] == "ok");
  CHECK(mj["mse"].get<double>() == res.metrics.mse);

  const auto cj = tsm::certificate_to_json(res.certificate);
  CHECK(cj["pass"].get<bool>());
  CHECK(cj["n_violations"].get<std::size_t>() == 0);
  CHECK(cj.contains("ultimate_bound"));
  CHECK(cj.contains("Psi"));
}

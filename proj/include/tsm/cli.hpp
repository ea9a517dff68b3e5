#pragma once

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "engine.hpp"

namespace tsm::cli {

namespace detail {

inline std::string output_stem(const ScenarioConfig& cfg, const std::string& out_override) {
  std::string dir = out_override.empty() ? cfg.output.dir : out_override;
  if (dir.empty()) dir = ".";
  std::filesystem::create_directories(dir);
  std::string prefix = cfg.output.prefix.empty() ? cfg.name : cfg.output.prefix;
  if (prefix.empty()) prefix = "scenario";
  return (std::filesystem::path(dir) / prefix).string();
}

inline std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw ConfigError("--values: cannot parse '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values: no values given");
  return out;
}

inline void print_run_summary(const ScenarioConfig& cfg, const SimResult& res) {
  std::printf("%s: mse=%.6e max|e|=%.6e records=%zu (%.2f s)\n",
              (cfg.name.empty() ? "scenario" : cfg.name).c_str(), res.metrics.mse,
              res.metrics.max_abs_error, res.metrics.n_records, res.metrics.runtime_s);
  if (res.status == SimStatus::diverged)
    std::printf("diverged at t=%.6g, trace truncated\n", res.diverged_at);
}

inline void print_certificate(const CertificateReport& rep) {
  std::printf("certificate: %s\n", rep.pass() ? "PASS" : "FAIL");
  std::printf("  V0=%.6g Psi=%.6g rho=%.6g ultimate_bound=%.6g\n", rep.V0, rep.Psi, rep.rho_cert,
              rep.ultimate_bound);
  std::printf("  envelope violations=%zu sup|D|=%.6g (D*=%.6g, %s) final-second max|e|=%.6g (%s)\n",
              rep.violations.size(), rep.sup_abs_D, rep.D_star, rep.d_bound_ok ? "ok" : "exceeded",
              rep.final_second_max_abs_e, rep.final_error_in_bound ? "in bound" : "out of bound");
}

inline int cmd_run(const std::string& config_path, const std::string& out_dir, bool certify, bool quiet) {
  const ScenarioConfig cfg = load_config(config_path);
  const SimResult res = run_scenario(cfg);
  const std::string stem = output_stem(cfg, out_dir);
  write_trace_csv(stem + "_trace.csv", res.trace);
  write_json(stem + "_metrics.json", metrics_to_json(cfg, res));
  if (certify) write_json(stem + "_certificate.json", certificate_to_json(res.certificate));
  if (!quiet) {
    print_run_summary(cfg, res);
    if (certify) print_certificate(res.certificate);
  }
  if (res.status == SimStatus::diverged) return 2;
  if (certify && !res.certificate.pass()) return 3;
  return 0;
}

inline int cmd_certify(const std::string& config_path, const std::string& out_dir, bool quiet) {
  const ScenarioConfig cfg = load_config(config_path);
  const SimResult res = run_scenario(cfg);
  const std::string stem = output_stem(cfg, out_dir);
  write_trace_csv(stem + "_trace.csv", res.trace);
  write_json(stem + "_metrics.json", metrics_to_json(cfg, res));
  write_json(stem + "_certificate.json", certificate_to_json(res.certificate));
  if (!quiet) {
    print_run_summary(cfg, res);
    print_certificate(res.certificate);
  }
  if (res.status == SimStatus::diverged) return 2;
  return res.certificate.pass() ? 0 : 3;
}

inline int cmd_loop(const std::string& config_path, const std::string& out_dir, bool quiet) {
  const ScenarioConfig cfg = load_config(config_path);
  validate(cfg);
  const auto loop = hysteresis_loop(cfg.friction, cfg.loop.amplitude, cfg.loop.freq, cfg.loop.cycles,
                                    cfg.loop.dt, cfg.sim.integrator);
  const std::string stem = output_stem(cfg, out_dir);
  write_loop_csv(stem + "_loop.csv", loop);
  if (!quiet)
    std::printf("%s: %zu loop samples (amplitude=%g, freq=%g, cycles=%d)\n",
                (cfg.name.empty() ? "scenario" : cfg.name).c_str(), loop.size(), cfg.loop.amplitude,
                cfg.loop.freq, cfg.loop.cycles);
  return 0;
}

inline int cmd_sweep(const std::string& config_path, const std::string& out_dir, const std::string& param,
                     const std::string& values_csv, bool quiet) {
  const ScenarioConfig base = load_config(config_path);
  const std::vector<double> values = parse_values(values_csv);

  struct Row {
    double value, mse, max_abs_error;
    bool certify_pass;
    SimStatus status;
  };
  std::vector<Row> rows;
  for (double v : values) {
    ScenarioConfig cfg = base;
    set_param(cfg, param, v);
    const SimResult res = run_scenario(cfg);
    rows.push_back({v, res.metrics.mse, res.metrics.max_abs_error, res.metrics.certify_pass, res.status});
  }

  const std::string stem = output_stem(base, out_dir);
  {
    std::ofstream out(stem + "_sweep.csv");
    if (!out) throw std::runtime_error("cannot open sweep csv for writing");
    out << "value,mse,max_abs_error,certify_pass,status\n";
    for (const Row& r : rows) {
      tsm::detail::put_g17(out, r.value);
      out << ',';
      tsm::detail::put_g17(out, r.mse);
      out << ',';
      tsm::detail::put_g17(out, r.max_abs_error);
      out << ',' << (r.certify_pass ? 1 : 0) << ',' << (r.status == SimStatus::ok ? "ok" : "diverged")
          << '\n';
    }
  }

  bool any_diverged = false;
  if (!quiet) std::printf("%-16s %-14s %-14s %s\n", param.c_str(), "mse", "max|e|", "status");
  for (const Row& r : rows) {
    if (!quiet)
      std::printf("%-16.6g %-14.6e %-14.6e %s\n", r.value, r.mse, r.max_abs_error,
                  r.status == SimStatus::ok ? "ok" : "diverged");
    any_diverged = any_diverged || r.status == SimStatus::diverged;
  }
  return any_diverged ? 2 : 0;
}

}  // namespace detail

inline int run_main(int argc, const char* const* argv) {
  CLI::App app{"tendon-sheath mechanism friction, control, and certification toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param, values_csv;
  bool certify_flag = false, quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "scenario config JSON")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_flag("--quiet", quiet, "suppress console summary");
  };

  CLI::App* run = app.add_subcommand("run", "simulate a scenario, write trace CSV + metrics JSON");
  add_common(run);
  run->add_flag("--certify", certify_flag, "also emit the stability certificate");

  CLI::App* certify = app.add_subcommand("certify", "simulate and emit the stability certificate");
  add_common(certify);

  CLI::App* loop = app.add_subcommand("loop", "trace a friction hysteresis loop to CSV");
  add_common(loop);

  CLI::App* sweep = app.add_subcommand("sweep", "re-run a scenario across parameter values");
  add_common(sweep);
  sweep->add_option("--param", param, "config key to vary, e.g. gains.sigma")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return detail::cmd_run(config_path, out_dir, certify_flag, quiet);
    if (certify->parsed()) return detail::cmd_certify(config_path, out_dir, quiet);
    if (loop->parsed()) return detail::cmd_loop(config_path, out_dir, quiet);
    if (sweep->parsed()) return detail::cmd_sweep(config_path, out_dir, param, values_csv, quiet);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

inline int run_main(std::vector<std::string> args) {
  std::vector<const char*> argv;
  argv.push_back("tsm_sim");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace tsm::cli

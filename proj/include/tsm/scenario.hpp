#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "controller.hpp"
#include "estimator.hpp"
#include "friction.hpp"
#include "plant.hpp"

namespace tsm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SignalSource { truth, estimated };

inline SignalSource signal_source_from_string(const std::string& s) {
  if (s == "truth") return SignalSource::truth;
  if (s == "estimated") return SignalSource::estimated;
  throw ConfigError("sim.signal_source: unknown value '" + s + "'");
}

inline const char* to_string(SignalSource s) { return s == SignalSource::truth ? "truth" : "estimated"; }

struct SimSettings {
  double dt = 1e-3;
  double duration = 30.0;
  Scheme integrator = Scheme::rk4;
  SignalSource signal_source = SignalSource::truth;
  unsigned long seed = 0;
};

struct EstimatorSettings {
  double T = 0.01;
  double tau = 0.2;
  double K = 20.0;
  long cycles = 3600;
  FilterDisc filter_disc = FilterDisc::backward_euler;
};

struct LoopSettings {
  double amplitude = 0.4;
  double freq = 0.2;  // Hz
  int cycles = 3;
  double dt = 1e-3;
};

struct OutputSettings {
  std::string dir = ".";
  std::string prefix;  // defaults to the scenario name
};

struct ScenarioConfig {
  std::string name = "scenario";
  FrictionParams friction;
  PlantParams plant;
  DisturbanceModel disturbance;
  ControllerGains gains;
  ReferenceTrajectory reference;
  AdaptiveState initial_estimates;
  SimSettings sim;
  EstimatorSettings estimator;
  LoopSettings loop;
  OutputSettings output;
};

namespace detail {

inline void expect_keys(const nlohmann::json& j, const std::string& section,
                        std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) throw ConfigError(section + "." + it.key() + ": unknown key");
  }
}

inline void get_num(const nlohmann::json& j, const std::string& section, const char* key, double& out) {
  if (auto it = j.find(key); it != j.end()) {
    if (!it->is_number()) throw ConfigError(section + "." + key + ": expected a number");
    out = it->get<double>();
  }
}

inline void get_int(const nlohmann::json& j, const std::string& section, const char* key, long& out) {
  if (auto it = j.find(key); it != j.end()) {
    if (!it->is_number_integer()) throw ConfigError(section + "." + key + ": expected an integer");
    out = it->get<long>();
  }
}

inline void get_str(const nlohmann::json& j, const std::string& section, const char* key, std::string& out) {
  if (auto it = j.find(key); it != j.end()) {
    if (!it->is_string()) throw ConfigError(section + "." + key + ": expected a string");
    out = it->get<std::string>();
  }
}

}  // namespace detail

// Any key missing from the JSON keeps its default; unknown keys are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::expect_keys(j, "config",
                      {"name", "friction", "plant", "disturbance", "gains", "reference", "initial_estimates",
                       "sim", "estimator", "encoder", "loop", "output"});
  ScenarioConfig c;
  detail::get_str(j, "config", "name", c.name);

  if (auto it = j.find("friction"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "friction", {"k_x", "k_zeta", "rho", "sigma", "n", "upsilon", "F0"});
    detail::get_num(s, "friction", "k_x", c.friction.k_x);
    detail::get_num(s, "friction", "k_zeta", c.friction.k_zeta);
    detail::get_num(s, "friction", "rho", c.friction.rho);
    detail::get_num(s, "friction", "sigma", c.friction.sigma);
    detail::get_num(s, "friction", "n", c.friction.n_exp);
    detail::get_num(s, "friction", "upsilon", c.friction.upsilon);
    detail::get_num(s, "friction", "F0", c.friction.F0);
  }
  if (auto it = j.find("plant"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "plant", {"m", "c", "r_i", "r_o", "k_e"});
    detail::get_num(s, "plant", "m", c.plant.m);
    detail::get_num(s, "plant", "c", c.plant.c);
    detail::get_num(s, "plant", "r_i", c.plant.r_i);
    detail::get_num(s, "plant", "r_o", c.plant.r_o);
    detail::get_num(s, "plant", "k_e", c.plant.k_e);
  }
  if (auto it = j.find("disturbance"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "disturbance", {"amplitude", "omega"});
    detail::get_num(s, "disturbance", "amplitude", c.disturbance.amplitude);
    detail::get_num(s, "disturbance", "omega", c.disturbance.omega);
  }
  if (auto it = j.find("gains"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "gains",
                        {"alpha_v1", "alpha_v2", "k_theta", "k_m", "k_D", "sigma1", "sigma2", "sigma3", "epsilon"});
    detail::get_num(s, "gains", "alpha_v1", c.gains.alpha_v1);
    detail::get_num(s, "gains", "alpha_v2", c.gains.alpha_v2);
    detail::get_num(s, "gains", "k_theta", c.gains.k_theta);
    detail::get_num(s, "gains", "k_m", c.gains.k_m);
    detail::get_num(s, "gains", "k_D", c.gains.k_D);
    detail::get_num(s, "gains", "sigma1", c.gains.sigma1);
    detail::get_num(s, "gains", "sigma2", c.gains.sigma2);
    detail::get_num(s, "gains", "sigma3", c.gains.sigma3);
    detail::get_num(s, "gains", "epsilon", c.gains.epsilon);
  }
  if (auto it = j.find("reference"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "reference", {"amplitude", "omega"});
    detail::get_num(s, "reference", "amplitude", c.reference.amplitude);
    detail::get_num(s, "reference", "omega", c.reference.omega);
  }
  if (auto it = j.find("initial_estimates"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "initial_estimates", {"theta_hat", "m_hat", "D_star_hat"});
    if (auto th = s.find("theta_hat"); th != s.end()) {
      if (!th->is_array() || th->size() != 3)
        throw ConfigError("initial_estimates.theta_hat: expected an array of 3 numbers");
      for (int i = 0; i < 3; ++i) {
        if (!(*th)[i].is_number()) throw ConfigError("initial_estimates.theta_hat: expected an array of 3 numbers");
        c.initial_estimates.theta_hat[i] = (*th)[i].get<double>();
      }
    }
    detail::get_num(s, "initial_estimates", "m_hat", c.initial_estimates.m_hat);
    detail::get_num(s, "initial_estimates", "D_star_hat", c.initial_estimates.D_star_hat);
  }
  if (auto it = j.find("sim"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "sim", {"dt", "duration", "integrator", "signal_source", "seed"});
    detail::get_num(s, "sim", "dt", c.sim.dt);
    detail::get_num(s, "sim", "duration", c.sim.duration);
    std::string scheme = to_string(c.sim.integrator);
    detail::get_str(s, "sim", "integrator", scheme);
    try {
      c.sim.integrator = scheme_from_string(scheme);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    std::string src = to_string(c.sim.signal_source);
    detail::get_str(s, "sim", "signal_source", src);
    c.sim.signal_source = signal_source_from_string(src);
    long seed = static_cast<long>(c.sim.seed);
    detail::get_int(s, "sim", "seed", seed);
    c.sim.seed = static_cast<unsigned long>(seed);
  }
  if (auto it = j.find("estimator"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "estimator", {"T", "tau", "K", "cycles", "filter_disc"});
    detail::get_num(s, "estimator", "T", c.estimator.T);
    detail::get_num(s, "estimator", "tau", c.estimator.tau);
    detail::get_num(s, "estimator", "K", c.estimator.K);
    detail::get_int(s, "estimator", "cycles", c.estimator.cycles);
    std::string disc = to_string(c.estimator.filter_disc);
    detail::get_str(s, "estimator", "filter_disc", disc);
    try {
      c.estimator.filter_disc = filter_disc_from_string(disc);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto it = j.find("encoder"); it != j.end()) {  // alias for estimator.cycles
    const auto& s = *it;
    detail::expect_keys(s, "encoder", {"cycles"});
    detail::get_int(s, "encoder", "cycles", c.estimator.cycles);
  }
  if (auto it = j.find("loop"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "loop", {"amplitude", "freq", "cycles", "dt"});
    detail::get_num(s, "loop", "amplitude", c.loop.amplitude);
    detail::get_num(s, "loop", "freq", c.loop.freq);
    long cyc = c.loop.cycles;
    detail::get_int(s, "loop", "cycles", cyc);
    c.loop.cycles = static_cast<int>(cyc);
    detail::get_num(s, "loop", "dt", c.loop.dt);
  }
  if (auto it = j.find("output"); it != j.end()) {
    const auto& s = *it;
    detail::expect_keys(s, "output", {"dir", "prefix"});
    detail::get_str(s, "output", "dir", c.output.dir);
    detail::get_str(s, "output", "prefix", c.output.prefix);
  }
  return c;
}

inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["friction"] = {{"k_x", c.friction.k_x},     {"k_zeta", c.friction.k_zeta}, {"rho", c.friction.rho},
                   {"sigma", c.friction.sigma}, {"n", c.friction.n_exp},       {"upsilon", c.friction.upsilon},
                   {"F0", c.friction.F0}};
  j["plant"] = {{"m", c.plant.m}, {"c", c.plant.c}, {"r_i", c.plant.r_i}, {"r_o", c.plant.r_o}, {"k_e", c.plant.k_e}};
  j["disturbance"] = {{"amplitude", c.disturbance.amplitude}, {"omega", c.disturbance.omega}};
  j["gains"] = {{"alpha_v1", c.gains.alpha_v1}, {"alpha_v2", c.gains.alpha_v2}, {"k_theta", c.gains.k_theta},
                {"k_m", c.gains.k_m},           {"k_D", c.gains.k_D},           {"sigma1", c.gains.sigma1},
                {"sigma2", c.gains.sigma2},     {"sigma3", c.gains.sigma3},     {"epsilon", c.gains.epsilon}};
  j["reference"] = {{"amplitude", c.reference.amplitude}, {"omega", c.reference.omega}};
  j["initial_estimates"] = {{"theta_hat", c.initial_estimates.theta_hat},
                            {"m_hat", c.initial_estimates.m_hat},
                            {"D_star_hat", c.initial_estimates.D_star_hat}};
  j["sim"] = {{"dt", c.sim.dt},
              {"duration", c.sim.duration},
              {"integrator", to_string(c.sim.integrator)},
              {"signal_source", to_string(c.sim.signal_source)},
              {"seed", c.sim.seed}};
  j["estimator"] = {{"T", c.estimator.T},
                    {"tau", c.estimator.tau},
                    {"K", c.estimator.K},
                    {"cycles", c.estimator.cycles},
                    {"filter_disc", to_string(c.estimator.filter_disc)}};
  j["loop"] = {{"amplitude", c.loop.amplitude}, {"freq", c.loop.freq}, {"cycles", c.loop.cycles}, {"dt", c.loop.dt}};
  j["output"] = {{"dir", c.output.dir}, {"prefix", c.output.prefix}};
  return j;
}

inline void validate(const ScenarioConfig& c) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(std::isfinite(c.friction.k_x), "friction.k_x: must be finite");
  require(std::isfinite(c.friction.k_zeta), "friction.k_zeta: must be finite");
  require(c.friction.rho > 0.0, "friction.rho: must be > 0");
  require(c.friction.sigma > 0.5, "friction.sigma: must be > 0.5");
  require(c.friction.n_exp >= 1.0, "friction.n: must be >= 1");
  require(std::isfinite(c.friction.upsilon), "friction.upsilon: must be finite");
  require(std::isfinite(c.friction.F0), "friction.F0: must be finite");

  require(c.plant.m > 0.0, "plant.m: must be > 0");
  require(c.plant.c >= 0.0, "plant.c: must be >= 0");
  require(c.plant.r_i > 0.0, "plant.r_i: must be > 0");
  require(c.plant.r_o > 0.0, "plant.r_o: must be > 0");
  require(c.plant.k_e >= 0.0, "plant.k_e: must be >= 0");

  require(c.disturbance.amplitude >= 0.0, "disturbance.amplitude: must be >= 0");
  require(std::isfinite(c.disturbance.omega), "disturbance.omega: must be finite");

  require(c.gains.alpha_v1 > 0.0, "gains.alpha_v1: must be > 0");
  require(c.gains.alpha_v2 > 0.0, "gains.alpha_v2: must be > 0");
  require(c.gains.k_theta > 0.0, "gains.k_theta: must be > 0");
  require(c.gains.k_m > 0.0, "gains.k_m: must be > 0");
  require(c.gains.k_D > 0.0, "gains.k_D: must be > 0");
  require(c.gains.sigma1 > 0.0, "gains.sigma1: must be > 0");
  require(c.gains.sigma2 > 0.0, "gains.sigma2: must be > 0");
  require(c.gains.sigma3 > 0.0, "gains.sigma3: must be > 0");
  require(c.gains.epsilon > 0.0, "gains.epsilon: must be > 0");

  require(c.reference.amplitude >= 0.0, "reference.amplitude: must be >= 0");
  require(c.reference.omega >= 0.0, "reference.omega: must be >= 0");

  for (double v : c.initial_estimates.theta_hat)
    require(std::isfinite(v), "initial_estimates.theta_hat: must be finite");
  require(std::isfinite(c.initial_estimates.m_hat), "initial_estimates.m_hat: must be finite");
  require(std::isfinite(c.initial_estimates.D_star_hat), "initial_estimates.D_star_hat: must be finite");

  require(c.sim.dt > 0.0, "sim.dt: must be > 0");
  require(c.sim.duration >= c.sim.dt, "sim.duration: must be >= sim.dt");

  require(c.estimator.T > 0.0, "estimator.T: must be > 0");
  require(c.estimator.tau > 0.0, "estimator.tau: must be > 0");
  require(c.estimator.K > 0.0, "estimator.K: must be > 0");
  require(c.estimator.cycles > 0, "estimator.cycles: must be > 0");
  require(c.estimator.K * c.estimator.T < 2.0, "estimator.K: K*T must be < 2");

  require(c.loop.amplitude >= 0.0, "loop.amplitude: must be >= 0");
  require(c.loop.freq > 0.0, "loop.freq: must be > 0");
  require(c.loop.cycles >= 2, "loop.cycles: must be >= 2");
  require(c.loop.dt > 0.0, "loop.dt: must be > 0");
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: parse error in '" + path + "': " + e.what());
  }
  ScenarioConfig c = config_from_json(j);
  validate(c);
  return c;
}

// Gain-sweep support; "gains.sigma" fans out to all three leakage coefficients.
inline void set_param(ScenarioConfig& c, const std::string& key, double v) {
  if (key == "friction.k_x") c.friction.k_x = v;
  else if (key == "friction.k_zeta") c.friction.k_zeta = v;
  else if (key == "friction.rho") c.friction.rho = v;
  else if (key == "friction.sigma") c.friction.sigma = v;
  else if (key == "friction.n") c.friction.n_exp = v;
  else if (key == "friction.upsilon") c.friction.upsilon = v;
  else if (key == "friction.F0") c.friction.F0 = v;
  else if (key == "plant.m") c.plant.m = v;
  else if (key == "plant.c") c.plant.c = v;
  else if (key == "plant.r_i") c.plant.r_i = v;
  else if (key == "plant.r_o") c.plant.r_o = v;
  else if (key == "plant.k_e") c.plant.k_e = v;
  else if (key == "disturbance.amplitude") c.disturbance.amplitude = v;
  else if (key == "disturbance.omega") c.disturbance.omega = v;
  else if (key == "gains.alpha_v1") c.gains.alpha_v1 = v;
  else if (key == "gains.alpha_v2") c.gains.alpha_v2 = v;
  else if (key == "gains.k_theta") c.gains.k_theta = v;
  else if (key == "gains.k_m") c.gains.k_m = v;
  else if (key == "gains.k_D") c.gains.k_D = v;
  else if (key == "gains.sigma1") c.gains.sigma1 = v;
  else if (key == "gains.sigma2") c.gains.sigma2 = v;
  else if (key == "gains.sigma3") c.gains.sigma3 = v;
  else if (key == "gains.sigma") c.gains.sigma1 = c.gains.sigma2 = c.gains.sigma3 = v;
  else if (key == "gains.epsilon") c.gains.epsilon = v;
  else if (key == "reference.amplitude") c.reference.amplitude = v;
  else if (key == "reference.omega") c.reference.omega = v;
  else if (key == "sim.dt") c.sim.dt = v;
  else if (key == "sim.duration") c.sim.duration = v;
  else if (key == "estimator.T") c.estimator.T = v;
  else if (key == "estimator.tau") c.estimator.tau = v;
  else if (key == "estimator.K") c.estimator.K = v;
  else throw ConfigError(key + ": unknown sweep parameter");
}

namespace scenarios {

inline ScenarioConfig baseline() {
  ScenarioConfig c;  // struct defaults are the tuned parameter set
  c.name = "baseline";
  return c;
}

inline ScenarioConfig sigma_high() {
  ScenarioConfig c = baseline();
  c.name = "sigma_high";
  c.gains.sigma1 = c.gains.sigma2 = c.gains.sigma3 = 0.1;
  return c;
}

inline ScenarioConfig low_gain() {
  ScenarioConfig c = baseline();
  c.name = "low_gain";
  c.gains.alpha_v1 = 3.0;
  c.gains.alpha_v2 = 8.0;
  c.gains.k_theta = 0.25;
  c.gains.k_m = 0.25;
  c.gains.k_D = 0.5;
  return c;
}

}  // namespace scenarios

}  // namespace tsm

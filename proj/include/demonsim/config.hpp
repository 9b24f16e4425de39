#pragma once

// ProtocolConfig: the CLI-facing configuration record. JSON file values are
// overridden by command-line flags; unknown keys and out-of-range values are
// rejected with the offending key named.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "demonsim/dynamics.hpp"
#include "demonsim/experiment.hpp"
#include "demonsim/state.hpp"

namespace demonsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  int points = 41;
  double delta_beta_tilde_min = -4.0;
  double delta_beta_tilde_max = 4.0;
  std::vector<double> p_e_values;  // explicit grid; overrides the implicit one
};

struct ProtocolConfig {
  double p_e = 0.5;
  double n_th = 0.63;
  int n_max = kDefaultNmax;

  double eta_readout = 0.95;
  double t_flight = 1.2e-3;
  double T_atom = 30e-3;
  double T_cav = 25e-3;
  double n_env = 0.243;
  double eps_det = 0.05;
  double p_det = 0.5;
  double swap_split = 0.5;
  bool atom_relaxation = true;
  bool cavity_relaxation = true;
  bool detection = true;

  bool demon = true;
  bool ideal = false;

  std::string mode = "single";  // single | sweep | mc | validate
  GridSpec grid;
  std::uint64_t shots = 25000;
  int bootstrap_resamples = 1000;
  bool mc_sampled_reference = false;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::string format = "csv";

  ThermalSpec thermal() const { return ThermalSpec(p_e, n_th, n_max); }

  ImperfectionSpec imperfections() const {
    if (ideal) return ImperfectionSpec::ideal();
    ImperfectionSpec imp;
    imp.eta_readout = eta_readout;
    imp.t_flight = t_flight;
    imp.T_atom = T_atom;
    imp.T_cav = T_cav;
    imp.n_env = n_env;
    imp.eps_det = eps_det;
    imp.p_det = p_det;
    imp.swap_split = swap_split;
    imp.atom_relaxation = atom_relaxation;
    imp.cavity_relaxation = cavity_relaxation;
    imp.detection = detection;
    return imp;
  }

  std::vector<double> grid_values() const {
    if (!grid.p_e_values.empty()) return grid.p_e_values;
    return default_grid(n_th, grid.points, grid.delta_beta_tilde_min,
                        grid.delta_beta_tilde_max);
  }

  void validate() const {
    auto require = [](bool ok, const std::string& key, const std::string& why) {
      if (!ok) throw ConfigError("config: \"" + key + "\" " + why);
    };
    require(p_e > 0.0 && p_e < 1.0, "p_e", "must lie strictly inside (0,1)");
    require(n_th > 0.0, "n_th", "must be > 0");
    require(n_max >= 1, "n_max", "must be >= 1");
    require(eta_readout >= 0.0 && eta_readout <= 1.0, "eta_readout",
            "must lie in [0,1]");
    require(t_flight > 0.0, "t_flight", "must be > 0");
    require(T_atom > 0.0, "T_atom", "must be > 0");
    require(T_cav > 0.0, "T_cav", "must be > 0");
    require(n_env >= 0.0, "n_env", "must be >= 0");
    require(eps_det >= 0.0 && eps_det <= 1.0, "eps_det", "must lie in [0,1]");
    require(p_det >= 0.0 && p_det <= 1.0, "p_det", "must lie in [0,1]");
    require(swap_split >= 0.0 && swap_split <= 1.0, "swap_split",
            "must lie in [0,1]");
    require(mode == "single" || mode == "sweep" || mode == "mc" ||
                mode == "validate",
            "mode", "must be one of single|sweep|mc|validate");
    require(format == "csv" || format == "json", "format",
            "must be csv or json");
    require(shots >= 1, "shots", "must be >= 1");
    require(bootstrap_resamples >= 100, "bootstrap_resamples", "must be >= 100");
    require(grid.points >= 2, "grid.points", "must be >= 2");
    require(grid.delta_beta_tilde_min < grid.delta_beta_tilde_max,
            "grid.delta_beta_tilde_min", "must be below grid.delta_beta_tilde_max");
    for (double value : grid.p_e_values) {
      require(value >= 0.0 && value <= 1.0, "grid.p_e_values",
              "entries must lie in [0,1]");
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["p_e"] = p_e;
    j["n_th"] = n_th;
    j["n_max"] = n_max;
    j["eta_readout"] = eta_readout;
    j["t_flight"] = t_flight;
    j["T_atom"] = T_atom;
    j["T_cav"] = T_cav;
    j["n_env"] = n_env;
    j["eps_det"] = eps_det;
    j["p_det"] = p_det;
    j["swap_split"] = swap_split;
    j["atom_relaxation"] = atom_relaxation;
    j["cavity_relaxation"] = cavity_relaxation;
    j["detection"] = detection;
    j["demon"] = demon;
    j["ideal"] = ideal;
    j["mode"] = mode;
    j["grid"]["points"] = grid.points;
    j["grid"]["delta_beta_tilde_min"] = grid.delta_beta_tilde_min;
    j["grid"]["delta_beta_tilde_max"] = grid.delta_beta_tilde_max;
    if (!grid.p_e_values.empty()) j["grid"]["p_e_values"] = grid.p_e_values;
    j["shots"] = shots;
    j["bootstrap_resamples"] = bootstrap_resamples;
    j["mc_sampled_reference"] = mc_sampled_reference;
    j["seed"] = seed;
    j["out"] = out;
    j["format"] = format;
    return j;
  }

  static ProtocolConfig from_json(const nlohmann::json& j);
  static ProtocolConfig load(const std::filesystem::path& path);
};

/// Command-line overrides; flags beat config-file values.
struct ConfigOverrides {
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<double> p_e;
  std::optional<double> n_th;
  std::optional<int> n_max;
  std::optional<std::uint64_t> shots;
  std::optional<std::string> mode;
  bool no_demon = false;
  bool ideal = false;

  ProtocolConfig apply(ProtocolConfig cfg) const {
    if (out) cfg.out = *out;
    if (format) cfg.format = *format;
    if (seed) cfg.seed = *seed;
    if (p_e) cfg.p_e = *p_e;
    if (n_th) cfg.n_th = *n_th;
    if (n_max) cfg.n_max = *n_max;
    if (shots) cfg.shots = *shots;
    if (mode) cfg.mode = *mode;
    if (no_demon) cfg.demon = false;
    if (ideal) cfg.ideal = true;
    cfg.validate();
    return cfg;
  }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& target,
              std::set<std::string>& seen) {
  if (!j.contains(key)) return;
  seen.insert(key);
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: \"") + key + "\" has the wrong type");
  }
}

}  // namespace detail

inline ProtocolConfig ProtocolConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ProtocolConfig c;
  std::set<std::string> seen;
  detail::read_key(j, "p_e", c.p_e, seen);
  detail::read_key(j, "n_th", c.n_th, seen);
  detail::read_key(j, "n_max", c.n_max, seen);
  detail::read_key(j, "eta_readout", c.eta_readout, seen);
  detail::read_key(j, "t_flight", c.t_flight, seen);
  detail::read_key(j, "T_atom", c.T_atom, seen);
  detail::read_key(j, "T_cav", c.T_cav, seen);
  detail::read_key(j, "n_env", c.n_env, seen);
  detail::read_key(j, "eps_det", c.eps_det, seen);
  detail::read_key(j, "p_det", c.p_det, seen);
  detail::read_key(j, "swap_split", c.swap_split, seen);
  detail::read_key(j, "atom_relaxation", c.atom_relaxation, seen);
  detail::read_key(j, "cavity_relaxation", c.cavity_relaxation, seen);
  detail::read_key(j, "detection", c.detection, seen);
  detail::read_key(j, "demon", c.demon, seen);
  detail::read_key(j, "ideal", c.ideal, seen);
  detail::read_key(j, "mode", c.mode, seen);
  detail::read_key(j, "shots", c.shots, seen);
  detail::read_key(j, "bootstrap_resamples", c.bootstrap_resamples, seen);
  detail::read_key(j, "mc_sampled_reference", c.mc_sampled_reference, seen);
  detail::read_key(j, "seed", c.seed, seen);
  detail::read_key(j, "out", c.out, seen);
  detail::read_key(j, "format", c.format, seen);
  if (j.contains("grid")) {
    seen.insert("grid");
    const auto& g = j.at("grid");
    if (!g.is_object()) throw ConfigError("config: \"grid\" must be an object");
    std::set<std::string> grid_seen;
    detail::read_key(g, "points", c.grid.points, grid_seen);
    detail::read_key(g, "delta_beta_tilde_min", c.grid.delta_beta_tilde_min,
                     grid_seen);
    detail::read_key(g, "delta_beta_tilde_max", c.grid.delta_beta_tilde_max,
                     grid_seen);
    detail::read_key(g, "p_e_values", c.grid.p_e_values, grid_seen);
    for (const auto& [key, value] : g.items()) {
      (void)value;
      if (!grid_seen.count(key))
        throw ConfigError("config: unknown key \"grid." + key + "\"");
    }
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!seen.count(key))
      throw ConfigError("config: unknown key \"" + key + "\"");
  }
  c.validate();
  return c;
}

inline ProtocolConfig ProtocolConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON: " +
                      e.what());
  }
  return from_json(j);
}

}  // namespace demonsim

#pragma once

// Figure-data emission. CSV schemas are stable contracts: column names and
// order are fixed, numbers carry 12 significant digits, and every file
// references the effective configuration (sidecar config.json for CSV,
// embedded object for JSON).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "demonsim/config.hpp"
#include "demonsim/experiment.hpp"
#include "demonsim/thermo.hpp"

namespace demonsim {

/// 12-significant-digit rendering; keeps residual columns meaningful.
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace detail {

struct Panel {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::vector<Panel> sweep_panels(const SweepResult& sweep) {
  Panel fig2{"fig2",
             {"delta_beta_tilde", "Q_C_demon", "Q_Q_demon", "Q_C_nodemon",
              "Q_Q_nodemon", "epsilon"},
             {}};
  Panel fig3a{"fig3a",
              {"delta_beta_tilde", "I_readout", "I_feedback", "dI",
               "I_readout_nodemon", "I_feedback_nodemon", "dI_nodemon"},
              {}};
  Panel fig3b{"fig3b", {"delta_beta_tilde", "Q_dbeta", "g"}, {}};
  Panel fig3c{"fig3c", {"delta_beta_tilde", "D_Q", "D_C", "dI_QC", "D_QC"}, {}};
  Panel fig3d{"fig3d", {"delta_beta_tilde", "residual"}, {}};

  for (const SweepPoint& pt : sweep.points) {
    const ThermoReport& on = pt.with_demon;
    const ThermoReport& off = pt.without_demon;
    const double dbt = pt.delta_beta_tilde;
    fig2.rows.push_back({dbt, on.Q_C, on.Q_Q, off.Q_C, off.Q_Q, on.heat_gain});
    fig3a.rows.push_back({dbt, on.post_readout.I_QCD, on.post_feedback.I_QCD,
                          on.dI_QCD, off.post_readout.I_QCD,
                          off.post_feedback.I_QCD, off.dI_QCD});
    fig3b.rows.push_back({dbt, on.clausius_QC, on.gsl});
    fig3c.rows.push_back({dbt, on.D_Q, on.D_C, on.I_QC_post, on.D_QC});
    fig3d.rows.push_back({dbt, on.residual});
  }
  return {fig2, fig3a, fig3b, fig3c, fig3d};
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit: cannot write " + path.string());
  return out;
}

inline void write_csv(const Panel& panel, const std::filesystem::path& dir,
                      const std::string& config_sidecar) {
  auto out = open_output(dir / (panel.name + ".csv"));
  out << "# config: " << config_sidecar << "\n";
  for (std::size_t c = 0; c < panel.columns.size(); ++c)
    out << (c ? "," : "") << panel.columns[c];
  out << "\n";
  for (const auto& row : panel.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      out << (c ? "," : "") << format_value(row[c]);
    out << "\n";
  }
}

inline nlohmann::ordered_json panel_json(const Panel& panel) {
  nlohmann::ordered_json j;
  j["columns"] = panel.columns;
  j["rows"] = panel.rows;
  return j;
}

}  // namespace detail

/// Writes the five figure panels of a sweep. CSV format produces one file per
/// panel plus the config.json sidecar; JSON bundles everything into
/// sweep.json.
inline void emit_sweep(const SweepResult& sweep,
                       const nlohmann::ordered_json& config,
                       const std::filesystem::path& out_dir,
                       const std::string& format) {
  if (sweep.points.empty()) throw std::invalid_argument("emit_sweep: empty result");
  std::filesystem::create_directories(out_dir);
  const auto panels = detail::sweep_panels(sweep);
  if (format == "csv") {
    {
      auto out = detail::open_output(out_dir / "config.json");
      out << config.dump(2) << "\n";
    }
    for (const auto& panel : panels)
      detail::write_csv(panel, out_dir, "config.json");
  } else if (format == "json") {
    nlohmann::ordered_json j;
    j["version"] = sweep.version;
    j["config"] = config;
    for (const auto& panel : panels) j[panel.name] = detail::panel_json(panel);
    auto out = detail::open_output(out_dir / "sweep.json");
    out << j.dump(2) << "\n";
  } else {
    throw std::invalid_argument("emit_sweep: format must be csv or json");
  }
}

inline nlohmann::ordered_json report_json(const ThermoReport& report) {
  nlohmann::ordered_json j;
  for (const auto& [name, value] : report.items()) j[name] = value;
  return j;
}

/// Single-run report: report.csv (one header + one row) or report.json.
inline void emit_report(const ThermoReport& report,
                        const nlohmann::ordered_json& config,
                        const std::filesystem::path& out_dir,
                        const std::string& format) {
  std::filesystem::create_directories(out_dir);
  const auto items = report.items();
  if (format == "csv") {
    {
      auto out = detail::open_output(out_dir / "config.json");
      out << config.dump(2) << "\n";
    }
    auto out = detail::open_output(out_dir / "report.csv");
    out << "# config: config.json\n";
    for (std::size_t i = 0; i < items.size(); ++i)
      out << (i ? "," : "") << items[i].first;
    out << "\n";
    for (std::size_t i = 0; i < items.size(); ++i)
      out << (i ? "," : "") << format_value(items[i].second);
    out << "\n";
  } else {
    nlohmann::ordered_json j;
    j["config"] = config;
    j["report"] = report_json(report);
    auto out = detail::open_output(out_dir / "report.json");
    out << j.dump(2) << "\n";
  }
}

/// Monte Carlo output: shot counts, the plug-in report, and bootstrap errors.
inline void emit_mc(const ShotTable& table, const ThermoReport& report,
                    const std::map<std::string, double>& errors,
                    const nlohmann::ordered_json& config,
                    const std::filesystem::path& out_dir,
                    const std::string& format) {
  std::filesystem::create_directories(out_dir);
  if (format == "csv") {
    {
      auto out = detail::open_output(out_dir / "config.json");
      out << config.dump(2) << "\n";
    }
    {
      auto out = detail::open_output(out_dir / "mc_counts.csv");
      out << "# config: config.json\n";
      out << "s_Q,s_D,n,count\n";
      const std::size_t dim = static_cast<std::size_t>(table.n_max) + 1;
      for (int s_q = 0; s_q < 2; ++s_q)
        for (int s_d = 0; s_d < 2; ++s_d)
          for (std::size_t n = 0; n < dim; ++n)
            out << s_q << "," << s_d << "," << n << ","
                << table.counts[(static_cast<std::size_t>(s_q) * 2 +
                                 static_cast<std::size_t>(s_d)) *
                                    dim +
                                n]
                << "\n";
    }
    auto out = detail::open_output(out_dir / "mc_report.csv");
    out << "# config: config.json\n";
    out << "quantity,value,bootstrap_error\n";
    for (const auto& [name, value] : report.items()) {
      const auto it = errors.find(name);
      out << name << "," << format_value(value) << ","
          << format_value(it == errors.end() ? 0.0 : it->second) << "\n";
    }
  } else {
    nlohmann::ordered_json j;
    j["config"] = config;
    j["total_shots"] = table.total_shots;
    j["detected_shots"] = table.detected_shots;
    j["seed"] = table.seed;
    j["counts"] = table.counts;
    j["report"] = report_json(report);
    nlohmann::ordered_json err;
    for (const auto& [name, value] : errors) err[name] = value;
    j["bootstrap_errors"] = err;
    auto out = detail::open_output(out_dir / "mc.json");
    out << j.dump(2) << "\n";
  }
}

}  // namespace demonsim

// demonsim command-line front end.
//
//   demonsim run      --config cfg.json --out out/
//   demonsim sweep    --ideal --format json --out out/
//   demonsim mc       --seed 7 --out out/
//   demonsim validate
//
// Flags override config-file values. DEMONSIM_THREADS controls sweep
// parallelism (default 1).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "demonsim/demonsim.hpp"

namespace {

int sweep_threads() {
  const char* env = std::getenv("DEMONSIM_THREADS");
  if (!env) return 1;
  try {
    const int n = std::stoi(env);
    return n >= 1 ? n : 1;
  } catch (...) {
    throw demonsim::ConfigError("DEMONSIM_THREADS must be a positive integer");
  }
}

int run_single(const demonsim::ProtocolConfig& cfg) {
  const auto spec = cfg.thermal();
  const auto imp = cfg.imperfections();
  const auto trace = demonsim::run_stages(spec, imp, cfg.demon);
  const auto report = demonsim::slt_report(trace, spec);
  demonsim::emit_report(report, cfg.to_json(), cfg.out, cfg.format);
  std::cout << "run: demon " << (cfg.demon ? "on" : "off") << ", p_e = " << cfg.p_e
            << ", delta_beta_tilde = " << report.delta_beta_tilde << "\n"
            << "  Q_C = " << report.Q_C << "  Q_Q = " << report.Q_Q
            << "  dI_QC:D = " << report.dI_QCD << "  D_QC = " << report.D_QC
            << "\n  residual = " << report.residual << "  gsl = " << report.gsl
            << "\nwrote " << cfg.out << "/report." << (cfg.format == "csv" ? "csv" : "json")
            << std::endl;
  return 0;
}

int run_sweep(const demonsim::ProtocolConfig& cfg) {
  const auto result = demonsim::sweep(cfg.grid_values(), cfg.n_th, cfg.n_max,
                                      cfg.imperfections(), sweep_threads());
  demonsim::emit_sweep(result, cfg.to_json(), cfg.out, cfg.format);
  std::cout << "sweep: " << result.points.size() << " points, delta_beta_tilde in ["
            << result.points.front().delta_beta_tilde << ", "
            << result.points.back().delta_beta_tilde << "]\nwrote " << cfg.out
            << (cfg.format == "csv" ? "/fig2.csv .. fig3d.csv" : "/sweep.json")
            << std::endl;
  return 0;
}

int run_mc(const demonsim::ProtocolConfig& cfg) {
  const auto spec = cfg.thermal();
  const auto imp = cfg.imperfections();
  const auto table =
      demonsim::monte_carlo(spec, imp, cfg.demon, cfg.shots, cfg.seed);
  demonsim::ThermoReport report;
  if (cfg.mc_sampled_reference) {
    const auto reference = demonsim::monte_carlo(
        spec, imp, cfg.demon, cfg.shots, demonsim::rng::split(cfg.seed, 1),
        demonsim::ProtocolStage::post_readout);
    report = demonsim::estimate_report(table, reference, spec);
  } else {
    report = demonsim::estimate_report(table, spec, imp, cfg.demon);
  }
  const auto errors = demonsim::bootstrap_errors(
      table, cfg.bootstrap_resamples, demonsim::rng::split(cfg.seed, 2), spec,
      imp, cfg.demon);
  demonsim::emit_mc(table, report, errors, cfg.to_json(), cfg.out, cfg.format);
  std::cout << "mc: " << table.detected_shots << "/" << table.total_shots
            << " shots detected, seed " << cfg.seed << "\n  Q_C = " << report.Q_C
            << " +- " << errors.at("Q_C") << "  I_QC:D(fb) = "
            << report.post_feedback.I_QCD << " +- "
            << errors.at("I_QCD_feedback") << "\nwrote " << cfg.out
            << (cfg.format == "csv" ? "/mc_counts.csv, mc_report.csv" : "/mc.json")
            << std::endl;
  return 0;
}

int run_validate(demonsim::ValidationFault fault) {
  const auto report = demonsim::run_validation(fault);
  for (const auto& check : report.checks) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << " ("
              << check.detail << ")" << std::endl;
  }
  if (!report.all_passed()) {
    for (const auto& check : report.checks) {
      if (!check.passed) {
        std::cerr << "validate: first failing invariant: " << check.name
                  << std::endl;
        break;
      }
    }
    return 1;
  }
  std::cout << "validate: all " << report.checks.size() << " invariant families passed"
            << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Qubit-demon-cavity heat-transfer protocol simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand

  std::optional<std::string> config_path;
  bool print_config = false;
  demonsim::ConfigOverrides flags;
  app.add_option("--config", config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", flags.out, "Output directory");
  app.add_option("--format", flags.format, "Output format: csv|json");
  app.add_option("--seed", flags.seed, "RNG seed");
  app.add_option("--p_e", flags.p_e, "Qubit excited-state population");
  app.add_option("--n_th", flags.n_th, "Cavity thermal photon number");
  app.add_option("--n_max", flags.n_max, "Photon-number truncation");
  app.add_option("--shots", flags.shots, "Monte Carlo shot count");
  app.add_flag("--no-demon", flags.no_demon, "Disable the demon read-out");
  app.add_flag("--ideal", flags.ideal, "Disable all imperfections");
  app.add_flag("--print-config", print_config,
               "Echo the effective configuration");

  auto* cmd_run = app.add_subcommand("run", "Single protocol run");
  auto* cmd_sweep = app.add_subcommand("sweep", "Temperature sweep (figure data)");
  auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo shot emulation");
  auto* cmd_validate = app.add_subcommand("validate", "Run the invariant suite");
  std::string fault_name = "none";
  cmd_validate
      ->add_option("--inject-fault", fault_name,
                   "Test fixture: none|delta-information-sign")
      ->check(CLI::IsMember({"none", "delta-information-sign"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) flags.mode = "single";
    if (cmd_sweep->parsed()) flags.mode = "sweep";
    if (cmd_mc->parsed()) flags.mode = "mc";
    if (cmd_validate->parsed()) flags.mode = "validate";

    demonsim::ProtocolConfig cfg;
    if (config_path) cfg = demonsim::ProtocolConfig::load(*config_path);
    cfg = flags.apply(cfg);
    if (print_config) std::cout << cfg.to_json().dump(2) << std::endl;
    if (cfg.mode == "single") return run_single(cfg);
    if (cfg.mode == "sweep") return run_sweep(cfg);
    if (cfg.mode == "mc") return run_mc(cfg);
    return run_validate(fault_name == "delta-information-sign"
                            ? demonsim::ValidationFault::flip_delta_information_sign
                            : demonsim::ValidationFault::none);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}

#pragma once

// Built-in invariant suite behind the `validate` subcommand: balance-law
// residuals, entropy conservation, second-law positivity and the protocol's
// structural identities over a fixed grid. Exit contract: success iff every
// family passes.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "demonsim/dynamics.hpp"
#include "demonsim/experiment.hpp"
#include "demonsim/state.hpp"
#include "demonsim/thermo.hpp"

namespace demonsim {

/// Test-fixture fault hooks; `flip_delta_information_sign` corrupts the
/// generalized-SLT evaluation so the suite must catch it.
enum class ValidationFault { none, flip_delta_information_sign };

struct ValidationCheck {
  std::string name;
  bool passed;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

namespace detail {

inline std::vector<double> validation_pe_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 21; ++i) grid.push_back(0.025 + 0.95 * i / 20.0);
  return grid;
}

inline std::string worst_detail(const char* label, double worst) {
  std::ostringstream s;
  s << label << " = " << worst;
  return s.str();
}

}  // namespace detail

inline ValidationReport run_validation(
    ValidationFault fault = ValidationFault::none) {
  ValidationReport report;
  const ImperfectionSpec ideal = ImperfectionSpec::ideal();
  ImperfectionSpec readout_mixing = ImperfectionSpec::ideal();
  readout_mixing.eta_readout = 0.95;
  const int n_max = 40;
  const std::vector<double> pe_grid = detail::validation_pe_grid();
  const std::vector<double> n_th_grid = {0.2, 0.63, 1.0};

  // 1. balance-law residual for the ideal closed protocol
  {
    double worst = 0.0;
    for (double n_th : n_th_grid) {
      for (double p_e : pe_grid) {
        const ThermalSpec spec(p_e, n_th, n_max);
        for (bool demon : {true, false}) {
          const ThermoReport r = slt_report(run_stages(spec, ideal, demon), spec);
          worst = std::max(worst, std::abs(r.residual));
          if (!demon) worst = std::max(worst, std::abs(r.reduced_residual));
        }
      }
    }
    report.checks.push_back({"eq2_residual", worst < 1e-10,
                             detail::worst_detail("max |residual|", worst)});
  }

  // 2. total entropy constant across the feedback step
  {
    double worst = 0.0;
    for (double n_th : n_th_grid) {
      for (double p_e : pe_grid) {
        const ThermalSpec spec(p_e, n_th, n_max);
        for (const auto& imp : {ideal, readout_mixing}) {
          for (bool demon : {true, false}) {
            const ThermoReport r = slt_report(run_stages(spec, imp, demon), spec);
            worst = std::max(worst, std::abs(r.dS_QDC));
          }
        }
      }
    }
    report.checks.push_back({"entropy_conservation", worst < 1e-12,
                             detail::worst_detail("max |dS_QDC|", worst)});
  }

  // 3. generalized second law over the default sweep, ideal and
  //    readout-mixing configurations (detection never enters the accounting)
  {
    double min_g = 1e9;
    const auto grid = default_grid(0.63);
    for (const auto& imp : {ideal, readout_mixing}) {
      const SweepResult s = sweep(grid, 0.63, n_max, imp);
      for (const auto& pt : s.points) {
        for (const ThermoReport* r : {&pt.with_demon, &pt.without_demon}) {
          const double g = fault == ValidationFault::flip_delta_information_sign
                               ? r->clausius_QC + r->dI_QCD
                               : r->gsl;
          min_g = std::min(min_g, g);
        }
      }
    }
    report.checks.push_back({"generalized_slt", min_g >= -1e-10,
                             detail::worst_detail("min g", min_g)});
  }

  // 4. demon-on heat always flows into the cavity; demon-off heat follows the
  //    temperature gradient and vanishes at mutual equilibrium
  {
    bool ok = true;
    double worst = 0.0;
    for (double p_e : pe_grid) {
      const ThermalSpec spec(p_e, 0.63, n_max);
      const ThermoReport on = slt_report(run_stages(spec, ideal, true), spec);
      const ThermoReport off = slt_report(run_stages(spec, ideal, false), spec);
      worst = std::max(worst, std::abs(on.Q_C - p_e));
      ok = ok && on.Q_C > 0.0;
      if (off.delta_beta_tilde > 1e-9) ok = ok && off.Q_C > 0.0;
      if (off.delta_beta_tilde < -1e-9) ok = ok && off.Q_C < 0.0;
    }
    const ThermalSpec eq(mutual_equilibrium_pe(0.63), 0.63, n_max);
    const ThermoReport off_eq = slt_report(run_stages(eq, ideal, false), eq);
    ok = ok && std::abs(off_eq.Q_C) < 1e-12 && worst < 1e-8;
    std::ostringstream det;
    det << "max |Q_C - p_e| = " << worst << ", |Q_C(equilibrium)| = "
        << std::abs(off_eq.Q_C);
    report.checks.push_back({"heat_flow_reversal", ok, det.str()});
  }

  // 5. per-subsystem entropy balance dS_X = beta_X Q_X - D_X
  {
    double worst = 0.0;
    for (double n_th : n_th_grid) {
      for (double p_e : pe_grid) {
        const ThermalSpec spec(p_e, n_th, n_max);
        for (bool demon : {true, false}) {
          const ThermoReport r = slt_report(run_stages(spec, ideal, demon), spec);
          worst = std::max(worst,
                           std::abs(r.dS_Q - (r.beta_q * r.Q_Q - r.D_Q)));
          worst = std::max(worst,
                           std::abs(r.dS_C - (r.beta_c * r.Q_C - r.D_C)));
        }
      }
    }
    report.checks.push_back({"per_subsystem_identity", worst < 1e-10,
                             detail::worst_detail("max identity gap", worst)});
  }

  // 6. D_QC decomposition equals the direct joint relative entropy
  {
    double worst = 0.0;
    for (double p_e : pe_grid) {
      const ThermalSpec spec(p_e, 0.63, n_max);
      for (const auto& imp : {ideal, readout_mixing}) {
        const StageTrace t = run_stages(spec, imp, true);
        const LogicalState post = logical_map(t.post_feedback);
        const auto rel = relative_entropy_QC(post, spec);
        const auto gibbs_q = qubit_populations(spec.p_e);
        const Distribution gibbs_c = thermal_cavity(spec.n_th, spec.n_max);
        Distribution product(2 * gibbs_c.size());
        for (std::size_t q = 0; q < 2; ++q)
          for (std::size_t n = 0; n < gibbs_c.size(); ++n)
            product[q * gibbs_c.size() + n] = gibbs_q[q] * gibbs_c[n];
        const double direct = relative_entropy(
            marginal(post, {Subsystem::Q, Subsystem::C}), product);
        worst = std::max(worst, std::abs(rel.D_QC - direct));
      }
    }
    report.checks.push_back({"dqc_decomposition", worst < 1e-10,
                             detail::worst_detail("max route gap", worst)});
  }

  // 7. mutual-information bounds and the read-out peak at ln 2
  {
    bool ok = true;
    double peak_gap = 0.0;
    for (double p_e : pe_grid) {
      const ThermalSpec spec(p_e, 0.63, n_max);
      const ThermoReport r = slt_report(run_stages(spec, ideal, true), spec);
      for (const StageEntropies* s :
           {&r.initial, &r.post_readout, &r.post_feedback}) {
        ok = ok && s->I_QCD >= 0.0 && s->I_QC >= 0.0;
        ok = ok && s->I_QCD <= std::min(s->S_QC, s->S_D) + 1e-12;
      }
    }
    const ThermalSpec half(0.5, 0.63, n_max);
    const ThermoReport r = slt_report(run_stages(half, ideal, true), half);
    peak_gap = std::abs(r.post_readout.I_QCD - std::log(2.0));
    ok = ok && peak_gap < 1e-10;
    report.checks.push_back({"mutual_information_bounds", ok,
                             detail::worst_detail("|I_peak - ln2|", peak_gap)});
  }

  // 8. single-photon saturation of the demon-assisted transfer
  {
    const ThermalSpec spec(1.0 - kPeFloor, 0.63, n_max);
    const ThermoReport r = slt_report(run_stages(spec, ideal, true), spec);
    const double gap = std::abs(r.Q_C - spec.p_e);
    report.checks.push_back({"saturation_limit", gap < 1e-6,
                             detail::worst_detail("|Q_C - p_e|", gap)});
  }

  return report;
}

}  // namespace demonsim

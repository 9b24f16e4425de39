#pragma once

// Entropy, mutual-information and relative-entropy functionals, heats, and the
// information-balance bookkeeping of one protocol run. All entropies in nats,
// all heats in photon units (hbar*omega = 1).

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "demonsim/dynamics.hpp"
#include "demonsim/state.hpp"

namespace demonsim {

/// Floating-point slack tolerated before a nominally nonnegative mutual
/// information is treated as a genuine violation.
inline constexpr double kMutualInfoNegativeTol = 1e-12;
/// Agreement required between the two computation routes for D_QC.
inline constexpr double kRouteAgreementTol = 1e-10;

/// Shannon entropy -sum p ln p with the 0 ln 0 = 0 convention.
inline double entropy(const Distribution& dist) {
  double sum = 0.0, h = 0.0;
  for (double x : dist) {
    if (!(x >= -kProbabilitySumTol))
      throw std::invalid_argument("entropy: negative probability entry");
    if (x > 0.0) h -= x * std::log(x);
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-8)
    throw std::invalid_argument("entropy: unnormalized distribution (sum = " +
                                std::to_string(sum) + ")");
  return h > 0.0 ? h : 0.0;
}

/// Kullback-Leibler divergence sum p ln(p/q). Returns +infinity when dist has
/// mass where ref vanishes (support violation); malformed inputs throw.
inline double relative_entropy(const Distribution& dist, const Distribution& ref) {
  if (dist.size() != ref.size())
    throw std::invalid_argument("relative_entropy: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist[i], q = ref[i];
    if (!(p >= -kProbabilitySumTol) || !(q >= 0.0))
      throw std::invalid_argument("relative_entropy: negative entry");
    if (p <= 0.0) continue;
    if (q <= 0.0) return std::numeric_limits<double>::infinity();
    d += p * std::log(p / q);
  }
  // Gibbs' inequality; anything below is rounding noise
  if (d < 0.0) {
    if (d < -kMutualInfoNegativeTol)
      throw std::logic_error("relative_entropy: negative divergence " +
                             std::to_string(d));
    d = 0.0;
  }
  return d;
}

namespace detail {

inline double clamp_mutual_information(double value, const char* what) {
  if (value < 0.0) {
    if (value < -kMutualInfoNegativeTol) {
      std::ostringstream msg;
      msg << what << ": mutual information " << value << " below -"
          << kMutualInfoNegativeTol;
      throw std::logic_error(msg.str());
    }
    return 0.0;
  }
  return value;
}

inline void check_disjoint(const SubsystemSet& a, const SubsystemSet& b) {
  if ((a.q && b.q) || (a.d && b.d) || (a.c && b.c))
    throw std::invalid_argument("mutual_information: overlapping partition blocks");
}

}  // namespace detail

/// I_{A:B} = S_A + S_B - S_{AB} for disjoint nonempty blocks of {Q, D, C}.
/// Rounding negatives beyond -1e-12 are an internal error; inside the
/// tolerance they clamp to zero.
inline double mutual_information(const LogicalState& state,
                                 std::initializer_list<Subsystem> block_a,
                                 std::initializer_list<Subsystem> block_b) {
  const auto a = detail::make_set(block_a, "mutual_information");
  const auto b = detail::make_set(block_b, "mutual_information");
  detail::check_disjoint(a, b);
  detail::SubsystemSet ab{a.q || b.q, a.d || b.d, a.c || b.c};
  const double value = entropy(detail::marginal_over(state, a)) +
                       entropy(detail::marginal_over(state, b)) -
                       entropy(detail::marginal_over(state, ab));
  return detail::clamp_mutual_information(value, "mutual_information");
}

struct QCRelativeEntropies {
  double D_Q;    // D[rho_Q || G_{beta_Q}]
  double D_C;    // D[rho_C || G_{beta_C}]
  double I_QC;   // I_{Q:C}
  double D_QC;   // sum of the three
};

/// Distance of the post-feedback QC state from the initial product Gibbs
/// reference, decomposed as D_QC = D_Q + D_C + I_{Q:C}. Also evaluates D_QC
/// directly against the product reference and insists both routes agree.
inline QCRelativeEntropies relative_entropy_QC(const LogicalState& state_post,
                                               const ThermalSpec& spec) {
  if (state_post.n_max() != spec.n_max)
    throw std::invalid_argument("relative_entropy_QC: state and spec n_max differ");
  const auto gibbs_q = qubit_populations(spec.p_e);
  const Distribution gibbs_c = thermal_cavity(spec.n_th, spec.n_max);

  const Distribution rho_q = marginal(state_post, {Subsystem::Q});
  const Distribution rho_c = marginal(state_post, {Subsystem::C});
  const Distribution rho_qc = marginal(state_post, {Subsystem::Q, Subsystem::C});

  const double d_q = relative_entropy(rho_q, Distribution{gibbs_q[0], gibbs_q[1]});
  const double d_c = relative_entropy(rho_c, gibbs_c);
  const double i_qc =
      mutual_information(state_post, {Subsystem::Q}, {Subsystem::C});

  Distribution product(rho_qc.size());
  const std::size_t dim = gibbs_c.size();
  for (std::size_t q = 0; q < 2; ++q)
    for (std::size_t n = 0; n < dim; ++n)
      product[q * dim + n] = gibbs_q[q] * gibbs_c[n];
  const double direct = relative_entropy(rho_qc, product);

  const double sum = d_q + d_c + i_qc;
  if (std::isfinite(direct) && std::abs(sum - direct) > kRouteAgreementTol) {
    std::ostringstream msg;
    msg << "relative_entropy_QC: decomposition " << sum
        << " disagrees with direct route " << direct;
    throw std::logic_error(msg.str());
  }
  return {d_q, d_c, i_qc, sum};
}

struct Heats {
  double Q_Q;  // heat absorbed by the qubit, photon units
  double Q_C;  // heat absorbed by the cavity, photon units
};

/// Heats across the feedback step: Q_C from the mean photon number, Q_Q from
/// the qubit excited population, both post_feedback minus post_readout.
inline Heats heats(const StageTrace& trace) {
  const LogicalState before = logical_map(trace.post_readout);
  const LogicalState after = logical_map(trace.post_feedback);
  return {after.qubit_excited_population() - before.qubit_excited_population(),
          after.mean_photon_number() - before.mean_photon_number()};
}

/// Entropies and mutual informations of one recorded stage.
struct StageEntropies {
  double S_Q, S_D, S_C, S_QC, S_QDC;
  double I_QCD;  // I_{QC:D}
  double I_QC;   // I_{Q:C}
};

inline StageEntropies stage_entropies(const LogicalState& state) {
  StageEntropies s{};
  s.S_Q = entropy(marginal(state, {Subsystem::Q}));
  s.S_D = entropy(marginal(state, {Subsystem::D}));
  s.S_C = entropy(marginal(state, {Subsystem::C}));
  s.S_QC = entropy(marginal(state, {Subsystem::Q, Subsystem::C}));
  s.S_QDC = entropy(state.data());
  s.I_QCD = detail::clamp_mutual_information(s.S_QC + s.S_D - s.S_QDC,
                                             "stage_entropies");
  s.I_QC = detail::clamp_mutual_information(s.S_Q + s.S_C - s.S_QC,
                                            "stage_entropies");
  if (s.I_QCD > std::min(s.S_QC, s.S_D) + kMutualInfoNegativeTol)
    throw std::logic_error("stage_entropies: I_QC:D exceeds min(S_QC, S_D)");
  return s;
}

/// Every entropic and energetic quantity of one protocol run. Deltas span the
/// feedback step (post_feedback minus post_readout). Relative entropies are
/// measured against the *initial* Gibbs references. Both Clausius pairings are
/// carried: clausius_QC = Q_C (beta_C - beta_Q) and
/// clausius_QQ = Q_Q (beta_Q - beta_C); they coincide for the ideal swap.
struct ThermoReport {
  StageEntropies initial;
  StageEntropies post_readout;
  StageEntropies post_feedback;

  double dI_QCD, dS_QC, dS_QDC, dI_QC, dS_Q, dS_C;

  double D_Q, D_C, I_QC_post, D_QC;

  double Q_Q, Q_C;
  double beta_q, beta_c, delta_beta, delta_beta_tilde;

  double clausius_QC;       // Q_C * delta_beta, the physical entropy production
  double clausius_QQ;       // -Q_Q * delta_beta, the qubit-heat variant
  double residual;          // clausius_QC - dI_QCD - D_QC
  double reduced_residual;  // clausius_QC - D_QC (the no-demon balance)
  double gsl;               // clausius_QC - dI_QCD, generalized second law
  double gsl_QQ;            // clausius_QQ - dI_QCD
  double heat_gain;         // Q_C minus the best classical (temperature-only) heat

  std::vector<std::pair<std::string, double>> items() const {
    std::vector<std::pair<std::string, double>> out;
    auto stage = [&out](const char* tag, const StageEntropies& s) {
      const std::string t(tag);
      out.emplace_back("S_Q_" + t, s.S_Q);
      out.emplace_back("S_D_" + t, s.S_D);
      out.emplace_back("S_C_" + t, s.S_C);
      out.emplace_back("S_QC_" + t, s.S_QC);
      out.emplace_back("S_QDC_" + t, s.S_QDC);
      out.emplace_back("I_QCD_" + t, s.I_QCD);
      out.emplace_back("I_QC_" + t, s.I_QC);
    };
    stage("initial", initial);
    stage("readout", post_readout);
    stage("feedback", post_feedback);
    out.insert(out.end(), {{"dI_QCD", dI_QCD},
                           {"dS_QC", dS_QC},
                           {"dS_QDC", dS_QDC},
                           {"dI_QC", dI_QC},
                           {"dS_Q", dS_Q},
                           {"dS_C", dS_C},
                           {"D_Q", D_Q},
                           {"D_C", D_C},
                           {"I_QC_post", I_QC_post},
                           {"D_QC", D_QC},
                           {"Q_Q", Q_Q},
                           {"Q_C", Q_C},
                           {"beta_Q", beta_q},
                           {"beta_C", beta_c},
                           {"delta_beta", delta_beta},
                           {"delta_beta_tilde", delta_beta_tilde},
                           {"clausius_QC", clausius_QC},
                           {"clausius_QQ", clausius_QQ},
                           {"residual", residual},
                           {"reduced_residual", reduced_residual},
                           {"gsl", gsl},
                           {"gsl_QQ", gsl_QQ},
                           {"heat_gain", heat_gain}});
    return out;
  }
};

/// Best temperature-only strategy: couple the systems through the ideal
/// no-demon protocol when the qubit is hotter, otherwise do nothing.
inline double classical_baseline(const ThermalSpec& spec) {
  const auto betas = beta_conversions(spec.p_e, spec.n_th);
  if (betas.delta_beta_tilde <= 0.0) return 0.0;
  const StageTrace trace = run_stages(spec, ImperfectionSpec::ideal(), false);
  return heats(trace).Q_C;
}

/// Heat gain of the demon protocol over the classical baseline, photon units.
inline double heat_gain(double q_c_demon, double q_c_baseline) {
  return q_c_demon - q_c_baseline;
}

/// Shared report kernel: consumes the three logical snapshots directly, so the
/// same path serves analytic traces and empirical (shot-estimated) tables.
inline ThermoReport build_report(const LogicalState& initial,
                                 const LogicalState& post_readout,
                                 const LogicalState& post_feedback,
                                 const ThermalSpec& spec) {
  ThermoReport r{};
  r.initial = stage_entropies(initial);
  r.post_readout = stage_entropies(post_readout);
  r.post_feedback = stage_entropies(post_feedback);

  r.dI_QCD = r.post_feedback.I_QCD - r.post_readout.I_QCD;
  r.dS_QC = r.post_feedback.S_QC - r.post_readout.S_QC;
  r.dS_QDC = r.post_feedback.S_QDC - r.post_readout.S_QDC;
  r.dI_QC = r.post_feedback.I_QC - r.post_readout.I_QC;
  r.dS_Q = r.post_feedback.S_Q - r.post_readout.S_Q;
  r.dS_C = r.post_feedback.S_C - r.post_readout.S_C;

  const auto rel = relative_entropy_QC(post_feedback, spec);
  r.D_Q = rel.D_Q;
  r.D_C = rel.D_C;
  r.I_QC_post = rel.I_QC;
  r.D_QC = rel.D_QC;

  r.Q_Q = post_feedback.qubit_excited_population() -
          post_readout.qubit_excited_population();
  r.Q_C = post_feedback.mean_photon_number() - post_readout.mean_photon_number();

  const auto betas = beta_conversions(spec.p_e, spec.n_th);
  r.beta_q = betas.beta_q;
  r.beta_c = betas.beta_c;
  r.delta_beta = betas.delta_beta;
  r.delta_beta_tilde = betas.delta_beta_tilde;

  r.clausius_QC = r.Q_C * r.delta_beta;
  r.clausius_QQ = -r.Q_Q * r.delta_beta;
  r.residual = r.clausius_QC - r.dI_QCD - r.D_QC;
  r.reduced_residual = r.clausius_QC - r.D_QC;
  r.gsl = r.clausius_QC - r.dI_QCD;
  r.gsl_QQ = r.clausius_QQ - r.dI_QCD;
  r.heat_gain = heat_gain(r.Q_C, classical_baseline(spec));
  return r;
}

/// Full balance report of a recorded protocol run; Gibbs references come from
/// the initial spec, never refit to the final state.
inline ThermoReport slt_report(const StageTrace& trace, const ThermalSpec& spec) {
  return build_report(logical_map(trace.initial), logical_map(trace.post_readout),
                      logical_map(trace.post_feedback), spec);
}

inline ThermoReport slt_report(const StageTrace& trace) {
  return slt_report(trace, trace.spec);
}

}  // namespace demonsim

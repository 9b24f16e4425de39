#pragma once

// Protocol state transformations: demon read-out, adiabatic-passage swap,
// relaxation during flight, and the detection channel.

#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "demonsim/state.hpp"

namespace demonsim {

// Recorded hardware constants for the adiabatic passage; the passage itself is
// modeled as an exact basis permutation (population transfer > 0.99 in the
// device), so these are documentation only.
inline constexpr double kStarkSweepStartHz = 100e3;
inline constexpr double kStarkSweepEndHz = -60e3;
inline constexpr double kStarkSweepDuration = 60e-6;
inline constexpr double kRabiFrequencyHz = 49e3;

/// Experimental-imperfection model. Probabilities are dimensionless, times in
/// seconds. Each channel can be disabled independently; a read-out without
/// imperfection is eta_readout = 1.
struct ImperfectionSpec {
  double eta_readout = 0.95;  // g->f transfer probability of the demon pulse
  double t_flight = 1.2e-3;   // flight time across the protocol
  double T_atom = 30e-3;      // circular-state lifetime, e->g and g->f
  double T_cav = 25e-3;       // cavity energy lifetime
  double n_env = 0.243;       // environmental photon number at 1.5 K
  double eps_det = 0.05;      // atomic-state misattribution probability
  double p_det = 0.5;         // detection efficiency
  double swap_split = 0.5;    // fraction of flight relaxation applied before the swap
  bool atom_relaxation = true;
  bool cavity_relaxation = true;
  bool detection = true;      // detection channel (efficiency + misattribution)

  void validate() const {
    auto probability = [](double x, const char* name) {
      if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument(std::string("ImperfectionSpec: ") + name +
                                    " must lie in [0,1]");
    };
    probability(eta_readout, "eta_readout");
    probability(eps_det, "eps_det");
    probability(p_det, "p_det");
    probability(swap_split, "swap_split");
    if (!(t_flight > 0.0)) throw std::invalid_argument("ImperfectionSpec: t_flight must be > 0");
    if (!(T_atom > 0.0)) throw std::invalid_argument("ImperfectionSpec: T_atom must be > 0");
    if (!(T_cav > 0.0)) throw std::invalid_argument("ImperfectionSpec: T_cav must be > 0");
    if (!(n_env >= 0.0)) throw std::invalid_argument("ImperfectionSpec: n_env must be >= 0");
  }

  bool any_relaxation() const { return atom_relaxation || cavity_relaxation; }
  double effective_p_det() const { return detection ? p_det : 1.0; }
  double effective_eps_det() const { return detection ? eps_det : 0.0; }

  /// All channels off: unit-efficiency read-out, no relaxation, noiseless
  /// detection.
  static ImperfectionSpec ideal() {
    ImperfectionSpec s;
    s.eta_readout = 1.0;
    s.atom_relaxation = false;
    s.cavity_relaxation = false;
    s.detection = false;
    return s;
  }

  /// The calibrated experimental values (the defaults).
  static ImperfectionSpec experiment() { return ImperfectionSpec{}; }
};

/// Demon read-out: incoherent population mixing on the (g,f) pair with
/// transfer probability eta; level e is not addressed by the g-f drive.
inline JointState demon_readout(const JointState& state, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("demon_readout: eta must lie in [0,1]");
  const std::size_t dim = state.photon_dim();
  std::vector<double> p(state.data());
  for (std::size_t n = 0; n < dim; ++n) {
    const double pf = p[0 * dim + n];
    const double pg = p[1 * dim + n];
    p[0 * dim + n] = pf * (1.0 - eta) + pg * eta;
    p[1 * dim + n] = pg * (1.0 - eta) + pf * eta;
  }
  return JointState(state.n_max(), std::move(p));
}

/// Adiabatic-passage energy exchange as a basis permutation:
/// (e,n) <-> (g,n+1) for n < n_max; (g,0) and every (f,n) are fixed. The
/// stranded top state (e,n_max) is fixed too and must carry negligible mass.
inline JointState adiabatic_swap(const JointState& state) {
  const int n_max = state.n_max();
  if (state(Level::e, n_max) >= kTailThreshold) {
    std::ostringstream msg;
    msg << "adiabatic_swap: truncation overflow, p(e," << n_max
        << ") = " << state(Level::e, n_max) << " >= " << kTailThreshold;
    throw TruncationError(msg.str());
  }
  const std::size_t dim = state.photon_dim();
  std::vector<double> p(state.data());
  for (int n = 0; n < n_max; ++n) {
    std::swap(p[2 * dim + static_cast<std::size_t>(n)],
              p[1 * dim + static_cast<std::size_t>(n) + 1]);
  }
  return JointState(n_max, std::move(p));
}

namespace detail {

/// Column-stochastic propagator of the atomic decay cascade e->g->f, both
/// transitions at rate 1/T_atom (Erlang closed form). M[to][from] in Level
/// order f,g,e.
inline std::array<std::array<double, 3>, 3> atomic_decay_propagator(double t,
                                                                    double T_atom) {
  const double gt = t / T_atom;
  const double s = std::exp(-gt);
  return {{{1.0, 1.0 - s, 1.0 - s - gt * s},
           {0.0, s, gt * s},
           {0.0, 0.0, s}}};
}

/// Exact exponential of the truncated birth-death cavity generator applied to
/// a photon-number vector, via uniformization. Jump rates:
/// n -> n-1 at (1+n_env) n / T_cav, n -> n+1 at n_env (n+1) / T_cav (the
/// upward jump out of n_max is truncated). The series is summed until the
/// Poisson tail is below 1e-15; long durations are split so each chunk has
/// uniformization rate * t <= 128.
inline void cavity_relax_inplace(std::vector<double>& p, double t, double T_cav,
                                 double n_env, int n_max) {
  const std::size_t dim = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> down(dim, 0.0), up(dim, 0.0), diag(dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    down[n] = (1.0 + n_env) * static_cast<double>(n) / T_cav;
    up[n] = (n + 1 < dim) ? n_env * (static_cast<double>(n) + 1.0) / T_cav : 0.0;
    diag[n] = down[n] + up[n];
  }
  double lambda = 0.0;
  for (double d : diag) lambda = std::max(lambda, d);
  if (lambda == 0.0 || t == 0.0) return;

  const int chunks = static_cast<int>(std::ceil(lambda * t / 128.0));
  const double dt = t / chunks;
  const double lt = lambda * dt;

  std::vector<double> v(dim), pv(dim), acc(dim);
  for (int c = 0; c < chunks; ++c) {
    v = p;
    double weight = std::exp(-lt);
    double covered = weight;
    for (std::size_t n = 0; n < dim; ++n) acc[n] = weight * v[n];
    for (int k = 1; covered < 1.0 - 1e-15; ++k) {
      // pv = (I + Q/lambda) v, tridiagonal
      for (std::size_t n = 0; n < dim; ++n) {
        double flow = -diag[n] * v[n];
        if (n + 1 < dim) flow += down[n + 1] * v[n + 1];
        if (n > 0) flow += up[n - 1] * v[n - 1];
        pv[n] = v[n] + flow / lambda;
      }
      v.swap(pv);
      weight *= lt / k;
      covered += weight;
      for (std::size_t n = 0; n < dim; ++n) acc[n] += weight * v[n];
      if (k > 4 * lt + 200) break;  // unreachable safety stop
    }
    p = acc;
  }
}

}  // namespace detail

/// Relaxation during flight: atomic decay cascade and thermal cavity damping,
/// evolved by exact exponentiation of the joint generator (the two channels
/// commute). Channels follow the ImperfectionSpec switches; duration 0 is the
/// identity.
inline JointState relax(const JointState& state, const ImperfectionSpec& spec,
                        double duration) {
  spec.validate();
  if (duration < 0.0) throw std::invalid_argument("relax: duration must be >= 0");
  if (duration == 0.0 || !spec.any_relaxation()) return state;

  const std::size_t dim = state.photon_dim();
  std::vector<double> p(state.data());

  if (spec.atom_relaxation) {
    const auto m = detail::atomic_decay_propagator(duration, spec.T_atom);
    for (std::size_t n = 0; n < dim; ++n) {
      const double pf = p[0 * dim + n], pg = p[1 * dim + n], pe = p[2 * dim + n];
      p[0 * dim + n] = m[0][0] * pf + m[0][1] * pg + m[0][2] * pe;
      p[1 * dim + n] = m[1][1] * pg + m[1][2] * pe;
      p[2 * dim + n] = m[2][2] * pe;
    }
  }
  if (spec.cavity_relaxation) {
    std::vector<double> row(dim);
    for (int l = 0; l < 3; ++l) {
      for (std::size_t n = 0; n < dim; ++n) row[n] = p[static_cast<std::size_t>(l) * dim + n];
      detail::cavity_relax_inplace(row, duration, spec.T_cav, spec.n_env,
                                   state.n_max());
      for (std::size_t n = 0; n < dim; ++n) p[static_cast<std::size_t>(l) * dim + n] = row[n];
    }
  }
  return JointState(state.n_max(), std::move(p));
}

/// Detection channel: 3x3 confusion matrix on the atomic level, correct
/// attribution with probability 1-eps_det and the error split equally between
/// the two other levels. Photon index untouched.
inline JointState detect_channel(const JointState& state, double eps_det) {
  if (!(eps_det >= 0.0 && eps_det <= 1.0))
    throw std::invalid_argument("detect_channel: eps_det must lie in [0,1]");
  const std::size_t dim = state.photon_dim();
  const double keep = 1.0 - eps_det;
  const double leak = eps_det / 2.0;
  std::vector<double> p(state.data());
  for (std::size_t n = 0; n < dim; ++n) {
    const double pf = p[0 * dim + n], pg = p[1 * dim + n], pe = p[2 * dim + n];
    p[0 * dim + n] = keep * pf + leak * (pg + pe);
    p[1 * dim + n] = keep * pg + leak * (pf + pe);
    p[2 * dim + n] = keep * pe + leak * (pf + pg);
  }
  return JointState(state.n_max(), std::move(p));
}

/// Labeled snapshots of one protocol run.
struct StageTrace {
  ThermalSpec spec;
  ImperfectionSpec imp;
  bool demon_on;
  JointState initial;
  JointState post_readout;
  JointState post_feedback;
  JointState post_detection_model;
};

/// Runs the experimental sequence. Without the demon the read-out stage is the
/// identity (the reference protocol). Flight relaxation is split around the
/// swap per ImperfectionSpec::swap_split. The detection channel only enters
/// the post_detection_model snapshot, never the thermodynamic accounting.
inline StageTrace run_stages(const ThermalSpec& spec, const ImperfectionSpec& imp,
                             bool demon_on) {
  imp.validate();
  JointState initial = compose_initial(spec);
  JointState post_readout =
      demon_on ? demon_readout(initial, imp.eta_readout) : initial;

  JointState stage = post_readout;
  if (imp.any_relaxation())
    stage = relax(stage, imp, imp.t_flight * imp.swap_split);
  stage = adiabatic_swap(stage);
  if (imp.any_relaxation())
    stage = relax(stage, imp, imp.t_flight * (1.0 - imp.swap_split));
  JointState post_feedback = stage;

  JointState post_detection =
      imp.detection ? detect_channel(post_feedback, imp.eps_det) : post_feedback;

  return StageTrace{spec,          imp,           demon_on,
                    std::move(initial), std::move(post_readout),
                    std::move(post_feedback), std::move(post_detection)};
}

}  // namespace demonsim

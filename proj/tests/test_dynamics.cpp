#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "demonsim/dynamics.hpp"
#include "demonsim/thermo.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace demonsim;
using Catch::Matchers::WithinAbs;

namespace {

/// Fixed-step RK4 integration of the full relaxation generator; the
/// independent route for checking the exact propagator.
JointState rk4_relax(const JointState& state, const ImperfectionSpec& spec,
                     double duration, int steps) {
  const std::size_t dim = state.photon_dim();
  const int n_max = state.n_max();
  auto apply_generator = [&](const std::vector<double>& p) {
    std::vector<double> dp(p.size(), 0.0);
    if (spec.atom_relaxation) {
      const double gamma = 1.0 / spec.T_atom;
      for (std::size_t n = 0; n < dim; ++n) {
        dp[0 * dim + n] += gamma * p[1 * dim + n];
        dp[1 * dim + n] += gamma * p[2 * dim + n] - gamma * p[1 * dim + n];
        dp[2 * dim + n] -= gamma * p[2 * dim + n];
      }
    }
    if (spec.cavity_relaxation) {
      for (int l = 0; l < 3; ++l) {
        const std::size_t base = static_cast<std::size_t>(l) * dim;
        for (int n = 0; n <= n_max; ++n) {
          const double down = (1.0 + spec.n_env) * n / spec.T_cav;
          const double up = n < n_max ? spec.n_env * (n + 1.0) / spec.T_cav : 0.0;
          const std::size_t i = base + static_cast<std::size_t>(n);
          dp[i] -= (down + up) * p[i];
          if (n > 0) dp[i - 1] += down * p[i];
          if (n < n_max) dp[i + 1] += up * p[i];
        }
      }
    }
    return dp;
  };
  std::vector<double> p = state.data();
  const double h = duration / steps;
  std::vector<double> k1, k2, k3, k4, tmp(p.size());
  for (int s = 0; s < steps; ++s) {
    k1 = apply_generator(p);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + 0.5 * h * k1[i];
    k2 = apply_generator(tmp);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + 0.5 * h * k2[i];
    k3 = apply_generator(tmp);
    for (std::size_t i = 0; i < p.size(); ++i) tmp[i] = p[i] + h * k3[i];
    k4 = apply_generator(tmp);
    for (std::size_t i = 0; i < p.size(); ++i)
      p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  for (double& x : p) x = std::max(x, 0.0);
  return JointState(state.n_max(), std::move(p));
}

}  // namespace

TEST_CASE("demon_readout mixes the g/f pair") {
  SECTION("full transfer is the g<->f exchange") {
    const JointState out = demon_readout(testutil::pure_joint(5, Level::g, 0), 1.0);
    CHECK(out(Level::f, 0) == 1.0);
    CHECK(out(Level::g, 0) == 0.0);
  }
  SECTION("partial transfer splits the ground population") {
    const JointState out =
        demon_readout(testutil::pure_joint(5, Level::g, 2), 0.95);
    CHECK_THAT(out(Level::f, 2), WithinAbs(0.95, 1e-15));
    CHECK_THAT(out(Level::g, 2), WithinAbs(0.05, 1e-15));
  }
  SECTION("level e is not addressed") {
    std::mt19937_64 rng(3);
    const JointState in = testutil::random_joint(5, rng);
    const JointState out = demon_readout(in, 0.7);
    for (int n = 0; n <= 5; ++n)
      CHECK(out(Level::e, n) == in(Level::e, n));
  }
  SECTION("eta = 1 is a permutation, eta in (0,1) never lowers S_QDC") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
      const JointState in = testutil::random_joint(6, rng);
      const double s_in = entropy(in.data());
      CHECK_THAT(entropy(demon_readout(in, 1.0).data()), WithinAbs(s_in, 1e-14));
      const double eta = 0.05 + 0.9 * testutil::random_table(1, rng)[0];
      CHECK(entropy(demon_readout(in, eta).data()) >= s_in - 1e-14);
    }
  }
  CHECK_THROWS_AS(demon_readout(testutil::pure_joint(3, Level::g, 0), 1.1),
                  std::invalid_argument);
}

TEST_CASE("adiabatic_swap is the conditional photon exchange") {
  SECTION("e injects") {
    const JointState out = adiabatic_swap(testutil::pure_joint(5, Level::e, 0));
    CHECK(out(Level::g, 1) == 1.0);
  }
  SECTION("g absorbs only when a photon exists") {
    const JointState fixed = adiabatic_swap(testutil::pure_joint(5, Level::g, 0));
    CHECK(fixed(Level::g, 0) == 1.0);
    const JointState absorbed =
        adiabatic_swap(testutil::pure_joint(5, Level::g, 3));
    CHECK(absorbed(Level::e, 2) == 1.0);
  }
  SECTION("f does not couple to the cavity") {
    const JointState out = adiabatic_swap(testutil::pure_joint(8, Level::f, 5));
    CHECK(out(Level::f, 5) == 1.0);
  }
  SECTION("a permutation: multiset of probabilities and entropy preserved") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      JointState in = testutil::random_joint(7, rng);
      // clear the stranded top cell so the swap precondition holds
      std::vector<double> p = in.data();
      p[2 * 8 + 7] = 0.0;
      double sum = 0.0;
      for (double x : p) sum += x;
      for (double& x : p) x /= sum;
      in = JointState(7, p);

      const JointState out = adiabatic_swap(in);
      auto a = in.data(), b = out.data();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      CHECK(a == b);
      CHECK_THAT(entropy(out.data()), WithinAbs(entropy(in.data()), 1e-14));
      // demon marginal untouched
      const auto d_in = marginal(in, {Subsystem::D});
      const auto d_out = marginal(out, {Subsystem::D});
      CHECK_THAT(d_out[1], WithinAbs(d_in[1], 1e-14));
    }
  }
  SECTION("truncation overflow on the stranded top cell") {
    CHECK_THROWS_AS(adiabatic_swap(testutil::pure_joint(5, Level::e, 5)),
                    TruncationError);
  }
}

TEST_CASE("relax evolves the decay cascade and cavity damping") {
  ImperfectionSpec imp = ImperfectionSpec::experiment();

  SECTION("duration zero is the identity") {
    std::mt19937_64 rng(41);
    const JointState in = testutil::random_joint(6, rng);
    const JointState out = relax(in, imp, 0.0);
    CHECK(out.data() == in.data());
    CHECK_THROWS_AS(relax(in, imp, -1e-6), std::invalid_argument);
  }

  SECTION("atomic cascade from |e,0>: Erlang closed form") {
    ImperfectionSpec atom_only = imp;
    atom_only.cavity_relaxation = false;
    const JointState out =
        relax(testutil::pure_joint(5, Level::e, 0), atom_only, 1.2e-3);
    // gamma*t = 1.2ms / 30ms = 0.04
    CHECK_THAT(out(Level::e, 0), WithinAbs(0.9607894391523232, 1e-12));
    CHECK_THAT(out(Level::g, 0), WithinAbs(0.03843157756609293, 1e-12));
    CHECK_THAT(out(Level::f, 0),
               WithinAbs(1.0 - 0.9607894391523232 - 0.03843157756609293, 1e-12));
  }

  SECTION("the environment-temperature cavity state is a fixed point") {
    ImperfectionSpec cavity_only = imp;
    cavity_only.atom_relaxation = false;
    const int n_max = 32;
    const auto env = thermal_cavity(imp.n_env, n_max);
    std::vector<double> p(3 * (n_max + 1), 0.0);
    for (int n = 0; n <= n_max; ++n)
      p[static_cast<std::size_t>(n_max + 1) + static_cast<std::size_t>(n)] = env[static_cast<std::size_t>(n)];
    const JointState in(n_max, p);
    const JointState out = relax(in, cavity_only, 0.05);
    for (int n = 0; n <= n_max; ++n)
      CHECK_THAT(out(Level::g, n), WithinAbs(env[static_cast<std::size_t>(n)], 1e-9));
  }

  SECTION("normalization preserved out to ten lifetimes") {
    std::mt19937_64 rng(43);
    for (double t : {1e-4, 1.2e-3, 0.05, 0.3}) {
      const JointState out = relax(testutil::random_joint(16, rng), imp, t);
      double sum = 0.0;
      for (double x : out.data()) sum += x;
      CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
    }
  }

  SECTION("agrees with an independent RK4 integration") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 3; ++trial) {
      const JointState in = testutil::random_joint(12, rng, 0.0);
      const JointState fast = relax(in, imp, 1.2e-3);
      const JointState slow = rk4_relax(in, imp, 1.2e-3, 4000);
      double worst = 0.0;
      for (std::size_t i = 0; i < fast.data().size(); ++i)
        worst = std::max(worst, std::abs(fast.data()[i] - slow.data()[i]));
      CHECK(worst < 1e-9);
    }
    // longer flight, both channels, coarser tolerance still far under 1e-9
    const ThermalSpec spec(0.4, 0.63, 24);
    const JointState in = compose_initial(spec);
    const JointState fast = relax(in, imp, 0.01);
    const JointState slow = rk4_relax(in, imp, 0.01, 20000);
    double worst = 0.0;
    for (std::size_t i = 0; i < fast.data().size(); ++i)
      worst = std::max(worst, std::abs(fast.data()[i] - slow.data()[i]));
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("detect_channel applies the level confusion matrix") {
  SECTION("eps = 0 is the identity") {
    std::mt19937_64 rng(53);
    const JointState in = testutil::random_joint(5, rng);
    CHECK(detect_channel(in, 0.0).data() == in.data());
  }
  SECTION("misattribution splits equally") {
    const JointState out = detect_channel(testutil::pure_joint(5, Level::g, 0), 0.05);
    CHECK_THAT(out(Level::g, 0), WithinAbs(0.95, 1e-15));
    CHECK_THAT(out(Level::f, 0), WithinAbs(0.025, 1e-15));
    CHECK_THAT(out(Level::e, 0), WithinAbs(0.025, 1e-15));
  }
  SECTION("normalization preserved for any eps") {
    std::mt19937_64 rng(59);
    for (double eps : {0.01, 0.05, 0.5, 1.0}) {
      const JointState out = detect_channel(testutil::random_joint(6, rng), eps);
      double sum = 0.0;
      for (double x : out.data()) sum += x;
      CHECK_THAT(sum, WithinAbs(1.0, 1e-13));
    }
  }
  CHECK_THROWS_AS(detect_channel(testutil::pure_joint(3, Level::g, 0), -0.1),
                  std::invalid_argument);
}

TEST_CASE("run_stages assembles the protocol") {
  const ImperfectionSpec ideal = ImperfectionSpec::ideal();

  SECTION("no demon, mutual equilibrium: zero net heat") {
    const ThermalSpec spec(mutual_equilibrium_pe(0.63), 0.63, 32);
    const auto h = heats(run_stages(spec, ideal, false));
    CHECK_THAT(h.Q_C, WithinAbs(0.0, 1e-12));
    CHECK_THAT(h.Q_Q, WithinAbs(0.0, 1e-12));
  }

  SECTION("demon on: the excited population is injected, brute-force checked") {
    for (double p_e : {0.1, 0.5, 0.95}) {
      const ThermalSpec spec(p_e, 0.63, 32);
      const StageTrace trace = run_stages(spec, ideal, true);
      const auto h = heats(trace);
      CHECK_THAT(h.Q_C, WithinAbs(p_e, 1e-8));
      // independent route: enumerated basis states
      const auto init = bruteforce::thermal_initial(p_e, 0.63, 32);
      const auto ro = bruteforce::readout(init, 1.0);
      const auto fb = bruteforce::swap_map(ro, 32);
      const double q_oracle = bruteforce::mean_photons(bruteforce::to_logical(fb)) -
                              bruteforce::mean_photons(bruteforce::to_logical(ro));
      CHECK_THAT(h.Q_C, WithinAbs(q_oracle, 1e-13));
      CHECK_THAT(h.Q_Q, WithinAbs(-h.Q_C, 1e-12));  // resonant exchange
    }
  }

  SECTION("demon on: the qubit always ends in its ground state") {
    const ThermalSpec spec(0.95, 0.63, 32);
    const StageTrace trace = run_stages(spec, ideal, true);
    const auto q = marginal(trace.post_feedback, {Subsystem::Q});
    CHECK_THAT(q[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(q[1], WithinAbs(0.0, 1e-12));
  }

  SECTION("demon off means the read-out stage is the identity") {
    const ThermalSpec spec(0.3, 0.63, 32);
    const StageTrace trace = run_stages(spec, ideal, false);
    CHECK(trace.post_readout.data() == trace.initial.data());
  }

  SECTION("feedback consumes exactly the correlation it lowers: dI = dS_QC") {
    for (double p_e : {0.1, 0.2788, 0.5, 0.9}) {
      for (bool demon : {true, false}) {
        const ThermalSpec spec(p_e, 0.63, 32);
        const ThermoReport r = slt_report(run_stages(spec, ideal, demon), spec);
        CHECK_THAT(r.dI_QCD, WithinAbs(r.dS_QC, 1e-12));
      }
    }
  }

  SECTION("detection channel only touches the last snapshot") {
    const ThermalSpec spec(0.5, 0.63, 32);
    const ImperfectionSpec imp = ImperfectionSpec::experiment();
    const StageTrace trace = run_stages(spec, imp, true);
    const JointState expected = detect_channel(trace.post_feedback, imp.eps_det);
    CHECK(trace.post_detection_model.data() == expected.data());
    ImperfectionSpec no_det = imp;
    no_det.detection = false;
    const StageTrace trace2 = run_stages(spec, no_det, true);
    CHECK(trace2.post_detection_model.data() == trace2.post_feedback.data());
  }
}

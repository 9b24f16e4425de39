#pragma once

// Temperature sweeps, Monte Carlo shot emulation of the repeated experimental
// sequence, and bootstrap uncertainty estimation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "demonsim/dynamics.hpp"
#include "demonsim/state.hpp"
#include "demonsim/thermo.hpp"
#include "demonsim/version.hpp"

namespace demonsim {

namespace rng {

/// SplitMix64 step; used to derive independent per-task seeds so results do
/// not depend on the parallel schedule.
inline std::uint64_t split(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) from the full 64-bit engine output; avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace rng

struct SweepPoint {
  double p_e;
  double delta_beta_tilde;
  ThermoReport with_demon;
  ThermoReport without_demon;
};

/// Reports over a grid of qubit temperatures, demon on and off per point.
struct SweepResult {
  double n_th;
  int n_max;
  ImperfectionSpec imperfections;
  std::string version;
  std::vector<SweepPoint> points;
};

/// Default sweep grid: p_e values placed uniformly in delta-beta-tilde over
/// [dbt_min, dbt_max], strictly increasing. Endpoints touching p_e = 0 or 1
/// are clamped to kPeFloor.
inline std::vector<double> default_grid(double n_th, int points = 41,
                                        double dbt_min = -4.0,
                                        double dbt_max = 4.0) {
  if (points < 2) throw std::invalid_argument("default_grid: need >= 2 points");
  if (!(dbt_min < dbt_max))
    throw std::invalid_argument("default_grid: dbt_min must be < dbt_max");
  const double beta_c = std::log((1.0 + n_th) / n_th);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double dbt =
        dbt_min + (dbt_max - dbt_min) * static_cast<double>(i) / (points - 1);
    const double beta_q = beta_c * (1.0 - dbt);
    const double p_e = 1.0 / (1.0 + std::exp(beta_q));
    grid[static_cast<std::size_t>(i)] =
        std::clamp(p_e, kPeFloor, 1.0 - kPeFloor);
  }
  return grid;
}

/// Runs the demon-on and demon-off protocols at every grid point. The grid
/// must be strictly increasing in p_e (hence in delta-beta-tilde); a failure
/// at any point aborts with that point's index. Points are independent, so
/// threads > 1 evaluates them in parallel with identical results.
inline SweepResult sweep(const std::vector<double>& pe_grid, double n_th,
                         int n_max, const ImperfectionSpec& imp,
                         int threads = 1) {
  if (pe_grid.empty()) throw std::invalid_argument("sweep: empty grid");
  imp.validate();
  for (std::size_t i = 0; i + 1 < pe_grid.size(); ++i) {
    if (!(pe_grid[i] < pe_grid[i + 1]))
      throw std::invalid_argument("sweep: grid must be strictly increasing");
  }

  SweepResult result{n_th, n_max, imp, kVersion, {}};
  result.points.resize(pe_grid.size(),
                       SweepPoint{0.0, 0.0, ThermoReport{}, ThermoReport{}});
  std::vector<std::string> errors(pe_grid.size());

  auto eval_point = [&](std::size_t i) {
    try {
      if (!(pe_grid[i] >= 0.0 && pe_grid[i] <= 1.0))
        throw std::invalid_argument("grid p_e outside [0,1]");
      const double p_e = std::clamp(pe_grid[i], kPeFloor, 1.0 - kPeFloor);
      const ThermalSpec spec(p_e, n_th, n_max);
      const ThermoReport on = slt_report(run_stages(spec, imp, true), spec);
      const ThermoReport off = slt_report(run_stages(spec, imp, false), spec);
      result.points[i] = SweepPoint{p_e, on.delta_beta_tilde, on, off};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };

  if (threads <= 1) {
    for (std::size_t i = 0; i < pe_grid.size(); ++i) eval_point(i);
  } else {
    std::vector<std::thread> pool;
    const std::size_t n_threads =
        std::min<std::size_t>(static_cast<std::size_t>(threads), pe_grid.size());
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < pe_grid.size(); i += n_threads) eval_point(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("sweep: point " + std::to_string(i) +
                               " failed: " + errors[i]);
    }
  }
  return result;
}

/// Which snapshot of the sequence the shot emulation samples; post_readout
/// serves as the measured pre-feedback reference run.
enum class ProtocolStage { post_readout, post_feedback };

/// Detected-outcome counts over the logical (s_Q, s_D, n) cells.
struct ShotTable {
  int n_max;
  std::uint64_t total_shots;
  std::uint64_t detected_shots;
  std::uint64_t seed;
  std::vector<std::uint64_t> counts;  // LogicalState layout, (s_q*2+s_d)*(n_max+1)+n

  /// Plug-in estimate of the sampled state.
  LogicalState empirical() const {
    if (detected_shots == 0)
      throw std::invalid_argument("ShotTable: no detected shots");
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      p[i] = static_cast<double>(counts[i]) / static_cast<double>(detected_shots);
    return LogicalState(n_max, std::move(p));
  }
};

/// Emulates the repeated experimental sequence: per shot, draw (level, n) from
/// the requested stage of the protocol, discard with probability 1 - p_det,
/// misattribute the level per the confusion matrix, and record the logical
/// outcome. Deterministic for fixed seed.
inline ShotTable monte_carlo(const ThermalSpec& spec, const ImperfectionSpec& imp,
                             bool demon_on, std::uint64_t shots,
                             std::uint64_t seed,
                             ProtocolStage stage = ProtocolStage::post_feedback) {
  if (shots < 1) throw std::invalid_argument("monte_carlo: shots must be >= 1");
  const StageTrace trace = run_stages(spec, imp, demon_on);
  const JointState& sampled = stage == ProtocolStage::post_feedback
                                  ? trace.post_feedback
                                  : trace.post_readout;

  const std::size_t dim = sampled.photon_dim();
  std::vector<double> cdf(sampled.data().size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += sampled.data()[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  const double p_det = imp.effective_p_det();
  const double eps = imp.effective_eps_det();

  ShotTable table{spec.n_max, shots, 0, seed,
                  std::vector<std::uint64_t>(4 * dim, 0)};
  std::mt19937_64 engine(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u_keep = rng::uniform(engine);
    const double u_cell = rng::uniform(engine);
    const double u_err = rng::uniform(engine);
    if (u_keep >= p_det) continue;  // atom not detected
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u_cell);
    const std::size_t cell =
        std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                              cdf.size() - 1);
    int level = static_cast<int>(cell / dim);
    const std::size_t n = cell % dim;
    if (u_err < eps) {
      // split the misattribution equally between the two other levels
      const int other = u_err < eps / 2.0 ? 0 : 1;
      level = (level + 1 + other) % 3;
    }
    // logical relabeling: f -> (0,1), g -> (0,0), e -> (1,0)
    const std::size_t sector = level == 0 ? 1u : (level == 1 ? 0u : 2u);
    ++table.counts[sector * dim + n];
    ++table.detected_shots;
  }
  return table;
}

/// Plug-in estimator with the analytic matched pre-feedback reference: the
/// empirical table stands in for the post-feedback snapshot, the read-out and
/// initial snapshots come from the noiseless sequence.
inline ThermoReport estimate_report(const ShotTable& table, const ThermalSpec& spec,
                                    const ImperfectionSpec& imp, bool demon_on) {
  if (table.detected_shots < 1)
    throw std::invalid_argument("estimate_report: empty table");
  const StageTrace trace = run_stages(spec, imp, demon_on);
  return build_report(logical_map(trace.initial), logical_map(trace.post_readout),
                      table.empirical(), spec);
}

/// Plug-in estimator with an independently sampled pre-feedback reference run.
inline ThermoReport estimate_report(const ShotTable& feedback,
                                    const ShotTable& reference,
                                    const ThermalSpec& spec) {
  if (feedback.detected_shots < 1 || reference.detected_shots < 1)
    throw std::invalid_argument("estimate_report: empty table");
  return build_report(logical_map(compose_initial(spec)), reference.empirical(),
                      feedback.empirical(), spec);
}

/// Multinomial bootstrap: resamples the detected counts B times, recomputes
/// the full report per resample (against the fixed analytic reference), and
/// returns the standard error of every report field. Deterministic for fixed
/// seed.
inline std::map<std::string, double> bootstrap_errors(
    const ShotTable& table, int resamples, std::uint64_t seed,
    const ThermalSpec& spec, const ImperfectionSpec& imp, bool demon_on) {
  if (resamples < 100)
    throw std::invalid_argument("bootstrap_errors: need >= 100 resamples");
  if (table.detected_shots < 2)
    throw std::invalid_argument(
        "bootstrap_errors: degenerate table with < 2 detected shots");

  const StageTrace trace = run_stages(spec, imp, demon_on);
  const LogicalState initial = logical_map(trace.initial);
  const LogicalState readout = logical_map(trace.post_readout);

  const std::uint64_t total = table.detected_shots;
  std::vector<double> probs(table.counts.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    probs[i] = static_cast<double>(table.counts[i]) / static_cast<double>(total);

  std::mt19937_64 engine(seed);
  // accumulate shifted by the first resample so constant fields give exact 0
  std::map<std::string, double> shift, sum, sum_sq;
  std::vector<double> resampled(table.counts.size());
  for (int b = 0; b < resamples; ++b) {
    // conditional-binomial multinomial draw
    std::uint64_t remaining = total;
    double mass = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (remaining == 0 || mass <= 0.0) {
        resampled[i] = 0.0;
        continue;
      }
      std::uint64_t draw;
      if (i + 1 == probs.size() || probs[i] >= mass) {
        draw = remaining;
        mass = 0.0;
      } else {
        std::binomial_distribution<std::uint64_t> binom(remaining,
                                                        probs[i] / mass);
        draw = binom(engine);
        mass -= probs[i];
      }
      resampled[i] = static_cast<double>(draw);
      remaining -= draw;
    }
    for (double& x : resampled) x /= static_cast<double>(total);
    const LogicalState state(table.n_max, resampled);
    const ThermoReport report = build_report(initial, readout, state, spec);
    for (const auto& [name, value] : report.items()) {
      if (b == 0) shift[name] = value;
      const double d = value - shift[name];
      sum[name] += d;
      sum_sq[name] += d * d;
    }
  }

  std::map<std::string, double> errors;
  for (const auto& [name, s] : sum) {
    const double mean = s / resamples;
    const double var = std::max(0.0, sum_sq[name] / resamples - mean * mean);
    errors[name] = std::sqrt(var * resamples / (resamples - 1));
  }
  return errors;
}

}  // namespace demonsim

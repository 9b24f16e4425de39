#pragma once

// Diagonal qubit-demon-cavity states on a truncated Fock space, thermal
// preparation, marginals, and the physical-to-logical relabeling.
//
// The physical basis is {|f>,|g>,|e>} (x) {|0>..|n_max>}; every protocol map
// sends diagonal states to diagonal states in this basis, so a state is a
// classical probability table, not a density matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace demonsim {

using Distribution = std::vector<double>;

/// Normalization tolerance for probability tables.
inline constexpr double kProbabilitySumTol = 1e-12;
/// Thermal truncation gate: constructed thermal states must satisfy
/// P(n_max) < kTailThreshold.
inline constexpr double kTailThreshold = 1e-9;
/// Documented clamp for sweep grids whose endpoints nominally touch p_e = 0
/// or 1 (relative entropies to the Gibbs references diverge at the endpoints).
inline constexpr double kPeFloor = 1e-12;
/// Default photon-number truncation; passes the tail gate for n_th <= 1.0.
inline constexpr int kDefaultNmax = 32;

/// Atomic levels, lowest first. |f> carries the demon memory, {|g>,|e>} the
/// qubit.
enum class Level : int { f = 0, g = 1, e = 2 };

enum class Subsystem : int { Q = 0, D = 1, C = 2 };

/// Raised when a photon-number truncation is too small for the requested
/// state or map.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_table(const std::vector<double>& p, std::size_t expected,
                        const char* what) {
  if (p.size() != expected) {
    throw std::invalid_argument(std::string(what) + ": table has " +
                                std::to_string(p.size()) + " entries, expected " +
                                std::to_string(expected));
  }
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= -kProbabilitySumTol)) {
      throw std::invalid_argument(std::string(what) +
                                  ": negative probability entry " +
                                  std::to_string(x));
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTol) {
    std::ostringstream msg;
    msg << what << ": probabilities sum to " << sum << ", expected 1 within "
        << kProbabilitySumTol;
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace detail

/// Populations over (atomic level, photon number), levels f,g,e major.
class JointState {
 public:
  JointState(int n_max, std::vector<double> populations)
      : n_max_(n_max), p_(std::move(populations)) {
    if (n_max_ < 1) throw std::invalid_argument("JointState: n_max must be >= 1");
    detail::check_table(p_, 3u * photon_dim(), "JointState");
    for (double& x : p_) x = std::max(x, 0.0);
  }

  int n_max() const { return n_max_; }
  std::size_t photon_dim() const { return static_cast<std::size_t>(n_max_) + 1; }

  double operator()(Level l, int n) const { return p_[index(l, n)]; }
  const std::vector<double>& data() const { return p_; }

  double mean_photon_number() const {
    double m = 0.0;
    for (int l = 0; l < 3; ++l)
      for (int n = 1; n <= n_max_; ++n)
        m += n * p_[index(static_cast<Level>(l), n)];
    return m;
  }

  std::array<double, 3> level_populations() const {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int l = 0; l < 3; ++l)
      for (int n = 0; n <= n_max_; ++n)
        out[static_cast<std::size_t>(l)] += p_[index(static_cast<Level>(l), n)];
    return out;
  }

  std::size_t index(Level l, int n) const {
    return static_cast<std::size_t>(l) * photon_dim() + static_cast<std::size_t>(n);
  }

 private:
  int n_max_;
  std::vector<double> p_;
};

/// The same populations re-indexed as P(s_Q, s_D, n). The (1,1) sector is
/// forbidden: the protocol never populates |1_Q>|1_D>.
class LogicalState {
 public:
  LogicalState(int n_max, std::vector<double> populations)
      : n_max_(n_max), p_(std::move(populations)) {
    if (n_max_ < 1) throw std::invalid_argument("LogicalState: n_max must be >= 1");
    detail::check_table(p_, 4u * photon_dim(), "LogicalState");
    for (int n = 0; n <= n_max_; ++n) {
      if (p_[index(1, 1, n)] > kProbabilitySumTol) {
        throw std::invalid_argument(
            "LogicalState: forbidden sector (s_Q=1, s_D=1) is populated at n=" +
            std::to_string(n));
      }
    }
    for (double& x : p_) x = std::max(x, 0.0);
  }

  int n_max() const { return n_max_; }
  std::size_t photon_dim() const { return static_cast<std::size_t>(n_max_) + 1; }

  double operator()(int s_q, int s_d, int n) const { return p_[index(s_q, s_d, n)]; }
  const std::vector<double>& data() const { return p_; }

  double mean_photon_number() const {
    double m = 0.0;
    for (int s = 0; s < 4; ++s)
      for (int n = 1; n <= n_max_; ++n)
        m += n * p_[static_cast<std::size_t>(s) * photon_dim() + static_cast<std::size_t>(n)];
    return m;
  }

  /// P(s_Q = 1), the qubit excited population.
  double qubit_excited_population() const {
    double m = 0.0;
    for (int s_d = 0; s_d < 2; ++s_d)
      for (int n = 0; n <= n_max_; ++n) m += p_[index(1, s_d, n)];
    return m;
  }

  std::size_t index(int s_q, int s_d, int n) const {
    return (static_cast<std::size_t>(s_q) * 2 + static_cast<std::size_t>(s_d)) *
               photon_dim() +
           static_cast<std::size_t>(n);
  }

 private:
  int n_max_;
  std::vector<double> p_;
};

/// Initial thermal preparation: p_e parametrizes the qubit temperature,
/// n_th the cavity temperature. Dimensionless beta values carry the hbar*omega
/// factor (beta~ = beta * hbar * omega).
struct ThermalSpec {
  double p_e;
  double n_th;
  int n_max = kDefaultNmax;

  ThermalSpec(double p_e_, double n_th_, int n_max_ = kDefaultNmax)
      : p_e(p_e_), n_th(n_th_), n_max(n_max_) {
    if (!(p_e > 0.0 && p_e < 1.0))
      throw std::invalid_argument("ThermalSpec: p_e must lie strictly inside (0,1)");
    if (!(n_th > 0.0))
      throw std::invalid_argument("ThermalSpec: n_th must be > 0");
    if (n_max < 1) throw std::invalid_argument("ThermalSpec: n_max must be >= 1");
  }

  double beta_q() const { return std::log((1.0 - p_e) / p_e); }
  double beta_c() const { return std::log((1.0 + n_th) / n_th); }
};

/// Truncated Boltzmann photon-number distribution, renormalized:
/// P(n) proportional to [n_th/(1+n_th)]^n. Fails with TruncationError when the
/// top entry carries mass >= kTailThreshold, naming an adequate n_max.
inline Distribution thermal_cavity(double n_th, int n_max) {
  if (n_th < 0.0) throw std::invalid_argument("thermal_cavity: n_th must be >= 0");
  if (n_max < 1) throw std::invalid_argument("thermal_cavity: n_max must be >= 1");
  const std::size_t dim = static_cast<std::size_t>(n_max) + 1;
  Distribution p(dim, 0.0);
  if (n_th == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double ratio = n_th / (1.0 + n_th);
  double w = 1.0, sum = 0.0;
  for (std::size_t n = 0; n < dim; ++n) {
    p[n] = w;
    sum += w;
    w *= ratio;
  }
  for (double& x : p) x /= sum;
  if (p[dim - 1] >= kTailThreshold) {
    // smallest n_max whose renormalized top entry passes the gate
    int required = n_max;
    double tail = p[dim - 1];
    while (tail >= kTailThreshold) {
      ++required;
      tail *= ratio;
    }
    std::ostringstream msg;
    msg << "thermal_cavity: truncation tail P(" << n_max << ") = " << p[dim - 1]
        << " >= " << kTailThreshold << " at n_th = " << n_th
        << "; need n_max >= " << required;
    throw TruncationError(msg.str());
  }
  return p;
}

/// Two-level thermal populations (p_g, p_e).
inline std::array<double, 2> qubit_populations(double p_e) {
  if (!(p_e > 0.0 && p_e < 1.0))
    throw std::invalid_argument("qubit_populations: p_e must lie strictly inside (0,1)");
  return {1.0 - p_e, p_e};
}

struct BetaValues {
  double beta_q;             // ln((1-p_e)/p_e), units of 1/(hbar*omega)
  double beta_c;             // ln((1+n_th)/n_th)
  double delta_beta;         // beta_c - beta_q
  double delta_beta_tilde;   // 1 - beta_q/beta_c = 1 - T_c/T_q
};

inline BetaValues beta_conversions(double p_e, double n_th) {
  const ThermalSpec spec(p_e, n_th);
  const double bq = spec.beta_q();
  const double bc = spec.beta_c();
  return {bq, bc, bc - bq, 1.0 - bq / bc};
}

/// The p_e at which the qubit and cavity temperatures coincide.
inline double mutual_equilibrium_pe(double n_th) {
  if (!(n_th > 0.0))
    throw std::invalid_argument("mutual_equilibrium_pe: n_th must be > 0");
  return n_th / (1.0 + 2.0 * n_th);
}

/// Product initial state: qubit thermal in the {g,e} subspace, cavity thermal,
/// demon memory (level f) empty.
inline JointState compose_initial(const ThermalSpec& spec) {
  const Distribution cavity = thermal_cavity(spec.n_th, spec.n_max);
  const auto qubit = qubit_populations(spec.p_e);
  const std::size_t dim = cavity.size();
  std::vector<double> p(3 * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    p[1 * dim + n] = qubit[0] * cavity[n];  // |g,n>
    p[2 * dim + n] = qubit[1] * cavity[n];  // |e,n>
  }
  return JointState(spec.n_max, std::move(p));
}

/// Relabeling |e> = |1_Q,0_D>, |g> = |0_Q,0_D>, |f> = |0_Q,1_D>.
inline LogicalState logical_map(const JointState& state) {
  const std::size_t dim = state.photon_dim();
  std::vector<double> P(4 * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    const int ni = static_cast<int>(n);
    P[0 * dim + n] = state(Level::g, ni);  // (0,0)
    P[1 * dim + n] = state(Level::f, ni);  // (0,1)
    P[2 * dim + n] = state(Level::e, ni);  // (1,0)
  }
  return LogicalState(state.n_max(), std::move(P));
}

/// Inverse relabeling; exact on the support since the map is a bijection.
inline JointState logical_unmap(const LogicalState& state) {
  const std::size_t dim = state.photon_dim();
  std::vector<double> p(3 * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    const int ni = static_cast<int>(n);
    p[0 * dim + n] = state(0, 1, ni);
    p[1 * dim + n] = state(0, 0, ni);
    p[2 * dim + n] = state(1, 0, ni);
  }
  return JointState(state.n_max(), std::move(p));
}

namespace detail {

struct SubsystemSet {
  bool q = false, d = false, c = false;
  int count() const { return int(q) + int(d) + int(c); }
};

inline SubsystemSet make_set(std::initializer_list<Subsystem> systems,
                             const char* what) {
  SubsystemSet s;
  for (Subsystem sub : systems) {
    switch (sub) {
      case Subsystem::Q: s.q = true; break;
      case Subsystem::D: s.d = true; break;
      case Subsystem::C: s.c = true; break;
    }
  }
  if (s.count() == 0)
    throw std::invalid_argument(std::string(what) + ": empty subsystem set");
  return s;
}

inline Distribution marginal_over(const LogicalState& state,
                                  const SubsystemSet& set) {
  const std::size_t dim_c = state.photon_dim();
  std::size_t out_dim = 1;
  if (set.q) out_dim *= 2;
  if (set.d) out_dim *= 2;
  if (set.c) out_dim *= dim_c;
  Distribution out(out_dim, 0.0);
  for (int s_q = 0; s_q < 2; ++s_q) {
    for (int s_d = 0; s_d < 2; ++s_d) {
      for (std::size_t n = 0; n < dim_c; ++n) {
        std::size_t idx = 0;
        if (set.q) idx = idx * 2 + static_cast<std::size_t>(s_q);
        if (set.d) idx = idx * 2 + static_cast<std::size_t>(s_d);
        if (set.c) idx = idx * dim_c + n;
        out[idx] += state(s_q, s_d, static_cast<int>(n));
      }
    }
  }
  return out;
}

}  // namespace detail

/// Marginal over any nonempty subset of {Q, D, C} in the logical indexing.
/// Kept subsystems appear in canonical Q, D, C order, row-major
/// (Q dim 2, D dim 2, C dim n_max+1).
inline Distribution marginal(const LogicalState& state,
                             std::initializer_list<Subsystem> keep) {
  return detail::marginal_over(state, detail::make_set(keep, "marginal"));
}

inline Distribution marginal(const JointState& state,
                             std::initializer_list<Subsystem> keep) {
  return marginal(logical_map(state), keep);
}

}  // namespace demonsim

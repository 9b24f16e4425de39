#pragma once

// Test-only brute-force reference implementation. States live in sorted maps
// keyed by enumerated basis labels, every functional is computed from first
// principles by explicit enumeration, and nothing here shares code with the
// library paths under test.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "demonsim/state.hpp"

namespace bruteforce {

// physical basis label (level, n); level 0=f, 1=g, 2=e
using PhysKey = std::pair<int, int>;
using PhysTable = std::map<PhysKey, double>;
// logical basis label (s_q, s_d, n)
using LogKey = std::tuple<int, int, int>;
using LogTable = std::map<LogKey, double>;

inline PhysTable phys_from(const demonsim::JointState& state) {
  PhysTable t;
  for (int l = 0; l < 3; ++l)
    for (int n = 0; n <= state.n_max(); ++n)
      t[{l, n}] = state(static_cast<demonsim::Level>(l), n);
  return t;
}

inline LogTable log_from(const demonsim::LogicalState& state) {
  LogTable t;
  for (int sq = 0; sq < 2; ++sq)
    for (int sd = 0; sd < 2; ++sd)
      for (int n = 0; n <= state.n_max(); ++n) t[{sq, sd, n}] = state(sq, sd, n);
  return t;
}

// |e> = |1,0>, |g> = |0,0>, |f> = |0,1>
inline LogTable to_logical(const PhysTable& phys) {
  LogTable t;
  for (const auto& [key, p] : phys) {
    const auto [level, n] = key;
    if (level == 0) t[{0, 1, n}] += p;
    if (level == 1) t[{0, 0, n}] += p;
    if (level == 2) t[{1, 0, n}] += p;
  }
  return t;
}

inline PhysTable thermal_initial(double p_e, double n_th, int n_max) {
  std::vector<double> cavity(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (n_th == 0.0) {
    cavity[0] = 1.0;
  } else {
    const double r = n_th / (1.0 + n_th);
    long double sum = 0.0L, w = 1.0L;
    for (int n = 0; n <= n_max; ++n) {
      cavity[static_cast<std::size_t>(n)] = static_cast<double>(w);
      sum += w;
      w *= r;
    }
    for (auto& x : cavity) x = static_cast<double>(x / sum);
  }
  PhysTable t;
  for (int n = 0; n <= n_max; ++n) {
    t[{0, n}] = 0.0;
    t[{1, n}] = (1.0 - p_e) * cavity[static_cast<std::size_t>(n)];
    t[{2, n}] = p_e * cavity[static_cast<std::size_t>(n)];
  }
  return t;
}

inline PhysTable readout(const PhysTable& in, double eta) {
  PhysTable out;
  for (const auto& [key, p] : in) {
    const auto [level, n] = key;
    if (level == 1) {
      out[{0, n}] += eta * p;
      out[{1, n}] += (1.0 - eta) * p;
    } else if (level == 0) {
      out[{1, n}] += eta * p;
      out[{0, n}] += (1.0 - eta) * p;
    } else {
      out[{2, n}] += p;
    }
  }
  return out;
}

inline PhysTable swap_map(const PhysTable& in, int n_max) {
  PhysTable out;
  for (const auto& [key, p] : in) {
    const auto [level, n] = key;
    if (level == 2 && n < n_max)
      out[{1, n + 1}] += p;
    else if (level == 1 && n >= 1)
      out[{2, n - 1}] += p;
    else
      out[{level, n}] += p;
  }
  return out;
}

template <typename Table>
double entropy(const Table& t) {
  long double h = 0.0L;
  for (const auto& [key, p] : t) {
    (void)key;
    if (p > 0.0) h -= static_cast<long double>(p) * std::log(static_cast<long double>(p));
  }
  return static_cast<double>(h);
}

// keep[i] selects which of (s_q, s_d, n) survive; summed-out slots collapse to -1
inline LogTable marginalize(const LogTable& t, bool keep_q, bool keep_d,
                            bool keep_c) {
  LogTable out;
  for (const auto& [key, p] : t) {
    const auto [sq, sd, n] = key;
    out[{keep_q ? sq : -1, keep_d ? sd : -1, keep_c ? n : -1}] += p;
  }
  return out;
}

inline double mutual_information(const LogTable& t, bool aq, bool ad, bool ac,
                                 bool bq, bool bd, bool bc) {
  const double s_a = entropy(marginalize(t, aq, ad, ac));
  const double s_b = entropy(marginalize(t, bq, bd, bc));
  const double s_ab = entropy(marginalize(t, aq || bq, ad || bd, ac || bc));
  return s_a + s_b - s_ab;
}

template <typename Table>
double relative_entropy(const Table& p, const Table& q) {
  long double d = 0.0L;
  for (const auto& [key, pv] : p) {
    if (pv <= 0.0) continue;
    const auto it = q.find(key);
    const double qv = it == q.end() ? 0.0 : it->second;
    if (qv <= 0.0) return std::numeric_limits<double>::infinity();
    d += static_cast<long double>(pv) * std::log(static_cast<long double>(pv) / qv);
  }
  return static_cast<double>(d);
}

inline double mean_photons(const LogTable& t) {
  long double m = 0.0L;
  for (const auto& [key, p] : t) m += static_cast<long double>(std::get<2>(key)) * p;
  return static_cast<double>(m);
}

inline double excited_population(const LogTable& t) {
  long double m = 0.0L;
  for (const auto& [key, p] : t)
    if (std::get<0>(key) == 1) m += p;
  return static_cast<double>(m);
}

inline double baseline(double p_e, double n_th, int n_max) {
  const double beta_q = std::log((1.0 - p_e) / p_e);
  const double beta_c = std::log((1.0 + n_th) / n_th);
  if (1.0 - beta_q / beta_c <= 0.0) return 0.0;
  const PhysTable initial = thermal_initial(p_e, n_th, n_max);
  const LogTable before = to_logical(initial);
  const LogTable after = to_logical(swap_map(initial, n_max));
  return mean_photons(after) - mean_photons(before);
}

/// Every ThermoReport field, recomputed by enumeration; keys match
/// ThermoReport::items().
inline std::map<std::string, double> report(const LogTable& initial,
                                            const LogTable& post_readout,
                                            const LogTable& post_feedback,
                                            double p_e, double n_th, int n_max) {
  std::map<std::string, double> out;
  auto stage = [&out](const std::string& tag, const LogTable& t) {
    const double s_q = entropy(marginalize(t, true, false, false));
    const double s_d = entropy(marginalize(t, false, true, false));
    const double s_c = entropy(marginalize(t, false, false, true));
    const double s_qc = entropy(marginalize(t, true, false, true));
    const double s_qdc = entropy(t);
    out["S_Q_" + tag] = s_q;
    out["S_D_" + tag] = s_d;
    out["S_C_" + tag] = s_c;
    out["S_QC_" + tag] = s_qc;
    out["S_QDC_" + tag] = s_qdc;
    out["I_QCD_" + tag] = std::max(0.0, s_qc + s_d - s_qdc);
    out["I_QC_" + tag] = std::max(0.0, s_q + s_c - s_qc);
  };
  stage("initial", initial);
  stage("readout", post_readout);
  stage("feedback", post_feedback);

  out["dI_QCD"] = out["I_QCD_feedback"] - out["I_QCD_readout"];
  out["dS_QC"] = out["S_QC_feedback"] - out["S_QC_readout"];
  out["dS_QDC"] = out["S_QDC_feedback"] - out["S_QDC_readout"];
  out["dI_QC"] = out["I_QC_feedback"] - out["I_QC_readout"];
  out["dS_Q"] = out["S_Q_feedback"] - out["S_Q_readout"];
  out["dS_C"] = out["S_C_feedback"] - out["S_C_readout"];

  // Gibbs references from the initial spec
  LogTable gibbs_q, gibbs_c, gibbs_qc;
  {
    const PhysTable init = thermal_initial(p_e, n_th, n_max);
    const LogTable init_log = to_logical(init);
    const LogTable qm = marginalize(init_log, true, false, false);
    const LogTable cm = marginalize(init_log, false, false, true);
    gibbs_q = qm;
    gibbs_c = cm;
    for (const auto& [qk, qv] : qm)
      for (const auto& [ck, cv] : cm)
        gibbs_qc[{std::get<0>(qk), -1, std::get<2>(ck)}] = qv * cv;
  }
  const LogTable rho_q = marginalize(post_feedback, true, false, false);
  const LogTable rho_c = marginalize(post_feedback, false, false, true);
  const LogTable rho_qc = marginalize(post_feedback, true, false, true);
  out["D_Q"] = relative_entropy(rho_q, gibbs_q);
  out["D_C"] = relative_entropy(rho_c, gibbs_c);
  out["I_QC_post"] =
      std::max(0.0, mutual_information(post_feedback, true, false, false,
                                       false, false, true));
  out["D_QC"] = out["D_Q"] + out["D_C"] + out["I_QC_post"];
  const double direct = relative_entropy(rho_qc, gibbs_qc);
  if (std::abs(direct - out["D_QC"]) > 1e-10)
    throw std::logic_error("bruteforce: D_QC route mismatch");

  out["Q_Q"] = excited_population(post_feedback) - excited_population(post_readout);
  out["Q_C"] = mean_photons(post_feedback) - mean_photons(post_readout);

  out["beta_Q"] = std::log((1.0 - p_e) / p_e);
  out["beta_C"] = std::log((1.0 + n_th) / n_th);
  out["delta_beta"] = out["beta_C"] - out["beta_Q"];
  out["delta_beta_tilde"] = 1.0 - out["beta_Q"] / out["beta_C"];

  out["clausius_QC"] = out["Q_C"] * out["delta_beta"];
  out["clausius_QQ"] = -out["Q_Q"] * out["delta_beta"];
  out["residual"] = out["clausius_QC"] - out["dI_QCD"] - out["D_QC"];
  out["reduced_residual"] = out["clausius_QC"] - out["D_QC"];
  out["gsl"] = out["clausius_QC"] - out["dI_QCD"];
  out["gsl_QQ"] = out["clausius_QQ"] - out["dI_QCD"];
  out["heat_gain"] = out["Q_C"] - baseline(p_e, n_th, n_max);
  return out;
}

}  // namespace bruteforce

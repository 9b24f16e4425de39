#pragma once

// Shared test generators.

#include <random>
#include <vector>

#include "demonsim/state.hpp"

namespace testutil {

/// Random strictly-positive probability table of the given size.
inline std::vector<double> random_table(std::size_t size, std::mt19937_64& rng,
                                        double sparsity = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> p(size);
  double sum = 0.0;
  for (double& x : p) {
    x = (sparsity > 0.0 && unif(rng) < sparsity) ? 0.0 : expo(rng);
    sum += x;
  }
  if (sum == 0.0) {
    p[0] = 1.0;
    return p;
  }
  for (double& x : p) x /= sum;
  return p;
}

inline demonsim::JointState random_joint(int n_max, std::mt19937_64& rng,
                                         double sparsity = 0.3) {
  return demonsim::JointState(
      n_max, random_table(3u * (static_cast<std::size_t>(n_max) + 1), rng, sparsity));
}

inline demonsim::LogicalState random_logical(int n_max, std::mt19937_64& rng,
                                             double sparsity = 0.3) {
  const std::size_t dim = static_cast<std::size_t>(n_max) + 1;
  auto base = random_table(3u * dim, rng, sparsity);
  // expand into the 4-sector logical layout, forbidden sector empty
  std::vector<double> p(4u * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n) {
    p[0 * dim + n] = base[0 * dim + n];
    p[1 * dim + n] = base[1 * dim + n];
    p[2 * dim + n] = base[2 * dim + n];
  }
  return demonsim::LogicalState(n_max, std::move(p));
}

/// A pure basis state in the physical indexing.
inline demonsim::JointState pure_joint(int n_max, demonsim::Level level, int n) {
  std::vector<double> p(3u * (static_cast<std::size_t>(n_max) + 1), 0.0);
  p[static_cast<std::size_t>(level) * (static_cast<std::size_t>(n_max) + 1) +
    static_cast<std::size_t>(n)] = 1.0;
  return demonsim::JointState(n_max, std::move(p));
}

}  // namespace testutil

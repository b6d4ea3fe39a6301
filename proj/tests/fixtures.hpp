#pragma once

#include <initializer_list>
#include <tuple>
#include <vector>

#include "dcskel/types.hpp"

namespace fixtures {

/// SEM over p variables with the listed (parent, child, coef) arcs and unit
/// Gaussian noise.
inline dcskel::GaussianSEM sem_with(int p, std::initializer_list<std::tuple<int, int, double>> arcs) {
  auto sem = dcskel::GaussianSEM::empty(p);
  for (auto [a, b, c] : arcs) sem.set_coef(a, b, c);
  return sem;
}

/// 0 -> 1 -> ... -> p-1, every coefficient `coef`.
inline dcskel::GaussianSEM chain(int p, double coef) {
  auto sem = dcskel::GaussianSEM::empty(p);
  for (int v = 0; v + 1 < p; ++v) sem.set_coef(v, v + 1, coef);
  return sem;
}

inline std::vector<std::vector<int>> parents_of(const dcskel::GaussianSEM& sem) {
  std::vector<std::vector<int>> parents(static_cast<std::size_t>(sem.p()));
  for (int a = 0; a < sem.p(); ++a)
    for (int b = 0; b < sem.p(); ++b)
      if (sem.coef(a, b) != 0.0) parents[b].push_back(a);
  return parents;
}

}  // namespace fixtures

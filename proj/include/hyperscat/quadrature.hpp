#pragma once

#include <vector>

namespace hyperscat {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule of the given order mapped onto [lo, hi].
QuadratureRule gauss_legendre(int order, double lo = -1.0, double hi = 1.0);

}  // namespace hyperscat

#include "hyperscat/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hyperscat/errors.hpp"

namespace hyperscat {

QuadratureRule gauss_legendre(int order, double lo, double hi) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("gauss_legendre: empty interval");

  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);

  // Newton on P_n from the Tricomi initial guesses; roots are symmetric.
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    int it = 0;
    for (; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (it == 100) {
      throw NumericalError("gauss_legendre: Newton iteration did not converge",
                           "order=" + std::to_string(order) + " root=" + std::to_string(i));
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[order - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[order - 1 - i] = half * w;
  }
  return rule;
}

}  // namespace hyperscat

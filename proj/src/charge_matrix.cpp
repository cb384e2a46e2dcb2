#include "hyperscat/charge_matrix.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "hyperscat/errors.hpp"
#include "hyperscat/quadrature.hpp"

namespace hyperscat {

namespace {

constexpr double kPi = std::numbers::pi;

// Jacobi vectors of set b (1-based) for one-dimensional positions r:
// x_b = sqrt(2 mu_jk)(r_j - r_k), y_b = sqrt(2 mu_i,jk)(r_i - R_jk), (i, j, k) cyclic.
std::array<double, 2> jacobi(const std::array<double, 3>& m, int b, const std::array<double, 3>& r) {
  const int i = b - 1, j = (i + 1) % 3, k = (i + 2) % 3;
  const double M = m[0] + m[1] + m[2];
  const double mu = m[j] * m[k] / (m[j] + m[k]);
  const double mu2 = m[i] * (m[j] + m[k]) / M;
  const double cm = (m[j] * r[j] + m[k] * r[k]) / (m[j] + m[k]);
  return {std::sqrt(2 * mu) * (r[j] - r[k]), std::sqrt(2 * mu2) * (r[i] - cm)};
}

// Positions with zero centre of mass reproducing (x, y) in set b.
std::array<double, 3> positions(const std::array<double, 3>& m, int b, double x, double y) {
  const int i = b - 1, j = (i + 1) % 3, k = (i + 2) % 3;
  const double M = m[0] + m[1] + m[2];
  const double dx = x / std::sqrt(2 * m[j] * m[k] / (m[j] + m[k]));
  const double dy = y / std::sqrt(2 * m[i] * (m[j] + m[k]) / M);
  // r_i - R_jk = dy and m_i r_i + (m_j + m_k) R_jk = 0.
  const double ri = dy * (m[j] + m[k]) / M;
  const double cm = ri - dy;
  std::array<double, 3> r{};
  r[i] = ri;
  r[j] = cm + dx * m[k] / (m[j] + m[k]);
  r[k] = cm - dx * m[j] / (m[j] + m[k]);
  return r;
}

}  // namespace

void validate(const SystemSpec& system) {
  for (int b = 0; b < 3; ++b) {
    if (!(system.masses[b] > 0.0) || !std::isfinite(system.masses[b])) {
      throw std::invalid_argument(fmt::format("system: mass m{} must be positive and finite", b + 1));
    }
    if (!std::isfinite(system.charges[b])) {
      throw std::invalid_argument(fmt::format("system: charge c{} must be finite", b + 1));
    }
  }
}

double kinematic_angle(const SystemSpec& system, int beta, int gamma) {
  validate(system);
  if (beta < 1 || beta > 3 || gamma < 1 || gamma > 3) {
    throw std::invalid_argument("kinematic_angle: indices must be in {1, 2, 3}");
  }
  if (beta == gamma) throw std::invalid_argument("kinematic_angle: beta and gamma must differ");
  const auto& m = system.masses;
  double c = jacobi(m, beta, positions(m, gamma, 1.0, 0.0))[0];
  double s = jacobi(m, beta, positions(m, gamma, 0.0, 1.0))[0];
  if (c < 0.0 || (c == 0.0 && s < 0.0)) {
    c = -c;
    s = -s;
  }
  return std::atan2(s, c);
}

double cos_alpha_beta(double alpha, double u, double phi) {
  if (!(alpha >= 0.0 && alpha <= kPi / 2)) {
    throw std::domain_error("cos_alpha_beta: alpha outside [0, pi/2]");
  }
  if (!(u >= -1.0 && u <= 1.0)) throw std::domain_error("cos_alpha_beta: u outside [-1, 1]");
  const double c = std::cos(phi), s = std::sin(phi);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double r = c * c * ca * ca + s * s * sa * sa + 2 * c * s * sa * ca * u;
  if (r < 0.0) {
    if (r < -1e-12) warn(fmt::format("cos_alpha_beta: negative radicand {:.3e} clamped to 0", r));
    return 0.0;
  }
  return std::min(1.0, std::sqrt(r));
}

RealMatrix charge_matrix_at_order(const BasisSpec& basis, const SystemSpec& system, int quad_order) {
  validate(system);
  if (quad_order < min_quad_order(basis.k_max)) {
    throw std::invalid_argument(fmt::format("charge matrix: quad_order {} below the minimum {}", quad_order,
                                            min_quad_order(basis.k_max)));
  }
  const std::size_t n = basis.size();
  RealMatrix C = RealMatrix::Zero(n, n);
  const auto qa = gauss_legendre(quad_order, 0.0, kPi / 2);
  const auto qu = gauss_legendre(quad_order, -1.0, 1.0);
  RealVector y(n);

  // Each term is integrated in its own Jacobi frame, where the measure
  // sin^2 cos^2 absorbs 1/cos(alpha_beta); the basis, defined in the reference
  // frame, is evaluated at the rotated invariants.
  for (int beta = 1; beta <= 3; ++beta) {
    const double cb = system.charges[beta - 1];
    if (cb == 0.0) continue;
    double c = 1.0, s = 0.0;
    if (beta != kReferenceSet) {
      const double phi = kinematic_angle(system, beta, kReferenceSet);
      c = std::cos(phi);
      s = std::sin(phi);
    }
    RealMatrix term = RealMatrix::Zero(n, n);
    for (std::size_t i = 0; i < qa.size(); ++i) {
      const double ca = std::cos(qa.nodes[i]);
      const double sa = std::sin(qa.nodes[i]);
      const double a = ca * ca, b = sa * sa;
      const double wa = 8.0 * kPi * kPi * qa.weights[i] * sa * sa * ca;
      for (std::size_t j = 0; j < qu.size(); ++j) {
        const double w = ca * sa * qu.nodes[j];
        const double ag = c * c * a - 2 * c * s * w + s * s * b;
        const double bg = s * s * a + 2 * c * s * w + c * c * b;
        const double wg = c * s * a + (c * c - s * s) * w - c * s * b;
        for (std::size_t p = 0; p < n; ++p) y[p] = eval_harmonic_invariants(basis.channels[p], ag, bg, wg);
        term.noalias() += (wa * qu.weights[j]) * y * y.transpose();
      }
    }
    C += cb * term;
  }
  return C;
}

ChargeResult compute_charge_matrix(const BasisSpec& basis, const SystemSpec& system, int quad_order) {
  const RealMatrix lo = charge_matrix_at_order(basis, system, quad_order);
  const RealMatrix hi = charge_matrix_at_order(basis, system, 2 * quad_order);
  ChargeResult out;
  out.quad_order = 2 * quad_order;
  out.drift = (hi - lo).cwiseAbs().maxCoeff();
  out.asymmetry = (hi - hi.transpose()).cwiseAbs().maxCoeff();
  if (out.drift > kChargeDriftTolerance) {
    throw NumericalError("charge matrix: quadrature not converged",
                         fmt::format("order={} drift={:.3e} tolerance={:.1e}", quad_order, out.drift,
                                     kChargeDriftTolerance));
  }
  out.C = 0.5 * (hi + hi.transpose());
  return out;
}

double single_channel_charge(const SystemSpec& system) {
  return 16.0 / (3.0 * kPi) * (system.charges[0] + system.charges[1] + system.charges[2]);
}

}  // namespace hyperscat

#include "hyperscat/hyperbasis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/jacobi.hpp>

#include "hyperscat/quadrature.hpp"

namespace hyperscat {

namespace {

constexpr double kPi = std::numbers::pi;

// (sc)^l P_l(u) from invariants: Q_{j+1} = ((2j+1) w Q_j - j a b Q_{j-1}) / (j+1).
double paired_legendre(int l, double a, double b, double w) {
  if (l == 0) return 1.0;
  double q0 = 1.0;
  double q1 = w;
  for (int j = 1; j < l; ++j) {
    const double q2 = ((2.0 * j + 1.0) * w * q1 - j * a * b * q0) / (j + 1.0);
    q0 = q1;
    q1 = q2;
  }
  return q1;
}

double raw_harmonic(int n, int l, double a, double b, double w) {
  const double jac = boost::math::jacobi(static_cast<unsigned>(n), l + 0.5, l + 0.5, a - b);
  return jac * paired_legendre(l, a, b, w);
}

}  // namespace

double ell(int k) {
  if (k < 0) throw std::invalid_argument("ell: k must be >= 0, got " + std::to_string(k));
  return k + 1.5;
}

ChannelIndex make_channel(int n, int l) {
  if (n < 0 || l < 0) throw std::invalid_argument("make_channel: n and l must be >= 0");
  ChannelIndex ch{n, l, 2 * n + 2 * l, 1.0};

  // The alpha part is a trigonometric polynomial of degree 2k + 4; an order
  // well above that integrates it to rounding.
  const auto qa = gauss_legendre(2 * ch.k + 48, 0.0, kPi / 2);
  const auto qu = gauss_legendre(l + 2, -1.0, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < qa.size(); ++i) {
    const double c = std::cos(qa.nodes[i]);
    const double s = std::sin(qa.nodes[i]);
    const double wa = qa.weights[i] * s * s * c * c;
    for (std::size_t j = 0; j < qu.size(); ++j) {
      const double y = raw_harmonic(n, l, c * c, s * s, c * s * qu.nodes[j]);
      sum += wa * qu.weights[j] * y * y;
    }
  }
  ch.norm = 1.0 / std::sqrt(8.0 * kPi * kPi * sum);
  return ch;
}

BasisSpec enumerate_basis(int k_max, std::optional<int> l_max) {
  if (k_max < 0 || k_max % 2 != 0) {
    throw std::invalid_argument("enumerate_basis: k_max must be even and >= 0, got " +
                                std::to_string(k_max));
  }
  if (l_max && *l_max < 0) throw std::invalid_argument("enumerate_basis: l_max must be >= 0");

  BasisSpec basis;
  basis.k_max = k_max;
  basis.l_max = l_max;
  for (int k = 0; k <= k_max; k += 2) {
    for (int l = 0; l <= k / 2; ++l) {
      if (l_max && l > *l_max) continue;
      basis.channels.push_back(make_channel((k - 2 * l) / 2, l));
    }
  }
  return basis;
}

double eval_harmonic_invariants(const ChannelIndex& ch, double a, double b, double w) {
  return ch.norm * raw_harmonic(ch.n, ch.l, a, b, w);
}

double eval_harmonic(const ChannelIndex& ch, double alpha, double u) {
  if (!(alpha >= 0.0 && alpha <= kPi / 2)) {
    throw std::domain_error("eval_harmonic: alpha outside [0, pi/2]: " + std::to_string(alpha));
  }
  if (!(u >= -1.0 && u <= 1.0)) {
    throw std::domain_error("eval_harmonic: u outside [-1, 1]: " + std::to_string(u));
  }
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  return eval_harmonic_invariants(ch, c * c, s * s, c * s * u);
}

int min_quad_order(int k_max) { return 2 * k_max + 8; }

RealMatrix gram_matrix(const BasisSpec& basis, int quad_order) {
  if (quad_order < min_quad_order(basis.k_max)) {
    throw std::invalid_argument("gram_matrix: quad_order " + std::to_string(quad_order) +
                                " below the minimum " + std::to_string(min_quad_order(basis.k_max)) +
                                " for k_max=" + std::to_string(basis.k_max));
  }
  const auto qa = gauss_legendre(quad_order, 0.0, kPi / 2);
  const auto qu = gauss_legendre(quad_order, -1.0, 1.0);
  const std::size_t n = basis.size();
  RealMatrix G = RealMatrix::Zero(n, n);
  RealVector y(n);
  for (std::size_t i = 0; i < qa.size(); ++i) {
    const double c = std::cos(qa.nodes[i]);
    const double s = std::sin(qa.nodes[i]);
    const double wa = 8.0 * kPi * kPi * qa.weights[i] * s * s * c * c;
    for (std::size_t j = 0; j < qu.size(); ++j) {
      for (std::size_t p = 0; p < n; ++p) {
        y[p] = eval_harmonic_invariants(basis.channels[p], c * c, s * s, c * s * qu.nodes[j]);
      }
      G.noalias() += (wa * qu.weights[j]) * y * y.transpose();
    }
  }
  return G;
}

RealMatrix centrifugal_matrix(const BasisSpec& basis) {
  const std::size_t n = basis.size();
  RealMatrix L = RealMatrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = basis.channels[i].ell();
    L(i, i) = e * (e + 1.0);
  }
  return L;
}

nlohmann::json basis_to_json(const BasisSpec& basis) {
  nlohmann::json j;
  j["k_max"] = basis.k_max;
  j["l_max"] = basis.l_max ? nlohmann::json(*basis.l_max) : nlohmann::json(nullptr);
  j["size"] = basis.size();
  auto& arr = j["channels"] = nlohmann::json::array();
  for (const auto& ch : basis.channels) {
    arr.push_back({{"n", ch.n}, {"l", ch.l}, {"k", ch.k}, {"ell", ch.ell()}, {"norm", ch.norm}});
  }
  return j;
}

}  // namespace hyperscat

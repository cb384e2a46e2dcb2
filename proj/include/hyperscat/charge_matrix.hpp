#pragma once

#include <array>

#include "hyperscat/hyperbasis.hpp"
#include "hyperscat/types.hpp"

namespace hyperscat {

/// Three particles; charges[b] is the strength c_b of the pair potential
/// c_b / x_b between the two particles other than b.
struct SystemSpec {
  std::array<double, 3> masses{1.0, 1.0, 1.0};
  std::array<double, 3> charges{0.0, 0.0, 0.0};
};

void validate(const SystemSpec& system);

/// Reference Jacobi set used by the basis: pair (1, 2), spectator 3.
inline constexpr int kReferenceSet = 3;

/// Angle phi with x_beta = cos(phi) x_gamma + sin(phi) y_gamma for mass-scaled
/// Jacobi vectors; x_beta is oriented so that cos(phi) >= 0. Indices are 1-based.
double kinematic_angle(const SystemSpec& system, int beta, int gamma);

/// cos(alpha_beta) at unit hyperradius for a gamma-frame point (alpha, u).
double cos_alpha_beta(double alpha, double u, double phi);

inline constexpr int kDefaultChargeOrder = 96;
inline constexpr double kChargeDriftTolerance = 1e-8;

struct ChargeResult {
  RealMatrix C;
  int quad_order = 0;    // order of the reported matrix (twice the requested one)
  double drift = 0.0;    // max entry change between the requested order and its double
  double asymmetry = 0.0;  // max |C - C^T| before symmetrization
};

/// Single Gauss-Legendre evaluation at the given order per dimension.
RealMatrix charge_matrix_at_order(const BasisSpec& basis, const SystemSpec& system, int quad_order);

/// Evaluates at quad_order and 2*quad_order; throws NumericalError if any entry
/// moves by more than kChargeDriftTolerance.
ChargeResult compute_charge_matrix(const BasisSpec& basis, const SystemSpec& system,
                                   int quad_order = kDefaultChargeOrder);

/// Single-channel value 16/(3 pi) * sum of charges.
double single_channel_charge(const SystemSpec& system);

}  // namespace hyperscat

#pragma once

#include "hyperscat/types.hpp"

namespace hyperscat {

enum class CoulombRegion { asymptotic, series, inward };

const char* to_string(CoulombRegion r);

struct CoulombEval {
  double F = 0.0;
  double dF = 0.0;
  double G = 0.0;
  double dG = 0.0;
  double sigma = 0.0;
  CoulombRegion region_F = CoulombRegion::asymptotic;
  CoulombRegion region_G = CoulombRegion::asymptotic;

  double wronskian() const { return dF * G - F * dG; }
};

/// Value and rho-derivative of a complex wave.
struct Wave1 {
  cplx u;
  cplx du;
};

/// Principal-branch log Gamma for complex z (continuous off the negative real axis).
cplx log_gamma(cplx z);

/// sigma_L(eta) = Im log Gamma(L + 1 + i eta).
double sigma_L(double eta, double L);

/// Radius above which the asymptotic expansion is used for these parameters.
double asymptotic_radius(double eta, double L);

/// Regular and irregular Coulomb functions and their rho-derivatives.
CoulombEval coulomb_FG(double eta, double L, double rho);

/// (F, dF, G, dG) by inward integration from rho_start, where the asymptotic
/// expansion must hold. Exposed for overlap checks.
CoulombEval coulomb_FG_inward(double eta, double L, double rho, double rho_start);

/// u+- = exp(-+ i sigma) (G +- i F) and its rho-derivative.
Wave1 u_pm(double eta, double L, double rho, Wave sign);

/// Riccati-Hankel function h+-_ell(z), the eta = 0 case of u_pm.
Wave1 riccati_hankel(double ell, double z, Wave sign);

}  // namespace hyperscat

#include "hyperscat/coulombfn.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "hyperscat/errors.hpp"

namespace hyperscat {

namespace {

constexpr double kPi = std::numbers::pi;

// Asymptotic expansion of F and G for large rho (Abramowitz-Stegun 14.5).
struct AsymptoticSums {
  double f = 1.0, g = 0.0, fs = 0.0, gs = 0.0;
  bool converged = false;
  bool terminated = false;
  int terms = 0;
};

AsymptoticSums asymptotic_sums(double eta, double L, double rho) {
  AsymptoticSums out;
  double f = 1.0, g = 0.0, fs = 0.0, gs = 1.0 - eta / rho;
  out.gs = gs;
  const double ll = L * (L + 1.0);
  const int kmax = static_cast<int>(std::min(2.0 * rho + 50.0, 2000.0));
  for (int k = 0; k < kmax; ++k) {
    const double a = (2.0 * k + 1.0) * eta / ((2.0 * k + 2.0) * rho);
    const double b = (ll - k * (k + 1.0) + eta * eta) / ((2.0 * k + 2.0) * rho);
    const double f1 = a * f - b * g;
    const double g1 = a * g + b * f;
    const double fs1 = a * fs - b * gs - f1 / rho;
    const double gs1 = a * gs + b * fs - g1 / rho;
    f = f1;
    g = g1;
    fs = fs1;
    gs = gs1;
    out.f += f;
    out.g += g;
    out.fs += fs;
    out.gs += gs;
    out.terms = k + 1;
    const double term = std::max({std::abs(f), std::abs(g), std::abs(fs), std::abs(gs)});
    if (term == 0.0) {
      out.converged = out.terminated = true;
      return out;
    }
    if (term > 1e2) return out;
    if (term < 1e-17) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

CoulombEval from_asymptotic(const AsymptoticSums& s, double eta, double L, double rho, double sigma) {
  const double theta = rho - eta * std::log(2.0 * rho) - L * kPi / 2.0 + sigma;
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  CoulombEval e;
  e.F = s.g * c + s.f * sn;
  e.G = s.f * c - s.g * sn;
  e.dF = s.gs * c + s.fs * sn;
  e.dG = s.fs * c - s.gs * sn;
  e.sigma = sigma;
  e.region_F = e.region_G = CoulombRegion::asymptotic;
  return e;
}

struct SeriesF {
  double F = 0.0;
  double dF = 0.0;
  double cancellation = 0.0;
  bool converged = false;
};

// F = C_L rho^{L+1} sum_k A_k rho^k with A_k = (2 eta A_{k-1} - A_{k-2}) / (k (k + 2L + 1)).
SeriesF power_series_F(double eta, double L, double rho) {
  SeriesF out;
  const double log_c = L * std::log(2.0) - kPi * eta / 2.0 + log_gamma(cplx(L + 1.0, eta)).real() -
                       std::lgamma(2.0 * L + 2.0);
  double b_prev = 1.0;
  double b = eta * rho / (L + 1.0);
  double sum = 1.0 + b;
  double dsum = (L + 1.0) + (L + 2.0) * b;
  double peak = std::max(1.0, std::abs(b));
  for (int k = 2; k < 4000; ++k) {
    const double b_next = (2.0 * eta * rho * b - rho * rho * b_prev) / (k * (k + 2.0 * L + 1.0));
    b_prev = b;
    b = b_next;
    sum += b;
    dsum += (k + L + 1.0) * b;
    peak = std::max(peak, std::abs(b));
    if (k > rho && std::abs(b) < 1e-18 * std::abs(sum) && std::abs(b_prev) < 1e-18 * std::abs(sum)) {
      out.converged = true;
      break;
    }
  }
  const double scale = std::exp(log_c + L * std::log(rho));
  out.F = scale * rho * sum;
  out.dF = scale * dsum;
  out.cancellation = std::abs(sum) > 0.0 ? peak / std::abs(sum) : INFINITY;
  return out;
}

using State = std::array<double, 4>;

double turning_point(double eta, double L) { return eta + std::sqrt(eta * eta + L * (L + 1.0)); }

void check_inputs(double eta, double L, double rho, const char* who) {
  if (!std::isfinite(eta) || !std::isfinite(L) || !std::isfinite(rho)) {
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
  if (!(rho > 0.0)) throw std::domain_error(std::string(who) + ": rho must be > 0, got " + std::to_string(rho));
  if (!(L > -1.0)) throw std::domain_error(std::string(who) + ": L must be > -1, got " + std::to_string(L));
}

}  // namespace

const char* to_string(CoulombRegion r) {
  switch (r) {
    case CoulombRegion::asymptotic: return "asymptotic";
    case CoulombRegion::series: return "series";
    case CoulombRegion::inward: return "inward";
  }
  return "?";
}

cplx log_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
    throw std::domain_error("log_gamma: pole at nonpositive integer " + std::to_string(z.real()));
  }
  // Summing principal logs along the shift keeps the branch continuous.
  cplx shift(0.0, 0.0);
  while (z.real() < 15.0) {
    shift += std::log(z);
    z += 1.0;
  }
  static constexpr std::array<double, 8> bern = {
      1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};
  const cplx zinv = 1.0 / z;
  const cplx zinv2 = zinv * zinv;
  cplx series(0.0, 0.0);
  cplx zp = zinv;
  for (std::size_t m = 1; m <= bern.size(); ++m) {
    series += bern[m - 1] / (2.0 * m * (2.0 * m - 1.0)) * zp;
    zp *= zinv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + series - shift;
}

double sigma_L(double eta, double L) {
  if (!(L > -1.0)) {
    throw std::domain_error("sigma_L: L must be > -1, got " + std::to_string(L));
  }
  if (eta == 0.0) return 0.0;
  return log_gamma(cplx(L + 1.0, eta)).imag();
}

double asymptotic_radius(double eta, double L) {
  double r = std::max(30.0, 2.0 * std::abs(eta) * L + 20.0);
  for (int i = 0; i < 40; ++i, r *= 1.5) {
    if (asymptotic_sums(eta, L, r).converged) return r;
  }
  throw NumericalError("coulomb: asymptotic expansion did not converge",
                       fmt::format("eta={} L={} last_rho={}", eta, L, r));
}

CoulombEval coulomb_FG_inward(double eta, double L, double rho, double rho_start) {
  check_inputs(eta, L, rho, "coulomb_FG_inward");
  const auto start = asymptotic_sums(eta, L, rho_start);
  if (!start.converged) {
    throw NumericalError("coulomb: asymptotic start not converged",
                         fmt::format("eta={} L={} rho_start={} terms={}", eta, L, rho_start, start.terms));
  }
  const double sigma = sigma_L(eta, L);
  const CoulombEval s = from_asymptotic(start, eta, L, rho_start, sigma);
  State x = {s.F, s.dF, s.G, s.dG};

  const double ll = L * (L + 1.0);
  auto rhs = [&](const State& y, State& dy, double r) {
    const double q = ll / (r * r) + 2.0 * eta / r - 1.0;
    dy[0] = y[1];
    dy[1] = q * y[0];
    dy[2] = y[3];
    dy[3] = q * y[2];
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-15, 1e-14, ode::runge_kutta_fehlberg78<State>());
  std::size_t steps = 0;
  if (rho != rho_start) {
    steps = ode::integrate_adaptive(stepper, rhs, x, rho_start, rho, rho < rho_start ? -0.05 : 0.05);
  }
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericalError("coulomb: inward integration produced non-finite values",
                           fmt::format("eta={} L={} rho={} rho_start={} steps={}", eta, L, rho, rho_start, steps));
    }
  }
  CoulombEval e;
  e.F = x[0];
  e.dF = x[1];
  e.G = x[2];
  e.dG = x[3];
  e.sigma = sigma;
  e.region_F = e.region_G = CoulombRegion::inward;
  return e;
}

CoulombEval coulomb_FG(double eta, double L, double rho) {
  check_inputs(eta, L, rho, "coulomb_FG");
  const double rho_as = asymptotic_radius(eta, L);
  const auto here = asymptotic_sums(eta, L, rho);
  if ((rho >= rho_as && here.converged) || here.terminated) {
    return from_asymptotic(here, eta, L, rho, sigma_L(eta, L));
  }

  CoulombEval e = coulomb_FG_inward(eta, L, rho, rho_as);
  const SeriesF sf = power_series_F(eta, L, rho);
  if (sf.converged && sf.cancellation <= 1e4) {
    e.F = sf.F;
    e.dF = sf.dF;
    e.region_F = CoulombRegion::series;
  } else if (rho < turning_point(eta, L)) {
    throw NumericalError("coulomb: no accurate scheme for F inside the barrier",
                         fmt::format("eta={} L={} rho={} series_cancellation={:.3e} turning_point={}", eta, L,
                                     rho, sf.cancellation, turning_point(eta, L)));
  }
  return e;
}

Wave1 u_pm(double eta, double L, double rho, Wave sign) {
  check_inputs(eta, L, rho, "u_pm");
  const double sg = sign_of(sign);
  const double rho_as = asymptotic_radius(eta, L);
  const auto here = asymptotic_sums(eta, L, rho);
  if ((rho >= rho_as && here.converged) || here.terminated) {
    // u+- = (f +- i g) exp(+-i theta), theta = rho - eta ln 2 rho - L pi/2.
    const double theta = rho - eta * std::log(2.0 * rho) - L * kPi / 2.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {cplx(here.f * c - here.g * s, sg * (here.g * c + here.f * s)),
            cplx(here.fs * c - here.gs * s, sg * (here.gs * c + here.fs * s))};
  }
  const CoulombEval e = coulomb_FG(eta, L, rho);
  const double c = std::cos(e.sigma);
  const double s = std::sin(e.sigma);
  return {cplx(c * e.G + s * e.F, sg * (c * e.F - s * e.G)), cplx(c * e.dG + s * e.dF, sg * (c * e.dF - s * e.dG))};
}

Wave1 riccati_hankel(double ell, double z, Wave sign) { return u_pm(0.0, ell, z, sign); }

}  // namespace hyperscat

#include "hyperscat/verify.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace hyperscat {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Norms at or below this are treated as exact zeros by the slope checks.
constexpr double kMachineFloor = 1e-13;

double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const RealMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ComplexMatrix apply_operator(const MatrixEval& e, const RealMatrix& C, const RealMatrix& Lmat, double P, double R) {
  const Eigen::Index n = C.rows();
  const RealMatrix Q = -P * P * RealMatrix::Identity(n, n) + C / R + Lmat / (R * R);
  return -e.d2U + Q.cast<cplx>() * e.U;
}

CheckEntry slope_check(const std::string& name, const std::vector<double>& R, const std::vector<double>& norms,
                       double target, double tol) {
  CheckEntry c;
  c.name = name;
  c.is_slope = true;
  c.threshold = target + tol;
  double peak = 0.0;
  for (double v : norms) peak = std::max(peak, v);
  if (peak <= kMachineFloor) {
    c.value = -std::numeric_limits<double>::infinity();
    c.passed = true;
    c.note = fmt::format("at machine floor (max {:.3e})", peak);
    return c;
  }
  try {
    const auto fit = fit_slope(R, norms, R.front(), R.back());
    c.value = fit.slope;
    c.passed = fit.slope <= c.threshold;
    c.note = fmt::format("slope {:.4f} +- {:.4f} over {} points", fit.slope, fit.std_error, fit.points);
  } catch (const std::exception& e) {
    c.value = std::numeric_limits<double>::quiet_NaN();
    c.passed = false;
    c.note = e.what();
  }
  return c;
}

CheckEntry bound_check(const std::string& name, double value, double threshold) {
  CheckEntry c;
  c.name = name;
  c.value = value;
  c.threshold = threshold;
  c.passed = value <= threshold;
  return c;
}

}  // namespace

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_slope: x and y differ in length");
  if (!(hi > lo) || !(lo > 0.0)) throw std::invalid_argument("fit_slope: degenerate window");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lo || x[i] > hi) continue;
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
      throw std::invalid_argument(fmt::format("fit_slope: non-positive value {} at x={}", y[i], x[i]));
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const int n = static_cast<int>(lx.size());
  if (n < kMinFitPoints) {
    throw std::invalid_argument(fmt::format("fit_slope: {} points in window, need {}", n, kMinFitPoints));
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_slope: degenerate window (no spread in x)");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = n;
  double ss = 0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += r * r;
  }
  f.std_error = n > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return f;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("geometric_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  const double q = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(q * i);
  g.back() = hi;
  return g;
}

const char* to_string(DerivativeMode m) { return m == DerivativeMode::analytic ? "analytic" : "finite_difference"; }

ResidualReport operator_residual(const MatrixBuilder& builder, const RealMatrix& C, const RealMatrix& Lmat, double P,
                                 const std::vector<double>& R_grid, DerivativeMode mode, double window_lo,
                                 double window_hi) {
  for (std::size_t i = 1; i < R_grid.size(); ++i) {
    if (!(R_grid[i] > R_grid[i - 1])) throw std::invalid_argument("operator_residual: grid must be strictly ascending");
  }
  if (R_grid.empty() || !(R_grid.front() > 0.0)) throw std::invalid_argument("operator_residual: empty or non-positive grid");
  if (window_lo < R_grid.front() || window_hi > R_grid.back() || !(window_hi > window_lo)) {
    throw std::invalid_argument("operator_residual: fit window outside the grid");
  }

  ResidualReport rep;
  rep.mode = mode;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  const double cnorm = max_abs(C), lnorm = max_abs(Lmat);
  const double n = static_cast<double>(C.rows());
  for (double R : R_grid) {
    MatrixEval e = builder(R);
    const double unorm = max_abs(e.U);
    double floor = 0.0;
    if (mode == DerivativeMode::finite_difference) {
      const double h = std::max(1e-4, 1e-6 * R);
      const auto m2 = builder(R - 2 * h), m1 = builder(R - h), p1 = builder(R + h), p2 = builder(R + 2 * h);
      e.d2U = (-m2.U + 16.0 * m1.U - 30.0 * e.U + 16.0 * p1.U - p2.U) / (12.0 * h * h);
      // Function values carry an absolute phase error of order eps * P R; the
      // stencil amplifies it by (sum of |coefficients|) / h^2 = (64/12) / h^2.
      floor = 64.0 / 12.0 * kEps * (1.0 + P * R) * unorm / (h * h);
    }
    floor += 16.0 * kEps * n * (P * P + cnorm / R + lnorm / (R * R)) * unorm;
    const double r = max_abs(apply_operator(e, C, Lmat, P, R));
    rep.R.push_back(R);
    rep.norms.push_back(r);
    rep.floor.push_back(floor);
    rep.at_floor.push_back(r <= floor);
  }

  std::vector<double> x, y;
  for (std::size_t i = 0; i < rep.R.size(); ++i) {
    if (!rep.at_floor[i]) {
      x.push_back(rep.R[i]);
      y.push_back(rep.norms[i]);
    }
  }
  try {
    rep.fit = fit_slope(x, y, window_lo, window_hi);
    rep.fit_valid = true;
  } catch (const std::invalid_argument&) {
    rep.fit_valid = false;
  }
  return rep;
}

ResidualReport operator_residual(const MatrixBuilder& builder, const RealMatrix& C, const RealMatrix& Lmat, double P,
                                 const std::vector<double>& R_grid, DerivativeMode mode) {
  if (R_grid.empty()) throw std::invalid_argument("operator_residual: empty grid");
  return operator_residual(builder, C, Lmat, P, R_grid, mode, R_grid.front(), R_grid.back());
}

MatrixBuilder physical_builder(const SpectralData& s, Wave sign, BcVariant variant, RightFactor right) {
  return [&s, sign, variant, right](double R) { return eval_physical(s, R, sign, variant, right); };
}

nlohmann::json residual_to_json(const ResidualReport& r) {
  nlohmann::json j;
  j["mode"] = to_string(r.mode);
  j["window"] = {r.window_lo, r.window_hi};
  j["R"] = r.R;
  j["residual"] = r.norms;
  j["floor"] = r.floor;
  j["at_floor"] = r.at_floor;
  j["fit_valid"] = r.fit_valid;
  if (r.fit_valid) {
    j["slope"] = r.fit.slope;
    j["slope_std_error"] = r.fit.std_error;
    j["fit_points"] = r.fit.points;
  } else {
    j["slope"] = nullptr;
  }
  return j;
}

double cw0_residual(const SpectralData& s) { return max_abs(RealMatrix(s.C * s.V - s.V * s.d.asDiagonal())); }

double cw1_residual(const SpectralData& s) {
  const RealMatrix lhs = s.C * s.W1 - s.W1 * s.d.asDiagonal();
  const RealMatrix rhs = s.V * s.d1.asDiagonal() - s.Lmat * s.V;
  return max_abs(RealMatrix(lhs - rhs));
}

double t1_residual(const SpectralData& s, Wave sign) {
  const cplx t(0.0, sign_of(sign) * 2.0 * s.P);
  const ComplexMatrix D0 = s.d.cast<cplx>().asDiagonal();
  const ComplexMatrix D1 = s.d1.cast<cplx>().asDiagonal();
  const ComplexMatrix Z0 = s.Z0(sign).asDiagonal();
  const ComplexMatrix& Z1 = s.Z1(sign);
  const ComplexMatrix A = s.A.cast<cplx>();
  const ComplexMatrix res = t * Z1 + (D0 * Z1 - Z1 * D0) + (D1 * Z0 - Z0 * D1) + t * A * Z0;
  return max_abs(res) / std::max(1.0, 2.0 * s.P * max_abs(s.A));
}

bool ConsistencyReport::all_passed() const {
  for (const auto& e : entries)
    if (!e.passed) return false;
  return true;
}

const CheckEntry& ConsistencyReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("consistency report has no entry '" + name + "'");
}

ConsistencyReport consistency_suite(const SpectralData& s, const std::vector<double>& R_grid, double tol) {
  ConsistencyReport rep;
  const Eigen::Index n = static_cast<Eigen::Index>(s.size());

  for (Wave sign : {Wave::outgoing, Wave::incoming}) {
    std::vector<double> diff;
    for (double R : R_grid) diff.push_back(max_abs(ComplexMatrix(eval_U(s, R, sign).U - eval_U0(s, R, sign).U)));
    rep.entries.push_back(slope_check(fmt::format("U_minus_U0_slope{}", to_string(sign)), R_grid, diff, -1.0, tol));
  }

  std::vector<double> wtw;
  for (double R : R_grid) {
    const RealMatrix W = W_of_R(s, R).W;
    wtw.push_back(max_abs(RealMatrix(W.transpose() * W - RealMatrix::Identity(n, n))));
  }
  rep.entries.push_back(slope_check("WtW_minus_I_slope", R_grid, wtw, -2.0, tol));

  std::vector<double> fdiff;
  const ComplexMatrix S = ComplexMatrix::Identity(n, n);
  for (double R : R_grid) {
    fdiff.push_back(max_abs(ComplexMatrix(eval_F_as(s, R, S, BcVariant::full).U -
                                          eval_F_as(s, R, S, BcVariant::leading).U)));
  }
  rep.entries.push_back(slope_check("F_full_minus_leading_slope", R_grid, fdiff, -1.0, tol));

  rep.entries.push_back(bound_check("CW0_residual", cw0_residual(s), 1e-10));
  rep.entries.push_back(bound_check("CW1_residual", cw1_residual(s), 1e-10));
  rep.entries.push_back(bound_check("T1_residual+", t1_residual(s, Wave::outgoing), 1e-12));
  rep.entries.push_back(bound_check("T1_residual-", t1_residual(s, Wave::incoming), 1e-12));
  rep.entries.push_back(
      bound_check("V_orthogonality", max_abs(RealMatrix(s.V.transpose() * s.V - RealMatrix::Identity(n, n))), 1e-12));
  rep.entries.push_back(bound_check("A_equals_VtW1", max_abs(RealMatrix(s.A - s.V.transpose() * s.W1)), 1e-12));
  rep.entries.push_back(bound_check("A_antisymmetry", max_abs(RealMatrix(s.A + s.A.transpose())), 1e-12));

  double lk = 0.0, eta = 0.0, d1min = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    lk = std::max(lk, std::abs(s.Lk[i] * (s.Lk[i] + 1.0) - s.d1[i]) / std::max(1.0, s.d1[i]));
    eta = std::max(eta, std::abs(s.eta[i] - s.d[i] / (2.0 * s.P)) / std::max(1.0, std::abs(s.eta[i])));
    d1min = std::min(d1min, s.d1[i]);
  }
  rep.entries.push_back(bound_check("L_eff_roundtrip", lk, 1e-13));
  rep.entries.push_back(bound_check("eta_definition", eta, 1e-14));
  rep.entries.push_back(bound_check("d1_negative_part", -d1min, 0.0));
  return rep;
}

nlohmann::json consistency_to_json(const ConsistencyReport& r) {
  nlohmann::json j;
  j["all_passed"] = r.all_passed();
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json c = {{"name", e.name}, {"threshold", e.threshold}, {"kind", e.is_slope ? "slope" : "bound"},
                        {"passed", e.passed}, {"note", e.note}};
    c["value"] = std::isfinite(e.value) ? nlohmann::json(e.value) : nlohmann::json(nullptr);
    arr.push_back(c);
  }
  return j;
}

}  // namespace hyperscat

#include "hyperscat/radial_solver.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "hyperscat/errors.hpp"
#include "hyperscat/matrix_io.hpp"

namespace hyperscat {

namespace {

constexpr double kPi = std::numbers::pi;

// Reciprocal condition below which a propagation step is declared unstable.
constexpr double kMinStepRcond = 1e-13;

RealMatrix q_matrix(const RadialProblem& p, const RealMatrix& Lmat, double R) {
  const Eigen::Index n = p.ell.size();
  return p.P * p.P * RealMatrix::Identity(n, n) - p.C / R - Lmat / (R * R);
}

RealMatrix solve_checked(const RealMatrix& A, const RealMatrix& B, double R, const char* what) {
  Eigen::PartialPivLU<RealMatrix> lu(A);
  const double rc = lu.rcond();
  if (!(rc > kMinStepRcond)) {
    throw NumericalError("propagate: step-size instability",
                         fmt::format("{} singular at R={:.6g} (rcond={:.3e}); reduce the step", what, R, rc));
  }
  return lu.solve(B);
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

// Largest phase advance per step allowed in open channels (radians).
constexpr double kMaxPhasePerStep = 0.5;

// Upper bound of h * sqrt(lambda_max(Q)) on [a, b], using
// lambda_max(Q) <= P^2 + |C| / R - min(L) / R^2.
double max_phase_per_step(const RadialProblem& p, double a, double b, double h) {
  const double c = p.C.cwiseAbs().rowwise().sum().maxCoeff();
  const double lmin = (p.ell.array() * (p.ell.array() + 1.0)).minCoeff();
  auto k2 = [&](double R) { return p.P * p.P + c / R - lmin / (R * R); };
  double m = std::max(k2(a), k2(b));
  if (c > 0.0) {
    const double Rs = 2.0 * lmin / c;  // stationary point
    if (Rs > a && Rs < b) m = std::max(m, k2(Rs));
  }
  return h * std::sqrt(std::max(0.0, m));
}

}  // namespace

RealMatrix RadialProblem::Lmat() const {
  RealVector l = ell.array() * (ell.array() + 1.0);
  return l.asDiagonal();
}

double default_Rmin(const RealVector& ell, double P) { return 1e-3 * (ell.maxCoeff() + 1.0) / P; }

double default_step(double P) { return std::min(0.02, 2.0 * kPi / (40.0 * P)); }

RadialProblem make_problem(const RealMatrix& C, const RealVector& ell, double P, double Rmax,
                           std::optional<double> Rmin, std::optional<double> step) {
  if (!(P > 0.0)) throw std::invalid_argument(fmt::format("radial problem: P must be > 0, got {}", P));
  if (ell.size() == 0) throw std::invalid_argument("radial problem: no channels");
  RadialProblem p;
  p.C = C;
  p.ell = ell;
  p.P = P;
  p.Rmax = Rmax;
  p.Rmin = Rmin.value_or(default_Rmin(ell, P));
  p.step = step.value_or(default_step(P));
  validate(p);
  return p;
}

void validate(const RadialProblem& p) {
  const Eigen::Index n = p.ell.size();
  if (p.C.rows() != n || p.C.cols() != n) {
    throw std::invalid_argument(fmt::format("radial problem: C is {}x{}, expected {}x{}", p.C.rows(), p.C.cols(), n, n));
  }
  if (!(p.P > 0.0)) throw std::invalid_argument("radial problem: P must be > 0");
  if (!(p.Rmin > 0.0) || !(p.Rmax > p.Rmin)) {
    throw std::invalid_argument(fmt::format("radial problem: need 0 < Rmin < Rmax, got Rmin={} Rmax={}", p.Rmin, p.Rmax));
  }
  if (!(p.step > 0.0)) throw std::invalid_argument("radial problem: step must be > 0");
  if ((p.C - p.C.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, p.C.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("radial problem: C must be symmetric");
  }
}

LogDerivative regular_start(const RadialProblem& p) {
  validate(p);
  const double lmin = p.ell.minCoeff();
  const double centrifugal = lmin * (lmin + 1.0) / p.Rmin;
  const double other = p.P * p.P * p.Rmin + p.C.cwiseAbs().maxCoeff();
  if (other > 1e-2 * centrifugal) {
    warn(fmt::format("regular_start: Rmin={:.3g} is not centrifugal-dominated; suggest Rmin <= {:.3g}", p.Rmin,
                     default_Rmin(p.ell, p.P)));
  }
  RealVector y = (p.ell.array() + 1.0) / p.Rmin;
  return {p.Rmin, y.asDiagonal()};
}

LogDerivative propagate(const RadialProblem& p, const LogDerivative& start, double R_end) {
  validate(p);
  const Eigen::Index n = p.ell.size();
  if (start.Y.rows() != n || start.Y.cols() != n) throw std::invalid_argument("propagate: Y size mismatch");
  if (!(R_end > start.R)) throw std::invalid_argument("propagate: R_end must exceed the start radius");

  long steps = static_cast<long>(std::ceil((R_end - start.R) / p.step));
  steps += steps % 2;
  const double h = (R_end - start.R) / static_cast<double>(steps);
  const double phase = max_phase_per_step(p, start.R, R_end, h);
  if (phase > kMaxPhasePerStep) {
    throw NumericalError("propagate: step-size instability",
                         fmt::format("phase advance per step up to {:.3g} rad exceeds {}; reduce the step below {:.3g}",
                                     phase, kMaxPhasePerStep, h * kMaxPhasePerStep / phase));
  }
  const RealMatrix I = RealMatrix::Identity(n, n);
  const RealMatrix L = p.Lmat();

  RealMatrix y = start.Y - (h / 3.0) * q_matrix(p, L, start.R);
  for (long k = 1; k <= steps; ++k) {
    const double R = start.R + static_cast<double>(k) * h;
    const RealMatrix Q = q_matrix(p, L, R);
    RealMatrix u;
    double w;
    if (k % 2 == 1) {
      u = solve_checked(I + (h * h / 6.0) * Q, Q, R, "I + h^2 Q / 6");
      w = 4.0;
    } else {
      u = Q;
      w = k < steps ? 2.0 : 1.0;
    }
    y = solve_checked(I + h * y, y, R, "I + h Y") - (h / 3.0) * w * u;
  }
  if (!y.allFinite()) {
    throw NumericalError("propagate: non-finite log-derivative", fmt::format("R_end={} h={}", R_end, h));
  }
  return {R_end, y};
}

LogDerivative propagate(const RadialProblem& p) { return propagate(p, regular_start(p), p.Rmax); }

SMatrixResult extract_S(const LogDerivative& Y, const AsymptoticEval& basis) {
  if (std::abs(Y.R - basis.R) > 1e-12 * std::max(1.0, Y.R)) {
    throw std::invalid_argument(fmt::format("extract_S: Y at R={} but basis at R={}", Y.R, basis.R));
  }
  const ComplexMatrix Yc = Y.Y.cast<cplx>();
  const ComplexMatrix Mp = Yc * basis.plus.U - basis.plus.dU;
  const ComplexMatrix Mm = Yc * basis.minus.U - basis.minus.dU;
  Eigen::JacobiSVD<ComplexMatrix> svd(Mp);
  const auto& sv = svd.singularValues();
  const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  if (!(cond <= kMaxMatchingCondition)) {
    throw NumericalError("extract_S: ill-conditioned matching; increase Rmax",
                         fmt::format("R={} cond={:.3e}", Y.R, cond));
  }
  SMatrixResult r;
  r.R = Y.R;
  r.condition = cond;
  r.S = Mp.partialPivLu().solve(Mm);
  const Eigen::Index n = r.S.rows();
  r.unitarity_defect = max_abs(ComplexMatrix(r.S.adjoint() * r.S - ComplexMatrix::Identity(n, n)));
  r.symmetry_defect = max_abs(ComplexMatrix(r.S - r.S.transpose()));
  return r;
}

namespace {

void finish(ConvergenceStudy& st) {
  for (std::size_t i = 0; i + 1 < st.results.size(); ++i) {
    st.drift.push_back(max_abs(ComplexMatrix(st.results[i + 1].S - st.results[i].S)));
  }
  if (st.drift.size() >= static_cast<std::size_t>(kMinFitPoints)) {
    std::vector<double> x(st.Rmax.begin(), st.Rmax.end() - 1);
    bool positive = true;
    for (double d : st.drift) positive = positive && d > 0.0;
    if (positive) {
      st.fit = fit_slope(x, st.drift, x.front(), x.back());
      st.fit_valid = true;
    }
  }
}

void check_list(const std::vector<double>& Rmax_list, const RadialProblem& p) {
  if (Rmax_list.empty()) throw std::invalid_argument("convergence_study: empty Rmax list");
  for (std::size_t i = 0; i < Rmax_list.size(); ++i) {
    if (!(Rmax_list[i] > p.Rmin) || (i > 0 && !(Rmax_list[i] > Rmax_list[i - 1]))) {
      throw std::invalid_argument("convergence_study: Rmax values must be ascending and above Rmin");
    }
  }
}

}  // namespace

ConvergenceStudy convergence_study(const RadialProblem& p, const SpectralData& s, const std::vector<double>& Rmax_list,
                                   BcVariant variant) {
  check_list(Rmax_list, p);
  ConvergenceStudy st;
  st.variant = variant;
  LogDerivative y = regular_start(p);
  for (double R : Rmax_list) {
    y = propagate(p, y, R);
    st.Rmax.push_back(R);
    st.results.push_back(extract_S(y, eval_asymptotic(s, R, variant)));
  }
  finish(st);
  return st;
}

std::pair<ConvergenceStudy, ConvergenceStudy> convergence_study_both(const RadialProblem& p, const SpectralData& s,
                                                                     const std::vector<double>& Rmax_list) {
  check_list(Rmax_list, p);
  ConvergenceStudy lead, full;
  lead.variant = BcVariant::leading;
  full.variant = BcVariant::full;
  LogDerivative y = regular_start(p);
  for (double R : Rmax_list) {
    y = propagate(p, y, R);
    lead.Rmax.push_back(R);
    full.Rmax.push_back(R);
    lead.results.push_back(extract_S(y, eval_asymptotic(s, R, BcVariant::leading)));
    full.results.push_back(extract_S(y, eval_asymptotic(s, R, BcVariant::full)));
  }
  finish(lead);
  finish(full);
  return {lead, full};
}

nlohmann::json smatrix_to_json(const SMatrixResult& r) {
  auto j = matrix_to_json(r.S, false);
  j["R"] = r.R;
  j["matching_condition"] = r.condition;
  j["unitarity_defect"] = r.unitarity_defect;
  j["symmetry_defect"] = r.symmetry_defect;
  return j;
}

}  // namespace hyperscat

#include "hyperscat/asymptotics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "hyperscat/coulombfn.hpp"
#include "hyperscat/errors.hpp"

namespace hyperscat {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

void check_square(const RealMatrix& M, Eigen::Index n, const char* what) {
  if (M.rows() != n || M.cols() != n) {
    throw std::invalid_argument(fmt::format("{}: expected {}x{}, got {}x{}", what, n, n, M.rows(), M.cols()));
  }
}

void fix_signs(RealMatrix& V) {
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    Eigen::Index imax = 0;
    V.col(j).cwiseAbs().maxCoeff(&imax);
    if (V(imax, j) < 0.0) V.col(j) *= -1.0;
  }
}

// i^{k+1} / sqrt(2 pi)
cplx prefactor(int k) {
  static const cplx powers[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  return powers[(k + 1) % 4] / std::sqrt(2.0 * kPi);
}

void check_R(double R, const char* who) {
  if (!(R > 0.0) || !std::isfinite(R)) throw std::domain_error(fmt::format("{}: R must be positive, got {}", who, R));
}

}  // namespace

Diagonalization diagonalize_charge(const RealMatrix& C, const RealMatrix& Lmat) {
  const Eigen::Index n = C.rows();
  check_square(C, n, "diagonalize_charge: C");
  check_square(Lmat, n, "diagonalize_charge: L");
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, C.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument(fmt::format("diagonalize_charge: C is not symmetric (defect {:.3e})", asym));
  }

  Eigen::SelfAdjointEigenSolver<RealMatrix> es(C);
  if (es.info() != Eigen::Success) throw NumericalError("diagonalize_charge: eigensolver failed");

  Diagonalization out;
  out.d = es.eigenvalues();
  out.V = es.eigenvectors();
  out.cluster.assign(n, 0);
  const double radius = out.d.size() ? out.d.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const bool same = out.d[i] - out.d[i - 1] <= kClusterGap * radius;
    out.cluster[i] = out.cluster[i - 1] + (same ? 0 : 1);
  }

  // Degenerate perturbation theory: diagonalize V^T L V within each cluster.
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start;
    while (end < n && out.cluster[end] == out.cluster[start]) ++end;
    const Eigen::Index m = end - start;
    if (m > 1) {
      const RealMatrix Vc = out.V.middleCols(start, m);
      const RealMatrix B = Vc.transpose() * Lmat * Vc;
      const RealMatrix off = B - RealMatrix(B.diagonal().asDiagonal());
      if (off.cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, B.cwiseAbs().maxCoeff())) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> bs(0.5 * (B + B.transpose()));
        if (bs.info() != Eigen::Success) throw NumericalError("diagonalize_charge: cluster eigensolver failed");
        out.V.middleCols(start, m) = Vc * bs.eigenvectors();
      }
    }
    start = end;
  }
  fix_signs(out.V);
  return out;
}

FirstOrder first_order(const Diagonalization& diag, const RealMatrix& Lmat) {
  const Eigen::Index n = diag.d.size();
  check_square(Lmat, n, "first_order: L");
  const RealMatrix B = diag.V.transpose() * Lmat * diag.V;
  FirstOrder out;
  out.d1 = B.diagonal();
  RealMatrix M = RealMatrix::Zero(n, n);
  const double radius = diag.d.size() ? diag.d.cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || diag.cluster[i] == diag.cluster[j]) continue;
      const double gap = diag.d[i] - diag.d[j];
      if (std::abs(gap) <= kClusterGap * radius) {
        throw NumericalError("first_order: vanishing denominator outside a degenerate cluster",
                             fmt::format("pair=({},{}) gap={:.3e}", i, j, gap));
      }
      M(i, j) = B(i, j) / gap;
    }
  }
  out.W1 = -diag.V * M;
  out.A = -M;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.d1[i] < 0.0) {
      if (out.d1[i] < -1e-12 * std::max(1.0, B.cwiseAbs().maxCoeff())) {
        throw NumericalError("first_order: negative d1", fmt::format("K={} d1={:.6e}", i, out.d1[i]));
      }
      out.d1[i] = 0.0;
    }
  }
  return out;
}

double effective_L(double d1) {
  if (!(d1 >= 0.0)) throw std::domain_error(fmt::format("effective_L: d1 must be >= 0, got {}", d1));
  // -1/2 + sqrt(1/4 + d1) without cancellation for small d1.
  return d1 / (0.5 + std::sqrt(0.25 + d1));
}

const char* to_string(Z0Convention z) { return z == Z0Convention::identity ? "identity" : "phase_matched"; }

Z0Convention z0_from_string(const std::string& s) {
  if (s == "identity") return Z0Convention::identity;
  if (s == "phase_matched") return Z0Convention::phase_matched;
  throw std::invalid_argument("unknown Z0 convention '" + s + "' (identity | phase_matched)");
}

ComplexMatrix z1(const RealMatrix& A, const RealVector& d, double P, Wave sign, const ComplexVector& z0) {
  if (!(P > 0.0)) throw std::domain_error("z1: P must be > 0");
  const Eigen::Index n = d.size();
  check_square(A, n, "z1: A");
  if (z0.size() != n) throw std::invalid_argument("z1: Z0 size mismatch");
  const cplx t(0.0, sign_of(sign) * 2.0 * P);
  ComplexMatrix Z = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) Z(i, j) = -t * A(i, j) * z0[j] / (d[i] - d[j] + t);
  return Z;
}

ComplexMatrix z1(const RealMatrix& A, const RealVector& d, double P, Wave sign) {
  return z1(A, d, P, sign, ComplexVector::Ones(d.size()));
}

SpectralData build_spectral(const RealMatrix& C, const std::vector<int>& k, double P, Z0Convention z0) {
  if (!(P > 0.0) || !std::isfinite(P)) throw std::domain_error(fmt::format("build_spectral: P must be > 0, got {}", P));
  const auto n = static_cast<Eigen::Index>(k.size());
  check_square(C, n, "build_spectral: C");

  SpectralData s;
  s.P = P;
  s.C = C;
  s.k = k;
  s.ell.resize(n);
  s.Lmat = RealMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.ell[i] = ell(k[i]);
    s.Lmat(i, i) = s.ell[i] * (s.ell[i] + 1.0);
  }

  const auto diag = diagonalize_charge(C, s.Lmat);
  const auto fo = first_order(diag, s.Lmat);
  s.V = diag.V;
  s.d = diag.d;
  s.cluster = diag.cluster;
  s.d1 = fo.d1;
  s.W1 = fo.W1;
  s.A = fo.A;
  s.Lk.resize(n);
  s.eta.resize(n);
  s.Z0p.resize(n);
  s.Z0m.resize(n);
  s.z0_convention = z0;
  for (Eigen::Index i = 0; i < n; ++i) {
    s.Lk[i] = effective_L(s.d1[i]);
    s.eta[i] = s.d[i] / (2.0 * P);
    const double ph = z0 == Z0Convention::phase_matched ? (s.Lk[i] - s.ell[i]) * kPi / 2.0 : 0.0;
    s.Z0p[i] = std::polar(1.0, ph);
    s.Z0m[i] = std::polar(1.0, -ph);
  }
  s.Z1p = z1(s.A, s.d, P, Wave::outgoing, s.Z0p);
  s.Z1m = z1(s.A, s.d, P, Wave::incoming, s.Z0m);
  return s;
}

SpectralData build_spectral(const RealMatrix& C, const BasisSpec& basis, double P, Z0Convention z0) {
  std::vector<int> k;
  for (const auto& ch : basis.channels) k.push_back(ch.k);
  return build_spectral(C, k, P, z0);
}

namespace {

nlohmann::json vec_json(const RealVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const RealMatrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

nlohmann::json cmat_json(const ComplexMatrix& m) {
  return {{"real", mat_json(m.real())}, {"imag", mat_json(m.imag())}};
}

}  // namespace

nlohmann::json spectral_to_json(const SpectralData& s) {
  nlohmann::json j;
  j["P"] = s.P;
  j["n"] = s.size();
  j["k"] = s.k;
  j["ell"] = vec_json(s.ell);
  j["V"] = mat_json(s.V);
  j["d"] = vec_json(s.d);
  j["cluster"] = s.cluster;
  j["d1"] = vec_json(s.d1);
  j["W1"] = mat_json(s.W1);
  j["A"] = mat_json(s.A);
  j["L_eff"] = vec_json(s.Lk);
  j["eta"] = vec_json(s.eta);
  j["z0_convention"] = to_string(s.z0_convention);
  j["Z0_plus"] = {{"real", vec_json(s.Z0p.real())}, {"imag", vec_json(s.Z0p.imag())}};
  j["Z1_plus"] = cmat_json(s.Z1p);
  j["Z1_minus"] = cmat_json(s.Z1m);
  return j;
}

MatrixEval eval_U0(const SpectralData& s, double R, Wave sign) {
  check_R(R, "eval_U0");
  const Eigen::Index n = s.size();
  MatrixEval e{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  for (Eigen::Index K = 0; K < n; ++K) {
    const double z = s.P * R - s.ell[K] * kPi / 2.0;
    if (!(z > kRhoMin)) {
      throw std::domain_error(fmt::format(
          "eval_U0: channel {} has shifted argument PR - ell pi/2 = {:.6g} <= {} (need R >= {:.6g})", K, z, kRhoMin,
          (s.ell.maxCoeff() * kPi / 2.0 + 1.0) / s.P));
    }
    const auto w = u_pm(s.eta[K], 0.0, z, sign);
    const cplx pf = prefactor(s.k[K]);
    e.U(K, K) = pf * w.u;
    e.dU(K, K) = pf * s.P * w.du;
    e.d2U(K, K) = s.P * s.P * (2.0 * s.eta[K] / z - 1.0) * e.U(K, K);
  }
  return e;
}

MatrixEval eval_Ucheck(const SpectralData& s, double R, Wave sign) {
  check_R(R, "eval_Ucheck");
  const double rho = s.P * R;
  if (!(rho > kRhoMin)) throw std::domain_error(fmt::format("eval_U: PR = {:.6g} <= {}", rho, kRhoMin));
  const Eigen::Index n = s.size();
  MatrixEval e{ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n), ComplexMatrix::Zero(n, n)};
  for (Eigen::Index K = 0; K < n; ++K) {
    const auto w = u_pm(s.eta[K], s.Lk[K], rho, sign);
    const cplx pf = prefactor(s.k[K]);
    e.U(K, K) = pf * w.u;
    e.dU(K, K) = pf * s.P * w.du;
    e.d2U(K, K) = (s.d[K] / R + s.d1[K] / (R * R) - s.P * s.P) * e.U(K, K);
  }
  return e;
}

MatrixEval eval_U(const SpectralData& s, double R, Wave sign) {
  const MatrixEval u = eval_Ucheck(s, R, sign);
  const ComplexMatrix& Z1 = s.Z1(sign);
  const ComplexMatrix Z = ComplexMatrix(s.Z0(sign).asDiagonal()) + Z1 / R;
  const ComplexMatrix dZ = -Z1 / (R * R);
  const ComplexMatrix d2Z = 2.0 * Z1 / (R * R * R);
  return {Z * u.U, dZ * u.U + Z * u.dU, d2Z * u.U + 2.0 * dZ * u.dU + Z * u.d2U};
}

RealMatrixEval W_of_R(const SpectralData& s, double R) {
  check_R(R, "W_of_R");
  return {s.V + s.W1 / R, -s.W1 / (R * R), 2.0 * s.W1 / (R * R * R)};
}

const char* to_string(BcVariant v) { return v == BcVariant::leading ? "leading" : "full"; }

BcVariant variant_from_string(const std::string& s) {
  if (s == "leading") return BcVariant::leading;
  if (s == "full") return BcVariant::full;
  throw std::invalid_argument("unknown boundary-condition variant '" + s + "' (leading | full)");
}

MatrixEval eval_physical(const SpectralData& s, double R, Wave sign, BcVariant variant, RightFactor right) {
  const ComplexMatrix V = s.V.cast<cplx>();
  if (variant == BcVariant::leading) {
    const MatrixEval u = eval_U0(s, R, sign);
    return {V * u.U * V.transpose(), V * u.dU * V.transpose(), V * u.d2U * V.transpose()};
  }
  const MatrixEval u = eval_U(s, R, sign);
  const RealMatrixEval w = W_of_R(s, R);
  const ComplexMatrix W = w.W.cast<cplx>(), dW = w.dW.cast<cplx>(), d2W = w.d2W.cast<cplx>();
  const ComplexMatrix X = W * u.U;
  const ComplexMatrix dX = dW * u.U + W * u.dU;
  const ComplexMatrix d2X = d2W * u.U + 2.0 * dW * u.dU + W * u.d2U;
  if (right == RightFactor::limit) {
    const ComplexMatrix Vt = V.transpose();
    return {X * Vt, dX * Vt, d2X * Vt};
  }
  const ComplexMatrix Wt = W.transpose(), dWt = dW.transpose(), d2Wt = d2W.transpose();
  return {X * Wt, dX * Wt + X * dWt, d2X * Wt + 2.0 * dX * dWt + X * d2Wt};
}

AsymptoticEval eval_asymptotic(const SpectralData& s, double R, BcVariant variant) {
  return {variant, R, eval_physical(s, R, Wave::incoming, variant), eval_physical(s, R, Wave::outgoing, variant)};
}

MatrixEval eval_F_as(const SpectralData& s, double R, const ComplexMatrix& S, BcVariant variant) {
  const Eigen::Index n = s.size();
  if (S.rows() != n || S.cols() != n) {
    throw std::invalid_argument(fmt::format("eval_F_as: S must be {}x{}", n, n));
  }
  const auto a = eval_asymptotic(s, R, variant);
  return {a.minus.U - a.plus.U * S, a.minus.dU - a.plus.dU * S, a.minus.d2U - a.plus.d2U * S};
}

}  // namespace hyperscat

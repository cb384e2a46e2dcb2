#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hyperscat/hyperbasis.hpp"
#include "hyperscat/types.hpp"

namespace hyperscat {

/// Smallest argument accepted by the Coulomb-wave evaluations.
inline constexpr double kRhoMin = 1e-3;

/// Relative eigenvalue gap (in units of the spectral radius) below which
/// eigenvalues of C are treated as one degenerate cluster.
inline constexpr double kClusterGap = 1e-8;

struct Diagonalization {
  RealMatrix V;                 // columns are eigenvectors, largest component positive
  RealVector d;                 // ascending
  std::vector<int> cluster;     // cluster id per eigenvalue
};

/// Eigen-decomposition of the symmetric charge matrix. Inside degenerate
/// clusters the eigenvectors are rotated to diagonalize V^T L V.
Diagonalization diagonalize_charge(const RealMatrix& C, const RealMatrix& Lmat);

struct FirstOrder {
  RealVector d1;   // diag(V^T L V)
  RealMatrix W1;   // first-order eigenvector correction
  RealMatrix A;    // V^T W1, antisymmetric with zero diagonal
};

FirstOrder first_order(const Diagonalization& diag, const RealMatrix& Lmat);

/// Non-negative root of L (L + 1) = d1.
double effective_L(double d1);

/// How the O(1) amplitude Z0 is fixed.
///   phase_matched: Z0+- = diag(exp(+-i (L_K - ell_k) pi/2)), so that U-hat tends to U-hat_0.
///   identity:      Z0 = I.
enum class Z0Convention { phase_matched, identity };

const char* to_string(Z0Convention z);
Z0Convention z0_from_string(const std::string& s);

/// [Z1]_KN = -(1 - delta_KN) (+-2iP) A_KN Z0_N / (d_K - d_N +- 2iP).
ComplexMatrix z1(const RealMatrix& A, const RealVector& d, double P, Wave sign, const ComplexVector& z0);
ComplexMatrix z1(const RealMatrix& A, const RealVector& d, double P, Wave sign);

struct SpectralData {
  double P = 1.0;
  RealMatrix C;
  RealMatrix Lmat;
  std::vector<int> k;       // grand quantum number per channel position
  RealVector ell;           // k + 3/2

  RealMatrix V;
  RealVector d;
  std::vector<int> cluster;
  RealVector d1;
  RealMatrix W1;
  RealMatrix A;
  RealVector Lk;
  RealVector eta;

  Z0Convention z0_convention = Z0Convention::phase_matched;
  ComplexVector Z0p, Z0m;
  ComplexMatrix Z1p, Z1m;

  std::size_t size() const { return static_cast<std::size_t>(d.size()); }
  const ComplexVector& Z0(Wave s) const { return s == Wave::outgoing ? Z0p : Z0m; }
  const ComplexMatrix& Z1(Wave s) const { return s == Wave::outgoing ? Z1p : Z1m; }
};

SpectralData build_spectral(const RealMatrix& C, const std::vector<int>& k, double P,
                            Z0Convention z0 = Z0Convention::phase_matched);
SpectralData build_spectral(const RealMatrix& C, const BasisSpec& basis, double P,
                            Z0Convention z0 = Z0Convention::phase_matched);

nlohmann::json spectral_to_json(const SpectralData& s);

/// Matrix-valued function of R with its first two R-derivatives.
struct MatrixEval {
  ComplexMatrix U, dU, d2U;
};

/// Diagonal leading solutions (i^{k+1}/sqrt(2 pi)) u0+-(eta_K, PR - ell_k pi/2).
MatrixEval eval_U0(const SpectralData& s, double R, Wave sign);

/// Diagonal Coulomb solutions (i^{k+1}/sqrt(2 pi)) u+-_{L_K}(eta_K, PR).
MatrixEval eval_Ucheck(const SpectralData& s, double R, Wave sign);

/// (Z0 + Z1/R) U-check.
MatrixEval eval_U(const SpectralData& s, double R, Wave sign);

/// W(R) = V + W1/R and its derivatives.
struct RealMatrixEval {
  RealMatrix W, dW, d2W;
};
RealMatrixEval W_of_R(const SpectralData& s, double R);

enum class BcVariant { leading, full };

const char* to_string(BcVariant v);
BcVariant variant_from_string(const std::string& s);

/// Right factor of the full physical frame: its R -> infinity limit V^T, or
/// the running W^T(R).
enum class RightFactor { limit, running };

/// Channel-frame solutions: leading V U0 V^T, full W(R) U V^T (or W U W^T).
MatrixEval eval_physical(const SpectralData& s, double R, Wave sign, BcVariant variant,
                         RightFactor right = RightFactor::limit);

/// Incoming and outgoing channel-frame matrices at one radius.
struct AsymptoticEval {
  BcVariant variant = BcVariant::full;
  double R = 0.0;
  MatrixEval minus, plus;
};

AsymptoticEval eval_asymptotic(const SpectralData& s, double R, BcVariant variant);

/// F = U- - U+ S with its derivatives.
MatrixEval eval_F_as(const SpectralData& s, double R, const ComplexMatrix& S, BcVariant variant);

}  // namespace hyperscat

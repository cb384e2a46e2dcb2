#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "hyperscat/asymptotics.hpp"
#include "hyperscat/verify.hpp"

namespace hyperscat {

/// psi'' = (-P^2 + C/R + L/R^2) psi on [Rmin, Rmax], L = diag(ell (ell + 1)).
struct RadialProblem {
  RealMatrix C;
  RealVector ell;
  double P = 1.0;
  double Rmin = 0.0;
  double Rmax = 0.0;
  double step = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(ell.size()); }
  RealMatrix Lmat() const;
};

double default_Rmin(const RealVector& ell, double P);
double default_step(double P);

/// Problem with defaulted Rmin and step where not given.
RadialProblem make_problem(const RealMatrix& C, const RealVector& ell, double P, double Rmax,
                           std::optional<double> Rmin = std::nullopt, std::optional<double> step = std::nullopt);

void validate(const RadialProblem& p);

struct LogDerivative {
  double R = 0.0;
  RealMatrix Y;  // F' F^-1
};

/// Y(Rmin) = diag((ell + 1) / Rmin), the log-derivative of R^{ell + 1}.
LogDerivative regular_start(const RadialProblem& p);

/// Johnson's log-derivative propagator from start.R to R_end (fourth order).
/// The step is shrunk so the interval holds an even number of steps.
LogDerivative propagate(const RadialProblem& p, const LogDerivative& start, double R_end);

/// From the regular start to p.Rmax.
LogDerivative propagate(const RadialProblem& p);

struct SMatrixResult {
  ComplexMatrix S;
  double R = 0.0;
  double condition = 0.0;
  double unitarity_defect = 0.0;  // max |S^dagger S - I|
  double symmetry_defect = 0.0;   // max |S - S^T|
};

inline constexpr double kMaxMatchingCondition = 1e12;

/// S = (Y U+ - U+')^-1 (Y U- - U-').
SMatrixResult extract_S(const LogDerivative& Y, const AsymptoticEval& basis);

struct ConvergenceStudy {
  BcVariant variant = BcVariant::full;
  std::vector<double> Rmax;
  std::vector<SMatrixResult> results;
  std::vector<double> drift;  // max |S(R_{i+1}) - S(R_i)|, stored at R_i
  SlopeFit fit;
  bool fit_valid = false;
};

/// S at each Rmax (ascending) with one chained propagation.
ConvergenceStudy convergence_study(const RadialProblem& p, const SpectralData& s, const std::vector<double>& Rmax_list,
                                   BcVariant variant);

/// Both variants from one propagation.
std::pair<ConvergenceStudy, ConvergenceStudy> convergence_study_both(const RadialProblem& p, const SpectralData& s,
                                                                     const std::vector<double>& Rmax_list);

nlohmann::json smatrix_to_json(const SMatrixResult& r);

}  // namespace hyperscat

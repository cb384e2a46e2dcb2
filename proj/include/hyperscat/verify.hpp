#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperscat/asymptotics.hpp"

namespace hyperscat {

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;  // standard error of the slope
  double intercept = 0.0;
  int points = 0;
};

inline constexpr int kMinFitPoints = 8;

/// Least-squares slope of log y against log x over x in [lo, hi]. Points with
/// y <= 0 are rejected.
SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi);

/// Geometric grid of n points from lo to hi inclusive.
std::vector<double> geometric_grid(double lo, double hi, int n);

enum class DerivativeMode { analytic, finite_difference };

const char* to_string(DerivativeMode m);

struct ResidualReport {
  std::vector<double> R;
  std::vector<double> norms;        // max-norm of the operator residual
  std::vector<double> floor;        // estimated rounding floor at each radius
  std::vector<bool> at_floor;       // excluded from the fit
  double window_lo = 0.0, window_hi = 0.0;
  DerivativeMode mode = DerivativeMode::analytic;
  SlopeFit fit;
  bool fit_valid = false;
};

using MatrixBuilder = std::function<MatrixEval(double R)>;

/// Residual of (-d^2/dR^2 - P^2 + C/R + L/R^2) applied to the candidate.
/// Finite differences use h = max(1e-4, 1e-6 R) and a 5-point stencil.
ResidualReport operator_residual(const MatrixBuilder& builder, const RealMatrix& C, const RealMatrix& Lmat, double P,
                                 const std::vector<double>& R_grid, DerivativeMode mode, double window_lo,
                                 double window_hi);

/// Same, with the window spanning the whole grid.
ResidualReport operator_residual(const MatrixBuilder& builder, const RealMatrix& C, const RealMatrix& Lmat, double P,
                                 const std::vector<double>& R_grid, DerivativeMode mode = DerivativeMode::analytic);

/// Builder for the channel-frame solution of the given variant.
MatrixBuilder physical_builder(const SpectralData& s, Wave sign, BcVariant variant,
                               RightFactor right = RightFactor::limit);

nlohmann::json residual_to_json(const ResidualReport& r);

// Algebraic residuals.
double cw0_residual(const SpectralData& s);  // max |C V - V diag(d)|
double cw1_residual(const SpectralData& s);  // max |C W1 - W1 D0 - (V D1 - L V)|
double t1_residual(const SpectralData& s, Wave sign);  // relative residual of the Z1 equation

struct CheckEntry {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool is_slope = false;
  bool passed = false;
  std::string note;
};

struct ConsistencyReport {
  std::vector<CheckEntry> entries;
  bool all_passed() const;
  const CheckEntry& find(const std::string& name) const;
};

inline constexpr double kDefaultSlopeTolerance = 0.15;

/// Slope checks of |U - U0|, |W^T W - I|, |F_full - F_leading| plus the
/// algebraic identities of the spectral construction.
ConsistencyReport consistency_suite(const SpectralData& s, const std::vector<double>& R_grid,
                                    double slope_tolerance = kDefaultSlopeTolerance);

nlohmann::json consistency_to_json(const ConsistencyReport& r);

}  // namespace hyperscat

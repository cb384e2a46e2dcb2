#pragma once

#include <complex>

#include <Eigen/Dense>

namespace hyperscat {

using cplx = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Incoming (-) or outgoing (+) wave.
enum class Wave { incoming = -1, outgoing = +1 };

inline double sign_of(Wave w) { return w == Wave::outgoing ? 1.0 : -1.0; }

inline const char* to_string(Wave w) { return w == Wave::outgoing ? "+" : "-"; }

}  // namespace hyperscat

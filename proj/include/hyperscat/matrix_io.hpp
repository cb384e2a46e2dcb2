#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "hyperscat/types.hpp"

namespace hyperscat {

// Matrix documents:
//   {"n": N, "layout": "row-major", "symmetric": bool, "data": [N*N reals], "imag": [N*N reals]?}
// "data" may also be a nested array of N rows. "imag" is present for complex matrices.

struct MatrixDocument {
  RealMatrix re;
  std::optional<RealMatrix> im;
  bool symmetric = false;

  bool is_complex() const { return im.has_value(); }
  ComplexMatrix complex() const;
};

/// Relative tolerance for the "symmetric" flag: max |A - A^T| <= tol * max(1, max |A|).
inline constexpr double kSymmetryTolerance = 1e-12;

MatrixDocument parse_matrix(const nlohmann::json& j, const std::string& origin = "<json>");
MatrixDocument load_matrix(const std::filesystem::path& path);

/// Real symmetric matrix, as required for a charge matrix.
RealMatrix load_charge_matrix(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const RealMatrix& m, bool symmetric);
nlohmann::json matrix_to_json(const ComplexMatrix& m, bool symmetric);

}  // namespace hyperscat

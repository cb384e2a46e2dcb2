#include "hyperscat/matrix_io.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "hyperscat/errors.hpp"

namespace hyperscat {

namespace {

std::vector<double> flatten(const nlohmann::json& v, const std::string& origin, const char* key, std::size_t& rows,
                            std::size_t& cols) {
  if (!v.is_array()) throw IoError(origin, fmt::format("\"{}\" must be an array", key));
  std::vector<double> out;
  if (!v.empty() && v.front().is_array()) {
    rows = v.size();
    cols = v.front().size();
    for (const auto& row : v) {
      if (!row.is_array() || row.size() != cols) {
        throw IoError(origin, fmt::format("shape error: \"{}\" rows have unequal lengths", key));
      }
      for (const auto& x : row) {
        if (!x.is_number()) throw IoError(origin, fmt::format("\"{}\" holds a non-number", key));
        out.push_back(x.get<double>());
      }
    }
  } else {
    rows = 0;
    cols = 0;
    for (const auto& x : v) {
      if (!x.is_number()) throw IoError(origin, fmt::format("\"{}\" holds a non-number", key));
      out.push_back(x.get<double>());
    }
  }
  return out;
}

RealMatrix to_matrix(const nlohmann::json& v, std::size_t n, const std::string& origin, const char* key) {
  std::size_t rows = 0, cols = 0;
  const auto flat = flatten(v, origin, key, rows, cols);
  if (rows != 0 && (rows != n || cols != n)) {
    throw IoError(origin, fmt::format("shape error: \"{}\" is {}x{}, expected {}x{}", key, rows, cols, n, n));
  }
  if (flat.size() != n * n) {
    throw IoError(origin, fmt::format("shape error: \"{}\" has {} entries, expected {} for n={}", key, flat.size(),
                                      n * n, n));
  }
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = flat[i * n + j];
  return m;
}

nlohmann::json row_major(const RealMatrix& m) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

}  // namespace

ComplexMatrix MatrixDocument::complex() const {
  ComplexMatrix c = re.cast<cplx>();
  if (im) c += cplx(0.0, 1.0) * im->cast<cplx>();
  return c;
}

MatrixDocument parse_matrix(const nlohmann::json& j, const std::string& origin) {
  if (!j.is_object()) throw IoError(origin, "matrix document must be a JSON object");
  if (!j.contains("data")) throw IoError(origin, "matrix document lacks \"data\"");
  if (j.contains("layout") && j["layout"] != "row-major") {
    throw IoError(origin, "unsupported layout (only \"row-major\")");
  }

  std::size_t n = 0;
  if (j.contains("n")) {
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
      throw IoError(origin, "\"n\" must be a positive integer");
    }
    n = j["n"].get<std::size_t>();
  } else if (j["data"].is_array() && !j["data"].empty() && j["data"].front().is_array()) {
    n = j["data"].size();
  } else {
    throw IoError(origin, "matrix document lacks \"n\"");
  }

  MatrixDocument doc;
  doc.re = to_matrix(j["data"], n, origin, "data");
  if (j.contains("imag")) doc.im = to_matrix(j["imag"], n, origin, "imag");
  doc.symmetric = j.value("symmetric", false);

  if (doc.symmetric) {
    double asym = (doc.re - doc.re.transpose()).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, doc.re.cwiseAbs().maxCoeff());
    if (doc.im) {
      asym = std::max(asym, (*doc.im - doc.im->transpose()).cwiseAbs().maxCoeff());
      scale = std::max(scale, doc.im->cwiseAbs().maxCoeff());
    }
    if (asym > kSymmetryTolerance * scale) {
      throw IoError(origin, fmt::format("matrix flagged symmetric but max asymmetry is {:.6e}", asym));
    }
  }
  return doc;
}

MatrixDocument load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string(), std::string("JSON parse error: ") + e.what());
  }
  return parse_matrix(j, path.string());
}

RealMatrix load_charge_matrix(const std::filesystem::path& path) {
  auto doc = load_matrix(path);
  if (doc.is_complex() && doc.im->cwiseAbs().maxCoeff() != 0.0) {
    throw IoError(path.string(), "charge matrix must be real");
  }
  const double asym = (doc.re - doc.re.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * std::max(1.0, doc.re.cwiseAbs().maxCoeff())) {
    throw IoError(path.string(), fmt::format("charge matrix must be symmetric; max asymmetry is {:.6e}", asym));
  }
  return 0.5 * (doc.re + doc.re.transpose());
}

nlohmann::json matrix_to_json(const RealMatrix& m, bool symmetric) {
  return {{"n", m.rows()}, {"layout", "row-major"}, {"symmetric", symmetric}, {"data", row_major(m)}};
}

nlohmann::json matrix_to_json(const ComplexMatrix& m, bool symmetric) {
  auto j = matrix_to_json(RealMatrix(m.real()), symmetric);
  j["imag"] = row_major(m.imag());
  return j;
}

}  // namespace hyperscat

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperscat/asymptotics.hpp"
#include "hyperscat/charge_matrix.hpp"
#include "hyperscat/verify.hpp"

namespace hyperscat::cli {

inline constexpr const char* kToolName = "hyperscat";

const char* tool_version();

/// Ascending radius list, given in JSON either as an explicit array or as
/// {"lo", "hi", "points"} for a geometric grid.
struct Grid {
  std::vector<double> values;
};

struct RunConfig {
  SystemSpec system;
  int k_max = 0;
  std::optional<int> l_max;
  double P = 0.0;

  int charge_quad_order = kDefaultChargeOrder;
  std::optional<std::filesystem::path> charge_matrix_path;  // load C instead of computing it
  Z0Convention z0 = Z0Convention::phase_matched;

  std::optional<double> Rmin, step;
  double Rmax = 200.0;
  BcVariant bc_variant = BcVariant::full;

  Grid verify_grid;
  double window_lo = 0.0, window_hi = 0.0;
  DerivativeMode verify_mode = DerivativeMode::analytic;
  double slope_tolerance = kDefaultSlopeTolerance;

  Grid converge_grid;
  Grid asym_grid;

  nlohmann::json document;  // effective configuration after overrides
  std::string sha256;       // of the canonical dump of `document`
};

/// Applies KEY=VALUE with a dotted key. VALUE is parsed as JSON when it can
/// be, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Validates everything before any computation. All violations are collected
/// into one ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

std::string sha256_hex(const std::string& bytes);

/// 17 significant digits.
std::string fmt_double(double x);

/// Entry point; returns the process exit status.
int run(int argc, char** argv);

}  // namespace hyperscat::cli

#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "hyperscat/asymptotics.hpp"
#include "hyperscat/charge_matrix.hpp"
#include "hyperscat/verify.hpp"

using namespace hyperscat;
using Catch::Approx;

namespace {

// three-channel fixture: equal masses, charges (+1, -1, 0), k_max = 2
const SpectralData& fixture3() {
  static const SpectralData s = [] {
    const auto basis = enumerate_basis(2);
    const SystemSpec sys{{1.0, 1.0, 1.0}, {1.0, -1.0, 0.0}};
    return build_spectral(compute_charge_matrix(basis, sys).C, basis, 1.0);
  }();
  return s;
}

std::vector<double> power_law(const std::vector<double>& x, const std::function<double(double)>& f) {
  std::vector<double> y;
  for (double v : x) y.push_back(f(v));
  return y;
}

}  // namespace

TEST_CASE("fit_slope on synthetic data") {
  const auto x = geometric_grid(1e2, 1e4, 25);
  auto f = fit_slope(x, power_law(x, [](double r) { return 7.0 * std::pow(r, -3.0); }), 1e2, 1e4);
  CHECK(std::abs(f.slope + 3.0) <= 1e-12);
  CHECK(f.points == 25);

  auto g = fit_slope(x, power_law(x, [](double r) { return std::pow(r, -2.0) + std::pow(r, -3.0); }), 1e2, 1e4);
  CHECK(g.slope > -2.1);
  CHECK(g.slope < -1.9);

  auto c = fit_slope(x, power_law(x, [](double) { return 0.25; }), 1e2, 1e4);
  CHECK(std::abs(c.slope) <= 1e-14);

  // the window cuts the grid down below the minimum point count
  CHECK_THROWS_AS(fit_slope(x, power_law(x, [](double r) { return 1 / r; }), 1e2, 3e2), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(x, power_law(x, [](double r) { return 1 / r; }), 1e3, 1e2), std::invalid_argument);
}

TEST_CASE("geometric grid") {
  const auto g = geometric_grid(10.0, 1000.0, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 10.0);
  CHECK(g[1] == Approx(100.0).epsilon(1e-14));
  CHECK(g[2] == 1000.0);
}

TEST_CASE("exact Coulomb solution sits at the floor") {
  RealMatrix C(1, 1);
  C << -0.8;
  auto s = build_spectral(C, std::vector<int>{0}, 1.0);
  MatrixBuilder b = [&](double R) { return eval_Ucheck(s, R, Wave::incoming); };
  const auto grid = geometric_grid(5.0, 500.0, 12);
  auto fd = operator_residual(b, C, s.Lmat, s.P, grid, DerivativeMode::finite_difference);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    INFO("R=" << grid[i]);
    CHECK(fd.at_floor[i]);
    CHECK(fd.norms[i] <= fd.floor[i]);
  }
  CHECK_FALSE(fd.fit_valid);
  auto an = operator_residual(b, C, s.Lmat, s.P, grid, DerivativeMode::analytic);
  for (double v : an.norms) CHECK(v <= 1e-12);
}

TEST_CASE("diagonal system residual of U-check is at the special-function floor") {
  const auto& s = fixture3();
  RealMatrix D0 = s.d.asDiagonal();
  RealMatrix D1 = s.d1.asDiagonal();
  const auto grid = geometric_grid(20.0, 2000.0, 10);
  for (Wave w : {Wave::incoming, Wave::outgoing}) {
    MatrixBuilder b = [&](double R) { return eval_Ucheck(s, R, w); };
    auto fd = operator_residual(b, D0, D1, s.P, grid, DerivativeMode::finite_difference);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(fd.at_floor[i]);
  }
}

TEST_CASE("residual orders on the three-channel fixture") {
  const auto& s = fixture3();
  const auto grid = geometric_grid(1e2, 1e4, 25);
  for (Wave w : {Wave::incoming, Wave::outgoing}) {
    auto lead = operator_residual(physical_builder(s, w, BcVariant::leading), s.C, s.Lmat, s.P, grid);
    auto full = operator_residual(physical_builder(s, w, BcVariant::full), s.C, s.Lmat, s.P, grid);
    REQUIRE(lead.fit_valid);
    REQUIRE(full.fit_valid);
    CHECK(lead.fit.slope <= -1.85);
    CHECK(full.fit.slope <= -2.8);

    // 2x denser grid reproduces the slopes
    const auto dense = geometric_grid(1e2, 1e4, 49);
    auto lead2 = operator_residual(physical_builder(s, w, BcVariant::leading), s.C, s.Lmat, s.P, dense);
    auto full2 = operator_residual(physical_builder(s, w, BcVariant::full), s.C, s.Lmat, s.P, dense);
    CHECK(std::abs(lead2.fit.slope - lead.fit.slope) <= 0.05);
    CHECK(std::abs(full2.fit.slope - full.fit.slope) <= 0.05);
  }
}

TEST_CASE("finite differences agree with analytic derivatives where above the floor") {
  const auto& s = fixture3();
  const auto grid = geometric_grid(1e2, 1e3, 8);
  auto b = physical_builder(s, Wave::outgoing, BcVariant::leading);
  auto an = operator_residual(b, s.C, s.Lmat, s.P, grid, DerivativeMode::analytic);
  auto fd = operator_residual(b, s.C, s.Lmat, s.P, grid, DerivativeMode::finite_difference);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    INFO("R=" << grid[i]);
    CHECK(std::abs(fd.norms[i] - an.norms[i]) <= fd.floor[i] + 1e-3 * an.norms[i]);
  }
}

TEST_CASE("consistency suite on C = 0") {
  auto s = build_spectral(RealMatrix::Zero(3, 3), std::vector<int>{0, 2, 4}, 1.0);
  auto rep = consistency_suite(s, geometric_grid(1e2, 1e4, 16));
  CHECK(rep.all_passed());
  CHECK(rep.find("CW1_residual").value == 0.0);
  CHECK(rep.find("WtW_minus_I_slope").note.find("machine floor") != std::string::npos);
}

TEST_CASE("consistency suite on the three-channel fixture") {
  const auto& s = fixture3();
  const auto grid = geometric_grid(1e2, 1e4, 25);
  auto rep = consistency_suite(s, grid);
  for (const auto& e : rep.entries) {
    INFO(e.name << " = " << e.value << " (" << e.note << ")");
    CHECK(e.passed);
  }
  auto dense = consistency_suite(s, geometric_grid(1e2, 1e4, 49));
  for (const auto& e : rep.entries)
    if (e.is_slope) CHECK(std::abs(dense.find(e.name).value - e.value) <= 0.05);
  auto j = consistency_to_json(rep);
  CHECK(j["all_passed"] == true);
}

TEST_CASE("negative controls trip the consistency suite") {
  const auto& base = fixture3();
  const auto grid = geometric_grid(1e2, 1e4, 16);
  const double eps = 1e-3;
  std::vector<std::pair<std::string, std::function<void(SpectralData&)>>> tamper = {
      {"C", [&](SpectralData& s) { s.C(0, 2) *= 1 + eps; s.C(2, 0) = s.C(0, 2); }},
      {"V", [&](SpectralData& s) { s.V(1, 1) *= 1 + eps; }},
      {"d", [&](SpectralData& s) { s.d(2) *= 1 + eps; }},
      {"d1", [&](SpectralData& s) { s.d1(0) *= 1 + eps; }},
      {"W1", [&](SpectralData& s) { s.W1(0, 2) *= 1 + eps; }},
      {"A", [&](SpectralData& s) { s.A(1, 0) *= 1 + eps; }},
      {"Lk", [&](SpectralData& s) { s.Lk(1) *= 1 + eps; }},
      {"eta", [&](SpectralData& s) { s.eta(0) *= 1 + eps; }},
      {"Z0p", [&](SpectralData& s) { s.Z0p(1) *= 1 + eps; }},
      {"Z1p", [&](SpectralData& s) { s.Z1p(0, 1) *= 1 + eps; }},
      {"Z1m", [&](SpectralData& s) { s.Z1m(2, 0) *= 1 + eps; }},
  };
  for (const auto& [name, f] : tamper) {
    SpectralData s = base;
    f(s);
    INFO("tampered " << name);
    CHECK_FALSE(consistency_suite(s, grid).all_passed());
  }
}

TEST_CASE("residual JSON") {
  const auto& s = fixture3();
  auto r = operator_residual(physical_builder(s, Wave::outgoing, BcVariant::full), s.C, s.Lmat, s.P,
                             geometric_grid(1e2, 1e4, 10));
  auto j = residual_to_json(r);
  CHECK(j["R"].size() == 10);
  CHECK(j.contains("slope"));
  CHECK(j["mode"] == "analytic");
}

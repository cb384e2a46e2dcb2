#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "hyperscat/asymptotics.hpp"
#include "hyperscat/coulombfn.hpp"
#include "hyperscat/errors.hpp"
#include "hyperscat/verify.hpp"

using namespace hyperscat;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
const cplx I1(0.0, 1.0);

RealMatrix lmat_of(const std::vector<int>& k) {
  RealVector l(static_cast<Eigen::Index>(k.size()));
  for (std::size_t i = 0; i < k.size(); ++i) l(static_cast<Eigen::Index>(i)) = ell(k[i]);
  return (l.array() * (l.array() + 1.0)).matrix().asDiagonal();
}

RealMatrix random_symmetric(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  RealMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = g(rng);
  return m;
}

cplx ipow(int p) {
  static const cplx t[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return t[((p % 4) + 4) % 4];
}
}  // namespace

TEST_CASE("diagonal C keeps the identity frame") {
  RealMatrix C = Eigen::Vector3d(-2.0, 0.5, 3.0).asDiagonal();
  auto dg = diagonalize_charge(C, lmat_of({0, 2, 4}));
  CHECK((dg.V - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(dg.d(0) == -2.0);
  CHECK(dg.d(1) == 0.5);
  CHECK(dg.d(2) == 3.0);
}

TEST_CASE("2x2 off-diagonal closed form") {
  const double c = 0.7;
  RealMatrix C(2, 2);
  C << 0, c, c, 0;
  auto dg = diagonalize_charge(C, lmat_of({0, 2}));
  CHECK(dg.d(0) == Approx(-c).margin(1e-14));
  CHECK(dg.d(1) == Approx(c).margin(1e-14));
  const double r = 1 / std::sqrt(2.0);
  // largest component positive; for ties the first one
  CHECK(std::abs(std::abs(dg.V(0, 0)) - r) <= 1e-14);
  CHECK(dg.V(0, 0) * dg.V(1, 0) == Approx(-0.5).margin(1e-14));
  CHECK(dg.V(0, 1) * dg.V(1, 1) == Approx(0.5).margin(1e-14));
}

TEST_CASE("zero C is one cluster resolved by L") {
  RealMatrix C = RealMatrix::Zero(3, 3);
  auto dg = diagonalize_charge(C, lmat_of({4, 0, 2}));
  CHECK((dg.V.cwiseAbs() - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((dg.V - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(dg.cluster[0] == dg.cluster[2]);
}

TEST_CASE("degenerate cluster is rotated to diagonalize V^T L V") {
  // C has a doubly degenerate eigenvalue; L couples the degenerate pair
  std::mt19937_64 rng(11);
  RealMatrix Q = Eigen::HouseholderQR<RealMatrix>(random_symmetric(rng, 3, 1.0)).householderQ();
  RealMatrix C = Q * Eigen::Vector3d(1.0, 1.0, -2.0).asDiagonal() * Q.transpose();
  C = 0.5 * (C + C.transpose());
  auto L = lmat_of({0, 2, 4});
  auto dg = diagonalize_charge(C, L);
  RealMatrix B = dg.V.transpose() * L * dg.V;
  CHECK(dg.cluster[1] == dg.cluster[2]);
  CHECK(std::abs(B(1, 2)) <= 1e-10);
  CHECK((dg.V.transpose() * dg.V - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  auto fo = first_order(dg, L);
  CHECK(fo.A(1, 2) == 0.0);
  CHECK(fo.A(2, 1) == 0.0);
}

TEST_CASE("spectral invariants on random charge matrices") {
  std::mt19937_64 rng(2024);
  const std::vector<int> k{0, 2, 2, 4, 6};
  auto L = lmat_of(k);
  for (int t = 0; t < 100; ++t) {
    RealMatrix C = random_symmetric(rng, 5, 3.0);
    auto s = build_spectral(C, k, 1.3);
    INFO("trial " << t);
    CHECK((s.V.transpose() * s.V - RealMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);
    RealMatrix D = s.V.transpose() * C * s.V;
    D.diagonal().setZero();
    CHECK(D.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(cw0_residual(s) <= 1e-10);
    CHECK(cw1_residual(s) <= 1e-10);
    CHECK(s.d1.minCoeff() >= 0.0);
    CHECK(s.A.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.A + s.A.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((s.A - s.V.transpose() * s.W1).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(s.Z1p.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.Z1m.diagonal().cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 5; ++i) CHECK(s.d1(i) == Approx((s.V.transpose() * L * s.V)(i, i)).epsilon(1e-13));
  }
}

TEST_CASE("first order vanishes for C = 0") {
  auto s = build_spectral(RealMatrix::Zero(3, 3), std::vector<int>{0, 2, 4}, 1.0);
  for (int i = 0; i < 3; ++i) CHECK(s.d1(i) == Approx(s.ell(i) * (s.ell(i) + 1)).epsilon(1e-15));
  CHECK(s.W1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.A.cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 3; ++i) CHECK(s.Lk(i) == Approx(s.ell(i)).epsilon(1e-14));
}

TEST_CASE("effective_L") {
  CHECK(effective_L(0.0) == 0.0);
  CHECK(effective_L(3.75) == Approx(1.5).epsilon(1e-15));
  for (double d : {1e-6, 0.3, 2.0, 17.5, 1e4}) {
    const double L = effective_L(d);
    CHECK(std::abs(L * (L + 1) - d) <= 1e-14 * std::max(1.0, d));
  }
  CHECK_THROWS_AS(effective_L(-0.1), std::domain_error);
}

TEST_CASE("z1 closed forms") {
  RealMatrix A = RealMatrix::Zero(2, 2);
  RealVector d = Eigen::Vector2d(-0.3, 0.8);
  CHECK(z1(A, d, 1.0, Wave::outgoing).cwiseAbs().maxCoeff() == 0.0);

  const double a = 0.37, P = 1.4;
  A << 0, a, -a, 0;
  auto zp = z1(A, d, P, Wave::outgoing);
  auto zm = z1(A, d, P, Wave::incoming);
  const cplx want = -2.0 * I1 * P * a / (d(0) - d(1) + 2.0 * I1 * P);
  CHECK(std::abs(zp(0, 1) - want) <= 1e-15);
  CHECK(std::abs(zm(0, 1) - std::conj(want)) <= 1e-15);
  CHECK(zp(0, 0) == cplx(0, 0));
  CHECK(zp(1, 1) == cplx(0, 0));
  CHECK_THROWS(z1(A, d, 0.0, Wave::outgoing));
}

TEST_CASE("T-1 residual with Z0 = I") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto s = build_spectral(random_symmetric(rng, 4, 2.0), std::vector<int>{0, 2, 4, 6}, 0.9, Z0Convention::identity);
    CHECK(t1_residual(s, Wave::outgoing) <= 1e-12);
    CHECK(t1_residual(s, Wave::incoming) <= 1e-12);
  }
}

TEST_CASE("U0 single channel neutral") {
  auto s = build_spectral(RealMatrix::Zero(1, 1), std::vector<int>{0}, 1.0);
  const double norm = 1 / std::sqrt(2 * kPi);
  for (double R : {5.0, 12.3, 400.0}) {
    for (Wave w : {Wave::incoming, Wave::outgoing}) {
      const double sg = sign_of(w);
      const auto e = eval_U0(s, R, w);
      const cplx want = I1 * norm * std::exp(sg * I1 * (R - 0.75 * kPi));
      CHECK(std::abs(e.U(0, 0) - want) <= 1e-13);
      CHECK(std::abs(e.dU(0, 0) - sg * I1 * want) <= 1e-13);
      CHECK(std::abs(e.d2U(0, 0) + want) <= 1e-13);
    }
  }
}

TEST_CASE("U0 domain is enforced") {
  auto s = build_spectral(RealMatrix::Zero(2, 2), std::vector<int>{0, 4}, 1.0);
  CHECK_THROWS_AS(eval_U0(s, 2.0, Wave::outgoing), std::domain_error);
  CHECK_NOTHROW(eval_U0(s, 10.0, Wave::outgoing));
}

TEST_CASE("U0 is diagonal and conjugation symmetric") {
  RealMatrix C(3, 3);
  C << 1.2, -0.4, 0.3, -0.4, -0.7, 0.5, 0.3, 0.5, 0.1;
  auto s = build_spectral(C, std::vector<int>{0, 2, 4}, 1.1);
  for (double R : {15.0, 90.0}) {
    auto p = eval_U0(s, R, Wave::outgoing);
    auto m = eval_U0(s, R, Wave::incoming);
    for (int i = 0; i < 3; ++i) {
      const cplx ph = ipow(s.k[static_cast<std::size_t>(i)] + 1);
      CHECK(std::abs(p.U(i, i) / ph - std::conj(m.U(i, i) / ph)) <= 1e-14);
      for (int j = 0; j < 3; ++j)
        if (i != j) {
          CHECK(p.U(i, j) == cplx(0, 0));
          CHECK(m.dU(i, j) == cplx(0, 0));
        }
    }
  }
}

TEST_CASE("U for C = 0 is the Riccati-Hankel superposition") {
  const std::vector<int> k{0, 2, 4};
  auto s = build_spectral(RealMatrix::Zero(3, 3), k, 1.0);
  const double norm = 1 / std::sqrt(2 * kPi);
  for (double R : {3.0, 11.0, 75.0, 2000.0}) {
    for (Wave w : {Wave::incoming, Wave::outgoing}) {
      const auto e = eval_U(s, R, w);
      const auto f = eval_physical(s, R, w, BcVariant::full);
      for (int i = 0; i < 3; ++i) {
        const auto h = riccati_hankel(s.ell(i), R, w);
        const cplx pre = ipow(k[static_cast<std::size_t>(i)] + 1) * norm;
        CHECK(std::abs(e.U(i, i) - pre * h.u) <= 1e-12);
        CHECK(std::abs(e.dU(i, i) - pre * h.du) <= 1e-12);
        CHECK(std::abs(f.U(i, i) - pre * h.u) <= 1e-12);
        for (int j = 0; j < 3; ++j)
          if (i != j) CHECK(std::abs(f.U(i, j)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("U and U0 conjugation symmetry for real data") {
  RealMatrix C(2, 2);
  C << 0.9, 0.6, 0.6, -1.3;
  auto s = build_spectral(C, std::vector<int>{0, 2}, 0.8, Z0Convention::identity);
  for (double R : {20.0, 300.0}) {
    auto p = eval_U(s, R, Wave::outgoing);
    auto m = eval_U(s, R, Wave::incoming);
    // i^{k+1} prefactor stripped column by column
    for (int j = 0; j < 2; ++j) {
      const cplx ph = ipow(s.k[static_cast<std::size_t>(j)] + 1);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(p.U(i, j) / ph - std::conj(m.U(i, j) / ph)) <= 1e-13);
    }
  }
}

TEST_CASE("Z(R) tends to Z0 as Z1/R") {
  RealMatrix C(2, 2);
  C << 0.9, 0.6, 0.6, -1.3;
  auto s = build_spectral(C, std::vector<int>{0, 2}, 1.0, Z0Convention::identity);
  for (double R : {10.0, 1000.0}) {
    auto u = eval_U(s, R, Wave::outgoing);
    auto c = eval_Ucheck(s, R, Wave::outgoing);
    ComplexMatrix Z = u.U * c.U.inverse();
    const double dev = (Z - ComplexMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
    CHECK(dev == Approx(s.Z1p.cwiseAbs().maxCoeff() / R).epsilon(1e-10));
  }
}

TEST_CASE("W(R)") {
  RealMatrix C(3, 3);
  C << 1.2, -0.4, 0.3, -0.4, -0.7, 0.5, 0.3, 0.5, 0.1;
  auto s = build_spectral(C, std::vector<int>{0, 2, 4}, 1.0);
  auto w = W_of_R(s, 1e12);
  CHECK((w.W - s.V).cwiseAbs().maxCoeff() <= 1e-11);
  const double R = 7.0;
  auto e = W_of_R(s, R);
  CHECK((e.dW + s.W1 / (R * R)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((e.d2W - 2.0 * s.W1 / (R * R * R)).cwiseAbs().maxCoeff() <= 1e-15);

  std::vector<double> grid = geometric_grid(1e2, 1e4, 20), dev;
  for (double r : grid) {
    auto m = W_of_R(s, r).W;
    dev.push_back((m.transpose() * m - RealMatrix::Identity(3, 3)).cwiseAbs().maxCoeff());
  }
  CHECK(fit_slope(grid, dev, 1e2, 1e4).slope <= -1.9);

  auto z = build_spectral(RealMatrix::Zero(2, 2), std::vector<int>{0, 2}, 1.0);
  CHECK((W_of_R(z, 3.0).W - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("F_as examples") {
  auto s = build_spectral(RealMatrix::Zero(1, 1), std::vector<int>{0}, 1.0);
  ComplexMatrix S = ComplexMatrix::Identity(1, 1);
  for (double R : {4.0, 33.0}) {
    auto F = eval_F_as(s, R, S, BcVariant::full);
    // proportional to the regular Riccati-Bessel function: F / i is real up to sign
    const cplx r = F.U(0, 0) / F.dU(0, 0);
    CHECK(std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r)));
    const double phase = std::arg(F.U(0, 0));
    CHECK(std::abs(std::sin(phase)) <= 1e-12);  // i * (h- - h+) / sqrt(2pi) = 2 sin(...) / sqrt(2pi)
  }

  RealMatrix C(2, 2);
  C << 0.9, 0.6, 0.6, -1.3;
  auto t = build_spectral(C, std::vector<int>{0, 2}, 1.0);
  const double R = 40.0;
  auto F0 = eval_F_as(t, R, ComplexMatrix::Zero(2, 2), BcVariant::full);
  auto Um = eval_physical(t, R, Wave::incoming, BcVariant::full);
  CHECK((F0.U - Um.U).cwiseAbs().maxCoeff() == 0.0);

  std::vector<double> grid = geometric_grid(1e2, 1e4, 20), dev;
  ComplexMatrix S2 = ComplexMatrix::Identity(2, 2);
  for (double r : grid)
    dev.push_back((eval_F_as(t, r, S2, BcVariant::full).U - eval_F_as(t, r, S2, BcVariant::leading).U)
                      .cwiseAbs()
                      .maxCoeff());
  CHECK(fit_slope(grid, dev, 1e2, 1e4).slope <= -0.9);
}

TEST_CASE("spectral JSON") {
  RealMatrix C(2, 2);
  C << 0.9, 0.6, 0.6, -1.3;
  auto j = spectral_to_json(build_spectral(C, std::vector<int>{0, 2}, 1.0));
  for (const char* key : {"V", "d", "d1", "W1", "L_eff", "eta"}) CHECK(j.contains(key));
  CHECK(z0_from_string(to_string(Z0Convention::identity)) == Z0Convention::identity);
  CHECK(variant_from_string("leading") == BcVariant::leading);
  CHECK_THROWS_AS(variant_from_string("physical"), std::invalid_argument);
}

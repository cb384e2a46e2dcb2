#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperscat/types.hpp"

namespace hyperscat {

/// Grand angular label in the L = 0 sector with l_x = l_y = l.
struct ChannelIndex {
  int n = 0;
  int l = 0;
  int k = 0;          // 2n + 2l
  double norm = 1.0;  // fixed by orthonormality under the reduced measure

  double ell() const { return k + 1.5; }
  bool operator==(const ChannelIndex& o) const { return n == o.n && l == o.l && k == o.k; }
};

struct BasisSpec {
  int k_max = 0;
  std::optional<int> l_max;
  std::vector<ChannelIndex> channels;

  std::size_t size() const { return channels.size(); }
};

/// Effective centrifugal index k + 3/2.
double ell(int k);

/// Channel (n, l) with its normalization constant.
ChannelIndex make_channel(int n, int l);

/// All (n, l) with 2n + 2l <= k_max, sorted by (k, l). The optional l_max
/// drops channels with l > l_max.
BasisSpec enumerate_basis(int k_max, std::optional<int> l_max = std::nullopt);

/// Y(alpha, u) with alpha in [0, pi/2], u in [-1, 1].
double eval_harmonic(const ChannelIndex& ch, double alpha, double u);

/// Y expressed through the rotation invariants a = x^2, b = y^2, w = x.y of a
/// unit-hyperradius point. No range checks; used by quadrature kernels.
double eval_harmonic_invariants(const ChannelIndex& ch, double a, double b, double w);

/// Reduced measure: int dX = 8 pi^2 int_0^{pi/2} sin^2 cos^2 dalpha int_{-1}^{1} du.
inline constexpr int kDefaultGramOrder = 64;
int min_quad_order(int k_max);

RealMatrix gram_matrix(const BasisSpec& basis, int quad_order = kDefaultGramOrder);

/// Diagonal centrifugal matrix ell_k (ell_k + 1).
RealMatrix centrifugal_matrix(const BasisSpec& basis);

nlohmann::json basis_to_json(const BasisSpec& basis);

}  // namespace hyperscat

#pragma once

#include "badw/geometry.hpp"
#include "badw/linalg.hpp"

#include <optional>

namespace badw {

// Lattice spanned by the columns of `basis` (ambient dimension x rank).
struct Lattice {
  std::optional<FactoredGroupElement> provenance;
  RMat basis;  // basis[i][j]: coordinate i of generator j
  RMat gram;

  int ambient() const { return static_cast<int>(basis.size()); }
  int rank() const { return basis.empty() ? 0 : static_cast<int>(basis.front().size()); }
  RVec vector(const ZVec& coeffs) const;
  Real covolume() const;

  // g Z^{d+1}; requires |det g| = 1 within 2^{-(P-32)}.
  static Lattice from_group(const FactoredGroupElement& g);
  // Arbitrary generators (columns), rank <= ambient.
  static Lattice from_columns(const RMat& basis);
};

struct ShortVectorResult {
  ZVec coeffs;
  Real norm;
  bool certified = false;
};

// Exact SVP by LLL preprocessing plus Schnorr-Euchner enumeration.
ShortVectorResult shortest_vector(const Lattice& L);
// Same, with LLL started from the basis warm[j] = sum_k warm[j][k] * column_k
// (ignored when empty or of the wrong shape). On return warm holds the reduced
// basis in the same form. Worth it when L is a small perturbation of the
// lattice warm was computed for. Starts longer than 2^32 times the covolume
// scale are dropped; accepted ones can cost up to about 32 further bits.
ShortVectorResult shortest_vector(const Lattice& L, std::vector<ZVec>& warm);

struct KepsResult {
  bool inside = false;
  Real margin;   // systole - eps
  Real systole;
};

KepsResult in_K_eps(const Lattice& L, const Real& eps);

// || g v_1 ^ ... ^ g v_j || through the wedge algebra.
Real wedge_norm_of_sublattice(const std::vector<ZVec>& vectors, const FactoredGroupElement& g);

struct SupremumWitness {
  Real bound;                 // |f| at the better witness point (or |c_0|)
  std::vector<int> rows;      // {l_2..l_j}
  std::vector<Int> coeffs;    // c_0..c_d of the linear form f
  int axis = -1;              // coordinate k used for x_0 +- r_B e_k, -1 when constant
};

// Lower bound for sup_{x in B} ||g u_x v|| from the linear-form witness.
SupremumWitness supremum_witness(const DiagonalElement& g, const Ball& B, const ExactWedge& v);
Real supremum_lower_bound(const DiagonalElement& g, const Ball& B, const ExactWedge& v);

// Stats for diagnostics / benchmarks.
struct LllStats {
  long swaps = 0;
  long enum_nodes = 0;
};
LllStats last_svp_stats();

}  // namespace badw

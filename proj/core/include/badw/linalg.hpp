#pragma once

#include "badw/error.hpp"
#include "badw/real.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace badw {

inline constexpr int kMaxDim = 6;  // d <= 6, so vectors live in R^{d+1} with d+1 <= 7

using RMat = std::vector<RVec>;  // row-major
using QMat = std::vector<QVec>;

// A point of W_d. Entries are kept in the order given; `sorted` records whether
// they are already non-increasing (the convention the strategy relies on).
struct WeightVector {
  RVec w;
  std::optional<QVec> exact;  // present when built from rationals
  bool strict = false;        // every w_i > 0
  bool sorted = false;
  int t = 0;                  // leading maximal weights after sorting

  int d() const { return static_cast<int>(w.size()); }
  Real max() const;
  Real min() const;

  static WeightVector from_rationals(const QVec& q);
  static WeightVector from_reals(const RVec& r);
  // Parses "2/3,1/3".
  static WeightVector parse(const std::string& csv);
  std::string str() const;
};

// diag(exp(logs[0]), ..., exp(logs[d])); logs sum to zero.
struct DiagonalElement {
  RVec logs;

  static DiagonalElement identity(int dim);
  int dim() const { return static_cast<int>(logs.size()); }
  Real entry(int i) const { return exp(logs[i]); }
  DiagonalElement operator*(const DiagonalElement& o) const;
  DiagonalElement inverse() const;
  Real log_det() const;
};

struct UnipotentElement {
  RVec x;  // first row is (1, x_1, ..., x_d)
};

// g = D * u_x, always stored in this order.
struct FactoredGroupElement {
  DiagonalElement diag;
  UnipotentElement unip;

  static FactoredGroupElement identity(int dim);
  int dim() const { return diag.dim(); }
  RMat matrix() const;
  RVec apply(const RVec& v) const;
  FactoredGroupElement operator*(const FactoredGroupElement& o) const;
};

DiagonalElement make_a(long n, const Real& b, const WeightVector& w);
// Same as make_a with log b supplied directly (b may be astronomically large).
DiagonalElement make_a_log(long n, const Real& log_b, const WeightVector& w);
DiagonalElement make_d(long ell, const Real& beta, int t, int d);
DiagonalElement make_d_log(long ell, const Real& log_beta, int t, int d);

// x'' with D u_{xp} = u_{x''} D.
RVec conjugate_unipotent(const DiagonalElement& D, const RVec& xp);

RMat matmul(const RMat& a, const RMat& b);
RMat diag_matrix(const DiagonalElement& D);
RMat unipotent_matrix(const RVec& x);

// ---------------------------------------------------------------------------
// Exterior algebra. Basis index 0 is e_+, indices 1..d are e_1..e_d.

// Lexicographic list of j-subsets of {0..n-1}.
const std::vector<std::vector<int>>& subsets(int n, int j);
int subset_index(int n, int j, const std::vector<int>& sorted_subset);
long binomial(int n, int k);

template <class T>
T determinant(std::vector<std::vector<T>> m);

template <class T>
struct Wedge {
  int n = 0;  // ambient dimension d+1
  int j = 0;  // degree
  std::vector<T> c;

  Wedge() = default;
  Wedge(int n_, int j_) : n(n_), j(j_), c(binomial(n_, j_), T(0)) {}

  const std::vector<int>& subset(std::size_t k) const { return subsets(n, j)[k]; }
  T& at(const std::vector<int>& I) { return c[subset_index(n, j, I)]; }
  const T& at(const std::vector<int>& I) const { return c[subset_index(n, j, I)]; }
  bool has_plus(std::size_t k) const { return subset(k).front() == 0; }

  T norm2() const;
  T plus_norm2() const;   // V_+ component
  T minus_norm2() const;  // V_- component
  bool is_zero() const;
  Wedge operator+(const Wedge& o) const;
  Wedge operator-(const Wedge& o) const;
  Wedge scaled(const T& s) const;
  bool operator==(const Wedge& o) const { return n == o.n && j == o.j && c == o.c; }
};

using WedgeVector = Wedge<Real>;
using ExactWedge = Wedge<Rational>;

template <class T>
Wedge<T> wedge(const std::vector<std::vector<T>>& vectors);

// Closed form v + e_+ ^ sum_i (-1)^{i+1} <v_i', x> /\_{i'!=i} v_{i'} when factors
// are supplied (checked against v), otherwise the basis-wise linear action.
template <class T>
Wedge<T> apply_unipotent_wedge(const std::vector<T>& x, const Wedge<T>& v,
                               const std::optional<std::vector<std::vector<T>>>& factors = std::nullopt);

WedgeVector apply_diagonal_wedge(const DiagonalElement& D, const WedgeVector& v);
WedgeVector to_real(const ExactWedge& v);
Real norm(const WedgeVector& v);

}  // namespace badw

#include "badw/detail/wedge_impl.hpp"

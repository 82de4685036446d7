#include "badw/lattice.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace badw;

namespace {

// Independent oracle in double precision: scan every coefficient vector in the
// box guaranteed by |x_i| <= R * ||row_i(B^{-1})||.
double brute_systole(const RMat& basisR) {
  const int n = static_cast<int>(basisR.size());
  std::vector<std::vector<double>> basis(n, std::vector<double>(n)), a, inv(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) basis[i][j] = basisR[i][j].convert_to<double>();
  a = basis;
  for (int i = 0; i < n; ++i) inv[i][i] = 1;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    double piv = a[c][c];
    for (int k = 0; k < n; ++k) a[c][k] /= piv, inv[c][k] /= piv;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = a[r][c];
      for (int k = 0; k < n; ++k) a[r][k] -= f * a[c][k], inv[r][k] -= f * inv[c][k];
    }
  }
  double R = 1e300;
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += basis[i][j] * basis[i][j];
    R = std::min(R, std::sqrt(s));
  }
  std::vector<int> K(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (double v : inv[i]) s += v * v;
    K[i] = static_cast<int>(std::ceil(R * std::sqrt(s)));
    x[i] = -K[i];
  }
  double best = R;
  while (true) {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      double c = 0;
      for (int j = 0; j < n; ++j) c += basis[i][j] * x[j];
      s += c * c;
    }
    if (s > 0) best = std::min(best, std::sqrt(s));
    int k = 0;
    while (k < n && x[k] == K[k]) x[k] = -K[k], ++k;
    if (k == n) break;
    ++x[k];
  }
  return best;
}

RMat random_unimodular_real(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> u(-4, 4);
  RMat m;
  Real det = 0;
  do {
    m.assign(n, RVec(n));
    for (auto& row : m)
      for (auto& a : row) a = u(rng);
    det = determinant(m);
  } while (abs(det) < 1);
  Real s = pow(abs(det), Real(-1) / n);
  for (auto& row : m)
    for (auto& a : row) a *= s;
  return m;
}

}  // namespace

TEST(Systole, IntegerLattice) {
  for (int n = 2; n <= 5; ++n) {
    auto L = Lattice::from_group(FactoredGroupElement::identity(n));
    auto sv = shortest_vector(L);
    EXPECT_EQ(sv.norm, 1);
    EXPECT_TRUE(sv.certified);
    int nonzero = 0;
    for (auto& c : sv.coeffs) nonzero += c != 0;
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(Systole, DiagonalHandValue) {
  auto w = WeightVector::parse("1");
  FactoredGroupElement g{make_a(1, Real(2), w), {{Real(0)}}};
  auto sv = shortest_vector(Lattice::from_group(g));
  EXPECT_LE(abs(sv.norm - Real("0.5")), slack());
}

TEST(KEps, Examples) {
  auto Z3 = Lattice::from_group(FactoredGroupElement::identity(3));
  auto a = in_K_eps(Z3, Real("0.5"));
  EXPECT_TRUE(a.inside);
  EXPECT_LE(abs(a.margin - Real("0.5")), slack());
  EXPECT_FALSE(in_K_eps(Z3, Real("1.5")).inside);
  auto w = WeightVector::parse("1");
  FactoredGroupElement g{make_a(5, Real(2), w), {{golden()}}};
  auto L = Lattice::from_group(g);
  EXPECT_TRUE(in_K_eps(L, Real("0.3")).inside);
  EXPECT_NEAR(shortest_vector(L).norm.convert_to<double>(), brute_systole(L.basis), 1e-9);
}

TEST(Systole, MatchesBruteForceAndIsBasisInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(-2, 2);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 3;
    RMat B = random_unimodular_real(rng, n);
    auto L = Lattice::from_columns(B);
    auto sv = shortest_vector(L);
    EXPECT_NEAR(sv.norm.convert_to<double>(), brute_systole(B), 1e-9);
    EXPECT_LE(abs(norm(L.vector(sv.coeffs)) - sv.norm), slack() * 8);
    // change of basis by a random unimodular integer matrix
    RMat U;
    do {
      U.assign(n, RVec(n));
      for (auto& row : U)
        for (auto& a : row) a = u(rng);
    } while (abs(determinant(U)) != 1);
    auto L2 = Lattice::from_columns(matmul(B, U));
    EXPECT_LE(abs(shortest_vector(L2).norm - sv.norm), slack() * 64);
  }
}

TEST(Systole, MinkowskiBound) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    auto sv = shortest_vector(Lattice::from_columns(random_unimodular_real(rng, n)));
    EXPECT_LE(sv.norm, sqrt(Real(n)));
  }
}

TEST(Systole, MonotoneKEps) {
  auto w = WeightVector::parse("2/3,1/3");
  FactoredGroupElement g{make_a(4, Real(2), w), {{Real("0.318"), Real("0.77")}}};
  auto L = Lattice::from_group(g);
  Real s = shortest_vector(L).norm;
  for (Real e : {s / 2, s * Real("0.99"), s * Real("1.01")}) {
    bool in = in_K_eps(L, e).inside;
    if (in) EXPECT_TRUE(in_K_eps(L, e / 2).inside);
  }
}

TEST(Systole, WarmStartMatchesReference) {
  // Strongly distorted lattices (about 50 bits of spread) at nearby points, as
  // in a sweep over a fine grid; every tenth point jumps far away. Reference:
  // the cold computation at 2048 bits.
  auto w = WeightVector::parse("2/3,1/3");
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<ZVec> warm;
  PrecisionScope scope(50 + 96);
  for (int trial = 0; trial < 40; ++trial) {
    const Real h = ldexp(Real(1), trial % 10 == 9 ? -2 : -30 - trial);
    const Real x = Real("0.318") + h * U(rng), y = Real("0.77") + h * U(rng);
    FactoredGroupElement g{make_a(30, Real(2), w), {{x, y}}};
    auto L = Lattice::from_group(g);
    auto sv = shortest_vector(L, warm);
    Real ref;
    {
      PrecisionScope wide(2048);
      FactoredGroupElement G{make_a(30, Real(2), w), {{at_working(x), at_working(y)}}};
      ref = shortest_vector(Lattice::from_group(G)).norm;
    }
    EXPECT_LE(abs(sv.norm / ref - 1), ldexp(Real(1), -64)) << "trial " << trial;
    ASSERT_EQ(warm.size(), 3u);
    // the returned basis spans the lattice
    const auto& c = warm;
    const Int det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) -
                    c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0]) +
                    c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
    EXPECT_TRUE(det == 1 || det == -1);
  }
  std::vector<ZVec> junk{{Int(1), Int(0)}};  // wrong shape: ignored
  auto Z3 = Lattice::from_group(FactoredGroupElement::identity(3));
  EXPECT_EQ(shortest_vector(Z3, junk).norm, 1);
}

TEST(WedgeNorm, Examples) {
  auto id = FactoredGroupElement::identity(3);
  EXPECT_EQ(wedge_norm_of_sublattice({{1, 0, 0}, {0, 1, 0}}, id), 1);
  EXPECT_LE(abs(wedge_norm_of_sublattice({{5, 0, 0}, {0, 1, 0}}, id) - 5), slack());
  EXPECT_THROW(wedge_norm_of_sublattice({{1, 2, 3}, {2, 4, 6}}, id), Error);
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> u(-5, 5);
  auto w = WeightVector::parse("1/2,1/2");
  for (int trial = 0; trial < 40; ++trial) {
    ZVec a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    FactoredGroupElement g{make_a(u(rng), Real(3), w), {{Real(0), Real(0)}}};
    try {
      Real wn = wedge_norm_of_sublattice({a, b}, g);
      RVec ga = g.apply({to_real(a[0]), to_real(a[1]), to_real(a[2])});
      RVec gb = g.apply({to_real(b[0]), to_real(b[1]), to_real(b[2])});
      Real gram = norm2(ga) * norm2(gb) - dot(ga, gb) * dot(ga, gb);
      EXPECT_LE(abs(wn - sqrt(gram)), slack() * 1e6 * (1 + wn));
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::DependentInput);
    }
  }
}

TEST(Supremum, Examples) {
  auto id = DiagonalElement::identity(3);
  Ball B{{Real(0), Real(0)}, Real("0.25")};
  ExactWedge full = wedge<Rational>({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  EXPECT_GE(supremum_lower_bound(id, B, full), 1);
  ExactWedge e1 = wedge<Rational>({{0, 1, 0}});
  EXPECT_GE(supremum_lower_bound(id, B, e1), Real("0.25") - slack());
  DiagonalElement bad{{Real(-1), Real("0.5"), Real("0.5")}};
  EXPECT_THROW(supremum_lower_bound(bad, B, e1), Error);
}

#include "badw/lattice.hpp"

#include <mpfr.h>

#include <algorithm>
#include <optional>

namespace badw {

namespace {

thread_local LllStats g_stats;

constexpr long kEnumBudget = 20'000'000;

struct Reduced {
  std::vector<RVec> b;   // reduced generators
  std::vector<RVec> u;   // b[j] = sum_k u[j][k] * original_k (integers held in Real)
  std::vector<RVec> mu;
  RVec B;                // squared Gram-Schmidt norms
  std::vector<RVec> bs;  // Gram-Schmidt vectors (scratch)
  Real acc, tmp;
};

mpfr_ptr raw(Real& x) { return x.backend().data(); }
mpfr_srcptr raw(const Real& x) { return x.backend().data(); }

// In-place arithmetic on the raw MPFR values: these loops dominate the SVP cost
// and the operator forms allocate a temporary per product.
void gram_schmidt(Reduced& r) {
  const std::size_t m = r.b.size(), n = r.b.front().size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) mpfr_set(raw(r.bs[i][k]), raw(r.b[i][k]), MPFR_RNDN);
    for (std::size_t j = 0; j < i; ++j) {
      mpfr_set_zero(raw(r.acc), 1);
      for (std::size_t k = 0; k < n; ++k) mpfr_fma(raw(r.acc), raw(r.b[i][k]), raw(r.bs[j][k]), raw(r.acc), MPFR_RNDN);
      mpfr_div(raw(r.mu[i][j]), raw(r.acc), raw(r.B[j]), MPFR_RNDN);
      for (std::size_t k = 0; k < n; ++k) {
        mpfr_mul(raw(r.tmp), raw(r.mu[i][j]), raw(r.bs[j][k]), MPFR_RNDN);
        mpfr_sub(raw(r.bs[i][k]), raw(r.bs[i][k]), raw(r.tmp), MPFR_RNDN);
      }
    }
    mpfr_set_zero(raw(r.B[i]), 1);
    for (std::size_t k = 0; k < n; ++k) mpfr_fma(raw(r.B[i]), raw(r.bs[i][k]), raw(r.bs[i][k]), raw(r.B[i]), MPFR_RNDN);
    if (!(r.B[i] > 0)) fail(Errc::PrecisionExhausted, "Gram-Schmidt norm vanished at working precision");
  }
}

// row[c] -= q * from[c]
void axpy_sub(RVec& row, const Real& q, const RVec& from, Real& tmp) {
  for (std::size_t c = 0; c < row.size(); ++c) {
    mpfr_mul(raw(tmp), raw(q), raw(from[c]), MPFR_RNDN);
    mpfr_sub(raw(row[c]), raw(row[c]), raw(tmp), MPFR_RNDN);
  }
}

void lll(Reduced& r) {
  const Real delta("0.99");
  const Real qmax = ldexp(Real(1), static_cast<int>(precision()) - 8);
  const int m = static_cast<int>(r.b.size());
  gram_schmidt(r);
  int k = 1;
  long guard = 0;
  Real q;
  while (k < m) {
    if (++guard > 100000) fail(Errc::PrecisionExhausted, "LLL did not converge");
    for (int j = k - 1; j >= 0; --j) {
      mpfr_round(raw(q), raw(r.mu[k][j]));
      if (q == 0) continue;
      if (abs(q) > qmax) fail(Errc::PrecisionExhausted, "size-reduction multiplier exceeds precision");
      axpy_sub(r.b[k], q, r.b[j], r.tmp);
      axpy_sub(r.u[k], q, r.u[j], r.tmp);
      for (int i = 0; i < j; ++i) {
        mpfr_mul(raw(r.tmp), raw(q), raw(r.mu[j][i]), MPFR_RNDN);
        mpfr_sub(raw(r.mu[k][i]), raw(r.mu[k][i]), raw(r.tmp), MPFR_RNDN);
      }
      mpfr_sub(raw(r.mu[k][j]), raw(r.mu[k][j]), raw(q), MPFR_RNDN);
    }
    if (r.B[k] >= (delta - r.mu[k][k - 1] * r.mu[k][k - 1]) * r.B[k - 1]) {
      ++k;
    } else {
      std::swap(r.b[k], r.b[k - 1]);
      std::swap(r.u[k], r.u[k - 1]);
      ++g_stats.swaps;
      gram_schmidt(r);
      k = std::max(k - 1, 1);
    }
  }
}

struct Enumerator {
  const Reduced& r;
  int m;
  RVec x;
  RVec best;
  Real R2;
  long nodes = 0;
  bool exhausted = false;

  void run(int i, const Real& partial) {
    if (exhausted) return;
    Real c = 0;
    for (int j = i + 1; j < m; ++j) c -= x[j] * r.mu[j][i];
    Real x0 = round(c);
    // zig-zag around the centre: x0, x0+1, x0-1, ... ordered by distance
    for (int side = 0; side < 2; ++side) {
      for (long step = (side == 0 ? 0 : 1);; ++step) {
        if (++nodes > kEnumBudget) {
          exhausted = true;
          return;
        }
        Real xi = side == 0 ? x0 + step : x0 - step;
        Real diff = xi - c;
        Real d = partial + r.B[i] * diff * diff;
        if (d > R2) {
          // moving further from the centre only increases d
          if ((side == 0 && diff >= 0) || (side == 1 && diff <= 0)) break;
          continue;
        }
        x[i] = xi;
        if (i == 0) {
          if (d > 0 && d < R2) {
            R2 = d;
            best = x;
          }
        } else {
          run(i - 1, d);
        }
      }
    }
    x[i] = 0;
  }
};

}  // namespace

LllStats last_svp_stats() { return g_stats; }

RVec Lattice::vector(const ZVec& coeffs) const {
  RVec v(ambient(), Real(0));
  for (int j = 0; j < rank(); ++j) {
    Real c = to_real(coeffs[j]);
    for (int i = 0; i < ambient(); ++i) v[i] += basis[i][j] * c;
  }
  return v;
}

Real Lattice::covolume() const {
  if (provenance) return exp(provenance->diag.log_det());
  std::vector<RVec> cols(rank(), RVec(ambient()));
  for (int j = 0; j < rank(); ++j)
    for (int i = 0; i < ambient(); ++i) cols[j][i] = basis[i][j];
  return norm(wedge(cols));
}

Lattice Lattice::from_group(const FactoredGroupElement& g) {
  require(abs(g.diag.log_det()) <= slack() * 64, Errc::PreconditionViolated, "group element is not unimodular");
  Lattice L;
  L.provenance = g;
  L.basis = g.matrix();
  const int n = L.ambient();
  L.gram.assign(n, RVec(n, Real(0)));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i) L.gram[a][b] += L.basis[i][a] * L.basis[i][b];
  return L;
}

Lattice Lattice::from_columns(const RMat& basis) {
  require(!basis.empty() && !basis.front().empty(), Errc::InvalidShape, "empty basis");
  Lattice L;
  L.basis = basis;
  const int n = L.ambient(), r = L.rank();
  require(r <= n, Errc::InvalidShape, "rank exceeds ambient dimension");
  L.gram.assign(r, RVec(r, Real(0)));
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int i = 0; i < n; ++i) L.gram[a][b] += basis[i][a] * basis[i][b];
  return L;
}

namespace {

constexpr int kWarmBits = 32;

bool usable_warm(const std::vector<ZVec>& warm, int m) {
  if (static_cast<int>(warm.size()) != m) return false;
  // The coefficients have to be exact at working precision.
  const auto bits = static_cast<std::size_t>(precision()) - 8;
  for (const auto& row : warm) {
    if (static_cast<int>(row.size()) != m) return false;
    for (const auto& c : row)
      if (c != 0 && boost::multiprecision::msb(boost::multiprecision::abs(c)) >= bits) return false;
  }
  return true;
}

ShortVectorResult svp(const Lattice& L, std::vector<ZVec>* warm, std::vector<ZVec>* reduced) {
  g_stats = {};
  const int m = L.rank(), n = L.ambient();
  Reduced r;
  r.b.assign(m, RVec(n, Real(0)));
  r.u.assign(m, RVec(m, Real(0)));
  r.bs.assign(m, RVec(n));
  r.mu.assign(m, RVec(m, Real(0)));
  r.B.assign(m, Real(0));
  if (!reduced) reduced = warm;
  if (warm && usable_warm(*warm, m)) {
    // The start vectors are short combinations of long columns; accumulate them
    // exactly enough that only the final rounding is lost.
    std::size_t bits = 0;
    for (const auto& row : *warm)
      for (const auto& c : row)
        if (c != 0) bits = std::max<std::size_t>(bits, boost::multiprecision::msb(boost::multiprecision::abs(c)) + 1);
    const unsigned p0 = precision();
    for (int j = 0; j < m; ++j) {
      for (int k = 0; k < m; ++k) r.u[j][k] = Real((*warm)[j][k]);
      for (int i = 0; i < n; ++i) {
        std::optional<Real> acc;
        {
          PrecisionScope wide(static_cast<unsigned>(2 * p0 + bits + 8));
          acc.emplace(0);
          for (int k = 0; k < m; ++k)
            if ((*warm)[j][k] != 0) *acc += Real((*warm)[j][k]) * L.basis[i][k];
        }
        r.b[j][i] = at_working(*acc);
      }
    }
    // Reducing a long start basis costs about its length in bits, which the
    // caller's precision does not cover. Such starts go cold.
    Real longest = 0;
    for (const auto& v : r.b) longest = std::max(longest, norm(v));
    if (longest > ldexp(pow(L.covolume(), Real(1) / m), kWarmBits)) return svp(L, nullptr, warm);
  } else {
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) r.b[j][i] = L.basis[i][j];
      r.u[j][j] = 1;
    }
  }
  lll(r);
  if (reduced) {
    reduced->assign(m, ZVec(m));
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) (*reduced)[j][k] = nearest_int(r.u[j][k]);
  }
  // Consistency: the Gram-Schmidt volume must reproduce the covolume.
  Real vol2 = 1;
  for (const auto& x : r.B) vol2 *= x;
  Real cov = L.covolume();
  Real drift = abs(sqrt(vol2) / cov - 1);
  if (!(drift <= ldexp(Real(1), -static_cast<int>(precision() / 2))))
    fail(Errc::PrecisionExhausted, "reduced basis lost the covolume at working precision");

  Enumerator e{r, m, RVec(m, Real(0)), RVec(m, Real(0)), Real(0)};
  e.best[0] = 1;
  e.R2 = r.B[0] * (1 + slack());
  e.run(m - 1, Real(0));
  g_stats.enum_nodes = e.nodes;

  ShortVectorResult out;
  out.certified = !e.exhausted;
  RVec v(n, Real(0));
  out.coeffs.assign(m, Int(0));
  for (int j = 0; j < m; ++j) {
    if (e.best[j] == 0) continue;
    for (int i = 0; i < n; ++i) v[i] += e.best[j] * r.b[j][i];
  }
  for (int k = 0; k < m; ++k) {
    Real c = 0;
    for (int j = 0; j < m; ++j) c += e.best[j] * r.u[j][k];
    out.coeffs[k] = nearest_int(c);
  }
  out.norm = norm(v);
  return out;
}

}  // namespace

ShortVectorResult shortest_vector(const Lattice& L) { return svp(L, nullptr, nullptr); }
ShortVectorResult shortest_vector(const Lattice& L, std::vector<ZVec>& warm) {
  // A start far from reduced can cost more precision than the lattice itself.
  try {
    return svp(L, &warm, nullptr);
  } catch (const Error& e) {
    if (e.code() != Errc::PrecisionExhausted || warm.empty()) throw;
  }
  warm.clear();
  return svp(L, &warm, nullptr);
}

KepsResult in_K_eps(const Lattice& L, const Real& eps) {
  require(eps > 0, Errc::InvalidArgument, "eps must be positive");
  auto sv = shortest_vector(L);
  return {sv.norm >= eps, sv.norm - eps, sv.norm};
}

Real wedge_norm_of_sublattice(const std::vector<ZVec>& vectors, const FactoredGroupElement& g) {
  require(!vectors.empty(), Errc::InvalidShape, "no vectors");
  std::vector<QVec> exact;
  std::vector<RVec> images;
  for (const auto& v : vectors) {
    require(static_cast<int>(v.size()) == g.dim(), Errc::InvalidShape, "vector length differs from d+1");
    QVec q;
    RVec r;
    for (const auto& a : v) {
      q.emplace_back(a);
      r.push_back(to_real(a));
    }
    exact.push_back(q);
    images.push_back(g.apply(r));
  }
  if (static_cast<int>(vectors.size()) > g.dim()) fail(Errc::DependentInput, "more vectors than dimensions");
  if (wedge(exact).is_zero()) fail(Errc::DependentInput, "vectors are linearly dependent");
  return norm(wedge(images));
}

SupremumWitness supremum_witness(const DiagonalElement& g, const Ball& B, const ExactWedge& v) {
  const int n = g.dim();
  const int d = n - 1;
  require(v.n == n && B.dim() == d, Errc::InvalidShape, "dimension mismatch");
  require(!v.is_zero(), Errc::PreconditionViolated, "v must be nonzero");
  const Real tol = slack() * 16;
  bool ok = g.logs[0] >= -tol && abs(g.log_det()) <= tol;
  for (int i = 1; i < n; ++i) ok = ok && g.logs[i] <= tol;
  if (!ok) fail(Errc::PreconditionViolated, "g must be diag(b_+, b_i) with b_+ >= 1 >= b_i and det 1");

  SupremumWitness w;
  if (v.j == n) {
    w.bound = to_real(v.c[0] < 0 ? Rational(-v.c[0]) : v.c[0]);
    return w;
  }
  // First (j-1)-subset L of {1..d} (lexicographic) whose minors with some extra row do not all vanish.
  for (const auto& Lrows : subsets(d, v.j - 1)) {
    std::vector<int> L;
    for (int i : Lrows) L.push_back(i + 1);
    std::vector<Int> c(n, Int(0));
    bool any = false;
    for (int r = 0; r < n; ++r) {
      if (std::find(L.begin(), L.end(), r) != L.end()) continue;
      std::vector<int> I = L;
      I.push_back(r);
      std::sort(I.begin(), I.end());
      const auto pos = std::find(I.begin(), I.end(), r) - I.begin();
      Rational q = v.at(I);
      if (pos % 2 == 1) q = -q;
      require(denominator(q) == 1, Errc::PreconditionViolated, "v must be an integer wedge");
      c[r] = numerator(q);
      any = any || c[r] != 0;
    }
    if (!any) continue;
    w.rows = L;
    w.coeffs = c;
    for (int k = 1; k < n; ++k)
      if (c[k] != 0) {
        w.axis = k;
        break;
      }
    if (w.axis < 0) {
      w.bound = to_real(c[0] < 0 ? Int(-c[0]) : c[0]);
      return w;
    }
    auto f = [&](const RVec& x) {
      Real s = to_real(c[0]);
      for (int k = 1; k < n; ++k) s += to_real(c[k]) * x[k - 1];
      return abs(s);
    };
    RVec xp = B.center, xm = B.center;
    xp[w.axis - 1] += B.radius;
    xm[w.axis - 1] -= B.radius;
    w.bound = std::max(f(xp), f(xm));
    return w;
  }
  fail(Errc::PreconditionViolated, "no nonvanishing minor found");
}

Real supremum_lower_bound(const DiagonalElement& g, const Ball& B, const ExactWedge& v) {
  return supremum_witness(g, B, v).bound;
}

}  // namespace badw

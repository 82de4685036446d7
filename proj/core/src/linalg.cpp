#include "badw/linalg.hpp"

#include <algorithm>
#include <sstream>

namespace badw {

namespace {

void finish_weights(WeightVector& wv) {
  const int d = wv.d();
  require(d >= 1 && d <= kMaxDim, Errc::InvalidShape, "weight dimension must be in 1..6");
  Real sum = 0;
  for (const auto& a : wv.w) {
    require(a >= 0, Errc::InvalidArgument, "negative weight");
    sum += a;
  }
  require(abs(sum - 1) <= tight_slack() * 4, Errc::InvalidArgument, "weights must sum to 1");
  wv.strict = std::all_of(wv.w.begin(), wv.w.end(), [](const Real& a) { return a > 0; });
  wv.sorted = std::is_sorted(wv.w.begin(), wv.w.end(), [](const Real& a, const Real& b) { return a > b; });
  RVec s = wv.w;
  std::sort(s.begin(), s.end(), [](const Real& a, const Real& b) { return a > b; });
  wv.t = 1;
  while (wv.t < d && s[wv.t] == s[0]) ++wv.t;
}

}  // namespace

Real WeightVector::max() const { return *std::max_element(w.begin(), w.end()); }
Real WeightVector::min() const { return *std::min_element(w.begin(), w.end()); }

WeightVector WeightVector::from_rationals(const QVec& q) {
  WeightVector wv;
  Rational sum = 0;
  for (const auto& a : q) sum += a;
  require(sum == 1, Errc::InvalidArgument, "rational weights must sum to exactly 1");
  wv.exact = q;
  for (const auto& a : q) wv.w.push_back(to_real(a));
  finish_weights(wv);
  // t from exact comparisons (Real rounding could split equal rationals).
  QVec s = q;
  std::sort(s.begin(), s.end(), std::greater<Rational>());
  wv.t = 1;
  while (wv.t < wv.d() && s[wv.t] == s[0]) ++wv.t;
  return wv;
}

WeightVector WeightVector::from_reals(const RVec& r) {
  WeightVector wv;
  wv.w = r;
  finish_weights(wv);
  return wv;
}

WeightVector WeightVector::parse(const std::string& csv) {
  QVec q;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) q.push_back(parse_rational(item));
  return from_rationals(q);
}

std::string WeightVector::str() const {
  std::string out;
  for (int i = 0; i < d(); ++i) {
    if (i) out += ",";
    out += exact ? to_string((*exact)[i]) : to_decimal(w[i]);
  }
  return out;
}

DiagonalElement DiagonalElement::identity(int dim) { return {RVec(dim, Real(0))}; }

DiagonalElement DiagonalElement::operator*(const DiagonalElement& o) const {
  require(dim() == o.dim(), Errc::InvalidShape, "diagonal dimension mismatch");
  DiagonalElement r = *this;
  for (int i = 0; i < dim(); ++i) r.logs[i] += o.logs[i];
  return r;
}

DiagonalElement DiagonalElement::inverse() const {
  DiagonalElement r = *this;
  for (auto& a : r.logs) a = -a;
  return r;
}

Real DiagonalElement::log_det() const {
  Real s = 0;
  for (const auto& a : logs) s += a;
  return s;
}

FactoredGroupElement FactoredGroupElement::identity(int dim) {
  return {DiagonalElement::identity(dim), {RVec(dim - 1, Real(0))}};
}

RMat FactoredGroupElement::matrix() const { return matmul(diag_matrix(diag), unipotent_matrix(unip.x)); }

RVec FactoredGroupElement::apply(const RVec& v) const {
  RVec out(v.size());
  Real first = v[0];
  for (std::size_t i = 1; i < v.size(); ++i) first += unip.x[i - 1] * v[i];
  out[0] = diag.entry(0) * first;
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = diag.entry(static_cast<int>(i)) * v[i];
  return out;
}

FactoredGroupElement FactoredGroupElement::operator*(const FactoredGroupElement& o) const {
  // D1 u_a D2 u_b = D1 D2 u_{a'} u_b with u_a D2 = D2 u_{a'}.
  RVec a2 = conjugate_unipotent(o.diag.inverse(), unip.x);
  for (std::size_t i = 0; i < a2.size(); ++i) a2[i] += o.unip.x[i];
  return {diag * o.diag, {a2}};
}

DiagonalElement make_a(long n, const Real& b, const WeightVector& w) {
  if (!(b > 1)) fail(Errc::InvalidBase, "b must exceed 1");
  return make_a_log(n, log(b), w);
}

DiagonalElement make_a_log(long n, const Real& log_b, const WeightVector& w) {
  if (!(log_b > 0)) fail(Errc::InvalidBase, "b must exceed 1");
  DiagonalElement D;
  const Real nl = Real(n) * log_b;
  D.logs.push_back(nl);
  if (w.exact) {
    for (const auto& q : *w.exact) D.logs.push_back(-(nl * to_real(numerator(q))) / to_real(denominator(q)));
  } else {
    for (const auto& a : w.w) D.logs.push_back(-a * nl);
  }
  return D;
}

DiagonalElement make_d(long ell, const Real& beta, int t, int d) {
  require(beta > 0 && beta < 1, Errc::InvalidArgument, "beta must lie in (0,1)");
  return make_d_log(ell, log(beta), t, d);
}

DiagonalElement make_d_log(long ell, const Real& log_beta, int t, int d) {
  if (t < 1 || t > d || d > kMaxDim) fail(Errc::InvalidShape, "need 1 <= t <= d <= 6");
  const Real unit = Real(ell) * log_beta / (d + 1);
  DiagonalElement D;
  D.logs.push_back(unit * t);
  for (int i = 0; i < t; ++i) D.logs.push_back(-unit * (d + 1 - t));
  for (int i = t; i < d; ++i) D.logs.push_back(unit * t);
  return D;
}

RVec conjugate_unipotent(const DiagonalElement& D, const RVec& xp) {
  require(static_cast<int>(xp.size()) + 1 == D.dim(), Errc::InvalidShape, "x has wrong length");
  RVec out(xp.size());
  for (std::size_t i = 0; i < xp.size(); ++i)
    out[i] = exp(D.logs[0] - D.logs[i + 1]) * xp[i];
  return out;
}

RMat matmul(const RMat& a, const RMat& b) {
  const std::size_t n = a.size(), m = b.front().size(), k = b.size();
  RMat c(n, RVec(m, Real(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l)
      for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

RMat diag_matrix(const DiagonalElement& D) {
  const int n = D.dim();
  RMat m(n, RVec(n, Real(0)));
  for (int i = 0; i < n; ++i) m[i][i] = D.entry(i);
  return m;
}

RMat unipotent_matrix(const RVec& x) {
  const std::size_t n = x.size() + 1;
  RMat m(n, RVec(n, Real(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  for (std::size_t i = 1; i < n; ++i) m[0][i] = x[i - 1];
  return m;
}

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

namespace {

struct SubsetTable {
  std::vector<std::vector<int>> list;
  std::array<int, 1 << (kMaxDim + 1)> index{};
};

SubsetTable build_table(int n, int j) {
  SubsetTable t;
  t.index.fill(-1);
  for (int mask = 0; mask < (1 << n); ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != j) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) s.push_back(i);
    t.list.push_back(s);
  }
  std::sort(t.list.begin(), t.list.end());
  for (std::size_t k = 0; k < t.list.size(); ++k) {
    int mask = 0;
    for (int i : t.list[k]) mask |= 1 << i;
    t.index[mask] = static_cast<int>(k);
  }
  return t;
}

const SubsetTable& table(int n, int j) {
  static const auto all = [] {
    std::vector<std::vector<SubsetTable>> tabs(kMaxDim + 2);
    for (int nn = 1; nn <= kMaxDim + 1; ++nn)
      for (int jj = 0; jj <= nn; ++jj) tabs[nn].push_back(build_table(nn, jj));
    return tabs;
  }();
  return all[n][j];
}

}  // namespace

const std::vector<std::vector<int>>& subsets(int n, int j) {
  require(n >= 1 && n <= kMaxDim + 1 && j >= 0 && j <= n, Errc::DegreeOverflow, "subset shape out of range");
  return table(n, j).list;
}

int subset_index(int n, int j, const std::vector<int>& s) {
  int mask = 0;
  for (int i : s) mask |= 1 << i;
  int k = table(n, j).index[mask];
  require(k >= 0 && static_cast<int>(s.size()) == j, Errc::InvalidShape, "index set has wrong cardinality");
  return k;
}

WedgeVector apply_diagonal_wedge(const DiagonalElement& D, const WedgeVector& v) {
  require(D.dim() == v.n, Errc::InvalidShape, "dimension mismatch");
  WedgeVector out = v;
  for (std::size_t k = 0; k < v.c.size(); ++k) {
    Real l = 0;
    for (int i : v.subset(k)) l += D.logs[i];
    out.c[k] *= exp(l);
  }
  return out;
}

WedgeVector to_real(const ExactWedge& v) {
  WedgeVector out(v.n, v.j);
  for (std::size_t k = 0; k < v.c.size(); ++k) out.c[k] = to_real(v.c[k]);
  return out;
}

Real norm(const WedgeVector& v) { return sqrt(v.norm2()); }

}  // namespace badw

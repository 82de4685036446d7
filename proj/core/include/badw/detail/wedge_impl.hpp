#pragma once

// Template bodies for the exterior algebra declared in linalg.hpp.

#include <algorithm>
#include <type_traits>

namespace badw {

template <class T>
T determinant(std::vector<std::vector<T>> m) {
  const std::size_t n = m.size();
  if (n == 0) return T(1);
  T det = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = n;
    if constexpr (std::is_same_v<T, Rational>) {
      for (std::size_t r = col; r < n; ++r)
        if (m[r][col] != 0) { piv = r; break; }
    } else {
      T best = 0;
      for (std::size_t r = col; r < n; ++r) {
        T a = abs(m[r][col]);
        if (a > best) { best = a; piv = r; }
      }
    }
    if (piv == n) return T(0);
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (std::size_t r = col + 1; r < n; ++r) {
      if (m[r][col] == 0) continue;
      T f = m[r][col] / m[col][col];
      for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
    }
  }
  return det;
}

template <class T>
T Wedge<T>::norm2() const {
  T s = 0;
  for (const auto& a : c) s += a * a;
  return s;
}

template <class T>
T Wedge<T>::plus_norm2() const {
  T s = 0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (has_plus(k)) s += c[k] * c[k];
  return s;
}

template <class T>
T Wedge<T>::minus_norm2() const {
  T s = 0;
  for (std::size_t k = 0; k < c.size(); ++k)
    if (!has_plus(k)) s += c[k] * c[k];
  return s;
}

template <class T>
bool Wedge<T>::is_zero() const {
  return std::all_of(c.begin(), c.end(), [](const T& a) { return a == 0; });
}

template <class T>
Wedge<T> Wedge<T>::operator+(const Wedge& o) const {
  require(n == o.n && j == o.j, Errc::InvalidShape, "wedge degree mismatch");
  Wedge r = *this;
  for (std::size_t k = 0; k < c.size(); ++k) r.c[k] += o.c[k];
  return r;
}

template <class T>
Wedge<T> Wedge<T>::operator-(const Wedge& o) const {
  return *this + o.scaled(T(-1));
}

template <class T>
Wedge<T> Wedge<T>::scaled(const T& s) const {
  Wedge r = *this;
  for (auto& a : r.c) a *= s;
  return r;
}

template <class T>
Wedge<T> wedge(const std::vector<std::vector<T>>& vectors) {
  require(!vectors.empty(), Errc::InvalidShape, "wedge of no vectors");
  const int n = static_cast<int>(vectors.front().size());
  const int j = static_cast<int>(vectors.size());
  require(n >= 1 && n <= kMaxDim + 1, Errc::InvalidShape, "ambient dimension out of range");
  for (const auto& v : vectors)
    require(static_cast<int>(v.size()) == n, Errc::InvalidShape, "ragged wedge factors");
  if (j > n) fail(Errc::DegreeOverflow, "wedge degree exceeds d+1");
  Wedge<T> out(n, j);
  const auto& subs = subsets(n, j);
  std::vector<std::vector<T>> m(j, std::vector<T>(j));
  for (std::size_t k = 0; k < subs.size(); ++k) {
    for (int r = 0; r < j; ++r)
      for (int col = 0; col < j; ++col) m[r][col] = vectors[col][subs[k][r]];
    out.c[k] = determinant(m);
  }
  return out;
}

namespace detail {

template <class T>
bool wedge_close(const Wedge<T>& a, const Wedge<T>& b) {
  if (a.n != b.n || a.j != b.j) return false;
  if constexpr (std::is_same_v<T, Rational>) {
    return a.c == b.c;
  } else {
    T scale = 1;
    for (const auto& x : a.c) scale = std::max(scale, T(abs(x)));
    for (std::size_t k = 0; k < a.c.size(); ++k)
      if (abs(a.c[k] - b.c[k]) > slack() * scale) return false;
    return true;
  }
}

}  // namespace detail

template <class T>
Wedge<T> apply_unipotent_wedge(const std::vector<T>& x, const Wedge<T>& v,
                               const std::optional<std::vector<std::vector<T>>>& factors) {
  require(static_cast<int>(x.size()) + 1 == v.n, Errc::InvalidShape, "x has wrong length");
  Wedge<T> out = v;
  if (factors) {
    const auto& f = *factors;
    require(static_cast<int>(f.size()) == v.j, Errc::FactorMismatch, "factor count differs from degree");
    if (!detail::wedge_close(wedge(f), v)) fail(Errc::FactorMismatch, "factors do not wedge to v");
    for (int i = 0; i < v.j; ++i) {
      T lin = 0;
      for (std::size_t k = 0; k < x.size(); ++k) lin += f[i][k + 1] * x[k];
      if (lin == 0) continue;
      if (i % 2 == 1) lin = -lin;
      if (v.j == 1) {
        out.c[0] += lin;  // subset {+} is first in lexicographic order
        continue;
      }
      std::vector<std::vector<T>> rest;
      for (int r = 0; r < v.j; ++r)
        if (r != i) rest.push_back(f[r]);
      Wedge<T> w = wedge(rest);
      for (std::size_t k = 0; k < w.c.size(); ++k) {
        const auto& J = w.subset(k);
        if (J.front() == 0 || w.c[k] == 0) continue;
        std::vector<int> I{0};
        I.insert(I.end(), J.begin(), J.end());
        out.at(I) += lin * w.c[k];
      }
    }
    return out;
  }
  for (std::size_t k = 0; k < v.c.size(); ++k) {
    const auto& I = v.subset(k);
    if (I.front() == 0 || v.c[k] == 0) continue;
    for (std::size_t p = 0; p < I.size(); ++p) {
      const int i = I[p];
      std::vector<int> J{0};
      for (int q : I)
        if (q != i) J.push_back(q);
      T term = v.c[k] * x[i - 1];
      if (p % 2 == 1) term = -term;
      out.at(J) += term;
    }
  }
  return out;
}

}  // namespace badw

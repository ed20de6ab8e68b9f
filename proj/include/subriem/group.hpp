#pragma once

// Exact algebra of the Heisenberg group H = R^2 x R and of the free step-2
// Carnot groups G_n = R^n x so(n).
//
// Everything here is templated on the scalar type so the algebraic identities
// can be checked over exact rationals as well as doubles. Vertical parts are
// stored as the strictly upper triangular entries z_{i,j}, i < j, in row-major
// order; the lower half is implied by antisymmetry.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subriem {

namespace detail {
inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}
}  // namespace detail

/// Skew-symmetric n x n matrix held as its packed strictly-upper triangle.
template <class Scalar>
class SkewMatrix {
 public:
  SkewMatrix() = default;
  explicit SkewMatrix(int n) : n_(n), upper_(packed_size(n), Scalar(0)) {
    if (n < 1) throw std::invalid_argument("SkewMatrix: dimension must be positive");
  }
  SkewMatrix(int n, std::vector<Scalar> upper) : n_(n), upper_(std::move(upper)) {
    if (n < 1) throw std::invalid_argument("SkewMatrix: dimension must be positive");
    detail::require_same_dim(upper_.size(), packed_size(n), "SkewMatrix");
  }

  static constexpr std::size_t packed_size(int n) {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  }
  /// Position of entry (i, j), i < j, in the packed array.
  static constexpr std::size_t packed_index(int n, int i, int j) {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(2 * n - i - 1) / 2 +
           static_cast<std::size_t>(j - i - 1);
  }

  int dim() const { return n_; }
  std::size_t size() const { return upper_.size(); }

  /// Full-matrix read access; antisymmetry is implied by the storage.
  Scalar operator()(int i, int j) const {
    if (i == j) return Scalar(0);
    if (i < j) return upper_[packed_index(n_, i, j)];
    return -upper_[packed_index(n_, j, i)];
  }
  /// Mutable access to an upper entry, i < j.
  Scalar& upper(int i, int j) { return upper_[packed_index(n_, i, j)]; }
  const Scalar& upper(int i, int j) const { return upper_[packed_index(n_, i, j)]; }

  std::span<const Scalar> entries() const { return upper_; }
  std::span<Scalar> entries() { return upper_; }

  SkewMatrix& operator+=(const SkewMatrix& o) {
    detail::require_same_dim(size(), o.size(), "SkewMatrix +=");
    for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] += o.upper_[k];
    return *this;
  }
  SkewMatrix& operator-=(const SkewMatrix& o) {
    detail::require_same_dim(size(), o.size(), "SkewMatrix -=");
    for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] -= o.upper_[k];
    return *this;
  }
  SkewMatrix& operator*=(const Scalar& c) {
    for (auto& e : upper_) e *= c;
    return *this;
  }
  friend SkewMatrix operator+(SkewMatrix a, const SkewMatrix& b) { return a += b; }
  friend SkewMatrix operator-(SkewMatrix a, const SkewMatrix& b) { return a -= b; }
  friend SkewMatrix operator*(const Scalar& c, SkewMatrix a) { return a *= c; }
  friend SkewMatrix operator-(SkewMatrix a) {
    for (auto& e : a.upper_) e = -e;
    return a;
  }
  friend bool operator==(const SkewMatrix&, const SkewMatrix&) = default;

  /// Sum of squares of the stored (upper) entries.
  Scalar upper_square_sum() const {
    Scalar s(0);
    for (const auto& e : upper_) s += e * e;
    return s;
  }

 private:
  int n_ = 0;
  std::vector<Scalar> upper_;
};

/// Hilbert-Schmidt norm: each stored entry appears twice in the full matrix.
inline double hs_norm(const SkewMatrix<double>& m) { return std::sqrt(2.0 * m.upper_square_sum()); }

/// u (.) v = u v^t - v u^t.
template <class Scalar>
SkewMatrix<Scalar> odot(std::span<const Scalar> u, std::span<const Scalar> v) {
  detail::require_same_dim(u.size(), v.size(), "odot");
  const int n = static_cast<int>(u.size());
  SkewMatrix<Scalar> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.upper(i, j) = u[i] * v[j] - v[i] * u[j];
  return out;
}

template <class Scalar>
SkewMatrix<Scalar> odot(const std::vector<Scalar>& u, const std::vector<Scalar>& v) {
  return odot(std::span<const Scalar>(u), std::span<const Scalar>(v));
}

/// acc += c * (u (.) v), without allocating.
template <class Scalar>
void add_odot(SkewMatrix<Scalar>& acc, const Scalar& c, const Scalar* u, const Scalar* v) {
  const int n = acc.dim();
  auto e = acc.entries();
  std::size_t k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++k) e[k] += c * (u[i] * v[j] - v[i] * u[j]);
}

/// Point of H in coordinates (x1, x2, z).
template <class Scalar>
struct HeisenbergPoint {
  Scalar x1{0};
  Scalar x2{0};
  Scalar z{0};
  friend bool operator==(const HeisenbergPoint&, const HeisenbergPoint&) = default;
};

using HPoint = HeisenbergPoint<double>;

template <class Scalar>
HeisenbergPoint<Scalar> heis_mul(const HeisenbergPoint<Scalar>& a, const HeisenbergPoint<Scalar>& b) {
  return {a.x1 + b.x1, a.x2 + b.x2, a.z + b.z + (a.x1 * b.x2 - a.x2 * b.x1) / Scalar(2)};
}

template <class Scalar>
HeisenbergPoint<Scalar> heis_inverse(const HeisenbergPoint<Scalar>& a) {
  return {-a.x1, -a.x2, -a.z};
}

/// Homogeneous quasinorm sqrt(x1^2 + x2^2 + |z|).
inline double quasinorm_H(const HPoint& a) { return std::sqrt(a.x1 * a.x1 + a.x2 * a.x2 + std::abs(a.z)); }

/// Element (x, z) of G_n.
template <class Scalar>
struct CarnotElement {
  std::vector<Scalar> x;
  SkewMatrix<Scalar> z;

  CarnotElement() = default;
  explicit CarnotElement(int n) : x(static_cast<std::size_t>(n), Scalar(0)), z(n) {}
  CarnotElement(std::vector<Scalar> x_, SkewMatrix<Scalar> z_) : x(std::move(x_)), z(std::move(z_)) {
    detail::require_same_dim(x.size(), static_cast<std::size_t>(z.dim()), "CarnotElement");
  }

  int dim() const { return static_cast<int>(x.size()); }
  static CarnotElement identity(int n) { return CarnotElement(n); }
  friend bool operator==(const CarnotElement&, const CarnotElement&) = default;
};

using GPoint = CarnotElement<double>;

/// (u, A) * (v, B) = (u + v, A + B + u (.) v / 2).
template <class Scalar>
CarnotElement<Scalar> carnot_mul(const CarnotElement<Scalar>& a, const CarnotElement<Scalar>& b) {
  detail::require_same_dim(a.x.size(), b.x.size(), "carnot_mul");
  CarnotElement<Scalar> out(a.dim());
  for (std::size_t i = 0; i < a.x.size(); ++i) out.x[i] = a.x[i] + b.x[i];
  out.z = a.z + b.z;
  add_odot(out.z, Scalar(1) / Scalar(2), a.x.data(), b.x.data());
  return out;
}

template <class Scalar>
CarnotElement<Scalar> carnot_inverse(const CarnotElement<Scalar>& g) {
  CarnotElement<Scalar> out(g.dim());
  for (std::size_t i = 0; i < g.x.size(); ++i) out.x[i] = -g.x[i];
  out.z = -g.z;
  return out;
}

/// dil_lambda(x, z) = (lambda x, lambda^2 z).
template <class Scalar>
CarnotElement<Scalar> dilate(const Scalar& lambda, const CarnotElement<Scalar>& g) {
  if (!(lambda > Scalar(0))) throw std::domain_error("dilate: lambda must be positive");
  CarnotElement<Scalar> out = g;
  for (auto& xi : out.x) xi *= lambda;
  out.z *= lambda * lambda;
  return out;
}

template <class Scalar>
HeisenbergPoint<Scalar> dilate(const Scalar& lambda, const HeisenbergPoint<Scalar>& a) {
  if (!(lambda > Scalar(0))) throw std::domain_error("dilate: lambda must be positive");
  return {lambda * a.x1, lambda * a.x2, lambda * lambda * a.z};
}

/// Vertical part of g^{-1} * g~, i.e. z~ - z - x (.) x~ / 2.
template <class Scalar>
SkewMatrix<Scalar> zeta(const CarnotElement<Scalar>& g, const CarnotElement<Scalar>& gt) {
  detail::require_same_dim(g.x.size(), gt.x.size(), "zeta");
  SkewMatrix<Scalar> out = gt.z - g.z;
  add_odot(out, Scalar(-1) / Scalar(2), g.x.data(), gt.x.data());
  return out;
}

/// Scalar analogue on H.
template <class Scalar>
Scalar zeta(const HeisenbergPoint<Scalar>& a, const HeisenbergPoint<Scalar>& b) {
  return b.z - a.z - (a.x1 * b.x2 - a.x2 * b.x1) / Scalar(2);
}

/// H -> G_2, z becomes the (1,2) entry.
template <class Scalar>
CarnotElement<Scalar> to_carnot(const HeisenbergPoint<Scalar>& a) {
  CarnotElement<Scalar> g(2);
  g.x = {a.x1, a.x2};
  g.z.upper(0, 1) = a.z;
  return g;
}

template <class Scalar>
HeisenbergPoint<Scalar> to_heisenberg(const CarnotElement<Scalar>& g) {
  if (g.dim() != 2) throw std::invalid_argument("to_heisenberg: element is not in G_2");
  return {g.x[0], g.x[1], g.z.upper(0, 1)};
}

/// psi: R^3 -> so(3), (a, b, c) -> [[0,-c,b],[c,0,-a],[-b,a,0]].
template <class Scalar>
SkewMatrix<Scalar> so3_hat(std::span<const Scalar> w) {
  detail::require_same_dim(w.size(), 3, "so3_hat");
  SkewMatrix<Scalar> m(3);
  m.upper(0, 1) = -w[2];
  m.upper(0, 2) = w[1];
  m.upper(1, 2) = -w[0];
  return m;
}

template <class Scalar>
std::vector<Scalar> cross(std::span<const Scalar> u, std::span<const Scalar> v) {
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
}

/// True iff psi(u ^ v) = -u (.) v entrywise within 1e-12.
inline bool so3_iso_check(std::span<const double> u, std::span<const double> v) {
  detail::require_same_dim(u.size(), 3, "so3_iso_check");
  detail::require_same_dim(v.size(), 3, "so3_iso_check");
  const auto w = cross(u, v);
  const auto lhs = so3_hat(std::span<const double>(w));
  const auto rhs = -odot(u, v);
  for (std::size_t k = 0; k < lhs.size(); ++k)
    if (std::abs(lhs.entries()[k] - rhs.entries()[k]) > 1e-12) return false;
  return true;
}

}  // namespace subriem

#pragma once

// Brownian paths and Levy areas from i.i.d. Gaussian Legendre coefficients.
//
// Q_k is the degree-k Legendre polynomial moved to [0, T] and normalised in
// L^2[0, T]; with the classical P_k (P_k(1) = 1) that is
// Q_k(s) = sqrt((2k+1)/T) P_k(-1 + 2s/T). Then B_t = sum_k xi_k int_0^t Q_k and
// the Levy area at T collapses to the bilinear series T sum_k alpha_k xi_k (.) xi_{k+1}.

#include "group.hpp"
#include "mc.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace subriem {

/// alpha_k = 1 / (2 sqrt((2k+1)(2k+3))).
inline double alpha(int k) {
  if (k < 0) throw std::domain_error("alpha: k must be nonnegative");
  const double a = 2.0 * k + 1.0;
  return 0.5 / std::sqrt(a * (a + 2.0));
}

/// alpha_k^2 + alpha_{k+1}^2 = 1 / (2 (2k+1)(2k+5)).
inline double alpha_pair_sq(int k) { return 0.5 / ((2.0 * k + 1.0) * (2.0 * k + 5.0)); }

/// P_0(y), ..., P_{kmax}(y) by the three-term recurrence.
inline std::vector<double> legendre_values(int kmax, double y) {
  std::vector<double> p(static_cast<std::size_t>(kmax) + 1);
  p[0] = 1.0;
  if (kmax >= 1) p[1] = y;
  for (int k = 1; k < kmax; ++k)
    p[static_cast<std::size_t>(k) + 1] =
        ((2.0 * k + 1.0) * y * p[static_cast<std::size_t>(k)] - k * p[static_cast<std::size_t>(k) - 1]) / (k + 1.0);
  return p;
}

namespace detail {
inline void check_time(double t, double T) {
  if (!(T > 0.0)) throw std::domain_error("horizon T must be positive");
  if (!(t >= 0.0 && t <= T)) throw std::domain_error("time outside [0, T]");
}

/// int_0^t Q_k for all k <= kmax, from one pass of the recurrence.
inline std::vector<double> integrals_Q(int kmax, double t, double T) {
  check_time(t, T);
  const double y = -1.0 + 2.0 * t / T;
  const auto p = legendre_values(kmax + 1, y);
  const double s = std::sqrt(T) / 2.0;
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
  out[0] = s * (y + 1.0);
  for (int k = 1; k <= kmax; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    out[uk] = s * (p[uk + 1] - p[uk - 1]) / std::sqrt(2.0 * k + 1.0);
  }
  return out;
}
}  // namespace detail

/// int_0^t Q_k(s) ds.
inline double integral_Q(int k, double t, double T) {
  if (k < 0) throw std::domain_error("integral_Q: k must be nonnegative");
  return detail::integrals_Q(k, t, T)[static_cast<std::size_t>(k)];
}

/// Column k holds xi_k; K_path = cols - 1.
struct CoefficientStream {
  int n = 0;
  double T = 1.0;
  Eigen::MatrixXd xi;

  CoefficientStream() = default;
  CoefficientStream(int n_, double T_, int K_path) : n(n_), T(T_), xi(Eigen::MatrixXd::Zero(n_, K_path + 1)) {
    if (n_ < 1) throw std::invalid_argument("CoefficientStream: n must be positive");
    if (K_path < 1) throw std::invalid_argument("CoefficientStream: K_path must be at least 1");
    if (!(T_ > 0.0)) throw std::domain_error("CoefficientStream: T must be positive");
  }

  int K_path() const { return static_cast<int>(xi.cols()) - 1; }
  auto col(int k) { return xi.col(k); }
  auto col(int k) const { return xi.col(k); }

  /// Fresh i.i.d. N(0, I_n) coefficients, drawn k-major.
  static CoefficientStream sample(int n, double T, int K_path, RandomStream& rng) {
    CoefficientStream s(n, T, K_path);
    for (Eigen::Index k = 0; k < s.xi.cols(); ++k)
      for (Eigen::Index i = 0; i < n; ++i) s.xi(i, k) = rng.normal();
    return s;
  }
};

struct PathSample {
  std::vector<double> times;
  Eigen::MatrixXd values;  // column j = B at times[j]
};

inline PathSample synth_path(const CoefficientStream& s, const std::vector<double>& times) {
  if (s.xi.cols() == 0) throw std::invalid_argument("synth_path: empty stream");
  PathSample out{times, Eigen::MatrixXd::Zero(s.n, static_cast<Eigen::Index>(times.size()))};
  const int K = s.K_path();
  for (std::size_t j = 0; j < times.size(); ++j) {
    const auto q = detail::integrals_Q(K, times[j], s.T);
    for (int k = 0; k <= K; ++k) {
      const double w = q[static_cast<std::size_t>(k)];
      if (w != 0.0) out.values.col(static_cast<Eigen::Index>(j)) += w * s.xi.col(k);
    }
  }
  return out;
}

/// T sum_{k < K_path} alpha_k xi_k (.) xi_{k+1}.
inline SkewMatrix<double> levy_area_series(const CoefficientStream& s) {
  SkewMatrix<double> A(s.n);
  for (int k = 0; k < s.K_path(); ++k) add_odot(A, s.T * alpha(k), s.xi.col(k).data(), s.xi.col(k + 1).data());
  return A;
}

/// Endpoint at time T of the Brownian motion started at g and driven by s.
inline GPoint carnot_endpoint(const GPoint& g, const CoefficientStream& s) {
  detail::require_same_dim(static_cast<std::size_t>(g.dim()), static_cast<std::size_t>(s.n), "carnot_endpoint");
  const double sT = std::sqrt(s.T);
  GPoint out = g;
  for (int i = 0; i < s.n; ++i) out.x[static_cast<std::size_t>(i)] += sT * s.xi(i, 0);
  add_odot(out.z, 0.5 * sT, g.x.data(), s.xi.col(0).data());
  out.z += levy_area_series(s);
  return out;
}

inline HPoint heisenberg_endpoint(const HPoint& g, const CoefficientStream& s) {
  if (s.n != 2) throw std::invalid_argument("heisenberg_endpoint: stream must be two-dimensional");
  return to_heisenberg(carnot_endpoint(to_carnot(g), s));
}

/// Euler scheme with left-point stochastic integral; an independent check of the series.
inline GPoint sde_oracle(const GPoint& g, double T, int steps, RandomStream& rng) {
  if (steps < 1) throw std::invalid_argument("sde_oracle: steps must be at least 1");
  if (!(T > 0.0)) throw std::domain_error("sde_oracle: T must be positive");
  const int n = g.dim();
  const double sdt = std::sqrt(T / steps);
  GPoint cur = g;
  std::vector<double> dx(static_cast<std::size_t>(n));
  for (int s = 0; s < steps; ++s) {
    for (auto& d : dx) d = sdt * rng.normal();
    add_odot(cur.z, 0.5, cur.x.data(), dx.data());
    for (int i = 0; i < n; ++i) cur.x[static_cast<std::size_t>(i)] += dx[static_cast<std::size_t>(i)];
  }
  return cur;
}

/// Smallest K whose per-entry Levy-area tail standard deviation, relative to T,
/// sqrt(1 / (2 (2K + 1))), is at most tol.
inline int truncation_index(double tol, double T = 1.0) {
  if (!(tol > 0.0)) throw std::domain_error("truncation_index: tol must be positive");
  if (!(T > 0.0)) throw std::domain_error("truncation_index: T must be positive");
  const double k = std::ceil((1.0 / (2.0 * tol * tol) - 1.0) / 2.0);
  if (k > 1e9) throw std::overflow_error("truncation_index: tolerance too small");
  return std::max(1, static_cast<int>(k));
}

inline constexpr int kDefaultPathTerms = 256;

}  // namespace subriem

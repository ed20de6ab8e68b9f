#pragma once

// Explicit constants of the total-variation bounds and the special functions
// behind them: inverse moments and Laplace transform of
// S_h = (2/pi^2) sum_l Y_l / l^2 (Y_l i.i.d. Gamma(h, 1)), and the exponential
// moment series for the inverse trace of the weighted Wishart matrix.

#include "legendre.hpp"
#include "mc.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace subriem {

inline constexpr double kPi = std::numbers::pi;

enum class HeisenbergVariant { ProofStage, Improved };

struct ConstantPair {
  double C1 = 0.0;
  double C2 = 0.0;
};

inline ConstantPair heisenberg_constants(HeisenbergVariant v) {
  const double s2pi = std::sqrt(2.0 * kPi);
  switch (v) {
    case HeisenbergVariant::ProofStage:
      return {(1.0 + std::sqrt(30.0)) / s2pi, std::sqrt(22.5)};
    case HeisenbergVariant::Improved: {
      const double pisqrtpi = kPi * std::sqrt(kPi);
      return {(1.0 + 5.0 * std::sqrt(28.0) / pisqrtpi) / s2pi, 5.0 * std::sqrt(21.0) / pisqrtpi};
    }
  }
  throw std::invalid_argument("heisenberg_constants: unknown variant");
}

inline void require_rank(int n, const char* what) {
  if (n < 2) throw std::domain_error(std::string(what) + ": n must be at least 2");
}

/// C2(n) = (6 sqrt(n) + 4 / sqrt(n)) / sqrt(pi), C1(n) = 1/sqrt(2 pi) + sqrt(2(n-1)/3) C2(n).
inline ConstantPair carnot_constants(int n) {
  require_rank(n, "carnot_constants");
  const double sn = std::sqrt(static_cast<double>(n));
  const double c2 = (6.0 * sn + 4.0 / sn) / std::sqrt(kPi);
  return {1.0 / std::sqrt(2.0 * kPi) + std::sqrt(2.0 * (n - 1) / 3.0) * c2, c2};
}

/// 8 n^2 (3n + 4)^2.
inline double c3(int n) {
  require_rank(n, "c3");
  const double a = 3.0 * n + 4.0;
  return 8.0 * n * n * a * a;
}

/// (6 sqrt(n) + 4 / sqrt(n))^2: multiplies the squared shift size in the entropy bound.
inline double entropy_constant(int n) {
  require_rank(n, "entropy_constant");
  const double sn = std::sqrt(static_cast<double>(n));
  const double a = 6.0 * sn + 4.0 / sn;
  return a * a;
}

/// (6 sqrt(2n) + 4 sqrt(2) / sqrt(n))^2 = 2 (3m+1)^2 / (m-n-1) at m = 2n+1.
inline double reverse_poincare_constant(int n) {
  require_rank(n, "reverse_poincare_constant");
  const double sn = std::sqrt(static_cast<double>(n));
  const double a = 6.0 * std::sqrt(2.0) * sn + 4.0 * std::sqrt(2.0) / sn;
  return a * a;
}

/// m_q = (E|Z|^q)^{1/q} = (2^{q/2} Gamma((q+1)/2) / sqrt(pi))^{1/q}.
inline double gaussian_abs_moment(double q) {
  if (!(q >= 1.0)) throw std::domain_error("gaussian_abs_moment: q must be at least 1");
  const double log_mq = 0.5 * q * std::log(2.0) + std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(kPi);
  return std::exp(log_mq / q);
}

struct PairSeriesConstant {
  double value = 0.0;   // 5 sqrt(42) / pi
  double gamma = 0.0;   // 1/42
  std::vector<double> c2_head;
};

/// c^2 runs over alpha_k^2 + alpha_{k+1}^2 for k = 1, 2, 4, 5, 7, 8, ...
inline PairSeriesConstant pair_series_constant(int head = 6) {
  PairSeriesConstant r;
  r.value = 5.0 * std::sqrt(42.0) / kPi;
  r.gamma = 1.0 / 42.0;
  for (int j = 0; static_cast<int>(r.c2_head.size()) < head; ++j) {
    r.c2_head.push_back(alpha_pair_sq(3 * j + 1));
    if (static_cast<int>(r.c2_head.size()) < head) r.c2_head.push_back(alpha_pair_sq(3 * j + 2));
  }
  return r;
}

// ---------------------------------------------------------------------------
// S_h

struct SeriesValue {
  double value = 0.0;       // best estimate of the full series
  double partial = 0.0;     // sum of the first `terms` terms
  double tail_bound = 0.0;  // |value - true value| <= tail_bound
  int terms = 0;
};

namespace detail {
/// log(Gamma(t+h) / Gamma(t+1)) without the cancellation of two lgamma calls;
/// past 1e8 the Stirling difference (h-1) ln t + h (h-1) / (2t) is exact to O(t^-2).
inline double log_gamma_ratio(double t, double h) {
  if (t < 1e8) return std::log(boost::math::tgamma_delta_ratio(t + h, 1.0 - h));
  return (h - 1.0) * std::log(t) + h * (h - 1.0) / (2.0 * t);
}
}  // namespace detail

/// E[S_h^{-a}] = 2^{1+h-a} Gamma(2a+h) / (Gamma(h) Gamma(a)) sum_n Gamma(n+h)/Gamma(n+1) (2n+h)^{-(2a+h)}.
/// The tail beyond `terms` is bracketed by the integral test: for decreasing f,
/// int_N^inf f <= sum_{n>=N} f(n) <= f(N) + int_N^inf f.
inline SeriesValue s_h_inverse_moment(double h, double a, int terms = 1000) {
  if (!(h > 0.0) || !(a > 0.0)) throw std::domain_error("s_h_inverse_moment: h and a must be positive");
  if (terms < 1) throw std::invalid_argument("s_h_inverse_moment: terms must be positive");
  const double e = 2.0 * a + h;
  auto log_f = [&](double n) { return detail::log_gamma_ratio(n, h) - e * std::log(2.0 * n + h); };
  // For h <= 1 f decreases everywhere; for h > 1 it does past n = h^2.
  int N = terms;
  if (h > 1.0) N = std::max(N, static_cast<int>(std::ceil(h * h)) + 1);
  double partial = 0.0;
  for (int n = N - 1; n >= 0; --n) partial += std::exp(log_f(n));  // small terms first
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate([&](double t) { return std::exp(log_f(t)); },
                                               static_cast<double>(N), std::numeric_limits<double>::infinity());
  const double fN = std::exp(log_f(N));
  const double log_pref = (1.0 + h - a) * std::log(2.0) + std::lgamma(e) - std::lgamma(h) - std::lgamma(a);
  const double pref = std::exp(log_pref);
  SeriesValue out;
  out.terms = N;
  out.partial = pref * partial;
  out.value = pref * (partial + integral + 0.5 * fN);
  out.tail_bound = pref * 0.5 * fN * (1.0 + 1e-12) + 1e-15 * std::abs(out.value);
  return out;
}

/// (4a+1) Gamma(2a+1) / (2^a Gamma(a+1)), an upper bound for E[S_1^{-a}].
inline double s1_inverse_moment_bound(double a) {
  return (4.0 * a + 1.0) * std::exp(std::lgamma(2.0 * a + 1.0) - a * std::log(2.0) - std::lgamma(a + 1.0));
}

/// 2 sqrt(2) + sqrt(2)/2, an upper bound for E[S_{1/2}^{-1/2}].
inline double s_half_inverse_sqrt_bound() { return 2.0 * std::sqrt(2.0) + std::sqrt(2.0) / 2.0; }

/// E[exp(-lambda S_h)] = (sqrt(2 lambda) / sinh sqrt(2 lambda))^h.
inline double s_h_laplace(double lambda, double h) {
  if (!(h > 0.0)) throw std::domain_error("s_h_laplace: h must be positive");
  if (!(lambda >= 0.0)) throw std::domain_error("s_h_laplace: lambda must be nonnegative");
  if (lambda == 0.0) return 1.0;
  const double x = std::sqrt(2.0 * lambda);
  double log_ratio;
  if (x < 1e-4) {
    log_ratio = -x * x / 6.0 + x * x * x * x / 180.0;
  } else if (x < 20.0) {
    log_ratio = std::log(x / std::sinh(x));
  } else {
    log_ratio = std::log(2.0 * x) - x - std::log1p(-std::exp(-2.0 * x));
  }
  return std::exp(h * log_ratio);
}

/// One draw of S_h truncated after L terms plus the mean of the omitted tail,
/// h (2/pi^2) sum_{l > L} 1/l^2 = h (2/pi^2) psi'(L+1).
inline double sample_s_h(double h, int L, RandomStream& rng) {
  double s = 0.0;
  if (h == 1.0) {
    for (int l = L; l >= 1; --l) s += -std::log1p(-rng.uniform()) / (static_cast<double>(l) * l);
  } else if (h == 0.5) {
    for (int l = L; l >= 1; --l) {
      const double z = rng.normal();
      s += 0.5 * z * z / (static_cast<double>(l) * l);
    }
  } else {
    std::gamma_distribution<double> G(h, 1.0);
    for (int l = L; l >= 1; --l) s += G(rng.engine()) / (static_cast<double>(l) * l);
  }
  s += h * boost::math::trigamma(static_cast<double>(L) + 1.0);
  return 2.0 / (kPi * kPi) * s;
}

/// 1 + sum_q (C3(n)^p / (T pi)^{2p} lambda)^q (4pq+1) Gamma(2pq+1) / (q! Gamma(pq+1)).
/// Summation stops once the term ratio has stayed below one and a geometric tail
/// bound falls under 1e-16 of the running sum.
inline SeriesValue exp_moment_series(double lambda, double p, int n, double T, int terms = 10000) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::domain_error("exp_moment_series: p must lie in (0, 1)");
  if (!(lambda >= 0.0)) throw std::domain_error("exp_moment_series: lambda must be nonnegative");
  if (!(T > 0.0)) throw std::domain_error("exp_moment_series: T must be positive");
  SeriesValue out;
  if (lambda == 0.0) {
    out.value = out.partial = 1.0;
    return out;
  }
  const double log_base = p * std::log(c3(n)) - 2.0 * p * std::log(T * kPi) + std::log(lambda);
  auto log_term = [&](int q) {
    const double pq = p * q;
    return q * log_base + std::log(4.0 * pq + 1.0) + std::lgamma(2.0 * pq + 1.0) - std::lgamma(q + 1.0) -
           std::lgamma(pq + 1.0);
  };
  double sum = 1.0;
  double prev = log_term(1);
  sum += std::exp(prev);
  for (int q = 2; q <= terms; ++q) {
    const double cur = log_term(q);
    sum += std::exp(cur);
    const double next = log_term(q + 1);
    const double ratio = std::exp(next - cur);
    // The ratio decays like q^{p-1}; once below one it stays below one.
    if (ratio < 1.0 && cur < prev) {
      const double tail = std::exp(next) / (1.0 - ratio);
      if (tail <= 1e-16 * sum) {
        out.value = sum + tail;
        out.partial = sum;
        out.tail_bound = tail;
        out.terms = q;
        return out;
      }
    }
    prev = cur;
  }
  throw std::runtime_error("exp_moment_series: no convergence within the allowed number of terms");
}

// ---------------------------------------------------------------------------
// Table

struct ConstantEntry {
  std::string name;
  double value;
  std::string formula;
  std::string provenance;
};

inline std::vector<ConstantEntry> constant_table() {
  std::vector<ConstantEntry> t;
  const auto hp = heisenberg_constants(HeisenbergVariant::ProofStage);
  const auto hi = heisenberg_constants(HeisenbergVariant::Improved);
  t.push_back({"alpha_0", alpha(0), "1/(2*sqrt(3))", "first Levy-area series coefficient"});
  t.push_back({"C1_heisenberg_proof_stage", hp.C1, "(1+sqrt(30))/sqrt(2*pi)",
               "horizontal constant achieved by the two-index Heisenberg coupling"});
  t.push_back({"C2_heisenberg_proof_stage", hp.C2, "sqrt(22.5)",
               "vertical constant achieved by the two-index Heisenberg coupling"});
  t.push_back({"C1_heisenberg_improved", hi.C1, "(1+5*sqrt(28)/(pi*sqrt(pi)))/sqrt(2*pi)",
               "horizontal Heisenberg constant with infinitely many coupled coefficients"});
  t.push_back({"C2_heisenberg_improved", hi.C2, "5*sqrt(21)/(pi*sqrt(pi))",
               "vertical Heisenberg constant with infinitely many coupled coefficients"});
  const auto r2 = pair_series_constant();
  t.push_back({"refined_inverse_norm_constant", r2.value, "5*sqrt(42)/pi",
               "replacement for E[1/|V|]/sqrt(alpha_2^2+alpha_3^2) in the refined Heisenberg coupling"});
  t.push_back({"refined_gamma", r2.gamma, "1/42", "lower envelope factor of the refined coupling weights"});
  t.push_back({"S_half_inverse_sqrt_bound", s_half_inverse_sqrt_bound(), "2*sqrt(2)+sqrt(2)/2",
               "upper bound on E[S_{1/2}^{-1/2}]"});
  for (double a : {0.5, 1.0, 2.0})
    t.push_back({"S1_inverse_moment_bound_a" + std::to_string(a).substr(0, 3), s1_inverse_moment_bound(a),
                 "(4a+1)*Gamma(2a+1)/(2^a*Gamma(a+1))", "upper bound on E[S_1^{-a}]"});
  for (int n = 2; n <= 6; ++n) {
    const auto cn = carnot_constants(n);
    const std::string sn = std::to_string(n);
    t.push_back({"C2_carnot_n" + sn, cn.C2, "(6*sqrt(n)+4/sqrt(n))/sqrt(pi)", "vertical constant on G_" + sn});
    t.push_back({"C1_carnot_n" + sn, cn.C1, "1/sqrt(2*pi)+sqrt(2*(n-1)/3)*C2(n)", "horizontal constant on G_" + sn});
    t.push_back({"C3_n" + sn, c3(n), "8*n^2*(3n+4)^2", "weighted Wishart inverse-trace moment constant on G_" + sn});
    t.push_back({"entropy_constant_n" + sn, entropy_constant(n), "(6*sqrt(n)+4/sqrt(n))^2",
                 "vertical factor of the entropy and log-Harnack bound on G_" + sn});
    t.push_back({"reverse_poincare_constant_n" + sn, reverse_poincare_constant(n), "(6*sqrt(2n)+4*sqrt(2)/sqrt(n))^2",
                 "vertical factor of the reverse Poincare bound on G_" + sn});
  }
  return t;
}

}  // namespace subriem

#pragma once

// Exact couplings at a fixed time T of two sub-Riemannian Brownian motions
// started at g and g~.
//
// Both processes share every Legendre coefficient except a finite set of
// "modified" indices: 0 and 3 on H, 0, 3, ..., 3m (m = 2n + 1) on G_n. The
// modified coefficients of the second process must equal those of the first
// plus a target shift that is a function of the shared coefficients only, so
// a joint maximal coupling of the modified block against its shift produces
// the meeting event with the largest conditional probability. Since only the
// modified indices and their neighbours enter the endpoint difference, that
// difference is a finite sum and meeting is checked without truncation.

#include "constants.hpp"
#include "gaussian_coupling.hpp"
#include "group.hpp"
#include "legendre.hpp"
#include "mc.hpp"
#include "sylvester.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace subriem {

struct CouplingOptions {
  int path_terms = kDefaultPathTerms;  // K_path used for the reported endpoints
  bool endpoints = true;               // skip endpoint synthesis when only success matters
  double min_v_norm = 1e-12;           // below this the Heisenberg V counts as degenerate
  int max_resamples = 1000;
};

struct CouplingOutcome {
  GPoint endpoint;
  GPoint endpoint_tilde;
  bool success = false;
  /// (index, target shift of xi~_index - xi_index). Index 0 carries (x - x~)/sqrt(T).
  std::vector<std::pair<int, Eigen::VectorXd>> shifts;
  SkewMatrix<double> W;
  double condition = 1.0;
  int resamples = 0;
  double horizontal_gap = 0.0;  // |X~_T - X_T| from the finite sum
  double vertical_gap = 0.0;    // ||z~_T - z_T||_HS from the finite sum
  CoefficientStream xi;
  CoefficientStream xi_tilde;
};

/// Coefficients that differ between the two processes, sorted.
inline std::vector<int> modified_indices_heisenberg() { return {0, 3}; }

inline std::vector<int> modified_indices_carnot(int n) {
  require_rank(n, "modified_indices_carnot");
  std::vector<int> out{0};
  for (int k = 1; k <= 2 * n + 1; ++k) out.push_back(3 * k);
  return out;
}

/// Exact endpoint difference (horizontal Euclidean norm, vertical HS norm) of two
/// streams that agree off `modified`. Only k with k or k+1 modified contribute.
inline std::pair<double, double> endpoint_gap(const GPoint& g, const GPoint& gt, const CoefficientStream& xi,
                                              const CoefficientStream& xit, const std::vector<int>& modified) {
  const int n = g.dim();
  const double T = xi.T, sT = std::sqrt(T);
  double h2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = gt.x[static_cast<std::size_t>(i)] - g.x[static_cast<std::size_t>(i)] + sT * (xit.xi(i, 0) - xi.xi(i, 0));
    h2 += d * d;
  }
  SkewMatrix<double> dz = gt.z - g.z;
  add_odot(dz, 0.5 * sT, gt.x.data(), xit.col(0).data());
  add_odot(dz, -0.5 * sT, g.x.data(), xi.col(0).data());
  std::set<int> S;
  for (int j : modified) {
    if (j - 1 >= 0) S.insert(j - 1);
    S.insert(j);
  }
  for (int k : S) {
    if (k + 1 > xi.K_path()) continue;
    add_odot(dz, T * alpha(k), xit.col(k).data(), xit.col(k + 1).data());
    add_odot(dz, -T * alpha(k), xi.col(k).data(), xi.col(k + 1).data());
  }
  return {std::sqrt(h2), hs_norm(dz)};
}

namespace detail {

/// Unit vector along x - x~, or e_1 when the horizontal parts coincide.
inline Eigen::VectorXd horizontal_direction(const std::vector<double>& x, const std::vector<double>& xt, double& dist) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = x[static_cast<std::size_t>(i)] - xt[static_cast<std::size_t>(i)];
  dist = d.norm();
  if (dist > 0.0) return d / dist;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(0) = 1.0;
  return e;
}

/// W = -zeta + (x - x~) (.) (sqrt(T)/2 xi_0 - sqrt(T) alpha_0 xi_1). Reads xi_0 only
/// through its component orthogonal to x - x~, which `perp` carries.
inline SkewMatrix<double> shift_rhs(const GPoint& g, const GPoint& gt, const Eigen::VectorXd& perp,
                                    const Eigen::VectorXd& xi1, double T) {
  const int n = g.dim();
  const double sT = std::sqrt(T);
  SkewMatrix<double> W = -zeta(g, gt);
  std::vector<double> d(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    d[static_cast<std::size_t>(i)] = g.x[static_cast<std::size_t>(i)] - gt.x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(i)] = 0.5 * sT * perp(i) - sT * alpha(0) * xi1(i);
  }
  add_odot(W, 1.0, d.data(), y.data());
  return W;
}

/// Couple the stacked block (<xi_0, f1>, xi_{j1}, xi_{j2}, ...) against its target shift
/// and write the results into both streams.
inline bool couple_block(CoefficientStream& xi, CoefficientStream& xit, const Eigen::VectorXd& f1,
                         const Eigen::VectorXd& perp, const Eigen::VectorXd& delta, const std::vector<int>& blocks,
                         RandomStream& rng) {
  const int n = xi.n;
  const CoupledPair cp = maximal_coupling_shifted(delta, Eigen::VectorXd::Zero(delta.size()), rng);
  const Eigen::VectorXd Z = cp.X - delta;
  const Eigen::VectorXd& Zt = cp.Y;
  xit = xi;
  xi.xi.col(0) = perp + Z(0) * f1;
  xit.xi.col(0) = perp + Zt(0) * f1;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto off = 1 + static_cast<Eigen::Index>(b) * n;
    xi.xi.col(blocks[b]) = Z.segment(off, n);
    xit.xi.col(blocks[b]) = Zt.segment(off, n);
  }
  return cp.met;
}

inline void finish(CouplingOutcome& out, const GPoint& g, const GPoint& gt, const std::vector<int>& modified,
                   const CouplingOptions& opt) {
  const auto gap = endpoint_gap(g, gt, out.xi, out.xi_tilde, modified);
  out.horizontal_gap = gap.first;
  out.vertical_gap = gap.second;
  if (opt.endpoints) {
    out.endpoint = carnot_endpoint(g, out.xi);
    out.endpoint_tilde = carnot_endpoint(gt, out.xi_tilde);
  }
}

}  // namespace detail

/// Two-index coupling on H: xi~_k = xi_k for k not in {0, 3}.
inline CouplingOutcome couple_heisenberg(const HPoint& g, const HPoint& gt, double T, RandomStream& rng,
                                         const CouplingOptions& opt = {}) {
  if (!(T > 0.0)) throw std::domain_error("couple_heisenberg: T must be positive");
  const GPoint G = to_carnot(g), Gt = to_carnot(gt);
  const int K = std::max(opt.path_terms, 4);
  double dist = 0.0;
  const Eigen::VectorXd f1 = detail::horizontal_direction(G.x, Gt.x, dist);
  const Eigen::Vector2d f2(-f1(1), f1(0));
  const double c = std::sqrt(alpha(2) * alpha(2) + alpha(3) * alpha(3));

  CouplingOutcome out;
  for (;;) {
    out.xi = CoefficientStream::sample(2, T, K, rng);
    const Eigen::Vector2d V = (alpha(3) * out.xi.col(4) - alpha(2) * out.xi.col(2)) / c;
    const double nv = V.norm();
    if (nv < opt.min_v_norm) {
      if (++out.resamples > opt.max_resamples) throw std::runtime_error("couple_heisenberg: too many resamples");
      continue;
    }
    const Eigen::VectorXd perp = out.xi.col(0).dot(f2) * f2;
    out.W = detail::shift_rhs(G, Gt, perp, out.xi.col(1), T);
    const double w = out.W.upper(0, 1);
    const Eigen::Vector2d E1 = V / nv, E2(-E1(1), E1(0));
    const Eigen::Vector2d shift3 = -w / (T * c * nv) * E2;

    Eigen::VectorXd delta(3);
    delta << dist / std::sqrt(T), shift3;
    out.shifts = {{0, (dist / std::sqrt(T)) * f1}, {3, shift3}};
    out.success = detail::couple_block(out.xi, out.xi_tilde, f1, perp, delta, {3}, rng);
    break;
  }
  detail::finish(out, G, Gt, modified_indices_heisenberg(), opt);
  return out;
}

/// Coupling on G_n through the T-Sylvester equation with m = 2n + 1 blocks.
inline CouplingOutcome couple_carnot(const GPoint& g, const GPoint& gt, double T, RandomStream& rng,
                                     const CouplingOptions& opt = {}) {
  if (!(T > 0.0)) throw std::domain_error("couple_carnot: T must be positive");
  detail::require_same_dim(g.x.size(), gt.x.size(), "couple_carnot");
  const int n = g.dim();
  require_rank(n, "couple_carnot");
  const int m = 2 * n + 1;
  const int K = std::max(opt.path_terms, 3 * m + 1);
  double dist = 0.0;
  const Eigen::VectorXd f1 = detail::horizontal_direction(g.x, gt.x, dist);
  std::vector<double> ck(static_cast<std::size_t>(m) + 1);
  for (int k = 1; k <= m; ++k) ck[static_cast<std::size_t>(k)] = std::sqrt(alpha(3 * k) * alpha(3 * k) + alpha(3 * k - 1) * alpha(3 * k - 1));

  std::vector<int> blocks;
  for (int k = 1; k <= m; ++k) blocks.push_back(3 * k);

  CouplingOutcome out;
  for (;;) {
    out.xi = CoefficientStream::sample(n, T, K, rng);
    Eigen::MatrixXd V(n, m);
    for (int k = 1; k <= m; ++k)
      V.col(k - 1) = (alpha(3 * k) * out.xi.col(3 * k + 1) - alpha(3 * k - 1) * out.xi.col(3 * k - 1)) /
                     ck[static_cast<std::size_t>(k)];
    const Eigen::VectorXd xi0 = out.xi.col(0);
    const Eigen::VectorXd perp = xi0 - xi0.dot(f1) * f1;
    out.W = detail::shift_rhs(g, gt, perp, out.xi.col(1), T);
    SylvesterSolution sol;
    try {
      sol = solve_tsylvester(V, out.W);
    } catch (const SingularSystemError&) {
      if (++out.resamples > opt.max_resamples) throw;
      continue;
    }
    out.condition = sol.condition;
    Eigen::VectorXd delta(1 + n * m);
    delta(0) = dist / std::sqrt(T);
    out.shifts.clear();
    out.shifts.emplace_back(0, delta(0) * f1);
    for (int k = 1; k <= m; ++k) {
      const Eigen::VectorXd uk = sol.U.col(k - 1) / (T * ck[static_cast<std::size_t>(k)]);
      delta.segment(1 + (k - 1) * n, n) = uk;
      out.shifts.emplace_back(3 * k, uk);
    }
    out.success = detail::couple_block(out.xi, out.xi_tilde, f1, perp, delta, blocks, rng);
    break;
  }
  detail::finish(out, g, gt, modified_indices_carnot(n), opt);
  return out;
}

// ---------------------------------------------------------------------------
// Failure probability and the closed-form bounds

inline MCEstimate failure_probability(const HPoint& g, const HPoint& gt, double T, std::uint64_t N,
                                      const McOptions& opts) {
  CouplingOptions co;
  co.path_terms = 4;
  co.endpoints = false;
  return run_estimator(
      [&](RandomStream& rng, std::uint64_t) { return couple_heisenberg(g, gt, T, rng, co).success ? 0.0 : 1.0; }, N,
      opts);
}

inline MCEstimate failure_probability(const GPoint& g, const GPoint& gt, double T, std::uint64_t N,
                                      const McOptions& opts) {
  CouplingOptions co;
  co.path_terms = 0;
  co.endpoints = false;
  return run_estimator(
      [&](RandomStream& rng, std::uint64_t) { return couple_carnot(g, gt, T, rng, co).success ? 0.0 : 1.0; }, N, opts);
}

enum class BoundVariant { ProofStage, Improved, CarnotN };

inline const char* variant_name(BoundVariant v) {
  switch (v) {
    case BoundVariant::ProofStage:
      return "proof-stage";
    case BoundVariant::Improved:
      return "improved";
    case BoundVariant::CarnotN:
      return "carnot-n";
  }
  return "unknown";
}

struct BoundReport {
  double horizontal_term = 0.0;
  double vertical_term = 0.0;
  double total = 0.0;
  BoundVariant variant = BoundVariant::ProofStage;
};

/// C1 |x~ - x| / sqrt(T) + C2 ||zeta|| / T. On H the two Heisenberg variants use |zeta|;
/// the carnot-n variant treats H as G_2 and uses the HS norm sqrt(2) |zeta|.
inline BoundReport tv_bound(const HPoint& g, const HPoint& gt, double T, BoundVariant v) {
  if (!(T > 0.0)) throw std::domain_error("tv_bound: T must be positive");
  BoundReport r;
  r.variant = v;
  const double dx = std::hypot(gt.x1 - g.x1, gt.x2 - g.x2);
  const double zt = std::abs(zeta(g, gt));
  ConstantPair c;
  double znorm = zt;
  switch (v) {
    case BoundVariant::ProofStage:
      c = heisenberg_constants(HeisenbergVariant::ProofStage);
      break;
    case BoundVariant::Improved:
      c = heisenberg_constants(HeisenbergVariant::Improved);
      break;
    case BoundVariant::CarnotN:
      c = carnot_constants(2);
      znorm = std::sqrt(2.0) * zt;
      break;
    default:
      throw std::invalid_argument("tv_bound: unknown variant");
  }
  r.horizontal_term = c.C1 * dx / std::sqrt(T);
  r.vertical_term = c.C2 * znorm / T;
  r.total = r.horizontal_term + r.vertical_term;
  return r;
}

inline BoundReport tv_bound(const GPoint& g, const GPoint& gt, double T, BoundVariant v = BoundVariant::CarnotN) {
  if (!(T > 0.0)) throw std::domain_error("tv_bound: T must be positive");
  detail::require_same_dim(g.x.size(), gt.x.size(), "tv_bound");
  if (v != BoundVariant::CarnotN) {
    if (g.dim() == 2) return tv_bound(to_heisenberg(g), to_heisenberg(gt), T, v);
    throw std::invalid_argument("tv_bound: Heisenberg variants need n = 2");
  }
  const auto c = carnot_constants(g.dim());
  double dx2 = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) dx2 += (gt.x[i] - g.x[i]) * (gt.x[i] - g.x[i]);
  BoundReport r;
  r.variant = v;
  r.horizontal_term = c.C1 * std::sqrt(dx2) / std::sqrt(T);
  r.vertical_term = c.C2 * hs_norm(zeta(g, gt)) / T;
  r.total = r.horizontal_term + r.vertical_term;
  return r;
}

}  // namespace subriem

#pragma once

// Particular solution of U V^t - V U^t = W (W skew) through V U^t = -W/2,
// plus Monte Carlo checks of the Wishart moments that control its size.

#include "group.hpp"
#include "mc.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace subriem {

class SingularSystemError : public std::runtime_error {
 public:
  explicit SingularSystemError(const std::string& what, double cond = INFINITY)
      : std::runtime_error(what), condition(cond) {}
  double condition;
};

inline constexpr double kMaxCondition = 1e12;

inline Eigen::MatrixXd to_dense(const SkewMatrix<double>& w) {
  const int n = w.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = w.upper(i, j);
      m(j, i) = -w.upper(i, j);
    }
  return m;
}

/// Upper triangle of a (numerically) skew matrix.
inline SkewMatrix<double> to_skew(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  SkewMatrix<double> w(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w.upper(i, j) = 0.5 * (m(i, j) - m(j, i));
  return w;
}

struct SylvesterSolution {
  Eigen::MatrixXd U;      // n x m, column k is U_k
  double residual = 0.0;  // || U V^t - V U^t - W ||_HS
  double condition = 1.0; // of V V^t
};

/// U^t = -1/2 V^t (V V^t)^{-1} W, by Cholesky on V V^t.
inline SylvesterSolution solve_tsylvester(const Eigen::MatrixXd& V, const SkewMatrix<double>& W) {
  const auto n = V.rows(), m = V.cols();
  if (n != W.dim()) throw std::invalid_argument("solve_tsylvester: V and W dimensions disagree");
  if (m < n) throw std::invalid_argument("solve_tsylvester: need at least n columns");
  const Eigen::MatrixXd M = V * V.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0), lmax = eig.eigenvalues()(n - 1);
  const double cond = lmin > 0.0 ? lmax / lmin : INFINITY;
  if (!(cond <= kMaxCondition)) throw SingularSystemError("solve_tsylvester: V V^t is singular or ill-conditioned", cond);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw SingularSystemError("solve_tsylvester: Cholesky failed", cond);
  const Eigen::MatrixXd Wd = to_dense(W);
  const Eigen::MatrixXd Y = llt.solve(Wd);  // (V V^t)^{-1} W
  SylvesterSolution sol;
  sol.U = (-0.5 * V.transpose() * Y).transpose();
  sol.condition = cond;
  const Eigen::MatrixXd UVt = sol.U * V.transpose();
  sol.residual = (UVt - UVt.transpose() - Wd).norm();
  return sol;
}

/// Cauchy-Schwarz bound 1/2 ||W|| sqrt(tr((V V^t)^{-1})) on ||U||.
inline double tsylvester_norm_bound(const Eigen::MatrixXd& V, const SkewMatrix<double>& W) {
  const Eigen::MatrixXd M = V * V.transpose();
  const double tr = M.llt().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols())).trace();
  return 0.5 * hs_norm(W) * std::sqrt(tr);
}

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols, RandomStream& rng) {
  Eigen::MatrixXd V(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) V(i, j) = rng.normal();
  return V;
}

/// Skew matrix with independent N(0,1) upper entries.
inline SkewMatrix<double> gaussian_skew(int n, RandomStream& rng) {
  SkewMatrix<double> w(n);
  for (auto& e : w.entries()) e = rng.normal();
  return w;
}

namespace detail {
inline void check_wishart_dims(int n, int m) {
  if (n < 1) throw std::invalid_argument("Wishart moment: n must be positive");
  if (m < n + 2) throw std::domain_error("Wishart moment: requires m >= n + 2 (inverse trace not integrable)");
}
}  // namespace detail

/// Monte Carlo mean of tr((V V^t)^{-1}) for V an n x m standard Gaussian matrix.
inline MCEstimate wishart_inv_trace_mc(int n, int m, std::uint64_t N, const McOptions& opts) {
  detail::check_wishart_dims(n, m);
  return run_estimator(
      [n, m](RandomStream& rng, std::uint64_t) {
        const Eigen::MatrixXd V = gaussian_matrix(n, m, rng);
        const Eigen::MatrixXd M = V * V.transpose();
        return M.llt().solve(Eigen::MatrixXd::Identity(n, n)).trace();
      },
      N, opts);
}

inline double wishart_inv_trace_exact(int n, int m) {
  detail::check_wishart_dims(n, m);
  return static_cast<double>(n) / static_cast<double>(m - n - 1);
}

struct UMomentReport {
  MCEstimate u_sq;      // E ||U||^2
  MCEstimate bound;     // E ||W||^2 / (4 (m - n - 1))
  MCEstimate gap;       // paired E[ ||U||^2 - ||W||^2 / (4 (m - n - 1)) ]
  ComparisonReport check;
  bool pass = false;
};

/// E ||U||^2 <= E ||W||^2 / (4 (m - n - 1)) for W an independent Gaussian skew matrix
/// (or W = 0 when zero_w is set). Checked on the paired difference at 3 sigma.
inline UMomentReport u_moment_check(int n, int m, std::uint64_t N, const McOptions& opts, bool zero_w = false) {
  detail::check_wishart_dims(n, m);
  const double c = 1.0 / (4.0 * (m - n - 1));
  auto v = run_vector_estimator(
      2,
      [=](RandomStream& rng, std::uint64_t, double* out) {
        const Eigen::MatrixXd V = gaussian_matrix(n, m, rng);
        SkewMatrix<double> W = gaussian_skew(n, rng);
        if (zero_w) W = SkewMatrix<double>(n);
        const auto sol = solve_tsylvester(V, W);
        out[0] = sol.U.squaredNorm();
        out[1] = c * 2.0 * W.upper_square_sum();
      },
      N, opts);
  UMomentReport r;
  r.u_sq = v.component(0);
  r.bound = v.component(1);
  r.gap = v.linear(Eigen::Vector2d(1.0, -1.0));
  r.check = compare(r.gap, 0.0, Relation::AtMost);
  r.pass = r.check.pass;
  return r;
}

}  // namespace subriem

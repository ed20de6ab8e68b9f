#pragma once

// Maximal coupling of N(m, I) and N(m', I) by reflection.

#include "mc.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace subriem {

struct CoupledPair {
  Eigen::VectorXd X;
  Eigen::VectorXd Y;
  bool met = false;
};

/// P(X != Y) under the maximal coupling, 2 Phi(delta/2) - 1.
inline double gaussian_tv(double delta) {
  if (!(delta >= 0.0)) throw std::domain_error("gaussian_tv: delta must be nonnegative");
  return std::erf(delta / (2.0 * std::sqrt(2.0)));
}

/// X ~ N(m, I). Y = X with probability min(1, phi(s - delta) / phi(s)), otherwise
/// X reflected through the hyperplane bisecting m and m'. Components orthogonal
/// to m' - m are always shared.
inline CoupledPair maximal_coupling_shifted(const Eigen::VectorXd& m, const Eigen::VectorXd& mp, RandomStream& rng) {
  if (m.size() < 1 || m.size() != mp.size()) throw std::invalid_argument("maximal_coupling_shifted: bad dimensions");
  CoupledPair out;
  out.X.resize(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) out.X(i) = m(i) + rng.normal();
  const double u = rng.uniform();
  const Eigen::VectorXd diff = mp - m;
  const double delta = diff.norm();
  if (delta == 0.0) {
    out.Y = out.X;
    out.met = true;
    return out;
  }
  const Eigen::VectorXd e = diff / delta;
  const double s = (out.X - m).dot(e);
  // log(phi(s - delta) / phi(s)) = s delta - delta^2 / 2
  if (std::log1p(-u) <= s * delta - 0.5 * delta * delta) {
    out.Y = out.X;
    out.met = true;
  } else {
    out.Y = out.X + (delta - 2.0 * s) * e;
    out.met = false;
  }
  return out;
}

}  // namespace subriem

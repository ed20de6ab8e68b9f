#pragma once

// Seeded, reproducible, parallel Monte Carlo.
//
// Run i of an estimator always draws from substream(seed, i), and runs are
// grouped in fixed-size chunks whose partial moments are merged in chunk
// order. The worker count only decides which thread computes which chunk, so
// results are bit-identical for any number of workers.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace subriem {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna); satisfies UniformRandomBitGenerator.
class Xoshiro256ss {
 public:
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  explicit Xoshiro256ss(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

/// Engine plus the distributions every sampler needs. Never shared between threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : eng_(seed) {}
  double normal() { return normal_(eng_); }
  /// Uniform on [0, 1).
  double uniform() { return uniform_(eng_); }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(eng_); }
  Xoshiro256ss& engine() { return eng_; }

 private:
  Xoshiro256ss eng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Counter-based substream: run `index` of the experiment seeded by `seed`.
inline RandomStream substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t a = seed;
  std::uint64_t b = index ^ 0x6A09E667F3BCC909ULL;
  const std::uint64_t mixed = splitmix64(a) ^ (splitmix64(b) * 0xD1B54A32D192ED03ULL);
  return RandomStream(mixed);
}

/// Derive an independent experiment seed from a parent seed and a label.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) {
  std::uint64_t s = seed ^ (label * 0x9E3779B97F4A7C15ULL + 0x243F6A8885A308D3ULL);
  splitmix64(s);
  return splitmix64(s);
}

struct McOptions {
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
};

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  double ci_level = 0.9973;  // 3 sigma
};

/// Vector-valued estimate: mean and sample covariance of the per-run outputs.
struct VectorEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // sample covariance (divisor n - 1)
  std::uint64_t n = 0;
  std::uint64_t seed = 0;

  MCEstimate component(int i) const {
    MCEstimate e;
    e.mean = mean(i);
    e.std_error = std::sqrt(std::max(0.0, cov(i, i)) / static_cast<double>(n));
    e.n = n;
    e.seed = seed;
    return e;
  }
  /// Estimate of c . mean with its standard error.
  MCEstimate linear(const Eigen::VectorXd& c) const {
    MCEstimate e;
    e.mean = c.dot(mean);
    e.std_error = std::sqrt(std::max(0.0, c.dot(cov * c)) / static_cast<double>(n));
    e.n = n;
    e.seed = seed;
    return e;
  }
  /// Delta method: value phi(mean) with gradient grad.
  MCEstimate delta(double value, const Eigen::VectorXd& grad) const {
    MCEstimate e = linear(grad);
    e.mean = value;
    return e;
  }
};

/// Streaming mean / co-moment accumulator (Welford, merged with Chan et al.).
class MomentAccumulator {
 public:
  explicit MomentAccumulator(int dim = 1)
      : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(const double* x) {
    ++n_;
    const Eigen::Map<const Eigen::VectorXd> v(x, mean_.size());
    const Eigen::VectorXd d = v - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_.noalias() += d * (v - mean_).transpose();
  }

  void merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
    const double nt = na + nb;
    const Eigen::VectorXd d = o.mean_ - mean_;
    mean_ += d * (nb / nt);
    m2_ += o.m2_ + (d * d.transpose()) * (na * nb / nt);
    n_ += o.n_;
  }

  std::uint64_t count() const { return n_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::MatrixXd covariance() const {
    if (n_ < 2) return Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
    Eigen::MatrixXd c = m2_ / static_cast<double>(n_ - 1);
    return 0.5 * (c + c.transpose());
  }

 private:
  std::uint64_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

inline constexpr std::uint64_t kChunkSize = 4096;

namespace detail {
/// Calls body(chunk) for every chunk index, spreading chunks over threads.
inline void for_each_chunk(std::uint64_t chunks, int workers, const std::function<void(std::uint64_t)>& body) {
  const int w = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(resolve_workers(workers)),
                                                         std::max<std::uint64_t>(chunks, 1)));
  if (w <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::uint64_t c = next++; c < chunks; c = next++) body(c);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}
}  // namespace detail

/// sampler(stream, run_index, out) writes `dim` values for one run.
using VectorSampler = std::function<void(RandomStream&, std::uint64_t, double*)>;
using ScalarSampler = std::function<double(RandomStream&, std::uint64_t)>;

inline VectorEstimate run_vector_estimator(int dim, const VectorSampler& sampler, std::uint64_t N,
                                           const McOptions& opts) {
  if (N < 2) throw std::invalid_argument("run_estimator: N must be at least 2");
  if (dim < 1) throw std::invalid_argument("run_estimator: dim must be positive");
  const std::uint64_t chunks = (N + kChunkSize - 1) / kChunkSize;
  std::vector<MomentAccumulator> partial(chunks, MomentAccumulator(dim));
  detail::for_each_chunk(chunks, opts.workers, [&](std::uint64_t c) {
    std::vector<double> buf(static_cast<std::size_t>(dim));
    MomentAccumulator acc(dim);
    const std::uint64_t lo = c * kChunkSize, hi = std::min(N, lo + kChunkSize);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rs = substream(opts.seed, i);
      sampler(rs, i, buf.data());
      acc.add(buf.data());
    }
    partial[c] = std::move(acc);
  });
  MomentAccumulator total(dim);
  for (const auto& p : partial) total.merge(p);
  VectorEstimate est;
  est.mean = total.mean();
  est.cov = total.covariance();
  est.n = total.count();
  est.seed = opts.seed;
  return est;
}

inline MCEstimate run_estimator(const ScalarSampler& sampler, std::uint64_t N, const McOptions& opts) {
  auto v = run_vector_estimator(
      1, [&](RandomStream& rs, std::uint64_t i, double* out) { out[0] = sampler(rs, i); }, N, opts);
  return v.component(0);
}

/// Raw per-run outputs, row i = run i. For statistics that need the samples (KS).
inline Eigen::MatrixXd collect_samples(int dim, const VectorSampler& sampler, std::uint64_t N,
                                       const McOptions& opts) {
  if (N < 1) throw std::invalid_argument("collect_samples: N must be positive");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(N), dim);
  const std::uint64_t chunks = (N + kChunkSize - 1) / kChunkSize;
  detail::for_each_chunk(chunks, opts.workers, [&](std::uint64_t c) {
    std::vector<double> buf(static_cast<std::size_t>(dim));
    const std::uint64_t lo = c * kChunkSize, hi = std::min(N, lo + kChunkSize);
    for (std::uint64_t i = lo; i < hi; ++i) {
      RandomStream rs = substream(opts.seed, i);
      sampler(rs, i, buf.data());
      for (int j = 0; j < dim; ++j) out(static_cast<Eigen::Index>(i), j) = buf[static_cast<std::size_t>(j)];
    }
  });
  return out;
}

inline MCEstimate estimate_from_samples(const Eigen::Ref<const Eigen::VectorXd>& x, std::uint64_t seed = 0) {
  MomentAccumulator acc(1);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    acc.add(&v);
  }
  MCEstimate e;
  e.mean = acc.mean()(0);
  e.n = acc.count();
  e.std_error = std::sqrt(acc.covariance()(0, 0) / static_cast<double>(e.n));
  e.seed = seed;
  return e;
}

/// Standard error of fn(mean_1, ..., mean_B) for independent vector estimates,
/// by the delta method with a central-difference gradient.
inline MCEstimate delta_method(const std::vector<const VectorEstimate*>& blocks,
                               const std::function<double(const std::vector<Eigen::VectorXd>&)>& fn) {
  std::vector<Eigen::VectorXd> mu;
  for (const auto* b : blocks) mu.push_back(b->mean);
  MCEstimate out;
  out.mean = fn(mu);
  double var = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& est = *blocks[b];
    Eigen::VectorXd grad(est.mean.size());
    for (Eigen::Index i = 0; i < est.mean.size(); ++i) {
      const double se = std::sqrt(std::max(0.0, est.cov(i, i)) / static_cast<double>(est.n));
      const double step = std::max({1e-7 * std::abs(mu[b](i)), 1e-3 * se, 1e-12});
      auto hi = mu, lo = mu;
      hi[b](i) += step;
      lo[b](i) -= step;
      grad(i) = (fn(hi) - fn(lo)) / (2.0 * step);
    }
    var += grad.dot(est.cov * grad) / static_cast<double>(est.n);
    out.n += est.n;
  }
  out.std_error = std::sqrt(std::max(0.0, var));
  out.seed = blocks.empty() ? 0 : blocks.front()->seed;
  return out;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = 3.14159265358979323846;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    const double c = -pi * pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) s += std::exp(c * (2 * k - 1) * (2 * k - 1));
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double t = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? t : -t);
    if (t < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample test with the Stephens small-sample correction.
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.size() < 50) throw std::invalid_argument("ks_test: at least 50 samples required");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d), samples.size()};
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.size() < 50 || b.size() < 50) throw std::invalid_argument("ks_two_sample: at least 50 samples required");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d), a.size() + b.size()};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// ---------------------------------------------------------------------------
// Comparisons

enum class Relation { Equal, AtMost };

inline const char* relation_name(Relation r) { return r == Relation::Equal ? "==" : "<="; }

struct ComparisonReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double margin = 0.0;     // lhs - rhs
  double sigma = 0.0;      // pooled standard error
  double k = 3.0;          // declared multiple
  double allowance = 0.0;  // deterministic slack (bias bounds etc.)
  Relation relation = Relation::Equal;
  bool pass = false;
};

/// lhs == rhs within k sigma (+ allowance), or lhs <= rhs + k sigma (+ allowance).
inline ComparisonReport compare(double lhs, double lhs_se, double rhs, double rhs_se, Relation rel, double k = 3.0,
                                double allowance = 0.0) {
  ComparisonReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.lhs_se = lhs_se;
  r.rhs_se = rhs_se;
  r.margin = lhs - rhs;
  r.sigma = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
  r.k = k;
  r.allowance = allowance;
  r.relation = rel;
  const double slack = k * r.sigma + allowance;
  r.pass = rel == Relation::Equal ? std::abs(r.margin) <= slack : r.margin <= slack;
  if (!std::isfinite(r.margin)) r.pass = false;
  return r;
}

inline ComparisonReport compare(const MCEstimate& lhs, double exact, Relation rel, double k = 3.0,
                                double allowance = 0.0) {
  return compare(lhs.mean, lhs.std_error, exact, 0.0, rel, k, allowance);
}

inline ComparisonReport compare(const MCEstimate& lhs, const MCEstimate& rhs, Relation rel, double k = 3.0,
                                double allowance = 0.0) {
  return compare(lhs.mean, lhs.std_error, rhs.mean, rhs.std_error, rel, k, allowance);
}

}  // namespace subriem

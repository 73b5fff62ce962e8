#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "pdform/errors.hpp"

namespace pdform {

struct McConfig {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 42;
  unsigned shards = 1;
  // Number of largest values of component 0 to retain (tail diagnostics).
  std::size_t keep_top = 0;
};

/// A Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

inline double z_score(double observed, double expected, double std_error) {
  if (std_error <= 0.0) return observed == expected ? 0.0 : std::copysign(INFINITY, observed - expected);
  return (observed - expected) / std_error;
}

/// Surface area of the unit sphere S^{n-1}.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Uniform points on S^{n-1} from normalized Gaussian vectors.
class SphereSampler {
 public:
  SphereSampler(int n, std::uint64_t seed, std::uint64_t stream) : n_(n) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    rng_.seed(seq);
  }

  void next(std::span<double> z) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (int i = 0; i < n_; ++i) {
        z[i] = normal_(rng_);
        norm2 += z[i] * z[i];
      }
    } while (norm2 == 0.0);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < n_; ++i) z[i] *= inv;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  int n_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Running sums for one estimated quantity.
struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  double abs_sum = 0.0;
  double max_abs = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    abs_sum += std::abs(x);
    max_abs = std::max(max_abs, std::abs(x));
  }
  void merge(const Accumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    abs_sum += o.abs_sum;
    max_abs = std::max(max_abs, o.max_abs);
  }
};

/// Aggregated sample statistics of a vector-valued integrand on the sphere.
struct SphereRun {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<Accumulator> components;
  std::vector<double> top_values;  // largest values of component 0, descending
  // Sums over the first half of every shard's samples.
  std::size_t half_accepted = 0;
  std::vector<Accumulator> half_components;

  double mean(std::size_t k = 0) const { return accepted == 0 ? 0.0 : components[k].sum / accepted; }

  double std_error(std::size_t k = 0) const {
    if (accepted < 2) return 0.0;
    const double n = static_cast<double>(accepted);
    const double m = components[k].sum / n;
    const double var = std::max(0.0, (components[k].sum_sq / n - m * m) * n / (n - 1.0));
    return std::sqrt(var / n);
  }

  Estimate estimate(std::size_t k = 0, double scale = 1.0) const {
    return {scale * mean(k), std::abs(scale) * std_error(k)};
  }

  double half_mean(std::size_t k = 0) const {
    return half_accepted == 0 ? 0.0 : half_components[k].sum / half_accepted;
  }

  /// Fraction of the absolute sum contributed by the single largest term.
  double max_term_share(std::size_t k = 0) const {
    return components[k].abs_sum > 0.0 ? components[k].max_abs / components[k].abs_sum : 0.0;
  }
};

namespace detail {

inline void keep_largest(std::vector<double>& values, std::size_t k) {
  if (values.size() <= k) return;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end(),
                   std::greater<>());
  values.resize(k);
}

template <class Integrand>
SphereRun run_shard(int n, std::size_t components, std::size_t count, std::uint64_t seed, std::uint64_t shard,
                    std::size_t keep_top, Integrand f) {
  SphereRun run;
  run.components.resize(components);
  run.half_components.resize(components);
  SphereSampler sampler(n, seed, shard);
  std::vector<double> z(static_cast<std::size_t>(n));
  std::vector<double> out(components);
  std::vector<double> top;
  for (std::size_t s = 0; s < count; ++s) {
    if (s == count / 2) {
      run.half_accepted = run.accepted;
      run.half_components = run.components;
    }
    sampler.next(z);
    if (!f(std::span<const double>(z), std::span<double>(out))) {
      ++run.rejected;
      continue;
    }
    ++run.accepted;
    for (std::size_t k = 0; k < components; ++k) run.components[k].add(out[k]);
    if (keep_top > 0) {
      top.push_back(out[0]);
      if (top.size() >= 4 * keep_top) keep_largest(top, keep_top);
    }
  }
  keep_largest(top, keep_top);
  run.top_values = std::move(top);
  return run;
}

}  // namespace detail

/// Averages a vector-valued integrand over uniform samples of S^{n-1}.
///
/// The integrand is called as f(z, out) and returns false to reject a
/// sample (it is then excluded from the average and counted in `rejected`).
/// Each shard receives its own copy of f and its own random stream derived
/// from (seed, shard index); shards are reduced in index order, so the
/// result depends only on (seed, samples, shards).
template <class Integrand>
SphereRun sphere_average(int n, std::size_t components, const McConfig& cfg, const Integrand& f) {
  if (n < 1) throw InputError("sphere dimension must be positive");
  if (cfg.samples == 0) throw InputError("sample count must be positive");
  const unsigned shards = std::max(1u, cfg.shards);
  std::vector<std::size_t> counts(shards, cfg.samples / shards);
  for (std::size_t s = 0; s < cfg.samples % shards; ++s) ++counts[s];

  std::vector<SphereRun> runs;
  runs.reserve(shards);
  if (shards == 1) {
    runs.push_back(detail::run_shard(n, components, counts[0], cfg.seed, 0, cfg.keep_top, f));
  } else {
    std::vector<std::future<SphereRun>> futures;
    futures.reserve(shards);
    for (unsigned s = 0; s < shards; ++s) {
      futures.push_back(std::async(std::launch::async, [&, s] {
        return detail::run_shard(n, components, counts[s], cfg.seed, s, cfg.keep_top, f);
      }));
    }
    for (auto& fut : futures) runs.push_back(fut.get());
  }

  SphereRun total;
  total.components.resize(components);
  total.half_components.resize(components);
  for (const auto& r : runs) {
    total.accepted += r.accepted;
    total.half_accepted += r.half_accepted;
    for (std::size_t k = 0; k < components; ++k) total.half_components[k].merge(r.half_components[k]);
    total.rejected += r.rejected;
    for (std::size_t k = 0; k < components; ++k) total.components[k].merge(r.components[k]);
    total.top_values.insert(total.top_values.end(), r.top_values.begin(), r.top_values.end());
  }
  detail::keep_largest(total.top_values, cfg.keep_top);
  std::sort(total.top_values.begin(), total.top_values.end(), std::greater<>());
  return total;
}

/// Scalar convenience wrapper around sphere_average().
template <class ScalarIntegrand>
SphereRun sphere_average_scalar(int n, const McConfig& cfg, const ScalarIntegrand& f) {
  auto wrapped = [f](std::span<const double> z, std::span<double> out) mutable -> bool {
    auto v = f(z);
    if (!v) return false;
    out[0] = *v;
    return true;
  };
  return sphere_average(n, 1, cfg, wrapped);
}

/// Hill estimator of the tail index from values sorted in descending order,
/// using the k largest (k+1 values needed). Large values mean light tails; a
/// mean exists only for a tail index above 1.
inline double hill_tail_index(std::span<const double> descending, std::size_t k) {
  if (descending.size() < k + 1 || k == 0) return INFINITY;
  const double threshold = descending[k];
  if (threshold <= 0.0) return INFINITY;
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(descending[i] / threshold);
  acc /= static_cast<double>(k);
  return acc <= 0.0 ? INFINITY : 1.0 / acc;
}

}  // namespace pdform

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pdform/errors.hpp"
#include "pdform/forms.hpp"
#include "pdform/matrix.hpp"
#include "pdform/monte_carlo.hpp"
#include "pdform/random.hpp"

namespace pdform {

/// Monte Carlo estimate of a volume-like integral plus sampling diagnostics.
struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;   // accepted samples
  std::size_t rejected = 0;  // samples where g vanished to rounding precision
  double max_term_share = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;
  std::vector<double> top_terms;  // largest integrand values when requested

  Estimate estimate() const { return {value, std_error}; }
  bool has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }
};

inline constexpr double heavy_tail_share = 0.1;

namespace detail {

inline void require_volume_degree(int d) {
  if (d < 2 || d % 2 != 0) throw InputError("volume needs a form of even degree >= 2");
}

// Absolute rounding bound for a form value with the given term magnitude.
inline double zero_tolerance(double magnitude) { return 64.0 * std::numeric_limits<double>::epsilon() * magnitude; }

/// Integrals over G = {g <= 1} of several homogeneous weights phi_k of
/// degrees e_k, by exact radial integration along uniform rays:
///   int_G phi dx = 1/(n+e) int_{S^{n-1}} phi(z) g(z)^{-(n+e)/d} dS.
/// `weights(z, out)` fills out[k] = phi_k(z). All components share samples.
template <class S, class Weights>
std::vector<VolumeEstimate> reduced_integrals(const Form<S>& g, const std::vector<int>& degrees,
                                              const McConfig& cfg, const Weights& weights) {
  require_volume_degree(g.degree());
  const int n = g.n();
  const double d = g.degree();
  const std::size_t m = degrees.size();
  std::vector<double> exponent(m);
  std::vector<double> scale(m);
  for (std::size_t k = 0; k < m; ++k) {
    exponent[k] = -(n + degrees[k]) / d;
    scale[k] = sphere_area(n) / (n + degrees[k]);
  }
  auto integrand = [eval = FormEvaluator(g), weights = Weights(weights), exponent, m](std::span<const double> z,
                                                                   std::span<double> out) mutable -> bool {
    const auto [v, mag] = eval(z);
    const double tol = zero_tolerance(mag);
    if (v < -tol) throw NegativeFormError();
    if (v <= tol) return false;
    weights(z, out);
    const double logv = std::log(v);
    for (std::size_t k = 0; k < m; ++k) out[k] *= std::exp(exponent[k] * logv);
    return true;
  };
  SphereRun run = sphere_average(n, m, cfg, integrand);
  std::vector<VolumeEstimate> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    VolumeEstimate& e = out[k];
    e.value = scale[k] * run.mean(k);
    e.std_error = scale[k] * run.std_error(k);
    e.samples = run.accepted;
    e.rejected = run.rejected;
    e.max_term_share = run.max_term_share(k);
    e.seed = cfg.seed;
    const double half = scale[k] * run.half_mean(k);
    const bool drifts = run.half_accepted > 0 && std::abs(e.value - half) > 2.0 * e.std_error;
    if (e.max_term_share > heavy_tail_share || drifts) e.flags.emplace_back("heavy_tail");
    if (run.rejected > 0) e.flags.emplace_back("rejected_zero_samples");
  }
  out[0].top_terms = run.top_values;
  for (double& t : out[0].top_terms) t *= scale[0];
  return out;
}

}  // namespace detail

/// Lebesgue volume of {g <= 1} by uniform sampling of rays:
///   vol = vol(S^{n-1})/n * E[g(z)^{-n/d}].
/// Throws NegativeFormError as soon as a sample sees g < 0; samples where g
/// vanishes to rounding precision are rejected and counted.
template <class S>
VolumeEstimate volume_mc(const Form<S>& g, const McConfig& cfg) {
  auto one = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
  return detail::reduced_integrals(g, {0}, cfg, one)[0];
}

/// pi^{n/2} / (Gamma(1+n/2) sqrt(det G)) for the ellipsoid x^T G x <= 1;
/// +infinity when G is not positive definite.
inline double volume_quadratic_closed(const SymMatrix& gm) {
  require_symmetric(gm, "G");
  if (!is_positive_definite(gm)) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(gm.rows());
  return std::pow(std::numbers::pi, 0.5 * n) / (std::tgamma(1.0 + 0.5 * n) * std::sqrt(spd_determinant(gm)));
}

/// int_G h dx for a weight h >= 0 of any degree.
template <class S>
VolumeEstimate weighted_volume_mc(const Form<S>& g, const Form<S>& h, const McConfig& cfg) {
  if (h.n() != g.n()) throw InputError("weight and form differ in variable count");
  auto weight = [eh = FormEvaluator(h)](std::span<const double> z, std::span<double> out) mutable {
    const auto [v, mag] = eh(z);
    if (v < -detail::zero_tolerance(mag))
      throw InputError("weight h takes negative values; use l1_norm, which integrates |h|");
    out[0] = std::max(v, 0.0);
  };
  return detail::reduced_integrals(g, {h.degree()}, cfg, weight)[0];
}

/// ||h||_{L^1(mu_g)} = int_G |h| dx.
inline VolumeEstimate l1_norm(const Form<double>& g, const Form<double>& h, const McConfig& cfg) {
  if (h.n() != g.n()) throw InputError("weight and form differ in variable count");
  auto weight = [eh = FormEvaluator(h)](std::span<const double> z, std::span<double> out) mutable {
    out[0] = std::abs(eh(z).value);
  };
  return detail::reduced_integrals(g, {h.degree()}, cfg, weight)[0];
}

/// ||h||_{L^2(mu_g)} = (int_G h^2 dx)^{1/2}; the standard error is
/// propagated from the squared norm by the delta method.
inline VolumeEstimate l2_norm(const Form<double>& g, const Form<double>& h, const McConfig& cfg) {
  if (h.n() != g.n()) throw InputError("weight and form differ in variable count");
  auto weight = [eh = FormEvaluator(h)](std::span<const double> z, std::span<double> out) mutable {
    const double v = eh(z).value;
    out[0] = v * v;
  };
  VolumeEstimate e = detail::reduced_integrals(g, {2 * h.degree()}, cfg, weight)[0];
  const double root = std::sqrt(e.value);
  e.std_error = root > 0.0 ? e.std_error / (2.0 * root) : 0.0;
  e.value = root;
  return e;
}

/// int_{x^T G x <= 1} x^T H x dx = pi^{n/2} / (2 Gamma(1+(n+2)/2)) Tr(G^{-1} H) / sqrt(det G).
inline double hsos_quadratic_closed(const SymMatrix& gm, const SymMatrix& hm) {
  require_positive_definite(gm, "G");
  require_symmetric(hm, "H");
  if (hm.rows() != gm.rows()) throw InputError("G and H differ in size");
  const double n = static_cast<double>(gm.rows());
  return std::pow(std::numbers::pi, 0.5 * n) / (2.0 * std::tgamma(1.0 + 0.5 * (n + 2.0))) *
         trace(spd_inverse(gm) * hm) / std::sqrt(spd_determinant(gm));
}

struct DerivativeOptions {
  bool finite_difference = true;
  // Step as a fraction of ||g||_B / max_i ||v_i||_B.
  double relative_step = 0.01;
};

struct DerivativeReport {
  int order = 0;
  std::vector<Form<double>> directions;
  double value = 0.0;  // estimate of (-1)^k D_{v1}...D_{vk} f_h(g)
  double std_error = 0.0;
  std::size_t samples = 0;
  std::optional<double> finite_difference;  // same quantity by Richardson-extrapolated central differences
  double step = 0.0;

  double z_score() const { return std_error > 0.0 ? value / std_error : (value >= 0.0 ? INFINITY : -INFINITY); }
  std::optional<double> fd_z_score() const {
    if (!finite_difference) return std::nullopt;
    return pdform::z_score(value, *finite_difference, std_error);
  }
};

namespace detail {

// k-fold central difference of f_h along the directions with step eps.
inline double central_difference(const Form<double>& g, const std::vector<Form<double>>& dirs, const Form<double>& h,
                                 double eps, const McConfig& cfg) {
  const std::size_t k = dirs.size();
  double acc = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    Form<double> shifted = g;
    int sign = 1;
    for (std::size_t i = 0; i < k; ++i) {
      const bool plus = (mask >> i) & 1U;
      shifted += dirs[i] * (plus ? eps : -eps);
      if (!plus) sign = -sign;
    }
    acc += sign * weighted_volume_mc(shifted, h, cfg).value;
  }
  return acc / std::pow(2.0 * eps, static_cast<double>(k));
}

}  // namespace detail

/// (-1)^k D_{v1}...D_{vk} f_h(g) = Gamma(1+k+(n+e)/d) / Gamma(1+(n+e)/d) * int_G h v1...vk,
/// with e = deg h. The finite-difference cross-check differentiates
/// weighted_volume_mc itself on the same samples.
inline DerivativeReport directional_derivative_mc(const Form<double>& g, const std::vector<Form<double>>& dirs,
                                                  const Form<double>& h, const McConfig& cfg,
                                                  const DerivativeOptions& opt = {}) {
  detail::require_volume_degree(g.degree());
  if (dirs.empty()) throw InputError("derivative needs at least one direction");
  if (h.n() != g.n()) throw InputError("weight and form differ in variable count");
  for (const auto& v : dirs) {
    if (v.n() != g.n() || v.degree() != g.degree()) throw InputError("directions must match the form's n and d");
    if (v.is_zero()) throw InputError("zero direction is not in the cone of positive forms");
  }
  const int k = static_cast<int>(dirs.size());
  const double n = g.n();
  const double d = g.degree();
  const double e = h.degree();

  std::vector<FormEvaluator> factors{FormEvaluator(h)};
  for (const auto& v : dirs) factors.emplace_back(v);
  auto weight = [factors](std::span<const double> z, std::span<double> out) mutable {
    double p = 1.0;
    for (auto& f : factors) p *= f(z).value;
    out[0] = p;
  };
  const int degree = h.degree() + k * g.degree();
  VolumeEstimate integral = detail::reduced_integrals(g, {degree}, cfg, weight)[0];
  const double ratio = std::exp(std::lgamma(1.0 + k + (n + e) / d) - std::lgamma(1.0 + (n + e) / d));

  DerivativeReport r;
  r.order = k;
  r.directions = dirs;
  r.value = ratio * integral.value;
  r.std_error = ratio * integral.std_error;
  r.samples = integral.samples;
  if (opt.finite_difference) {
    double vmax = 0.0;
    for (const auto& v : dirs) vmax = std::max(vmax, bombieri_norm(v));
    const double eps = opt.relative_step * bombieri_norm(g) / vmax;
    const double coarse = detail::central_difference(g, dirs, h, eps, cfg);
    const double fine = detail::central_difference(g, dirs, h, 0.5 * eps, cfg);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    r.finite_difference = sign * (4.0 * fine - coarse) / 3.0;
    r.step = eps;
  }
  return r;
}

struct CmEntry {
  int trial = 0;
  int order = 0;
  double value = 0.0;
  double std_error = 0.0;
  std::optional<double> finite_difference;
};

struct CmReport {
  std::vector<CmEntry> entries;
  double min_z = INFINITY;          // smallest value / std_error over all entries
  int violations = 0;               // entries below -3 standard errors
  double max_fd_z = 0.0;            // largest |z| between first-order estimate and finite difference
  bool passed() const { return violations == 0 && max_fd_z <= 5.0; }
};

/// Sign checks of (-1)^k D_{v1}...D_{vk} f(g) for random positive definite
/// directions, k = 1..max_k. First-order entries carry a finite-difference
/// cross-check. Directions are drawn from `direction_seed`.
inline CmReport cm_check(const Form<double>& g, int max_k, int trials, const McConfig& cfg,
                         std::uint64_t direction_seed) {
  detail::require_volume_degree(g.degree());
  if (max_k < 1 || max_k > 4) throw InputError("cm_check supports 1 <= max_k <= 4");
  if (trials < 1) throw InputError("cm_check needs at least one trial");
  Rng rng(direction_seed);
  const Form<double> one = Form<double>::constant(g.n(), 1.0);
  CmReport report;
  for (int t = 0; t < trials; ++t) {
    std::vector<Form<double>> dirs;
    for (int i = 0; i < max_k; ++i) dirs.push_back(random_pd_form(g.n(), g.degree(), rng));
    for (int k = 1; k <= max_k; ++k) {
      std::vector<Form<double>> sub(dirs.begin(), dirs.begin() + k);
      DerivativeOptions opt;
      opt.finite_difference = (k == 1);
      DerivativeReport dr = directional_derivative_mc(g, sub, one, cfg, opt);
      CmEntry e{t, k, dr.value, dr.std_error, dr.finite_difference};
      const double z = dr.z_score();
      report.min_z = std::min(report.min_z, z);
      if (dr.value < -3.0 * dr.std_error) ++report.violations;
      if (auto fz = dr.fd_z_score()) report.max_fd_z = std::max(report.max_fd_z, std::abs(*fz));
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

struct LaplaceReport {
  Estimate laplace;      // int exp(-<theta_l, g>) dl by importance sampling
  Estimate volume_path;  // Gamma(1+n/d) * volume_mc(g)
  double z = 0.0;
  double proposal_scale = 0.0;
  double max_pairing_error = 0.0;  // max |<theta_l, g> - g(l)| / (1 + |g(l)|) over the samples
  std::size_t samples = 0;
  bool passed() const { return std::abs(z) <= 3.0 && max_pairing_error <= 1e-12; }
};

namespace detail {

// Rough minimum of g on the unit sphere from a fixed set of samples.
inline double sphere_min_estimate(const Form<double>& g, std::uint64_t seed, std::size_t count = 4096) {
  SphereSampler sampler(g.n(), seed, 0x9e3779b97f4a7c15ULL);
  FormEvaluator eval(g);
  std::vector<double> z(static_cast<std::size_t>(g.n()));
  double best = INFINITY;
  for (std::size_t i = 0; i < count; ++i) {
    sampler.next(z);
    best = std::min(best, eval(z).value);
  }
  return best;
}

}  // namespace detail

/// Compares int_{R^n} exp(-g(l)) dl, computed from ell ~ N(0, s^2 I) with
/// the integrand evaluated only through the Bombieri pairing
/// <veronese(ell, d), g>, against Gamma(1+n/d) * vol{g <= 1}.
inline LaplaceReport laplace_path_check(const Form<double>& g, const McConfig& cfg) {
  detail::require_volume_degree(g.degree());
  const int n = g.n();
  const int d = g.degree();
  const double gmin = detail::sphere_min_estimate(g, cfg.seed);
  if (!(gmin > 0.0)) throw NotPositiveDefiniteError("laplace_path_check needs a positive definite form");
  const double s = d == 2 ? std::sqrt(1.0 / gmin) : 0.8 * std::pow(gmin, -1.0 / d);
  const double log_norm = 0.5 * n * std::log(2.0 * std::numbers::pi * s * s);

  struct Acc {
    Accumulator sum;
    std::size_t count = 0;
    double max_err = 0.0;
  };
  const unsigned shards = std::max(1u, cfg.shards);
  std::vector<std::future<Acc>> futures;
  for (unsigned sh = 0; sh < shards; ++sh) {
    const std::size_t count = cfg.samples / shards + (sh < cfg.samples % shards ? 1 : 0);
    futures.push_back(std::async(shards == 1 ? std::launch::deferred : std::launch::async, [&, sh, count] {
      Acc acc;
      SphereSampler sampler(n, cfg.seed, sh);  // only its normal engine is used
      std::normal_distribution<double> normal;
      FormEvaluator eval(g);
      std::vector<double> ell(static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < count; ++i) {
        double r2 = 0.0;
        for (auto& x : ell) {
          x = s * normal(sampler.engine());
          r2 += x * x;
        }
        const double paired = bombieri_inner(veronese(ell, d), g);
        const double direct = eval(ell).value;
        acc.max_err = std::max(acc.max_err, std::abs(paired - direct) / (1.0 + std::abs(direct)));
        const double log_density = -log_norm - r2 / (2.0 * s * s);
        acc.sum.add(std::exp(-paired - log_density));
        ++acc.count;
      }
      return acc;
    }));
  }
  Acc total;
  for (auto& f : futures) {
    Acc a = f.get();
    total.sum.merge(a.sum);
    total.count += a.count;
    total.max_err = std::max(total.max_err, a.max_err);
  }
  LaplaceReport r;
  const double N = static_cast<double>(total.count);
  const double mean = total.sum.sum / N;
  const double var = std::max(0.0, (total.sum.sum_sq / N - mean * mean) * N / (N - 1.0));
  r.laplace = {mean, std::sqrt(var / N)};

  McConfig vcfg = cfg;
  vcfg.seed = cfg.seed + 1;
  const VolumeEstimate vol = volume_mc(g, vcfg);
  const double gamma = std::tgamma(1.0 + static_cast<double>(n) / d);
  r.volume_path = {gamma * vol.value, gamma * vol.std_error};
  r.z = z_score(r.laplace.value, r.volume_path.value,
                std::hypot(r.laplace.std_error, r.volume_path.std_error));
  r.proposal_scale = s;
  r.max_pairing_error = total.max_err;
  r.samples = total.count;
  return r;
}

struct L2L1Report {
  double ratio = 0.0;  // ||g||_{L2}^2 / ||g||_{L1}
  double ratio_std_error = 0.0;
  double expected_ratio = 0.0;  // (n+d)/(n+2d)
  double ratio_z = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double l2_rel_std_error = 0.0;
  int trials = 0;
  int violations = 0;           // L1-matched h with ||h||_{L2} < ||g||_{L2} (1 - 3 sigma_rel)
  double min_margin = INFINITY;  // min over trials of ||h||_{L2} / ||g||_{L2} - 1
  double max_identity_error = 0.0;  // max relative error of int_G |h| g = (n+d)/(n+2d) int_G |h|
  bool passed() const { return std::abs(ratio_z) <= 3.0 && violations == 0 && max_identity_error <= 1e-9; }
};

/// L^2/L^1 extremal property of g among forms of its degree, with all norms
/// estimated on one common set of rays.
inline L2L1Report l2l1_extremal_check(const Form<double>& g, int trials, const McConfig& cfg,
                                      std::uint64_t trial_seed) {
  detail::require_volume_degree(g.degree());
  if (trials < 0) throw InputError("negative trial count");
  const int n = g.n();
  const int d = g.degree();
  Rng rng(trial_seed);
  std::vector<FormEvaluator> hs;
  for (int t = 0; t < trials; ++t) hs.emplace_back(random_bombieri_form(n, d, rng));

  // components: |g|, g^2, then per trial |h|, h^2, |h| g
  std::vector<int> degrees{d, 2 * d};
  for (int t = 0; t < trials; ++t) degrees.insert(degrees.end(), {d, 2 * d, 2 * d});
  auto weights = [eg = FormEvaluator(g), hs](std::span<const double> z, std::span<double> out) mutable {
    const double gv = eg(z).value;
    out[0] = std::abs(gv);
    out[1] = gv * gv;
    for (std::size_t t = 0; t < hs.size(); ++t) {
      const double hv = hs[t](z).value;
      out[2 + 3 * t] = std::abs(hv);
      out[3 + 3 * t] = hv * hv;
      out[4 + 3 * t] = std::abs(hv) * gv;
    }
  };
  std::vector<VolumeEstimate> est = detail::reduced_integrals(g, degrees, cfg, weights);

  L2L1Report r;
  r.trials = trials;
  r.l1 = est[0].value;
  const double l2sq = est[1].value;
  r.l2 = std::sqrt(l2sq);
  r.ratio = l2sq / r.l1;
  r.ratio_std_error = r.ratio * std::hypot(est[1].std_error / l2sq, est[0].std_error / r.l1);
  r.expected_ratio = static_cast<double>(n + d) / (n + 2 * d);
  r.ratio_z = z_score(r.ratio, r.expected_ratio, r.ratio_std_error);
  r.l2_rel_std_error = 0.5 * est[1].std_error / l2sq;
  for (int t = 0; t < trials; ++t) {
    const VolumeEstimate& h1 = est[2 + 3 * t];
    const VolumeEstimate& h2 = est[3 + 3 * t];
    const VolumeEstimate& hg = est[4 + 3 * t];
    const double c = r.l1 / h1.value;
    const double l2h = c * std::sqrt(h2.value);
    const double sigma_rel = std::hypot(r.l2_rel_std_error, 0.5 * h2.std_error / h2.value);
    if (l2h < r.l2 * (1.0 - 3.0 * sigma_rel)) ++r.violations;
    r.min_margin = std::min(r.min_margin, l2h / r.l2 - 1.0);
    r.max_identity_error =
        std::max(r.max_identity_error, std::abs(hg.value - r.expected_ratio * h1.value) / h1.value);
  }
  return r;
}

}  // namespace pdform

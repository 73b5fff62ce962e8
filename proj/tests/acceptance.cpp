#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "pdform/finiteness.hpp"
#include "pdform/gauss.hpp"
#include "pdform/random.hpp"
#include "pdform/sos.hpp"
#include "pdform/volume.hpp"

using namespace pdform;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) o.pass = false;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += (ok ? "" : "FAILED ") + what;
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

McConfig mc(std::size_t samples, std::uint64_t seed) {
  return McConfig{samples, seed, std::max(1u, std::thread::hardware_concurrency()), 0};
}

Form<double> binary(std::initializer_list<std::pair<MultiIndex, double>> terms, int d) {
  Form<double> g(2, d);
  for (const auto& [a, c] : terms) g.add_term(a, c);
  return g;
}

Form<Rational> to_rational(const Form<double>& g) {
  Form<Rational> out(g.n(), g.degree());
  for (const auto& [a, c] : g.terms()) out.add_term(a, Rational(c));
  return out;
}

SymMatrix random_spd_bounded(std::size_t n, Rng& rng, double max_condition) {
  for (;;) {
    SymMatrix q = random_spd(n, rng, max_condition);
    if (condition_number(q) <= max_condition) return q;
  }
}

Outcome quadratic_closed_form() {
  Outcome o;
  Rng rng(101);
  int bad = 0;
  double worst_z = 0.0;
  double worst_rel = 0.0;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 4);
    SymMatrix gm = random_spd_bounded(n, rng, 100.0);
    VolumeEstimate v = volume_mc(quadratic_form(gm), mc(1'000'000, 1000 + i));
    const double want = volume_quadratic_closed(gm);
    const double z = std::abs(z_score(v.value, want, v.std_error));
    const double rel = v.std_error / v.value;
    worst_z = std::max(worst_z, z);
    worst_rel = std::max(worst_rel, rel);
    if (z > 3.0 || rel >= 0.01) ++bad;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note(o, bad == 0, fmt("%d/20 outside 3 sigma or 1%% stderr (max |z| %.2f, max rel stderr %.2e)", bad, worst_z, worst_rel));
  note(o, secs < 60.0, fmt("%.1f s", secs));
  return o;
}

Outcome gram_identity() {
  Outcome o;
  Rng rng(202);
  double worst = 0.0;
  int bad = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int n : {2, 3})
    for (int d : {2, 4, 6, 8})
      for (int i = 0; i < 10; ++i) {
        SymMatrix q = random_spd(static_cast<std::size_t>(n), rng);
        const double r = gram_identity_residual(q, d).residual;
        worst = std::max(worst, r);
        if (!(r <= 1e-8)) ++bad;
      }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note(o, bad == 0, fmt("max residual %.2e over 80 matrices", worst));
  const Rational exact = gram_identity_residual(Matrix<Rational>::identity(2), 4).residual;
  note(o, exact == 0, "exact residual for I, n=2, d=4 is " + format_scalar(exact));
  note(o, secs < 30.0, fmt("%.1f s", secs));
  return o;
}

Outcome covariance_identity() {
  Outcome o;
  Rng rng(303);
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n)
    for (int i = 0; i < 5; ++i) {
      SymMatrix q = random_spd(n, rng);
      SymMatrix m = moment_matrix(q, 2).entries;
      worst = std::max(worst, max_abs_entry(m * q - SymMatrix::identity(n)));
    }
  note(o, worst <= 1e-10, fmt("max |M2 Q - I| %.2e for n <= 6", worst));
  return o;
}

Outcome sphere_moments() {
  Outcome o;
  Rng rng(404);
  std::uint64_t seed = 4000;
  for (auto [n, d] : {std::pair{2, 4}, std::pair{3, 4}, std::pair{2, 6}}) {
    SymMatrix q = random_spd(static_cast<std::size_t>(n), rng);
    MomentMatrixEstimate est = sphere_measure_moment_matrix_mc(q, d, mc(1'000'000, seed++));
    SymMatrix exact = moment_matrix(q, d).entries;
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.rows(); ++i)
      for (std::size_t j = 0; j < exact.cols(); ++j)
        worst = std::max(worst, std::abs(z_score(est.values(i, j), exact(i, j), est.std_errors(i, j))));
    note(o, worst <= 3.0, fmt("(n,d)=(%d,%d) max |z| %.2f", n, d, worst));
  }
  return o;
}

Outcome complete_monotonicity() {
  Outcome o;
  Rng rng(505);
  for (int i = 0; i < 5; ++i) {
    const int n = 2 + i % 2;
    Form<double> g = random_pd_form(n, 4, rng);
    CmReport r = cm_check(g, 3, 10, mc(200'000, 5000 + i), 5100 + i);
    note(o, r.passed(), fmt("n=%d: %d violations, min z %.1f, max fd |z| %.2f", n, r.violations, r.min_z, r.max_fd_z));
  }
  return o;
}

Outcome homogeneity() {
  Outcome o;
  Rng rng(606);
  double worst = 0.0;
  for (int n : {2, 3, 4})
    for (int d : {2, 4, 6}) {
      Form<double> g = random_pd_form(n, d, rng);
      const McConfig cfg = mc(100'000, 6000);
      const double base = volume_mc(g, cfg).value;
      for (double t : {0.5, 2.0, 8.0}) {
        const double scaled = volume_mc(g * t, cfg).value;
        const double want = std::pow(t, -static_cast<double>(n) / d) * base;
        worst = std::max(worst, std::abs(scaled - want) / want);
      }
    }
  note(o, worst <= 1e-12, fmt("max relative deviation from t^(-n/d) %.2e", worst));
  return o;
}

Outcome l2l1() {
  Outcome o;
  Rng rng(707);
  for (int i = 0; i < 5; ++i) {
    const int n = 2 + i % 2;
    const int d = 2 + 2 * (i % 3);
    L2L1Report r = l2l1_extremal_check(random_pd_form(n, d, rng), 100, mc(200'000, 7000 + i), 7100 + i);
    note(o, r.passed(),
         fmt("n=%d d=%d ratio %.4f vs %.4f (z %.2f), %d/100 violations", n, d, r.ratio, r.expected_ratio, r.ratio_z,
             r.violations));
  }
  L2L1Report disc = l2l1_extremal_check(quadratic_form(SymMatrix::identity(2)), 0, mc(10'000, 7200), 0);
  const double l2sq = disc.l2 * disc.l2;
  const bool exact = std::abs(l2sq - std::numbers::pi / 3) <= 1e-12 && std::abs(disc.l1 - std::numbers::pi / 2) <= 1e-12 &&
                     std::abs(disc.ratio - 2.0 / 3.0) <= 1e-12;
  note(o, exact, fmt("disc: L2^2 %.12f, L1 %.12f, ratio %.12f", l2sq, disc.l1, disc.ratio));
  return o;
}

Outcome binary_dichotomy() {
  Outcome o;
  struct Case {
    const char* name;
    Form<double> g;
    Verdict want;
  };
  std::vector<Case> cases{
      {"(x^2+y^2)^2", binary({{{4, 0}, 1}, {{2, 2}, 2}, {{0, 4}, 1}}, 4), Verdict::finite},
      {"x^2 y^2", binary({{{2, 2}, 1}}, 4), Verdict::infinite},
      {"y^2 (x^4+y^4)", binary({{{4, 2}, 1}, {{0, 6}, 1}}, 6), Verdict::finite},
      {"y^4 (x^2+y^2)", binary({{{2, 4}, 1}, {{0, 6}, 1}}, 6), Verdict::infinite},
      {"x^6+y^6", binary({{{6, 0}, 1}, {{0, 6}, 1}}, 6), Verdict::finite},
      {"x y^3 (x^2+y^2)", binary({{{3, 3}, 1}, {{1, 5}, 1}}, 6), Verdict::negative},
  };
  std::uint64_t seed = 8000;
  for (const auto& c : cases) {
    Classification cl = classify_binary(to_rational(c.g));
    const bool agrees = c.want == Verdict::finite ? implies_finite_volume(cl.verdict) : cl.verdict == c.want;
    note(o, agrees && cl.certification == Certification::exact,
         std::string(c.name) + " " + std::string(to_string(cl.verdict)));
    if (c.want != Verdict::finite) continue;
    const double quad = binary_volume_quadrature(to_rational(c.g));
    // Zeros of order 2 at d = 6 give the integrand an infinite variance (tail index 3/2),
    // so the MC error decays like N^(-1/3).
    const double mcv = volume_mc(c.g, mc(10'000'000, seed++)).value;
    note(o, std::abs(quad - mcv) <= 0.01 * quad, fmt("%s quadrature %.6f vs MC %.6f", c.name, quad, mcv));
  }
  return o;
}

Outcome genericity() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Form<double> motzkin = fixtures::motzkin<double>();
  Classification mz = generic_check(motzkin);
  int round = 0;
  for (const auto& z : mz.zeros)
    if (std::abs(std::abs(z.location[0]) - std::abs(z.location[2])) < 1e-6 &&
        std::abs(std::abs(z.location[1]) - std::abs(z.location[2])) < 1e-6)
      ++round;
  note(o, mz.verdict == Verdict::generic && mz.zeros.size() == 4 && round == 4,
       fmt("Motzkin: %s with %zu zero clusters (%d at |x1|=|x2|=|x3|)", std::string(to_string(mz.verdict)).c_str(),
           mz.zeros.size(), round));
  if (mz.verdict == Verdict::non_generic)
    o.detail += " [the zeros (1,0,0) and (0,1,0) have corank-2 Hessians, see README]";

  for (int n : {3, 4})
    for (int d : {4, 6}) {
      Form<double> g = fixtures::round_zero_family<double>(n, d);
      Classification c = generic_check(g);
      note(o, c.verdict == Verdict::generic && c.zeros.size() == 1,
           fmt("family n=%d d=%d: %s with %zu zeros", n, d, std::string(to_string(c.verdict)).c_str(), c.zeros.size()));
    }

  DiagnosticReport dr = finiteness_diagnostic(motzkin, default_diagnostic_schedule(), mc(0, 9000));
  note(o, dr.verdict == FinitenessHint::likely_finite,
       fmt("Motzkin diagnostic %s (tail index %.2f, drift %.3f)", std::string(to_string(dr.verdict)).c_str(),
           dr.tail_index, dr.relative_drift));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  note(o, secs < 120.0, fmt("%.1f s", secs));
  return o;
}

Outcome weighted_quadratic() {
  Outcome o;
  Rng rng(1010);
  for (int i = 0; i < 10; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 2);
    SymMatrix gm = random_spd(n, rng);
    SymMatrix hm = random_psd(n, rng, 1 + static_cast<std::size_t>(i % static_cast<int>(n)));
    VolumeEstimate v = weighted_volume_mc(quadratic_form(gm), quadratic_form(hm), mc(1'000'000, 10000 + i));
    const double want = hsos_quadratic_closed(gm, hm);
    const double z = z_score(v.value, want, v.std_error);
    note(o, std::abs(z) <= 3.0, fmt("case %d n=%zu z %.2f", i, n, z));
  }
  const double half_pi = hsos_quadratic_closed(SymMatrix::identity(2), SymMatrix::identity(2));
  note(o, std::abs(half_pi - std::numbers::pi / 2) <= 1e-14, fmt("G=H=I gives %.15f", half_pi));
  return o;
}

Outcome laplace_path() {
  Outcome o;
  Rng rng(1111);
  for (int i = 0; i < 5; ++i) {
    const int n = 2 + i % 2;
    const int d = 2 + 2 * (i % 2);
    LaplaceReport r = laplace_path_check(random_pd_form(n, d, rng), mc(100'000, 11000 + i));
    note(o, std::abs(r.z) <= 3.0 && r.max_pairing_error <= 1e-12 && r.samples >= 10'000,
         fmt("n=%d d=%d z %.2f, pairing error %.1e on %zu samples", n, d, r.z, r.max_pairing_error, r.samples));
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"quadratic closed form", quadratic_closed_form},
      {"gram identity", gram_identity},
      {"d=2 covariance identity", covariance_identity},
      {"sphere measure moments", sphere_moments},
      {"complete monotonicity", complete_monotonicity},
      {"homogeneity law", homogeneity},
      {"L2/L1 extremality", l2l1},
      {"binary dichotomy", binary_dichotomy},
      {"genericity", genericity},
      {"weighted quadratic closed form", weighted_quadratic},
      {"Laplace path", laplace_path},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

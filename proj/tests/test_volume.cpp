#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pdform/random.hpp"
#include "pdform/volume.hpp"

using namespace pdform;

namespace {

McConfig small(std::uint64_t seed = 42) { return McConfig{200'000, seed, 2, 0}; }

}  // namespace

TEST(VolumeMc, DiscIsExact) {
  auto v = volume_mc(fixtures::circle(), small());
  EXPECT_NEAR(v.value, std::numbers::pi, 1e-12);
  EXPECT_EQ(v.samples, 200'000u);
  EXPECT_TRUE(v.flags.empty());
}

TEST(VolumeMc, LpBalls) {
  for (int n : {2, 3}) {
    Form<double> g(n, 4);
    for (int i = 0; i < n; ++i) g.add_term(MultiIndex::unit(static_cast<std::size_t>(n), static_cast<std::size_t>(i), 4), 1.0);
    auto v = volume_mc(g, small(n));
    EXPECT_NEAR(v.value, oracle::lp_ball_volume(n, 4), 4 * v.std_error) << n;
  }
  Form<double> s(2, 6, {{{6, 0}, 1.0}, {{0, 6}, 1.0}});
  auto v = volume_mc(s, small(5));
  EXPECT_NEAR(v.value, oracle::lp_ball_volume(2, 6), 4 * v.std_error);
}

TEST(VolumeMc, QuadraticClosedForm) {
  Rng rng(51);
  for (int n : {2, 3, 4, 5}) {
    auto gm = random_spd(static_cast<std::size_t>(n), rng, 100.0);
    const double closed = volume_quadratic_closed(gm);
    EXPECT_NEAR(closed, oracle::ellipsoid_volume(to_eigen(gm)), 1e-10 * closed);
    auto v = volume_mc(quadratic_form(gm), small(static_cast<std::uint64_t>(n)));
    EXPECT_NEAR(v.value, closed, 4 * v.std_error) << n;
  }
  EXPECT_TRUE(std::isinf(volume_quadratic_closed(SymMatrix::diagonal({1.0, 0.0}))));
}

TEST(VolumeMc, ScalingLawIsExactOnCommonSamples) {
  Rng rng(53);
  auto g = random_pd_form(3, 4, rng);
  auto base = volume_mc(g, small());
  for (double t : {0.5, 2.0, 8.0}) {
    auto v = volume_mc(g * t, small());
    EXPECT_NEAR(v.value, std::pow(t, -3.0 / 4.0) * base.value, 1e-12 * base.value) << t;
  }
}

TEST(VolumeMc, MonotoneInTheForm) {
  Rng rng(57);
  auto g = random_pd_form(3, 4, rng);
  auto h = random_pd_form(3, 4, rng);
  const double a = volume_mc(g, small()).value;
  const double b = volume_mc(g + h * 0.3, small()).value;
  const double c = volume_mc(g + h, small()).value;
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
}

TEST(VolumeMc, RotationInvariance) {
  Rng rng(59);
  auto g = random_pd_form(3, 4, rng);
  auto u = random_orthogonal(3, rng);
  auto a = volume_mc(g, small(1));
  auto b = volume_mc(change_of_variables(g, u), small(2));
  EXPECT_LE(std::abs(z_score(a.value, b.value, std::hypot(a.std_error, b.std_error))), 4.0);
}

TEST(VolumeMc, ShardCountKeepsAccuracy) {
  auto g = fixtures::x4_plus_y4();
  const double want = oracle::lp_ball_volume(2, 4);
  for (unsigned shards : {1u, 3u, 8u}) {
    auto v = volume_mc(g, McConfig{100'000, 4, shards, 0});
    EXPECT_NEAR(v.value, want, 4 * v.std_error) << shards;
  }
}

TEST(VolumeMc, DeterministicForFixedConfig) {
  Rng rng(61);
  auto g = random_pd_form(3, 6, rng);
  auto a = volume_mc(g, small());
  auto b = volume_mc(g, small());
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(VolumeMc, NegativeFormThrows) {
  Form<double> g(2, 2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}});
  EXPECT_THROW(volume_mc(g, small()), NegativeFormError);
}

TEST(VolumeMc, RejectsOddDegree) {
  Form<double> g(2, 3, {{{3, 0}, 1.0}});
  EXPECT_THROW(volume_mc(g, small()), InputError);
}

TEST(VolumeMc, HeavyTailFlagRates) {
  auto rate = [](auto&& make_form) {
    int flagged = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed)
      flagged += volume_mc(make_form(seed), McConfig{100'000, seed, 1, 0}).has_flag("heavy_tail");
    return flagged;
  };
  auto steep = fixtures::form<double>(2, 6, {{{2, 4}, "1"}, {{0, 6}, "1"}});
  const int steep_rate = rate([&](std::uint64_t) { return steep; });
  const int log_rate = rate([](std::uint64_t) { return fixtures::x2y2(); });
  const int pd_rate = rate([](std::uint64_t seed) {
    Rng rng(seed);
    return random_pd_form(3, 4, rng);
  });
  EXPECT_GE(steep_rate, 30);
  EXPECT_LE(pd_rate, 5);
  EXPECT_GT(log_rate, pd_rate);
}

TEST(WeightedVolume, ConstantWeightIsVolume) {
  Rng rng(63);
  auto g = random_pd_form(2, 4, rng);
  auto w = weighted_volume_mc(g, Form<double>::constant(2, 1.0), small());
  auto v = volume_mc(g, small());
  EXPECT_NEAR(w.value, v.value, 1e-12 * v.value);
}

TEST(WeightedVolume, HsosIdentityCase) {
  EXPECT_NEAR(hsos_quadratic_closed(SymMatrix::identity(2), SymMatrix::identity(2)), std::numbers::pi / 2, 1e-14);
  auto w = weighted_volume_mc(fixtures::circle(), fixtures::circle(), small());
  EXPECT_NEAR(w.value, std::numbers::pi / 2, 1e-12);
}

TEST(WeightedVolume, MatchesClosedForm) {
  Rng rng(67);
  for (int n : {2, 3}) {
    auto gm = random_spd(static_cast<std::size_t>(n), rng);
    auto hm = random_psd(static_cast<std::size_t>(n), rng, 1);
    auto w = weighted_volume_mc(quadratic_form(gm), quadratic_form(hm), small());
    EXPECT_NEAR(w.value, hsos_quadratic_closed(gm, hm), 4 * w.std_error) << n;
  }
}

TEST(WeightedVolume, NegativeWeightRejected) {
  Form<double> h(2, 2, {{{2, 0}, -1.0}});
  EXPECT_THROW(weighted_volume_mc(fixtures::circle(), h, small()), InputError);
}

TEST(Norms, DiscAnalyticValues) {
  auto l1 = l1_norm(fixtures::circle(), fixtures::circle(), small());
  auto l2 = l2_norm(fixtures::circle(), fixtures::circle(), small());
  EXPECT_NEAR(l1.value, std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(l2.value * l2.value, std::numbers::pi / 3, 1e-12);
}

TEST(Derivative, FirstOrderMatchesFiniteDifference) {
  Rng rng(71);
  auto g = random_pd_form(2, 4, rng);
  auto v = random_pd_form(2, 4, rng);
  auto r = directional_derivative_mc(g, {v}, Form<double>::constant(2, 1.0), small());
  ASSERT_TRUE(r.finite_difference.has_value());
  EXPECT_GT(r.value, 0.0);
  EXPECT_LE(std::abs(*r.fd_z_score()), 5.0);
}

TEST(Derivative, DiscAnalytic) {
  // f(g + t(x^2+y^2)) = pi / (1 + t), so -f' at 0 is pi.
  auto r = directional_derivative_mc(fixtures::circle(), {fixtures::circle()}, Form<double>::constant(2, 1.0), small());
  EXPECT_NEAR(r.value, std::numbers::pi, 1e-10);
  auto r2 = directional_derivative_mc(fixtures::circle(), {fixtures::circle(), fixtures::circle()},
                                      Form<double>::constant(2, 1.0), small(), {false, 0.01});
  EXPECT_NEAR(r2.value, 2 * std::numbers::pi, 1e-10);
  EXPECT_FALSE(r2.finite_difference.has_value());
}

TEST(Derivative, RejectsMismatchedDirection) {
  EXPECT_THROW(directional_derivative_mc(fixtures::x4_plus_y4(), {fixtures::circle()}, Form<double>::constant(2, 1.0), small()),
               InputError);
}

TEST(CmCheck, RandomQuarticPasses) {
  Rng rng(73);
  auto g = random_pd_form(2, 4, rng);
  auto r = cm_check(g, 3, 3, McConfig{100'000, 5, 2, 0}, 99);
  EXPECT_EQ(r.violations, 0);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.entries.size(), 9u);
}

TEST(LaplacePath, AgreesOnQuartic) {
  auto r = laplace_path_check(fixtures::x4_plus_y4(), McConfig{200'000, 11, 2, 0});
  EXPECT_TRUE(r.passed()) << r.z;
  EXPECT_LE(r.max_pairing_error, 1e-12);
}

TEST(L2L1, DiscAnalyticRatio) {
  auto r = l2l1_extremal_check(fixtures::circle(), 10, small(), 1);
  EXPECT_NEAR(r.l1, std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(r.l2 * r.l2, std::numbers::pi / 3, 1e-12);
  EXPECT_NEAR(r.ratio, 2.0 / 3.0, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(L2L1, RandomFormMinimizes) {
  Rng rng(79);
  auto r = l2l1_extremal_check(random_pd_form(3, 4, rng), 30, small(), 2);
  EXPECT_NEAR(r.expected_ratio, 7.0 / 11.0, 1e-15);
  EXPECT_EQ(r.violations, 0);
  EXPECT_GT(r.min_margin, 0.0);
  EXPECT_TRUE(r.passed());
}

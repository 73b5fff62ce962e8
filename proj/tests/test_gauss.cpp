#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pdform/gauss.hpp"
#include "pdform/random.hpp"

using namespace pdform;

TEST(SigmaD, MatchesGammaFunctionForm) {
  for (int n = 1; n <= 6; ++n)
    for (int d = 2; d <= 10; d += 2) {
      const double want = oracle::sigma_d_power(n, d);
      EXPECT_NEAR(to_double(sigma_d_power(n, d)), want, 1e-13 * want) << n << " " << d;
      EXPECT_NEAR(std::pow(sigma_d(n, d), d), want, 1e-12 * want);
    }
}

TEST(SigmaD, QuadraticCaseIsOne) {
  for (int n = 1; n <= 8; ++n) EXPECT_EQ(sigma_d_power(n, 2), 1);
}

TEST(SigmaD, KnownValue) { EXPECT_EQ(sigma_d_power(2, 4), Rational(3, 8)); }

TEST(SigmaD, RejectsOddDegree) { EXPECT_THROW(sigma_d_power(2, 3), InputError); }

TEST(GaussianMoment, MatchesPerfectMatchings) {
  Rng rng(17);
  for (int n : {2, 3, 4}) {
    SymMatrix cov = random_spd(static_cast<std::size_t>(n), rng);
    Eigen::MatrixXd ce = to_eigen(cov);
    GaussianMoments<double> moments(cov);
    for (int deg : {2, 4, 6})
      for (const auto& gamma : MonomialBasis(n, deg)) {
        const double want = oracle::isserlis_monomial(ce, gamma.exponents());
        EXPECT_NEAR(moments(gamma), want, 1e-11 * (1 + std::abs(want)));
      }
  }
}

TEST(GaussianMoment, StandardNormalDoubleFactorials) {
  Matrix<Rational> id = Matrix<Rational>::identity(2);
  EXPECT_EQ(gaussian_moment(id, MultiIndex{4, 0}), 3);
  EXPECT_EQ(gaussian_moment(id, MultiIndex{6, 2}), 15);
  EXPECT_EQ(gaussian_moment(id, MultiIndex{3, 1}), 0);
}

TEST(MomentMatrix, HankelAndSymmetric) {
  Rng rng(23);
  for (int n : {2, 3})
    for (int d : {2, 4, 6}) {
      auto q = random_spd(static_cast<std::size_t>(n), rng);
      auto m = moment_matrix(q, d);
      EXPECT_EQ(m.degree(), d);
      EXPECT_LE(hankel_defect(m), 1e-14 * max_abs_entry(m.entries));
      EXPECT_TRUE(is_symmetric(m.entries));
      EXPECT_TRUE(is_positive_definite(m.entries));
    }
}

TEST(MomentMatrix, EntriesAreScaledGaussianMoments) {
  Rng rng(29);
  auto q = random_spd(3, rng);
  Eigen::MatrixXd cov = to_eigen(q).inverse();
  auto m = moment_matrix(q, 4);
  const double scale = oracle::sigma_d_power(3, 4);
  for (std::size_t i = 0; i < m.basis.size(); ++i)
    for (std::size_t j = 0; j < m.basis.size(); ++j) {
      const double want = scale * oracle::isserlis_monomial(cov, (m.basis[i] + m.basis[j]).exponents());
      EXPECT_NEAR(m(i, j), want, 1e-12 * (1 + std::abs(want)));
    }
}

TEST(MomentMatrix, QuadraticIsInverse) {
  Rng rng(31);
  for (int n = 1; n <= 6; ++n) {
    auto q = random_spd(static_cast<std::size_t>(n), rng);
    auto m = moment_matrix(q, 2);
    SymMatrix prod = m.entries * q;
    EXPECT_LE(max_abs_entry(prod - SymMatrix::identity(static_cast<std::size_t>(n))), 1e-10);
  }
}

TEST(MomentMatrix, RotationCovariance) {
  // M_2[U^T Q U] = U^T M_2[Q] U.
  Rng rng(37);
  auto q = random_spd(3, rng);
  auto u = random_orthogonal(3, rng);
  auto lhs = moment_matrix(u.transpose() * q * u, 2).entries;
  auto rhs = u.transpose() * moment_matrix(q, 2).entries * u;
  EXPECT_LE(max_abs_entry(lhs - rhs), 1e-12);
}

TEST(MomentMatrix, RejectsIndefinite) {
  auto q = fixtures::rational_matrix({{"1", "2"}, {"2", "1"}});
  EXPECT_THROW(moment_matrix(q, 4), NotPositiveDefiniteError);
  EXPECT_THROW(moment_matrix(q.cast<double>(), 4), NotPositiveDefiniteError);
}

TEST(GramIdentity, ExactZeroForIdentity) {
  auto r = gram_identity_residual(Matrix<Rational>::identity(2), 4);
  EXPECT_EQ(r.residual, 0);
  EXPECT_TRUE(r.difference.is_zero());
}

TEST(GramIdentity, ExactZeroForRationalQ) {
  auto q = fixtures::rational_matrix({{"2", "1/2", "0"}, {"1/2", "1", "1/3"}, {"0", "1/3", "3"}});
  for (int d : {2, 4, 6}) EXPECT_EQ(gram_identity_residual(q, d).residual, 0) << d;
}

TEST(GramIdentity, DoubleResidualSmall) {
  Rng rng(41);
  for (int n : {2, 3})
    for (int d : {2, 4, 6, 8}) {
      auto r = gram_identity_residual(random_spd(static_cast<std::size_t>(n), rng), d);
      EXPECT_LE(r.residual, 1e-8) << n << " " << d;
      EXPECT_GE(r.condition_number, 1.0);
    }
}

TEST(GramIdentity, ExpansionOfPower) {
  auto q = Matrix<Rational>::identity(2);
  auto p = expand_power_quadratic(q, 4);
  EXPECT_EQ(p.coefficient({4, 0}), 1);
  EXPECT_EQ(p.coefficient({2, 2}), 2);
  EXPECT_EQ(p.coefficient({0, 4}), 1);
}

TEST(SphereMeasure, MassForIdentity) {
  McConfig cfg{200'000, 7, 1, 0};
  auto e = sphere_measure_mass_mc(SymMatrix::identity(3), 4, cfg);
  EXPECT_NEAR(e.value, static_cast<double>(binomial(4, 2)), 1e-12);
}

TEST(SphereMeasure, MomentsMatchMomentMatrix) {
  Rng rng(43);
  McConfig cfg{200'000, 8, 2, 0};
  auto q = random_spd(2, rng);
  auto est = sphere_measure_moment_matrix_mc(q, 4, cfg);
  auto exact = moment_matrix(q, 4);
  for (std::size_t i = 0; i < est.values.rows(); ++i)
    for (std::size_t j = 0; j < est.values.cols(); ++j)
      EXPECT_LE(std::abs(z_score(est.values(i, j), exact(i, j), est.std_errors(i, j))), 4.0);
  MultiIndex gamma{2, 2};
  auto single = sphere_measure_moment_mc(q, 4, gamma, cfg);
  EXPECT_NEAR(single.value, exact(0, 2), 4 * single.std_error);
}

TEST(GaussianLike, MassAndMoments) {
  Rng rng(47);
  McConfig cfg{200'000, 9, 2, 0};
  auto q = random_spd(2, rng);
  auto est = gaussian_like_moments_mc(q, 4, cfg);
  EXPECT_NEAR(est.mass.value, est.closed_mass, 4 * est.mass.std_error + 1e-12 * est.closed_mass);
  auto exact = moment_matrix(q, 4);
  for (std::size_t i = 0; i < est.moments.rows(); ++i)
    for (std::size_t j = 0; j < est.moments.cols(); ++j)
      EXPECT_LE(std::abs(z_score(est.moments(i, j), exact(i, j), est.std_errors(i, j))), 4.0);
}

TEST(PartitionMass, QuadraticGaussianIntegral) {
  // int exp(-x^T Q x) = pi^{n/2} / sqrt(det Q).
  auto q = SymMatrix::diagonal({2.0, 0.5, 3.0});
  EXPECT_NEAR(partition_mass(q, 2, 1.0), std::pow(std::numbers::pi, 1.5) / std::sqrt(3.0), 1e-12);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pdform/forms.hpp"
#include "pdform/gram.hpp"
#include "pdform/random.hpp"

using namespace pdform;

TEST(MultiIndex, GradedOrder) {
  MonomialBasis b(2, 2);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (MultiIndex{2, 0}));
  EXPECT_EQ(b[1], (MultiIndex{1, 1}));
  EXPECT_EQ(b[2], (MultiIndex{0, 2}));
  EXPECT_LT((MultiIndex{0, 1}), (MultiIndex{2, 0}));
  EXPECT_EQ(b.index_of(MultiIndex{1, 1}), 1u);
}

TEST(MultiIndex, BasisSizeIsBinomial) {
  for (int n = 1; n <= 5; ++n)
    for (int k = 0; k <= 6; ++k) EXPECT_EQ(MonomialBasis(n, k).size(), binomial(n + k - 1, k)) << n << " " << k;
}

TEST(MultiIndex, RejectsNegativeExponent) { EXPECT_THROW(MultiIndex({1, -1}), InputError); }

TEST(Multinomial, KnownValues) {
  EXPECT_EQ(multinomial(MultiIndex{2, 2}), 6);
  EXPECT_EQ(multinomial(MultiIndex{1, 1, 1}), 6);
  EXPECT_EQ(multinomial(MultiIndex{4, 0}), 1);
  EXPECT_EQ(multinomial(MultiIndex{3, 2, 1}), 60);
}

TEST(Form, AddTermCancelsAndValidates) {
  Form<Rational> f(2, 2);
  f.add_term({2, 0}, Rational(1));
  f.add_term({2, 0}, Rational(-1));
  EXPECT_TRUE(f.is_zero());
  EXPECT_THROW(f.add_term({1, 0}, Rational(1)), InputError);
  EXPECT_THROW(f.add_term({1, 1, 0}, Rational(1)), InputError);
}

TEST(Form, BinomialExpansion) {
  auto lin = linear_form<Rational>({Rational(1), Rational(1)});
  auto p = pow(lin, 4);
  EXPECT_EQ(p.coefficient({4, 0}), 1);
  EXPECT_EQ(p.coefficient({3, 1}), 4);
  EXPECT_EQ(p.coefficient({2, 2}), 6);
  EXPECT_EQ(p.term_count(), 5u);
}

TEST(Form, EvaluationExactAndDouble) {
  auto g = fixtures::motzkin<Rational>();
  std::vector<Rational> xr{Rational(1), Rational(1), Rational(1)};
  EXPECT_EQ((eval_at<Rational, Rational>(g, std::span<const Rational>(xr))), 0);
  EXPECT_DOUBLE_EQ(eval(g, std::vector<double>{1.0, 2.0, 0.5}), 4.0 + 16.0 + 1.0 / 64 - 3.0);
}

TEST(Form, QuadraticMatrixRoundTrip) {
  auto q = fixtures::rational_matrix({{"2", "1/3"}, {"1/3", "5"}});
  EXPECT_EQ(quadratic_matrix(quadratic_form(q)), q);
}

TEST(Form, HomogeneityAndEuler) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_bombieri_form(3, 4, rng);
    auto x = random_normal_vector(3, rng);
    std::vector<double> tx(x);
    for (auto& v : tx) v *= 1.7;
    EXPECT_NEAR(eval(g, tx), std::pow(1.7, 4) * eval(g, x), 1e-10 * (1 + std::abs(eval(g, tx))));
    auto grad = gradient(g, std::span<const double>(x));
    double euler = 0.0;
    for (std::size_t i = 0; i < 3; ++i) euler += x[i] * grad[i];
    EXPECT_NEAR(euler, 4 * eval(g, x), 1e-10 * (1 + std::abs(euler)));
  }
}

TEST(Form, GradientAndHessianMatchFiniteDifferences) {
  Rng rng(11);
  auto g = random_bombieri_form(3, 6, rng);
  auto f = [&g](const std::vector<double>& y) { return eval(g, y); };
  auto x = random_normal_vector(3, rng);
  auto grad = gradient(g, std::span<const double>(x));
  auto fd = oracle::fd_gradient(f, x);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(grad[i], fd[i], 1e-5 * (1 + std::abs(fd[i])));
  auto h = hessian(g, std::span<const double>(x));
  auto fh = oracle::fd_hessian(f, x);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(h(i, j), fh(i, j), 1e-4 * (1 + std::abs(fh(i, j))));
}

TEST(Form, PartialDerivative) {
  auto g = fixtures::motzkin<Rational>();
  auto dx = partial_derivative(g, 0);
  EXPECT_EQ(dx.degree(), 5);
  EXPECT_EQ(dx.coefficient({3, 2, 0}), 4);
  EXPECT_EQ(dx.coefficient({1, 2, 2}), -6);
}

TEST(Form, MotzkinDehomogenization) {
  auto p = dehomogenize(fixtures::motzkin<Rational>());
  Polynomial<Rational> want(2);
  want.add_term({4, 2}, Rational(1));
  want.add_term({2, 4}, Rational(1));
  want.add_term({0, 0}, Rational(1));
  want.add_term({2, 2}, Rational(-3));
  EXPECT_EQ(p, want);
  for (double a : {1.0, -1.0})
    for (double b : {1.0, -1.0}) {
      std::vector<double> y{a, b};
      EXPECT_EQ(p(std::span<const double>(y)), 0.0);
    }
}

TEST(Bombieri, ReproducesEvaluation) {
  Rng rng(5);
  for (int n : {2, 3, 4})
    for (int d : {2, 4, 6}) {
      auto g = random_bombieri_form(n, d, rng);
      auto ell = random_normal_vector(static_cast<std::size_t>(n), rng);
      const double want = eval(g, ell);
      EXPECT_NEAR(bombieri_inner(veronese(ell, d), g), want, 1e-10 * (1 + std::abs(want)));
    }
}

TEST(Bombieri, ReproducesEvaluationExactly) {
  auto g = fixtures::motzkin<Rational>();
  std::vector<Rational> ell{Rational(1, 2), Rational(-2), Rational(3)};
  EXPECT_EQ(bombieri_inner(veronese(ell, 6), g), (eval_at<Rational, Rational>(g, std::span<const Rational>(ell))));
}

TEST(Bombieri, OrthogonalInvariance) {
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    auto g = random_bombieri_form(3, 4, rng);
    auto h = random_bombieri_form(3, 4, rng);
    auto u = random_orthogonal(3, rng);
    const double before = bombieri_inner(g, h);
    const double after = bombieri_inner(change_of_variables(g, u), change_of_variables(h, u));
    EXPECT_NEAR(after, before, 1e-10 * (1 + std::abs(before)));
  }
}

TEST(Bombieri, ExactRationalRotation) {
  auto g = fixtures::motzkin<Rational>();
  Matrix<Rational> u = Matrix<Rational>::identity(3);
  auto r = fixtures::pythagorean_rotation();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) u(i + 1, j + 1) = r(i, j);
  EXPECT_EQ(bombieri_inner(change_of_variables(g, u), change_of_variables(g, u)), bombieri_inner(g, g));
}

TEST(ChangeOfVariables, Composition) {
  Rng rng(21);
  auto g = random_bombieri_form(3, 4, rng);
  SymMatrix a(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) a(i, j) = std::normal_distribution<double>()(rng);
  auto ga = change_of_variables(g, a);
  auto x = random_normal_vector(3, rng);
  std::vector<double> ax(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) ax[i] += a(i, j) * x[j];
  EXPECT_NEAR(eval(ga, x), eval(g, ax), 1e-9 * (1 + std::abs(eval(g, ax))));
  EXPECT_THROW(change_of_variables(g, SymMatrix(3, 3)), SingularMatrixError);
}

TEST(FormEvaluator, MatchesEval) {
  Rng rng(2);
  auto g = random_bombieri_form(4, 6, rng);
  FormEvaluator ev(g);
  auto x = random_normal_vector(4, rng);
  auto v = ev(std::span<const double>(x));
  EXPECT_NEAR(v.value, eval(g, x), 1e-12 * (1 + v.magnitude));
  EXPECT_GE(v.magnitude, std::abs(v.value));
}

TEST(Gram, ExpansionMatchesQuadraticForm) {
  auto gm = fixtures::rational_matrix({{"1", "0", "-1/2"}, {"0", "2", "0"}, {"-1/2", "0", "1"}});
  auto g = gram_to_form(gm, MonomialBasis(2, 2));
  EXPECT_EQ(g.coefficient({4, 0}), 1);
  EXPECT_EQ(g.coefficient({2, 2}), 1);
  EXPECT_EQ(g.coefficient({0, 4}), 1);
  EXPECT_EQ(g.term_count(), 3u);
}

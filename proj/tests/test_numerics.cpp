#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wcetrange/numerics/forest.hpp"
#include "wcetrange/numerics/logistic.hpp"
#include "wcetrange/numerics/nelder_mead.hpp"
#include "wcetrange/numerics/stats.hpp"
#include "wcetrange/random.hpp"

using namespace wcetrange;
using namespace wcetrange::numerics;

namespace {

DesignMatrix linear_logit_data(std::size_t n, double c0, double c1, Rng& rng) {
  DesignMatrix dm;
  dm.x.resize(static_cast<Eigen::Index>(n), 2);
  dm.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double v = uniform_real(rng, 0.0, 1.0);
    dm.x(static_cast<Eigen::Index>(i), 0) = 1.0;
    dm.x(static_cast<Eigen::Index>(i), 1) = v;
    dm.y[static_cast<Eigen::Index>(i)] = bernoulli(rng, sigmoid(c0 + c1 * v)) ? 1.0 : 0.0;
  }
  return dm;
}

// Gradient of the penalized log-likelihood by central differences.
Eigen::VectorXd numeric_gradient(const DesignMatrix& dm, Eigen::VectorXd beta, double ridge) {
  Eigen::VectorXd g(beta.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    auto f = [&](double delta) {
      Eigen::VectorXd b = beta;
      b[i] += delta;
      return log_likelihood(dm, b) - 0.5 * ridge * b.squaredNorm();
    };
    g[i] = (f(h) - f(-h)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("irls recovers logit(-3 + 2v) at 10^5 rows") {
  auto rng = make_stream(1);
  const auto dm = linear_logit_data(100000, -3.0, 2.0, rng);
  const auto fit = irls_fit(dm);
  CHECK(fit.converged);
  CHECK(std::abs(fit.coefficients[0] + 3.0) < 0.05);
  CHECK(std::abs(fit.coefficients[1] - 2.0) < 0.05);
}

TEST_CASE("irls intercept-only with balanced labels") {
  DesignMatrix dm;
  dm.x = Eigen::MatrixXd::Ones(100, 1);
  dm.y.resize(100);
  for (int i = 0; i < 100; ++i) dm.y[i] = i % 2;
  const auto fit = irls_fit(dm);
  CHECK(std::abs(fit.coefficients[0]) < 1e-6);
  CHECK(fit.log_likelihood == doctest::Approx(100 * std::log(0.5)));
}

TEST_CASE("irls on separable data") {
  DesignMatrix dm;
  dm.x.resize(2, 2);
  dm.x << 1, 0, 1, 1;
  dm.y.resize(2);
  dm.y << 0, 1;
  const auto fit = irls_fit(dm, 1e-6);
  CHECK(fit.coefficients.allFinite());
  CHECK(fit.coefficients[1] > 0);
  CHECK(fit.coefficients[0] < 0);
  CHECK_THROWS_AS(irls_fit([] {
                    DesignMatrix d;
                    d.x = Eigen::MatrixXd::Ones(4, 2);
                    d.y = Eigen::VectorXd::Zero(4);
                    d.y[0] = 1;
                    return d;
                  }()),
                  SingularSystem);
}

TEST_CASE("irls optimum has a vanishing gradient") {
  auto rng = make_stream(2);
  const auto dm = linear_logit_data(2000, 0.5, -1.5, rng);
  for (double ridge : {0.0, 1e-3, 1.0}) {
    const auto fit = irls_fit(dm, ridge);
    CHECK(numeric_gradient(dm, fit.coefficients, ridge).norm() < 1e-4);
  }
}

TEST_CASE("irls log-likelihood never decreases across iterations") {
  auto rng = make_stream(3);
  const auto dm = linear_logit_data(500, 1.0, 4.0, rng);
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t iters = 1; iters <= 8; ++iters) {
    const auto fit = irls_fit(dm, 0.0, iters);
    CHECK(fit.log_likelihood >= prev - 1e-12);
    prev = fit.log_likelihood;
  }
}

TEST_CASE("forest finds the threshold feature") {
  auto rng = make_stream(4);
  const Eigen::Index n = 1000, f = 6;
  Eigen::MatrixXd x(n, f);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) x(i, j) = uniform_real(rng, 0, 1);
    y[static_cast<std::size_t>(i)] = x(i, 3) > 0.6 ? 1 : 0;
  }
  ForestConfig cfg;
  auto frng = make_stream(5);
  const auto imp = forest_importance(x, y, cfg, frng);
  CHECK(imp[3] > 0.5);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("worker count does not change the result") {
    cfg.workers = 3;
    auto r2 = make_stream(5);
    CHECK(forest_importance(x, y, cfg, r2) == imp);
  }
  SUBCASE("monotone transform of a feature leaves importances unchanged") {
    Eigen::MatrixXd x2 = x;
    for (Eigen::Index i = 0; i < n; ++i) x2(i, 3) = std::exp(3 * x(i, 3));
    auto r2 = make_stream(5);
    const auto imp2 = forest_importance(x2, y, cfg, r2);
    for (std::size_t j = 0; j < imp.size(); ++j) CHECK(imp2[j] == doctest::Approx(imp[j]).epsilon(1e-12));
  }
}

TEST_CASE("forest with constant features") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 3, 2.0);
  std::vector<int> y(50);
  for (int i = 0; i < 50; ++i) y[static_cast<std::size_t>(i)] = i % 2;
  auto rng = make_stream(6);
  const auto imp = forest_importance(x, y, {}, rng);
  for (double v : imp) CHECK(v == 0.0);
  std::vector<int> one(50, 1);
  CHECK_THROWS_AS(forest_importance(x, one, {}, rng), std::invalid_argument);
}

TEST_CASE("nelder-mead") {
  SimplexConfig cfg;
  SUBCASE("convex quadratic") {
    const auto r = nelder_mead(
        [](std::span<const double> x) {
          double s = 0;
          for (double v : x) s += (v - 3) * (v - 3);
          return s;
        },
        std::vector<double>{0, 0, 0}, cfg);
    for (double v : r.x) CHECK(std::abs(v - 3) < 1e-4);
  }
  SUBCASE("rosenbrock") {
    const auto r = nelder_mead(
        [](std::span<const double> x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); },
        std::vector<double>{-1.2, 1.0}, cfg);
    CHECK(r.f < 1e-6);
  }
  SUBCASE("constant objective") {
    const auto r = nelder_mead([](std::span<const double>) { return 7.0; }, std::vector<double>{1, 2}, cfg);
    CHECK(r.x == std::vector<double>{1, 2});
    CHECK(r.converged);
    CHECK(r.f == 7.0);
  }
  SUBCASE("never worse than the start") {
    auto rng = make_stream(7);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x0{uniform_real(rng, -3, 3), uniform_real(rng, -3, 3)};
      auto f = [](std::span<const double> x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]) + 0.1 * x[0] * x[0]; };
      const auto r = nelder_mead(f, x0, cfg);
      CHECK(r.f <= f(x0));
    }
  }
}

TEST_CASE("aic") {
  CHECK(aic(0.0, 1) == 2.0);
  CHECK(aic(-10.0, 3) == 26.0);
  CHECK(aic(-4.5, 3) - aic(-4.5, 2) == 2.0);
}

TEST_CASE("mann-whitney") {
  SUBCASE("exact tail on complete separation") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto r = mann_whitney_u(a, b, Alternative::less);
    CHECK(r.exact);
    CHECK(r.u == 0.0);
    CHECK(r.p_value == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(mann_whitney_u(b, a, Alternative::greater).p_value == doctest::Approx(0.05));
    CHECK(mann_whitney_u(a, b, Alternative::two_sided).p_value == doctest::Approx(0.1));
  }
  SUBCASE("identical samples") {
    const std::vector<double> a{1, 2, 3, 4};
    const auto r = mann_whitney_u(a, a, Alternative::two_sided);
    CHECK(r.u == 8.0);
    CHECK(r.p_value == doctest::Approx(1.0));
    std::vector<double> big(20, 1.0);
    const auto rb = mann_whitney_u(big, big, Alternative::greater);
    CHECK(rb.u == 200.0);
    CHECK(rb.p_value == 1.0);
  }
  SUBCASE("shift invariance") {
    auto rng = make_stream(8);
    for (int n : {5, 12}) {
      std::vector<double> a, b;
      for (int i = 0; i < n; ++i) {
        a.push_back(std::floor(uniform_real(rng, 0, 10)));
        b.push_back(std::floor(uniform_real(rng, 2, 12)));
      }
      const auto r = mann_whitney_u(a, b, Alternative::less);
      for (auto& v : a) v += 100;
      for (auto& v : b) v += 100;
      const auto s = mann_whitney_u(a, b, Alternative::less);
      CHECK(r.u == s.u);
      CHECK(r.p_value == s.p_value);
    }
  }
  SUBCASE("exact matches brute-force enumeration with ties") {
    const std::vector<double> a{1, 2, 2, 5}, b{2, 3, 3, 4, 6};
    // enumerate all C(9,4) splits of the pooled sample
    std::vector<double> pooled{1, 2, 2, 5, 2, 3, 3, 4, 6};
    auto rank_sum = [&](const std::vector<int>& pick) {
      double s = 0;
      for (int i : pick) {
        double less = 0, eq = 0;
        for (double v : pooled) {
          less += v < pooled[static_cast<std::size_t>(i)];
          eq += v == pooled[static_cast<std::size_t>(i)];
        }
        s += less + (eq + 1) / 2;
      }
      return s;
    };
    const double observed = rank_sum({0, 1, 2, 3});
    int total = 0, le = 0;
    for (int m = 0; m < (1 << 9); ++m) {
      if (__builtin_popcount(static_cast<unsigned>(m)) != 4) continue;
      std::vector<int> pick;
      for (int i = 0; i < 9; ++i)
        if (m & (1 << i)) pick.push_back(i);
      ++total;
      le += rank_sum(pick) <= observed + 1e-9;
    }
    const auto r = mann_whitney_u(a, b, Alternative::less);
    CHECK(r.p_value == doctest::Approx(static_cast<double>(le) / total).epsilon(1e-12));
  }
  SUBCASE("normal approximation agrees with a clear shift") {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
      a.push_back(i);
      b.push_back(i + 15);
    }
    const auto r = mann_whitney_u(b, a, Alternative::greater);
    CHECK_FALSE(r.exact);
    CHECK(r.p_value < 1e-4);
    CHECK(mann_whitney_u(a, b, Alternative::greater).p_value > 0.99);
  }
}

TEST_CASE("rng streams are keyed") {
  auto a = make_stream(1, {2, 3});
  auto b = make_stream(1, {2, 3});
  auto c = make_stream(1, {3, 2});
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(derive_seed(1, {2, 3}) == make_stream(1, {2, 3})());
}

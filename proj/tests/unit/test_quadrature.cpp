#include <doctest.h>

#include <cmath>
#include <limits>

#include "sklab/error.hpp"
#include "sklab/quadrature.hpp"
#include "sklab/rng.hpp"

using namespace sklab;

namespace {

double double_factorial(int k) {
  double r = 1.0;
  for (int j = k; j > 1; j -= 2) r *= j;
  return r;
}

}  // namespace

TEST_CASE("weights sum to one and nodes are antisymmetric") {
  for (std::size_t m : {1u, 2u, 5u, 16u, 64u, 100u}) {
    const Quadrature rule = gauss_hermite(m);
    double sum = 0.0;
    for (double w : rule.weights()) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t k = 0; k < m; ++k) CHECK(rule.nodes()[k] == -rule.nodes()[m - 1 - k]);
  }
}

TEST_CASE("monomials up to degree 2m-1 integrate exactly") {
  for (std::size_t m : {2u, 4u, 8u, 12u}) {
    const Quadrature rule = gauss_hermite(m);
    for (int deg = 0; deg <= static_cast<int>(2 * m - 1); ++deg) {
      const double got = expect_gaussian([deg](double z) { return std::pow(z, deg); }, rule);
      const double want = deg % 2 == 1 ? 0.0 : double_factorial(deg - 1);
      // Scale of the summands: E|z|^deg is within a factor of two of this.
      const double scale = double_factorial(deg % 2 == 1 ? deg : deg - 1);
      CHECK(std::abs(got - want) <= 1e-14 * std::max(1.0, scale));
    }
  }
  // The default rule: moments up to degree 20 against the double factorials.
  for (int deg = 0; deg <= 20; deg += 2) {
    const double got = expect_gaussian([deg](double z) { return std::pow(z, deg); });
    CHECK(got == doctest::Approx(double_factorial(deg - 1)).epsilon(1e-12));
  }
}

TEST_CASE("expect_gaussian basics") {
  CHECK(expect_gaussian([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(expect_gaussian([](double z) { return z * z; }) - 1.0) < 1e-14);
  const double t = std::tanh(0.5);
  CHECK(expect_gaussian([](double z) { return std::pow(std::tanh(0.0 * z + 0.5), 2); }) ==
        doctest::Approx(t * t).epsilon(1e-14));
}

TEST_CASE("expect_gaussian names the offending node") {
  try {
    expect_gaussian([](double z) { return z > 1.0 ? std::numeric_limits<double>::infinity() : 0.0; });
    FAIL("expected EvaluationError");
  } catch (const EvaluationError& e) {
    CHECK(std::string(e.what()).find("node") != std::string::npos);
  }
}

TEST_CASE("expect_bivariate") {
  const auto id = [](double x) { return x; };
  CHECK(std::abs(expect_bivariate(id, id, 1.0, 2.0, 0.0)) < 1e-14);
  CHECK(expect_bivariate(id, id, 1.0, 2.0, 0.7) == doctest::Approx(0.7).epsilon(1e-13));

  // Perfect correlation reduces to a one-dimensional expectation.
  const auto g = [](double x) { return std::tanh(x + 0.2); };
  const double v = 0.6;
  const double one_d = expect_gaussian([&](double z) { return g(std::sqrt(v) * z) * g(std::sqrt(v) * z); });
  CHECK(expect_bivariate(g, g, v, v, v) == doctest::Approx(one_d).epsilon(1e-13));

  CHECK_THROWS_AS(expect_bivariate(id, id, 1.0, 1.0, 1.5), DomainError);
  CHECK_THROWS_AS(expect_bivariate(id, id, -0.1, 1.0, 0.0), DomainError);
}

TEST_CASE("expect_bivariate against Monte Carlo") {
  const auto g = [](double x) { return std::tanh(x + 0.4); };
  const double quad = expect_bivariate(g, g, 1.0, 1.0, 0.5);
  // 1e7 correlated pairs from the counter-based stream.
  CounterRng rng(20240521);
  const std::size_t samples = 10'000'000;
  const double c = std::sqrt(1.0 - 0.25);
  double acc = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    acc += g(z1) * g(0.5 * z1 + c * z2);
  }
  const double mc = acc / static_cast<double>(samples);
  CHECK(std::abs(quad - mc) < 5e-4);
  // Converged value of 300-node tensor rules computed outside this code base;
  // the 64-node rule is accurate to about 1e-10 on this integrand.
  CHECK(std::abs(quad - 0.22818251201535483) < 1e-9);
  CHECK(std::abs(expect_bivariate(g, g, 1.0, 1.0, 0.5, gauss_hermite(200)) - 0.22818251201535483) < 1e-14);
}

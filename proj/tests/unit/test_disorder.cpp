#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "sklab/disorder.hpp"
#include "sklab/error.hpp"
#include "sklab/rng.hpp"

using namespace sklab;

TEST_CASE("normal quantile matches the Boost reference") {
  const boost::math::normal_distribution<double> nd;
  double worst = 0.0;
  for (double p : {1e-300, 1e-100, 1e-20, 1e-8, 1e-3, 0.02, 0.0249, 0.1, 0.3, 0.425, 0.5, 0.575,
                   0.7, 0.9, 0.975, 0.999, 1 - 1e-10}) {
    const double want = boost::math::quantile(nd, p);
    worst = std::max(worst, std::abs(normal_quantile(p) - want) / std::max(1.0, std::abs(want)));
  }
  CHECK(worst < 1e-14);
  for (int k = 1; k < 1000; ++k) {
    const double p = k / 1000.0;
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("uniform bits map into the open unit interval") {
  CHECK(uniform_open(0) > 0.0);
  CHECK(uniform_open(~std::uint64_t{0}) < 1.0);
  CounterRng rng(5);
  for (int k = 0; k < 1000; ++k) CHECK(rng.below(7) < 7);
}

TEST_CASE("counter stream is a pure function of (seed, counter)") {
  CounterRng a(42);
  CounterRng b(42);
  for (int k = 0; k < 100; ++k) CHECK(a.next_bits() == b.next_bits());
  CHECK(CounterRng(42).next_bits() != CounterRng(43).next_bits());
  CHECK(replicate_seed(1, 0) != replicate_seed(1, 1));
  CHECK(hash_combine(1, 2) != hash_combine(2, 1));
}

TEST_CASE("sample_matrix invariants") {
  const DisorderMatrix a = sample_matrix(37, 9);
  double asym = 0.0;
  for (std::size_t i = 0; i < 37; ++i) {
    CHECK(a(i, i) == 0.0);
    for (std::size_t j = 0; j < 37; ++j) asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  }
  CHECK(asym == 0.0);
  CHECK(a.seed() == 9);
  CHECK_THROWS_AS(sample_matrix(0, 1), DomainError);
  const DisorderMatrix one = sample_matrix(1, 3);
  CHECK(one(0, 0) == 0.0);
}

TEST_CASE("entries depend only on (seed, min, max)") {
  const DisorderMatrix small = sample_matrix(10, 77);
  const DisorderMatrix big = sample_matrix(50, 77);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) CHECK(small(i, j) == big(i, j));
  CHECK(coupling_entry(77, 3, 8) == coupling_entry(77, 8, 3));
  CHECK(coupling_entry(77, 3, 8) == small(3, 8));
  const DisorderMatrix again = sample_matrix(50, 77);
  CHECK(std::equal(big.data().begin(), big.data().end(), again.data().begin()));
}

TEST_CASE("n = 2000 entry moments") {
  const std::size_t n = 2000;
  const DisorderMatrix a = sample_matrix(n, 123456789);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      sum += a(i, j);
      sq += a(i, j) * a(i, j);
    }
  const double count = n * (n - 1) / 2.0;
  const double mean = sum / count;
  const double var = sq / count - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(count));
  CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("restricted_row") {
  const DisorderMatrix a = sample_matrix(5, 11);
  // One-based (i = 2, S = {4}) in the usual notation is (1, {3}) here.
  const RestrictedRow r = restricted_row(a, 1, {3});
  REQUIRE(r.indices == std::vector<std::size_t>{0, 2, 4});
  for (std::size_t k = 0; k < 3; ++k) CHECK(r.values[k] == a(1, r.indices[k]));

  CHECK(restricted_row(a, 2, {}).indices.size() == 4);
  const RestrictedRow single = restricted_row(a, 0, {1, 2, 4});
  REQUIRE(single.indices.size() == 1);
  CHECK(single.values[0] == a(0, 3));
  CHECK_THROWS_AS(restricted_row(a, 3, {3}), DomainError);
}

TEST_CASE("index sets") {
  const IndexSet s({5, 1, 3});
  CHECK(std::vector<std::size_t>(s.begin(), s.end()) == std::vector<std::size_t>{1, 3, 5});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(2));
  CHECK(s.with(2).size() == 4);
  CHECK_THROWS_AS(IndexSet({1, 1}), DomainError);
}

TEST_CASE("matrix round trip through the binary format") {
  const auto path = std::filesystem::temp_directory_path() / "sklab_matrix_roundtrip.bin";
  const DisorderMatrix a = sample_matrix(9, 314);
  save_matrix(a, path);
  CHECK(std::filesystem::file_size(path) == 16 + 81 * 8);
  const DisorderMatrix b = load_matrix(path);
  CHECK(b.n() == 9);
  CHECK(b.seed() == 314);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "short";
  }
  CHECK_THROWS_AS(load_matrix(path), DomainError);
  std::filesystem::remove(path);
}

TEST_CASE("permuted relabels rows and columns") {
  const DisorderMatrix a = sample_matrix(6, 4);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 2, 4};
  const DisorderMatrix b = a.permuted(perm);
  for (std::size_t x = 0; x < 6; ++x)
    for (std::size_t y = 0; y < 6; ++y) CHECK(b(x, y) == a(perm[x], perm[y]));
}

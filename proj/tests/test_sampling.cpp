#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "raylearn/common.hpp"
#include "raylearn/sampler.hpp"

using namespace raylearn;

namespace {

// Independent oracle: reverse the digit string with string arithmetic on
// exact integers, then evaluate as a rational number.
double oracle_radical_inverse(int base, uint64_t index) {
  std::vector<int> digits;
  while (index) {
    digits.push_back(int(index % uint64_t(base)));
    index /= uint64_t(base);
  }
  double value = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) value = (value + *it) / base;
  // digits reversed: least significant digit becomes the leading fraction digit
  return value;
}

// Star discrepancy of a 2D point set, brute-forced over anchored boxes whose
// corners lie on a 32x32 grid.
double star_discrepancy_grid32(const std::vector<std::pair<double, double>>& pts) {
  const int g = 32;
  double worst = 0;
  for (int i = 1; i <= g; ++i) {
    for (int j = 1; j <= g; ++j) {
      double u = double(i) / g, v = double(j) / g;
      int inside = 0;
      for (const auto& p : pts)
        if (p.first < u && p.second < v) ++inside;
      worst = std::max(worst, std::abs(double(inside) / double(pts.size()) - u * v));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("radical inverse base 2 small indices") {
  CHECK(radical_inverse(2, 0) == 0.0);
  CHECK(radical_inverse(2, 1) == 0.5);
  CHECK(radical_inverse(2, 2) == 0.25);
  CHECK(radical_inverse(2, 3) == 0.75);
  CHECK(radical_inverse(2, 4) == 0.125);
}

TEST_CASE("radical inverse base 3 index 5") {
  // 5 in base 3 is (1 2); reversing gives 0.21_3 = 2/3 + 1/9 = 7/9.
  CHECK(radical_inverse(3, 5) == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("radical inverse matches digit-reversal oracle") {
  const int bases[] = {2, 3, 5, 7, 31, 131, 10, 1000};  // includes non-prime bases
  for (int base : bases)
    for (uint64_t index : {0ull, 1ull, 17ull, 255ull, 100003ull, (1ull << 40) + 12345ull})
      CHECK(radical_inverse(base, index) ==
            doctest::Approx(oracle_radical_inverse(base, index)).epsilon(1e-13));
}

TEST_CASE("radical inverse outputs stay in the unit interval") {
  for (int base : {2, 3, 131, 7919})
    for (uint64_t i = 0; i < 2000; ++i) {
      double v = radical_inverse(base, i * 7919 + 1);
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
}

TEST_CASE("radical inverse rejects bad bases") {
  CHECK_THROWS_AS(radical_inverse(1, 3), ContractViolation);
  CHECK_THROWS_AS(radical_inverse(0, 3), ContractViolation);
  CHECK_THROWS_AS(radical_inverse(-2, 3), ContractViolation);
}

TEST_CASE("first 2^k base-2 points stratify exactly") {
  const int k = 6, n = 1 << k;
  std::vector<int> counts(n, 0);
  for (int i = 0; i < n; ++i) {
    int cell = int(radical_inverse(2, uint64_t(i)) * n);
    REQUIRE(cell >= 0);
    REQUIRE(cell < n);
    ++counts[cell];
  }
  for (int c : counts) CHECK(c == 1);
}

TEST_CASE("halton dimensions below 32 are prime radical inverses") {
  for (int dim : {0, 1, 2, 15, 31})
    for (uint64_t index : {1ull, 9ull, 1024ull, 999983ull})
      CHECK(halton_point(index, dim) == radical_inverse(kHaltonPrimes[dim], index));
}

TEST_CASE("hash fallback dimensions are uniform-ish and decorrelated") {
  const int n = 10000;
  double sum_a = 0, sum_b = 0, sum_ab = 0;
  for (int i = 0; i < n; ++i) {
    double a = halton_point(uint64_t(i), 40);
    double b = halton_point(uint64_t(i), 41);
    CHECK(a >= 0.0);
    CHECK(a < 1.0);
    sum_a += a;
    sum_b += b;
    sum_ab += a * b;
  }
  double mean_a = sum_a / n, mean_b = sum_b / n;
  double cov = sum_ab / n - mean_a * mean_b;
  CHECK(std::abs(mean_a - 0.5) < 0.02);
  CHECK(std::abs(mean_b - 0.5) < 0.02);
  CHECK(std::abs(cov) < 0.005);  // |corr| ~ 12 cov; bound is ~5 sigma
}

TEST_CASE("dimension cap is enforced") {
  CHECK_NOTHROW(halton_point(7, kMaxSampleDims - 1));
  CHECK_THROWS_AS(halton_point(7, kMaxSampleDims), ContractViolation);
  CHECK_THROWS_AS(halton_point(7, -1), ContractViolation);
}

TEST_CASE("sample streams are pure functions of index and cursor") {
  SampleStream a(1234), b(1234);
  for (int i = 0; i < 50; ++i) CHECK(a.next() == b.next());

  SampleStream c(1234);
  SampleStream other(77);
  for (int i = 0; i < 10; ++i) {
    double expect = halton_point(1234, i);
    CHECK(c.next() == expect);
    other.next();  // interleaved stream must not disturb c's cursor
  }
  CHECK(c.cursor() == 10);

  SampleStream offset(1234, 5);
  CHECK(offset.next() == halton_point(1234, 5));
}

TEST_CASE("stream index partitioning never collides across purposes") {
  CHECK(stream_index(0, 0, 5) == 5);
  CHECK(stream_index(0, 1, 0) > stream_index(0, 0, (1ull << 40) - 1));
  CHECK(stream_index(1, 0, 0) > stream_index(0, 15, (1ull << 40) - 1));
}

TEST_CASE("halton beats seeded pseudorandom sets on star discrepancy") {
  const int n = 64;
  std::vector<std::pair<double, double>> halton;
  for (int i = 0; i < n; ++i) halton.push_back({halton_point(i, 0), halton_point(i, 1)});
  double d_halton = star_discrepancy_grid32(halton);

  double best_random = 1.0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n; ++i) pts.push_back({rng.next_double(), rng.next_double()});
    best_random = std::min(best_random, star_discrepancy_grid32(pts));
  }
  CHECK(d_halton < best_random);
}

#include "helpers.hpp"

#include <cmath>

#include "mrcsplit/stats.hpp"

#if MRCSPLIT_HAVE_BOOST_MATH
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>
#endif

using namespace mrcsplit;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using testing::error_kind;

namespace {

std::vector<double> normal_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& e : v) e = d(rng);
  return v;
}

}  // namespace

TEST_CASE("pearson r basics") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(pearson_r(x, x).r == 1.0);
  CHECK(pearson_r(x, x).p == 0.0);
  const std::vector<double> labels{1, 1, 0, 0}, scores{1, 1, 0, 0};
  CHECK(pearson_r(labels, scores).r == 1.0);

  const std::vector<double> y{2, 4, 5, 4, 5};
  const auto c = pearson_r(x, y);
  CHECK_THAT(c.r, WithinAbs(std::sqrt(0.6), 1e-12));

  SECTION("sign flips and affine invariance") {
    std::mt19937_64 rng(1);
    for (int round = 0; round < 50; ++round) {
      const auto a = normal_vector(rng, 12), b = normal_vector(rng, 12);
      const auto base = pearson_r(a, b);
      std::vector<double> neg(b), affine(b);
      for (auto& e : neg) e = -e;
      for (auto& e : affine) e = 3.5 * e + 10.0;
      CHECK_THAT(pearson_r(a, neg).r, WithinAbs(-base.r, 1e-12));
      CHECK_THAT(pearson_r(a, affine).r, WithinAbs(base.r, 1e-12));
      CHECK_THAT(pearson_r(a, affine).p, WithinAbs(base.p, 1e-10));
    }
  }

  CHECK(error_kind([] { pearson_r(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}); }) ==
        ErrorKind::DegenerateVector);
  CHECK(error_kind([] { pearson_r(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}); }) ==
        ErrorKind::LengthMismatch);
  CHECK(error_kind([] { pearson_r(std::vector<double>{1, 2}, std::vector<double>{2, 1}); }) ==
        ErrorKind::LengthMismatch);
}

TEST_CASE("incomplete beta edges") {
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a
  CHECK_THAT(incomplete_beta(1, 1, 0.3), WithinAbs(0.3, 1e-14));
  CHECK_THAT(incomplete_beta(2.5, 1, 0.4), WithinAbs(std::pow(0.4, 2.5), 1e-14));
  // symmetry I_x(a, b) = 1 - I_{1-x}(b, a)
  CHECK_THAT(incomplete_beta(3, 7, 0.2), WithinAbs(1.0 - incomplete_beta(7, 3, 0.8), 1e-14));
  // t = 0 gives p = 1
  CHECK_THAT(student_t_two_sided(0.0, 10), WithinAbs(1.0, 1e-14));
}

#if MRCSPLIT_HAVE_BOOST_MATH
TEST_CASE("incomplete beta agrees with boost") {
  for (double a : {0.5, 1.0, 1.5, 4.0, 14.0, 49.0, 250.0})
    for (double b : {0.5, 1.0, 3.0})
      for (double x : {1e-6, 0.01, 0.1, 0.35, 0.5, 0.77, 0.9, 0.999}) {
        INFO(a << " " << b << " " << x);
        const double want = boost::math::ibeta(a, b, x);
        CHECK_THAT(incomplete_beta(a, b, x), WithinAbs(want, 1e-12) || WithinRel(want, 1e-10));
      }
}

TEST_CASE("t-test p agrees with boost") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {5u, 10u, 30u, 120u}) {
    for (int round = 0; round < 20; ++round) {
      const auto x = normal_vector(rng, n), y = normal_vector(rng, n);
      const auto c = pearson_r(x, y);
      const double df = static_cast<double>(n) - 2.0;
      const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
      boost::math::students_t dist(df);
      const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
      CHECK_THAT(c.p, WithinAbs(want, 1e-10));
      CHECK_THAT(student_t_two_sided(t, df), WithinAbs(want, 1e-10));
    }
  }
}
#endif

TEST_CASE("analytic p tracks a large permutation test") {
  std::mt19937_64 rng(2019);
  for (int round = 0; round < 4; ++round) {
    const auto x = normal_vector(rng, 30), y = normal_vector(rng, 30);
    const double analytic = pearson_r(x, y).p;
    const double perm = permutation_p(x, y, 200000, 7 + static_cast<std::uint64_t>(round));
    INFO("analytic " << analytic << " permutation " << perm);
    CHECK(std::fabs(analytic - perm) < 0.005);
  }
}

TEST_CASE("permutation p is seeded") {
  const std::vector<double> x{1, 0, 1, 0, 1, 1, 0, 0}, y{0.9, 0.2, 0.7, 0.4, 0.8, 0.6, 0.1, 0.3};
  CHECK(permutation_p(x, y, 1000, 42) == permutation_p(x, y, 1000, 42));
  const double p = permutation_p(x, y, 1000, 42);
  CHECK(p > 0.0);
  CHECK(p <= 1.0);
  // perfectly separated labels: only label-preserving shuffles tie
  CHECK(p < 0.05);
}

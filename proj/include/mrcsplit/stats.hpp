#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mrcsplit/error.hpp"
#include "mrcsplit/random.hpp"

namespace mrcsplit {

namespace stats_detail {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace stats_detail

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * stats_detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * stats_detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

namespace stats_detail {

inline void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::LengthMismatch, "vectors have lengths " + std::to_string(x.size()) +
                                               " and " + std::to_string(y.size()));
  if (x.size() < 3)
    throw Error(ErrorKind::LengthMismatch, "correlation needs at least 3 points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y))
    throw Error(ErrorKind::DegenerateVector, "correlation input is constant");
}

inline std::vector<double> centered(std::span<const double> v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  std::vector<double> out(v.begin(), v.end());
  for (double& e : out) e -= mean;
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace stats_detail

/// Sample Pearson r with the analytic two-sided p from t = r sqrt((n-2)/(1-r^2)).
inline Correlation pearson_r(std::span<const double> x, std::span<const double> y) {
  using namespace stats_detail;
  check_inputs(x, y);
  const auto cx = centered(x);
  const auto cy = centered(y);
  const double r = std::clamp(dot(cx, cy) / std::sqrt(dot(cx, cx) * dot(cy, cy)), -1.0, 1.0);
  const double df = static_cast<double>(x.size()) - 2.0;
  // t^2 / (df + t^2) = r^2, so the beta argument reduces to 1 - r^2.
  const double p = std::fabs(r) >= 1.0 ? 0.0 : incomplete_beta(df / 2.0, 0.5, 1.0 - r * r);
  return {r, std::clamp(p, 0.0, 1.0)};
}

inline constexpr std::size_t kDefaultPermutations = 10000;

/// Two-sided permutation p-value: (1 + #{|r_perm| >= |r_obs|}) / (1 + permutations).
inline double permutation_p(std::span<const double> x, std::span<const double> y,
                            std::size_t permutations, std::uint64_t seed) {
  using namespace stats_detail;
  check_inputs(x, y);
  const auto cx = centered(x);
  auto cy = centered(y);
  const double norm = std::sqrt(dot(cx, cx) * dot(cy, cy));
  const double observed = std::fabs(dot(cx, cy) / norm);
  // Tolerance so permutations that reproduce the observed statistic count as ties.
  const double tol = 1e-12 * std::max(1.0, observed);
  SeededRng rng(seed);
  std::size_t extreme = 0;
  for (std::size_t i = 0; i < permutations; ++i) {
    rng.shuffle(cy);
    if (std::fabs(dot(cx, cy) / norm) >= observed - tol) ++extreme;
  }
  return (1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(permutations));
}

}  // namespace mrcsplit

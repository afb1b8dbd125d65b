#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rankdrift/errors.hpp"

// Closed-form limit objects: the macroscopic fraction of values below a
// level, the limiting laws of the lowest order statistics, their moments,
// and the degenerate limit of the replace-k-th-rank warm-up model.

namespace rankdrift {

// Limiting fraction of points at or below level s for a model with
// threshold s*: zero below the threshold, then linear up to one. A
// threshold of exactly one degenerates to an indicator at s = 1.
inline double limit_fraction_below(double s, double s_star) {
  if (!(s_star > 0.0 && s_star <= 1.0))
    throw ConfigError("threshold must be in (0,1]");
  if (s <= s_star) return s < s_star ? 0.0 : (s_star == 1.0 ? 1.0 : 0.0);
  if (s >= 1.0) return 1.0;
  return (s - s_star) / (1.0 - s_star);
}

// Limit CDF of the n-th smallest value (flat-tail K=2 family, threshold
// 1/2): h_1(s) = 2s and h_n(s) = (s/(1-s))^(2(n-1)) on [0,1/2], one above.
inline double order_stat_limit_cdf(int n, double s) {
  if (n < 1) throw RankOutOfRange("order statistic index must be >= 1");
  if (s <= 0.0) return 0.0;
  if (s >= 0.5) return 1.0;
  if (n == 1) return 2.0 * s;
  return std::pow((s / (1.0 - s)) * (s / (1.0 - s)), n - 1);
}

// Gauss hypergeometric series sum_m (a)_m (b)_m / (c)_m z^m / m!, summed
// with Kahan compensation until terms fall below `rel_tol` of the sum.
// Convergent for |z| < 1; we only call it at z = 1/2.
inline double hyp2f1(double a, double b, double c, double z,
                     double rel_tol = 1e-12) {
  if (std::abs(z) >= 1.0) throw ConfigError("series needs |z| < 1");
  double sum = 1.0, comp = 0.0, term = 1.0;
  double prev_abs = 1.0;
  for (int m = 0; m < 200000; ++m) {
    term *= (a + m) * (b + m) / ((c + m) * (m + 1)) * z;
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    const double abs_term = std::abs(term);
    if (abs_term < rel_tol * std::abs(sum) && abs_term <= prev_abs)
      return sum;
    prev_abs = abs_term;
  }
  throw QuadratureNonConvergence("hypergeometric series did not converge");
}

// k-th moment of the n-th limit order statistic:
//   n = 1: 2^-k / (k+1)
//   n >= 2: 2^-k - k 2^-(2n+k-2)/(2n+k-2) * 2F1(2n-2, 2n+k-2; 2n+k-1; 1/2)
inline double order_stat_moment(int n, int k) {
  if (n < 1) throw RankOutOfRange("order statistic index must be >= 1");
  if (k < 1) throw ConfigError("moment order must be >= 1");
  if (n == 1) return std::pow(2.0, -k) / double(k + 1);
  const double b = double(2 * n + k - 2);
  return std::pow(2.0, -k) -
         double(k) * std::pow(2.0, -b) / b *
             hyp2f1(double(2 * n - 2), b, b + 1.0, 0.5);
}

// Adaptive Simpson quadrature with Richardson acceptance. Throws when the
// recursion depth runs out before the local tolerance is met.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol,
                        int max_depth = 48) {
  struct Impl {
    F& f;
    int max_depth;
    double recurse(double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      if (depth >= max_depth)
        throw QuadratureNonConvergence("adaptive quadrature depth exhausted");
      return recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
             recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
  };
  Impl impl{f, max_depth};
  const double m = 0.5 * (a + b);
  const double fa = impl.f(a), fm = impl.f(m), fb = impl.f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return impl.recurse(a, m, b, fa, fm, fb, whole, tol, 0);
}

// Same moment through the tail identity k * int_0^(1/2) s^(k-1)(1 - h_n(s)) ds,
// evaluated by quadrature. Independent of the series route; used to
// cross-check it.
inline double moment_by_quadrature(int n, int k, double tol = 1e-10) {
  if (n < 1) throw RankOutOfRange("order statistic index must be >= 1");
  if (k < 1) throw ConfigError("moment order must be >= 1");
  auto integrand = [n, k](double s) {
    return std::pow(s, k - 1) * (1.0 - order_stat_limit_cdf(n, s));
  };
  return double(k) * adaptive_simpson(integrand, 0.0, 0.5, tol);
}

// Long-run limit of the replace-k-th-rank model: every coordinate below the
// target rank collapses to zero, the target stays uniform on [0,1], and
// everything above collapses to one.
enum class CoordinateLimit { Zero, Uniform01, One };

struct KthRankLimit {
  int n_points = 0;
  int k = 0;
  std::vector<CoordinateLimit> coords;  // index i -> law of rank i+1
};

inline KthRankLimit replace_kth_limit(int n_points, int k) {
  if (n_points < 1) throw ConfigError("need at least one point");
  if (k < 1 || k > n_points) throw RankOutOfRange("k outside 1..N");
  KthRankLimit out{n_points, k, {}};
  out.coords.resize(std::size_t(n_points));
  for (int i = 1; i <= n_points; ++i)
    out.coords[std::size_t(i) - 1] = i < k    ? CoordinateLimit::Zero
                                     : i == k ? CoordinateLimit::Uniform01
                                              : CoordinateLimit::One;
  return out;
}

// When the target rank scales as k(N) ~ theta*N, a typical coordinate ends
// up at zero with probability theta and at one otherwise.
struct TwoAtomLaw {
  double at_zero = 0.0;
  double at_one = 0.0;
};

inline TwoAtomLaw replace_kth_typical_atoms(double theta) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw ConfigError("theta must be in [0,1]");
  return {theta, 1.0 - theta};
}

}  // namespace rankdrift

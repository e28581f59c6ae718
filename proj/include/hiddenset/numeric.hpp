#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace hiddenset::numeric {

/// log C(n, k) through lgamma. Returns -inf outside 0 <= k <= n.
inline double log_choose(double n, double k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Digamma for x > 0: upward recurrence to x >= 10, then the asymptotic series.
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli-number coefficients B_2k / (2k).
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

struct RootResult {
  double root;
  bool converged;
};

/// Bisection on [lo, hi] for a function with f(lo) and f(hi) of opposite sign.
/// Stops when the bracket width falls below rel_tol * max(1, |mid|).
template <class F>
RootResult bisect(F&& f, double lo, double hi, double rel_tol = 1e-9,
                  int max_iter = 400) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, true};
  if (fhi == 0.0) return {hi, true};
  if ((flo < 0) == (fhi < 0)) return {lo, false};
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::max(1.0, std::fabs(mid))) return {mid, true};
    const double fm = f(mid);
    if (fm == 0.0) return {mid, true};
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), true};
}

/// Doubles the distance above `lo` until f changes sign relative to f(lo).
/// Returns the first upper end that brackets a root, or nullopt past `cap`.
template <class F>
std::optional<double> bracket_upward(F&& f, double lo, double step,
                                     double cap) {
  const bool neg = f(lo) < 0;
  double hi = lo + step;
  while (hi <= cap) {
    const double fh = f(hi);
    if (fh == 0.0 || (fh < 0) != neg) return hi;
    step *= 2.0;
    hi = lo + step;
  }
  return std::nullopt;
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace hiddenset::numeric

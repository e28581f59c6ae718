#pragma once

// Exact reference computations. These enumerate outcome spaces with
// multiprecision arithmetic and share no code path with the samplers, so
// they can be used to check the Monte-Carlo engine.

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "estimators.hpp"
#include "rng.hpp"

namespace hiddenset::oracle {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using Decimal = boost::multiprecision::cpp_dec_float_50;

/// Moments of an estimator under its sampling distribution.
///
/// `exact_*` are present when the computation stayed in rational
/// arithmetic; `expectation`/`variance` always hold a 50-digit value.
/// For conditioned estimators `conditioning` is the probability of the
/// conditioning event (1 otherwise).
struct ExactMoments {
  Decimal expectation;
  Decimal variance;
  std::optional<Rational> exact_expectation;
  std::optional<Rational> exact_variance;
  Decimal conditioning{1};
  std::int64_t support = 0;

  double mean() const { return expectation.convert_to<double>(); }
  double var() const { return variance.convert_to<double>(); }
  double bias(double target) const { return mean() - target; }
};

inline constexpr std::int64_t kRationalLimit = 200;

namespace detail {

inline BigInt choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

inline Decimal to_decimal(const Rational& q) {
  return Decimal(boost::multiprecision::numerator(q)) / Decimal(boost::multiprecision::denominator(q));
}

/// Weighted first two moments; weights need not be normalized.
template <class T>
struct Moments {
  T weight{0}, first{0}, second{0};
  void add(const T& value, const T& w) {
    weight += w;
    first += w * value;
    second += w * value * value;
  }
  T mean() const { return first / weight; }
  T variance() const {
    const T m = mean();
    return second / weight - m * m;
  }
};

inline ExactMoments from_rational(const Moments<Rational>& m, std::int64_t support) {
  ExactMoments out;
  out.exact_expectation = m.mean();
  out.exact_variance = m.variance();
  out.expectation = to_decimal(*out.exact_expectation);
  out.variance = to_decimal(*out.exact_variance);
  out.support = support;
  return out;
}

}  // namespace detail

/// Exact moments of a German-tank estimator by enumerating all C(N, n)
/// subsets of {1..N}. N is limited to 20.
inline ExactMoments exact_tank_moments(std::int64_t N, std::int64_t n, std::string_view id) {
  if (N < 1 || N > 20) throw ParameterError("exact_tank_moments: N must lie in [1, 20]");
  if (n < 1 || n > N) throw ParameterError("exact_tank_moments: n must lie in [1, N]");
  const bool known = id == ids::tank_mle || id == ids::tank_goodman || id == ids::tank_gap ||
                     id == ids::tank_unknown_origin || id == ids::tank_bayes_mean;
  if (!known) throw ParameterError("exact_tank_moments: unsupported estimator '" + std::string(id) + "'");
  if (id == ids::tank_bayes_mean && n < 3)
    throw ParameterError("exact_tank_moments: bayes mean needs n >= 3");
  if ((id == ids::tank_unknown_origin || id == ids::tank_gap) && n < 2)
    throw ParameterError("exact_tank_moments: gap estimators need n >= 2");

  auto value = [&](std::int64_t lo, std::int64_t hi) -> Rational {
    const Rational x1(lo), xn(hi), k(n);
    if (id == ids::tank_mle) return xn;
    if (id == ids::tank_goodman) return (k + 1) / k * xn - 1;
    if (id == ids::tank_gap) return xn + (xn - x1) / (k - 1) - 1;
    if (id == ids::tank_unknown_origin) return (xn - x1) * (k + 1) / (k - 1) - 1;
    return (k - 1) * (xn - 1) / (k - 2);
  };

  // The estimators depend only on (min, max): weight each pair by the number
  // of subsets with that min and max, then cross-check the total.
  detail::Moments<Rational> m;
  BigInt total = 0;
  for (std::int64_t lo = 1; lo <= N; ++lo) {
    for (std::int64_t hi = lo; hi <= N; ++hi) {
      BigInt count;
      if (n == 1) count = lo == hi ? 1 : 0;
      else count = hi > lo ? detail::choose(hi - lo - 1, n - 2) : BigInt(0);
      if (count == 0) continue;
      total += count;
      m.add(value(lo, hi), Rational(count));
    }
  }
  if (total != detail::choose(N, n)) throw std::logic_error("exact_tank_moments: enumeration mismatch");
  return detail::from_rational(m, total.convert_to<std::int64_t>());
}

/// Exact moments of a two-sample estimator over the hypergeometric law of
/// the recapture count m. Ids: "lp" (conditional on m >= 1), "chapman",
/// "mbm-conditional" (x = n1 fixed, conditional on m >= 1). Rational for
/// N <= 200, 50-digit decimal above.
inline ExactMoments exact_two_sample_moments(std::int64_t N, std::int64_t n1, std::int64_t n2,
                                             std::string_view id) {
  if (N < 1) throw ParameterError("exact_two_sample_moments: N must be positive");
  if (n1 < 1 || n1 > N || n2 < 1 || n2 > N)
    throw ParameterError("exact_two_sample_moments: sample sizes must lie in [1, N]");
  const bool conditional = id == "lp" || id == "mbm-conditional" || id == ids::crc_lp ||
                           id == ids::mbm;
  const bool chapman = id == "chapman" || id == ids::crc_chapman;
  if (!conditional && !chapman)
    throw ParameterError("exact_two_sample_moments: unsupported estimator '" + std::string(id) + "'");

  const std::int64_t lo = std::max<std::int64_t>(0, n1 + n2 - N);
  const std::int64_t hi = std::min(n1, n2);
  const std::int64_t first = conditional ? std::max<std::int64_t>(lo, 1) : lo;
  if (first > hi) throw ParameterError("exact_two_sample_moments: conditioning event has probability 0");

  if (N <= kRationalLimit) {
    detail::Moments<Rational> m;
    BigInt mass = 0;
    for (std::int64_t r = first; r <= hi; ++r) {
      const BigInt w = detail::choose(n1, r) * detail::choose(N - n1, n2 - r);
      if (w == 0) continue;
      mass += w;
      const Rational v = chapman ? Rational(BigInt((n1 + 1) * (n2 + 1)), BigInt(r + 1)) - 1
                                 : Rational(BigInt(n1 * n2), BigInt(r));
      m.add(v, Rational(w));
    }
    auto out = detail::from_rational(m, hi - first + 1);
    out.conditioning = detail::to_decimal(Rational(mass, detail::choose(N, n2)));
    return out;
  }

  // Unnormalized pmf by the ratio recursion from the lower end of the support.
  detail::Moments<Decimal> m;
  Decimal w = 1, all = 0;
  for (std::int64_t r = lo; r <= hi; ++r) {
    if (r > lo) {
      const Decimal rr(r);
      w *= (Decimal(n1) - rr + 1) * (Decimal(n2) - rr + 1) / (rr * (Decimal(N - n1 - n2) + rr));
    }
    all += w;
    if (r < first) continue;
    const Decimal v = chapman ? Decimal((n1 + 1) * (n2 + 1)) / Decimal(r + 1) - 1
                              : Decimal(n1 * n2) / Decimal(r);
    m.add(v, w);
  }
  ExactMoments out;
  out.expectation = m.mean();
  out.variance = m.variance();
  out.conditioning = m.weight / all;
  out.support = hi - first + 1;
  return out;
}

/// Exact -(N-n1)!(N-n2)! / (N!(N-n1-n2-1)!), the Chapman bias, when
/// n1 + n2 < N.
inline std::optional<Rational> chapman_bias_closed_form(std::int64_t N, std::int64_t n1, std::int64_t n2) {
  if (n1 + n2 + 1 > N) return std::nullopt;
  BigInt num = 1, den = 1;
  // (N-n1)! / N! = 1 / (N (N-1) ... (N-n1+1)); (N-n2)! / (N-n1-n2-1)! = (N-n2)...(N-n1-n2)
  for (std::int64_t i = 0; i < n1; ++i) den *= N - i;
  for (std::int64_t i = 0; i <= n1; ++i) num *= N - n2 - i;
  return -Rational(num, den);
}

inline constexpr std::int64_t kMaxOutcomes = 1'000'000;

/// Exact moments of the Horvitz–Thompson total under uniform cluster
/// choice with n draws. The outcome space is every cluster sequence times
/// every choice of distinct units; it is walked by cluster-count
/// composition, since the estimate depends only on those counts. Refuses
/// outcome spaces above 10^6.
inline ExactMoments exact_ht_moments(std::int64_t H, const std::vector<std::int64_t>& sizes,
                                     std::int64_t n) {
  if (H < 1 || static_cast<std::int64_t>(sizes.size()) != H)
    throw ParameterError("exact_ht_moments: need H cluster sizes");
  if (n < 1) throw ParameterError("exact_ht_moments: n must be positive");
  for (auto s : sizes)
    if (s < 1) throw ParameterError("exact_ht_moments: cluster sizes must be positive");

  // Each draw contributes H N_h / n; draws are iid uniform over clusters,
  // so enumerate compositions (c_1..c_H) of n with multinomial weights.
  detail::Moments<Rational> m;
  BigInt outcomes = 0;
  std::vector<std::int64_t> comp(static_cast<std::size_t>(H), 0);
  std::vector<BigInt> fact(static_cast<std::size_t>(n) + 1, 1);
  for (std::int64_t i = 1; i <= n; ++i) fact[static_cast<std::size_t>(i)] = fact[static_cast<std::size_t>(i - 1)] * i;
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t h, std::int64_t left) {
    if (h + 1 == comp.size()) {
      comp[h] = left;
      BigInt w = fact[static_cast<std::size_t>(n)];
      BigInt units = 1;
      Rational v = 0;
      for (std::size_t j = 0; j < comp.size(); ++j) {
        w /= fact[static_cast<std::size_t>(comp[j])];
        for (std::int64_t i = 0; i < comp[j]; ++i) units *= std::max<std::int64_t>(sizes[j] - i, 0);
        v += Rational(BigInt(comp[j] * H * sizes[j]));
      }
      if (units == 0) throw ParameterError("exact_ht_moments: a cluster would be exhausted; need n < min N_h");
      outcomes += w * units;
      if (outcomes > kMaxOutcomes) throw ParameterError("exact_ht_moments: outcome space exceeds 10^6");
      m.add(v / n, Rational(w));
      return;
    }
    for (std::int64_t c = 0; c <= left; ++c) {
      comp[h] = c;
      rec(h + 1, left - c);
    }
  };
  rec(0, n);
  return detail::from_rational(m, outcomes.convert_to<std::int64_t>());
}

/// Plain bisection to a relative bracket width of 1e-12. Requires a sign
/// change on [lo, hi].
inline double reference_root_solve(const std::function<double(double)>& f, double lo, double hi) {
  if (!(lo < hi)) throw ParameterError("reference_root_solve: need lo < hi");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw ParameterError("reference_root_solve: no sign change on bracket");
  for (int i = 0; i < 400; ++i) {
    const double mid = lo + (hi - lo) / 2;
    if (hi - lo <= 1e-12 * std::max(1.0, std::fabs(mid)) || mid == lo || mid == hi) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

}  // namespace hiddenset::oracle

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_set>
#include <vector>

#include "numeric.hpp"
#include "rng.hpp"

namespace hiddenset {

namespace detail {

/// Inverse-CDF search over an integer support that starts at the mode and
/// extends to whichever neighbour carries more mass. `up(k)` is
/// p(k+1)/p(k) and `down(k)` is p(k-1)/p(k). The visiting order is fixed by
/// the pmf alone, so the map u -> k is deterministic and exact in law.
template <class Up, class Down>
std::int64_t search_from_mode(double u, std::int64_t lo, std::int64_t hi,
                              std::int64_t mode, double p_mode, Up up,
                              Down down) {
  u -= p_mode;
  if (u <= 0.0) return mode;
  std::int64_t left = mode, right = mode;
  double p_left = p_mode, p_right = p_mode;
  for (;;) {
    const double next_right = right < hi ? p_right * up(right) : 0.0;
    const double next_left = left > lo ? p_left * down(left) : 0.0;
    if (next_right <= 0.0 && next_left <= 0.0) return mode;
    if (next_right >= next_left) {
      ++right;
      p_right = next_right;
      u -= p_right;
      if (u <= 0.0) return right;
    } else {
      --left;
      p_left = next_left;
      u -= p_left;
      if (u <= 0.0) return left;
    }
  }
}

inline void require(bool ok, const char* what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail

/// Exact Binomial(n, p) draw.
inline std::int64_t draw_binomial(std::int64_t n, double p, RngState& rng) {
  detail::require(n >= 0, "binomial: n must be non-negative");
  detail::require(p >= 0.0 && p <= 1.0, "binomial: p must lie in [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - draw_binomial(n, 1.0 - p, rng);

  const double q = 1.0 - p;
  const double odds = p / q;
  const double u = rng.uniform();
  const auto nd = static_cast<double>(n);
  auto up = [=](std::int64_t k) {
    return static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
  };
  auto down = [=](std::int64_t k) {
    return static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
  };
  if (nd * p < 20.0) {
    // Chop-down inversion from zero; q^n stays well above underflow here.
    double pk = std::exp(nd * std::log1p(-p));
    double rest = u - pk;
    std::int64_t k = 0;
    while (rest > 0.0 && k < n) {
      pk *= up(k);
      ++k;
      rest -= pk;
      if (pk == 0.0) break;
    }
    return k;
  }
  const auto mode =
      std::min<std::int64_t>(n, static_cast<std::int64_t>((nd + 1.0) * p));
  const double p_mode =
      std::exp(numeric::log_choose(nd, static_cast<double>(mode)) +
               static_cast<double>(mode) * std::log(p) +
               static_cast<double>(n - mode) * std::log1p(-p));
  return detail::search_from_mode(u, 0, n, mode, p_mode, up, down);
}

/// Exact hypergeometric draw: number of marked units among `draws` drawn
/// without replacement from `total` units of which `marked` are marked.
inline std::int64_t draw_hypergeometric(std::int64_t total, std::int64_t marked,
                                        std::int64_t draws, RngState& rng) {
  detail::require(total >= 0, "hypergeometric: total must be non-negative");
  detail::require(marked >= 0 && marked <= total,
                  "hypergeometric: marked must lie in [0, total]");
  detail::require(draws >= 0 && draws <= total,
                  "hypergeometric: draws must lie in [0, total]");
  if (marked == 0 || draws == 0) return 0;
  if (marked == total) return draws;
  if (draws == total) return marked;

  const std::int64_t lo = std::max<std::int64_t>(0, draws + marked - total);
  const std::int64_t hi = std::min(draws, marked);
  if (lo == hi) return lo;
  const auto N = static_cast<double>(total);
  const auto K = static_cast<double>(marked);
  const auto n = static_cast<double>(draws);
  auto up = [=](std::int64_t m) {
    const auto md = static_cast<double>(m);
    return (K - md) * (n - md) / ((md + 1.0) * (N - K - n + md + 1.0));
  };
  auto down = [=](std::int64_t m) {
    const auto md = static_cast<double>(m);
    return md * (N - K - n + md) / ((K - md + 1.0) * (n - md + 1.0));
  };
  auto mode = static_cast<std::int64_t>((n + 1.0) * (K + 1.0) / (N + 2.0));
  mode = std::clamp(mode, lo, hi);
  const auto md = static_cast<double>(mode);
  const double p_mode =
      std::exp(numeric::log_choose(K, md) + numeric::log_choose(N - K, n - md) -
               numeric::log_choose(N, n));
  return detail::search_from_mode(rng.uniform(), lo, hi, mode, p_mode, up,
                                  down);
}

/// Exact Poisson(lambda) draw.
inline std::int64_t draw_poisson(double lambda, RngState& rng) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda),
                  "poisson: lambda must be non-negative");
  if (lambda == 0.0) return 0;
  const double u = rng.uniform();
  auto up = [=](std::int64_t k) { return lambda / static_cast<double>(k + 1); };
  auto down = [=](std::int64_t k) { return static_cast<double>(k) / lambda; };
  if (lambda < 30.0) {
    double pk = std::exp(-lambda);
    double rest = u - pk;
    std::int64_t k = 0;
    while (rest > 0.0) {
      pk *= up(k);
      ++k;
      rest -= pk;
      if (pk == 0.0) break;
    }
    return k;
  }
  const auto mode = static_cast<std::int64_t>(lambda);
  const auto md = static_cast<double>(mode);
  const double p_mode = std::exp(md * std::log(lambda) - lambda - std::lgamma(md + 1.0));
  return detail::search_from_mode(u, 0, std::numeric_limits<std::int64_t>::max() / 2,
                                  mode, p_mode, up, down);
}

/// Zero-truncated Poisson: pmf lambda^x / ((e^lambda - 1) x!) on x >= 1.
///
/// Rejection of zeros from ordinary Poisson draws when lambda >= 0.1; below
/// that, direct inversion of the truncated law.
inline std::int64_t draw_zt_poisson(double lambda, RngState& rng) {
  detail::require(lambda > 0.0 && std::isfinite(lambda),
                  "zt_poisson: lambda must be positive");
  if (lambda >= 0.1) {
    for (;;) {
      const std::int64_t x = draw_poisson(lambda, rng);
      if (x > 0) return x;
    }
  }
  double pk = lambda / std::expm1(lambda);
  double rest = rng.uniform() - pk;
  std::int64_t k = 1;
  while (rest > 0.0) {
    pk *= lambda / static_cast<double>(k + 1);
    ++k;
    rest -= pk;
    if (pk == 0.0) break;
  }
  return k;
}

inline double draw_exponential(double rate, RngState& rng) {
  detail::require(rate > 0.0 && std::isfinite(rate),
                  "exponential: rate must be positive");
  return -std::log(rng.uniform_open()) / rate;
}

/// Uniform size-`size` subset of {1, ..., population}, returned sorted.
inline std::vector<std::int64_t> draw_without_replacement(std::int64_t population,
                                                          std::int64_t size,
                                                          RngState& rng) {
  detail::require(population >= 0, "without_replacement: population must be non-negative");
  detail::require(size >= 0 && size <= population,
                  "without_replacement: size must lie in [0, population]");
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(size));
  if (size == 0) return out;
  if (size * 16 >= population) {
    // Selection sampling: emits the subset already sorted.
    std::int64_t needed = size;
    for (std::int64_t i = 0; i < population && needed > 0; ++i) {
      if (static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(population - i))) <
          needed) {
        out.push_back(i + 1);
        --needed;
      }
    }
    return out;
  }
  // Floyd's algorithm.
  std::unordered_set<std::int64_t> chosen;
  chosen.reserve(static_cast<std::size_t>(size) * 2);
  for (std::int64_t j = population - size + 1; j <= population; ++j) {
    const auto t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(j))) + 1;
    const std::int64_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Boundary density family on (0, theta).
struct BoundaryDensity {
  enum class Kind { Uniform, Polynomial, Exponential };
  Kind kind = Kind::Uniform;
  double degree = 0.0;  // polynomial exponent p >= 0

  static BoundaryDensity uniform() { return {}; }
  static BoundaryDensity polynomial(double p) { return {Kind::Polynomial, p}; }
  static BoundaryDensity exponential() { return {Kind::Exponential, 0.0}; }

  friend bool operator==(const BoundaryDensity&, const BoundaryDensity&) = default;
};

/// CDF of the boundary density at x in [0, theta].
inline double boundary_cdf(double x, double theta, const BoundaryDensity& family) {
  if (x <= 0.0) return 0.0;
  if (x >= theta) return 1.0;
  switch (family.kind) {
    case BoundaryDensity::Kind::Uniform:
      return x / theta;
    case BoundaryDensity::Kind::Polynomial:
      return std::pow(x / theta, family.degree + 1.0);
    case BoundaryDensity::Kind::Exponential:
      return std::expm1(x) / std::expm1(theta);
  }
  return 0.0;
}

/// Inverse CDF of the boundary density:
///   uniform      -> theta * u
///   polynomial p -> theta * u^(1/(p+1))
///   exponential  -> ln(1 + u (e^theta - 1))
inline double inverse_cdf_boundary(double u, double theta,
                                   const BoundaryDensity& family) {
  detail::require(u > 0.0 && u < 1.0, "inverse_cdf_boundary: u must lie in (0,1)");
  detail::require(theta > 0.0 && std::isfinite(theta),
                  "inverse_cdf_boundary: theta must be positive");
  switch (family.kind) {
    case BoundaryDensity::Kind::Uniform:
      return theta * u;
    case BoundaryDensity::Kind::Polynomial:
      detail::require(family.degree >= 0.0,
                      "inverse_cdf_boundary: polynomial degree must be >= 0");
      if (family.degree == 0.0) return theta * u;
      return theta * std::pow(u, 1.0 / (family.degree + 1.0));
    case BoundaryDensity::Kind::Exponential:
      // theta + ln(u + (1-u) e^-theta) is the same map without overflowing e^theta.
      if (theta < 30.0) return std::log1p(u * std::expm1(theta));
      return theta + std::log(u + (1.0 - u) * std::exp(-theta));
  }
  return 0.0;
}

}  // namespace hiddenset

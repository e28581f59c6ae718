#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "models.hpp"
#include "numeric.hpp"

namespace hiddenset {

enum class EstimateStatus { Ok, Undefined, Boundary };

inline std::string_view status_name(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::Ok: return "ok";
    case EstimateStatus::Undefined: return "undefined";
    case EstimateStatus::Boundary: return "boundary";
  }
  return "?";
}

struct Estimate {
  std::string_view id;
  double value = 0.0;
  EstimateStatus status = EstimateStatus::Ok;

  bool ok() const { return status == EstimateStatus::Ok; }
  static Estimate make(std::string_view id, double v) { return {id, v, EstimateStatus::Ok}; }
  static Estimate undefined(std::string_view id) {
    return {id, std::nan(""), EstimateStatus::Undefined};
  }
  static Estimate boundary(std::string_view id, double v) {
    return {id, v, EstimateStatus::Boundary};
  }
};

/// Stable estimator identifiers.
namespace ids {
inline constexpr std::string_view tank_mle = "tank.mle";
inline constexpr std::string_view tank_goodman = "tank.goodman";
inline constexpr std::string_view tank_gap = "tank.gap";
inline constexpr std::string_view tank_unknown_origin = "tank.unknown_origin";
inline constexpr std::string_view tank_bayes_mean = "tank.bayes_mean";
inline constexpr std::string_view interval_mle = "interval.mle";
inline constexpr std::string_view interval_umvue = "interval.umvue";
inline constexpr std::string_view binom_mme = "binom.mme";
inline constexpr std::string_view binom_mle_discrete = "binom.mle_discrete";
inline constexpr std::string_view binom_mle_continuous = "binom.mle_continuous";
inline constexpr std::string_view binom_bayes_mode = "binom.bayes_mode";
inline constexpr std::string_view ztp = "ztp";
inline constexpr std::string_view waiting_mle = "waiting.mle";
inline constexpr std::string_view mbm = "mbm";
inline constexpr std::string_view nsum_general = "nsum.general";
inline constexpr std::string_view nsum_hidden = "nsum.hidden";
inline constexpr std::string_view nsum_hidden_mme = "nsum.hidden_mme";
inline constexpr std::string_view ht = "ht";
inline constexpr std::string_view crc_lp = "crc.lp";
inline constexpr std::string_view crc_chapman = "crc.chapman";
inline constexpr std::string_view crc_k_mle = "crc.k_mle";
inline constexpr std::string_view crc_seber_mean = "crc.seber_mean";
}  // namespace ids

struct EstimatorInfo {
  std::string_view id;
  Family family;
};

inline constexpr std::array<EstimatorInfo, 22> kEstimators{{
    {ids::tank_mle, Family::Tank},
    {ids::tank_goodman, Family::Tank},
    {ids::tank_gap, Family::Tank},
    {ids::tank_unknown_origin, Family::Tank},
    {ids::tank_bayes_mean, Family::Tank},
    {ids::interval_mle, Family::Interval},
    {ids::interval_umvue, Family::Interval},
    {ids::binom_mme, Family::BinomialCount},
    {ids::binom_mle_discrete, Family::BinomialCount},
    {ids::binom_mle_continuous, Family::BinomialCount},
    {ids::binom_bayes_mode, Family::BinomialCount},
    {ids::ztp, Family::ZTPoisson},
    {ids::waiting_mle, Family::WaitingTime},
    {ids::mbm, Family::Multiplier},
    {ids::nsum_general, Family::NsumGeneral},
    {ids::nsum_hidden, Family::NsumHidden},
    {ids::nsum_hidden_mme, Family::NsumHidden},
    {ids::ht, Family::HTCluster},
    {ids::crc_lp, Family::CRC2},
    {ids::crc_chapman, Family::CRC2},
    {ids::crc_k_mle, Family::CRCk},
    {ids::crc_seber_mean, Family::CRCk},
}};

inline const EstimatorInfo* find_estimator(std::string_view id) {
  for (const auto& e : kEstimators)
    if (e.id == id) return &e;
  return nullptr;
}

inline bool estimator_supports(std::string_view id, Family f) {
  const auto* e = find_estimator(id);
  return e && e->family == f;
}

// ---------------------------------------------------------------------------
// Ordered sets

struct TankEstimates {
  Estimate mle, goodman, gap, unknown_origin, bayes_mean;
};

inline TankEstimates est_german_tank(const TankObservation& obs) {
  TankEstimates out{Estimate::undefined(ids::tank_mle),
                    Estimate::undefined(ids::tank_goodman),
                    Estimate::undefined(ids::tank_gap),
                    Estimate::undefined(ids::tank_unknown_origin),
                    Estimate::undefined(ids::tank_bayes_mean)};
  const auto n = static_cast<double>(obs.labels.size());
  if (obs.labels.empty()) return out;
  const auto hi = static_cast<double>(obs.labels.back());
  const auto lo = static_cast<double>(obs.labels.front());
  out.mle = Estimate::make(ids::tank_mle, hi);
  out.goodman = Estimate::make(ids::tank_goodman, (n + 1.0) * hi / n - 1.0);
  if (n >= 2) {
    out.gap = Estimate::make(ids::tank_gap, hi + (hi - lo) / (n - 1.0) - 1.0);
    out.unknown_origin =
        Estimate::make(ids::tank_unknown_origin, (n + 1.0) * (hi - lo) / (n - 1.0) - 1.0);
  }
  if (n > 2)
    out.bayes_mean = Estimate::make(ids::tank_bayes_mean, (n - 1.0) * (hi - 1.0) / (n - 2.0));
  return out;
}

struct IntervalEstimates {
  Estimate mle, umvue;
};

inline IntervalEstimates est_interval(const IntervalObservation& obs) {
  if (obs.draws.empty())
    return {Estimate::undefined(ids::interval_mle), Estimate::undefined(ids::interval_umvue)};
  const auto n = static_cast<double>(obs.draws.size());
  const double hi = *std::max_element(obs.draws.begin(), obs.draws.end());
  return {Estimate::make(ids::interval_mle, hi),
          Estimate::make(ids::interval_umvue, (n + 1.0) / n * hi)};
}

// ---------------------------------------------------------------------------
// Binomial N

struct BinomialEstimates {
  Estimate mme, mle_discrete, mle_continuous;
};

namespace detail {

inline constexpr double kSearchCap = 1e15;

/// log L(N) - log L(N-1) for i.i.d. Binomial(N, p) counts.
inline double binomial_log_ratio(std::span<const std::int64_t> counts, double log_q,
                                 double N) {
  double s = 0.0;
  for (auto x : counts) s -= std::log1p(-static_cast<double>(x) / N);
  return s + static_cast<double>(counts.size()) * log_q;
}

}  // namespace detail

/// Estimators of N with known success probability p.
///
/// The discrete MLE is the largest N with L(N) >= L(N-1); ties within a
/// relative 1e-12 count as equality so that exact ties like x=3, p=0.5 keep
/// the upper candidate.
inline BinomialEstimates est_binomial_known_p(const BinomialCountObservation& obs,
                                              double p) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("est_binomial_known_p: p must lie in (0,1]");
  BinomialEstimates out{Estimate::undefined(ids::binom_mme),
                        Estimate::undefined(ids::binom_mle_discrete),
                        Estimate::undefined(ids::binom_mle_continuous)};
  if (obs.counts.empty()) return out;
  const auto n = static_cast<double>(obs.counts.size());
  const double total =
      static_cast<double>(std::accumulate(obs.counts.begin(), obs.counts.end(), std::int64_t{0}));
  const auto x_max = *std::max_element(obs.counts.begin(), obs.counts.end());
  const auto hi = static_cast<double>(x_max);
  out.mme = Estimate::make(ids::binom_mme, total / n / p);

  if (x_max == 0) {
    out.mle_discrete = Estimate::boundary(ids::binom_mle_discrete, 0.0);
    out.mle_continuous = Estimate::boundary(ids::binom_mle_continuous, 0.0);
    return out;
  }
  if (p == 1.0) {
    out.mle_discrete = Estimate::make(ids::binom_mle_discrete, hi);
    out.mle_continuous = Estimate::make(ids::binom_mle_continuous, hi);
    return out;
  }
  const double log_q = std::log1p(-p);
  const std::span<const std::int64_t> counts(obs.counts);

  // Discrete: the log-ratio is decreasing in N; find the last N where it is
  // non-negative, starting above X_(n) where L(X_(n) - 1) = 0.
  {
    auto holds = [&](double N) {
      return detail::binomial_log_ratio(counts, log_q, N) >= -1e-12 * n;
    };
    double good = hi, step = 1.0;
    double bad = hi + step;
    bool capped = false;
    while (holds(bad)) {
      good = bad;
      step *= 2.0;
      bad = hi + step;
      if (bad > detail::kSearchCap) {
        capped = true;
        break;
      }
    }
    if (capped) {
      out.mle_discrete = Estimate::boundary(ids::binom_mle_discrete, good);
    } else {
      while (bad - good > 1.0) {
        const double mid = std::floor(0.5 * (good + bad));
        (holds(mid) ? good : bad) = mid;
      }
      out.mle_discrete = Estimate::make(ids::binom_mle_discrete, good);
    }
  }

  // Continuous: root of the digamma score, or X_(n) when the score is
  // already non-positive there.
  {
    auto score = [&](double N) {
      double s = 0.0;
      const double head = numeric::digamma(N + 1.0);
      for (auto x : counts) s += head - numeric::digamma(N - static_cast<double>(x) + 1.0);
      return s + n * log_q;
    };
    if (score(hi) <= 0.0) {
      out.mle_continuous = Estimate::make(ids::binom_mle_continuous, hi);
    } else if (auto upper = numeric::bracket_upward(score, hi, 1.0, detail::kSearchCap)) {
      const auto r = numeric::bisect(score, hi, *upper, 1e-12);
      out.mle_continuous = Estimate::make(ids::binom_mle_continuous, r.root);
    } else {
      out.mle_continuous = Estimate::boundary(ids::binom_mle_continuous, detail::kSearchCap);
    }
  }
  return out;
}

/// Default grid cap for the unknown-p posterior mode.
inline std::int64_t default_posterior_cap(std::int64_t x_max) { return 50 * x_max + 100; }

/// Posterior mode of N under a Beta(a, b) prior on p and a flat prior on N,
/// by exhaustive grid search over [X_(n), n_max] in log space.
inline Estimate est_binomial_unknown_p(const BinomialCountObservation& obs, double prior_a,
                                       double prior_b, std::int64_t n_max) {
  if (!(prior_a > 1.0)) throw ParameterError("est_binomial_unknown_p: posterior is improper unless a > 1");
  if (!(prior_b > 0.0)) throw ParameterError("est_binomial_unknown_p: b must be positive");
  if (obs.counts.empty()) return Estimate::undefined(ids::binom_bayes_mode);
  const auto x_max = *std::max_element(obs.counts.begin(), obs.counts.end());
  if (n_max < x_max) throw ParameterError("est_binomial_unknown_p: n_max below X_(n)");
  const auto n = static_cast<double>(obs.counts.size());
  const double total =
      static_cast<double>(std::accumulate(obs.counts.begin(), obs.counts.end(), std::int64_t{0}));
  const double alpha = prior_a + total;
  const double lg_alpha = std::lgamma(alpha);

  double best = -std::numeric_limits<double>::infinity();
  std::int64_t arg = x_max;
  for (std::int64_t N = x_max; N <= n_max; ++N) {
    const auto Nd = static_cast<double>(N);
    double lp = 0.0;
    for (auto x : obs.counts) lp += numeric::log_choose(Nd, static_cast<double>(x));
    const double beta = prior_b + n * Nd - total;
    lp += lg_alpha + std::lgamma(beta) - std::lgamma(alpha + beta);
    if (lp > best) {
      best = lp;
      arg = N;
    }
  }
  const auto v = static_cast<double>(arg);
  if (arg == n_max && n_max > x_max) return Estimate::boundary(ids::binom_bayes_mode, v);
  return Estimate::make(ids::binom_bayes_mode, v);
}

// ---------------------------------------------------------------------------
// Zero-truncated Poisson and waiting times

struct ZTPoissonEstimates {
  Estimate lambda_hat, n_hat;
};

/// lambda / (1 - e^-lambda): mean of the zero-truncated Poisson law.
inline double truncated_poisson_mean(double lambda) { return lambda / -std::expm1(-lambda); }

inline ZTPoissonEstimates est_ztp(const ZTPoissonObservation& obs,
                                  std::optional<double> lambda_known = std::nullopt) {
  constexpr std::string_view lambda_id = "ztp.lambda";
  ZTPoissonEstimates out{Estimate::undefined(lambda_id), Estimate::undefined(ids::ztp)};
  if (obs.counts.empty() || obs.realizations < 1) return out;
  double lambda = 0.0;
  if (lambda_known) {
    if (!(*lambda_known > 0.0)) throw ParameterError("est_ztp: lambda must be positive");
    lambda = *lambda_known;
  } else {
    const double mean =
        static_cast<double>(std::accumulate(obs.counts.begin(), obs.counts.end(), std::int64_t{0})) /
        static_cast<double>(obs.counts.size());
    if (mean <= 1.0) return out;
    auto f = [mean](double l) { return truncated_poisson_mean(l) - mean; };
    lambda = numeric::bisect(f, 1e-12, mean, 1e-12).root;
  }
  out.lambda_hat = Estimate::make(lambda_id, lambda);
  const double per_round =
      static_cast<double>(obs.observed()) / static_cast<double>(obs.realizations);
  out.n_hat = Estimate::make(ids::ztp, per_round / -std::expm1(-lambda));
  return out;
}

/// MLE of N from censored failure times. The timing likelihood has the same
/// score as the binomial count likelihood with p = 1 - e^{-lambda T}, so the
/// estimate is the discrete binomial MLE on the failure counts.
inline Estimate est_waiting_time(const WaitingTimeObservation& obs, double lambda, double horizon) {
  if (!(lambda > 0.0) || !(horizon > 0.0))
    throw ParameterError("est_waiting_time: lambda and horizon must be positive");
  const double p = std::isinf(horizon) ? 1.0 : -std::expm1(-lambda * horizon);
  auto e = est_binomial_known_p(BinomialCountObservation{obs.counts()}, p).mle_discrete;
  e.id = ids::waiting_mle;
  return e;
}

// ---------------------------------------------------------------------------
// Ratio estimators

inline Estimate est_multiplier(const MultiplierObservation& obs) {
  if (obs.overlap <= 0) return Estimate::undefined(ids::mbm);
  return Estimate::make(ids::mbm, static_cast<double>(obs.benchmark) *
                                      static_cast<double>(obs.sample_size) /
                                      static_cast<double>(obs.overlap));
}

inline Estimate est_nsum_general(const NsumGeneralObservation& obs, std::int64_t total) {
  const auto dv = std::accumulate(obs.degree_total.begin(), obs.degree_total.end(), std::int64_t{0});
  const auto du = std::accumulate(obs.degree_hidden.begin(), obs.degree_hidden.end(), std::int64_t{0});
  if (dv <= 0) return Estimate::undefined(ids::nsum_general);
  return Estimate::make(ids::nsum_general,
                        static_cast<double>(total) * static_cast<double>(du) / static_cast<double>(dv));
}

struct NsumHiddenEstimates {
  Estimate simplified, mme;
};

inline NsumHiddenEstimates est_nsum_hidden(const NsumHiddenObservation& obs) {
  const auto ds = std::accumulate(obs.degree_sample.begin(), obs.degree_sample.end(), std::int64_t{0});
  const auto du = std::accumulate(obs.degree_hidden.begin(), obs.degree_hidden.end(), std::int64_t{0});
  if (ds <= 0)
    return {Estimate::undefined(ids::nsum_hidden), Estimate::undefined(ids::nsum_hidden_mme)};
  const auto n = static_cast<double>(obs.degree_sample.size());
  const double ratio = static_cast<double>(du) / static_cast<double>(ds);
  return {Estimate::make(ids::nsum_hidden, n * ratio),
          Estimate::make(ids::nsum_hidden_mme, (n - 1.0) * ratio + 1.0)};
}

/// Horvitz-Thompson total: sum of inverse inclusion probabilities.
inline Estimate est_ht(const HTClusterObservation& obs) {
  double total = 0.0;
  for (double p : obs.inclusion) {
    if (!(p > 0.0)) throw ParameterError("est_ht: inclusion probabilities must be positive");
    total += 1.0 / p;
  }
  return Estimate::make(ids::ht, total);
}

// ---------------------------------------------------------------------------
// Capture-recapture

struct CRC2Estimates {
  Estimate lincoln_petersen, chapman;
};

inline CRC2Estimates est_crc2(const CRC2Observation& obs) {
  if (obs.n1 < 1 || obs.n2 < 1) throw ParameterError("est_crc2: sample sizes must be positive");
  const auto n1 = static_cast<double>(obs.n1);
  const auto n2 = static_cast<double>(obs.n2);
  const auto m = static_cast<double>(obs.recaptured);
  const Estimate chapman = Estimate::make(ids::crc_chapman, (n1 + 1.0) * (n2 + 1.0) / (m + 1.0) - 1.0);
  if (obs.recaptured <= 0) return {Estimate::undefined(ids::crc_lp), chapman};
  return {Estimate::make(ids::crc_lp, n1 * n2 / m), chapman};
}

/// Root of (1 - r/N) = prod (1 - n_i/N) on N >= r.
///
/// A finite root above r exists exactly when every n_i < r and at least one
/// unit was recaptured (sum n_i > r); it is unique because the equation is
/// concave in 1/N. When some n_i equals r the root sits at N = r.
inline Estimate darroch_mle(std::span<const std::int64_t> sizes, std::int64_t distinct) {
  if (sizes.size() < 2 || distinct < 1) return Estimate::undefined(ids::crc_k_mle);
  const auto r = static_cast<double>(distinct);
  const auto sum = std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
  const auto largest = *std::max_element(sizes.begin(), sizes.end());
  if (largest > distinct || sum <= distinct) return Estimate::undefined(ids::crc_k_mle);
  if (largest == distinct) return Estimate::make(ids::crc_k_mle, r);
  auto f = [&](double N) {
    double log_prod = 0.0;
    for (auto n : sizes) log_prod += std::log1p(-static_cast<double>(n) / N);
    return -r / N - std::expm1(log_prod);
  };
  auto upper = numeric::bracket_upward(f, r, std::max(1.0, 0.5 * r), detail::kSearchCap);
  if (!upper) return Estimate::boundary(ids::crc_k_mle, detail::kSearchCap);
  return Estimate::make(ids::crc_k_mle, numeric::bisect(f, r, *upper, 1e-13).root);
}

inline Estimate est_crck(const CRCkObservation& obs) {
  return darroch_mle(obs.sizes, obs.distinct);
}

/// Mean of the per-stage Chapman estimates, stages 2..k.
inline Estimate est_seber_mean(const CRCkObservation& obs) {
  const std::size_t k = obs.samples();
  if (k < 2) return Estimate::undefined(ids::crc_seber_mean);
  // Extended precision keeps small worked cases (e.g. 13/3 and 4) correctly rounded.
  long double sum = 0.0L;
  for (std::size_t i = 1; i < k; ++i) {
    const auto M = static_cast<long double>(obs.marked_before[i]);
    const auto n = static_cast<long double>(obs.sizes[i]);
    const auto m = static_cast<long double>(obs.recaptured[i]);
    sum += (M + 1.0L) * (n + 1.0L) / (m + 1.0L) - 1.0L;
  }
  return Estimate::make(ids::crc_seber_mean, static_cast<double>(sum / static_cast<long double>(k - 1)));
}

/// Closed-form moment approximations for two- and k-sample designs.
/// Entries are nullopt where the formula is undefined.
struct CRCMoments {
  std::optional<double> chapman_bias_exact;
  std::optional<double> chapman_var_outfill;
  std::optional<double> darroch_bias;
  std::optional<double> darroch_var;
};

inline CRCMoments approx_crc_moments(std::int64_t N, std::span<const std::int64_t> sizes,
                                     std::size_t k, double r_plugin) {
  if (N < 1 || sizes.size() != k || k < 2)
    throw ParameterError("approx_crc_moments: need N >= 1 and k >= 2 sample sizes");
  CRCMoments out;
  const auto Nd = static_cast<double>(N);
  if (k == 2) {
    const auto n1 = sizes[0], n2 = sizes[1];
    if (n1 + n2 + 1 <= N) {
      const double log_mag = std::lgamma(Nd - static_cast<double>(n1) + 1.0) +
                             std::lgamma(Nd - static_cast<double>(n2) + 1.0) -
                             std::lgamma(Nd + 1.0) -
                             std::lgamma(Nd - static_cast<double>(n1 + n2) );
      out.chapman_bias_exact = -std::exp(log_mag);
    }
    const double a = Nd / (static_cast<double>(n1) * static_cast<double>(n2));
    out.chapman_var_outfill = Nd * Nd * (a + 2.0 * a * a + 6.0 * a * a * a);
  }
  bool in_domain = r_plugin < Nd;
  double inv_sum = 0.0, inv_sq_sum = 0.0;
  for (auto n : sizes) {
    if (n >= N) in_domain = false;
    const double inv = 1.0 / (Nd - static_cast<double>(n));
    inv_sum += inv;
    inv_sq_sum += inv * inv;
  }
  if (in_domain) {
    const double km1 = static_cast<double>(k - 1);
    const double info = 1.0 / (Nd - r_plugin) + km1 / Nd - inv_sum;
    const double first = km1 / Nd - inv_sum;
    const double second = km1 / (Nd * Nd) - inv_sq_sum;
    out.darroch_bias = (first * first + second) / (2.0 * info * info);
    out.darroch_var = 1.0 / info;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Registry dispatch

/// Settings for estimators that need more than the observation.
struct EstimatorOptions {
  double prior_a = 2.0;
  double prior_b = 2.0;
  std::int64_t posterior_cap = 0;  // 0: default_posterior_cap(X_(n))
  friend bool operator==(const EstimatorOptions&, const EstimatorOptions&) = default;
};

/// Evaluates one estimator on an observation drawn under `cfg`.
inline Estimate evaluate_estimator(std::string_view id, const ModelConfig& cfg,
                                   const Observation& obs, const EstimatorOptions& opts = {}) {
  const auto* info = find_estimator(id);
  if (!info) throw ParameterError("unknown estimator '" + std::string(id) + "'");
  if (info->family != family_of(obs) || info->family != family_of(cfg))
    throw ParameterError("estimator '" + std::string(id) + "' does not apply to family " +
                         std::string(family_name(family_of(obs))));
  switch (info->family) {
    case Family::Tank: {
      const auto e = est_german_tank(std::get<TankObservation>(obs));
      if (id == ids::tank_mle) return e.mle;
      if (id == ids::tank_goodman) return e.goodman;
      if (id == ids::tank_gap) return e.gap;
      if (id == ids::tank_unknown_origin) return e.unknown_origin;
      return e.bayes_mean;
    }
    case Family::Interval: {
      const auto e = est_interval(std::get<IntervalObservation>(obs));
      return id == ids::interval_mle ? e.mle : e.umvue;
    }
    case Family::BinomialCount: {
      const auto& o = std::get<BinomialCountObservation>(obs);
      if (id == ids::binom_bayes_mode) {
        const auto x_max = o.counts.empty() ? std::int64_t{0}
                                            : *std::max_element(o.counts.begin(), o.counts.end());
        const auto cap = opts.posterior_cap > 0 ? std::max(opts.posterior_cap, x_max)
                                                : default_posterior_cap(x_max);
        return est_binomial_unknown_p(o, opts.prior_a, opts.prior_b, cap);
      }
      const auto e = est_binomial_known_p(o, std::get<BinomialCountConfig>(cfg).p);
      if (id == ids::binom_mme) return e.mme;
      if (id == ids::binom_mle_discrete) return e.mle_discrete;
      return e.mle_continuous;
    }
    case Family::ZTPoisson: {
      const auto& c = std::get<ZTPoissonConfig>(cfg);
      return est_ztp(std::get<ZTPoissonObservation>(obs),
                     c.known_lambda ? std::optional<double>(c.lambda) : std::nullopt)
          .n_hat;
    }
    case Family::WaitingTime: {
      const auto& c = std::get<WaitingTimeConfig>(cfg);
      return est_waiting_time(std::get<WaitingTimeObservation>(obs), c.lambda, c.horizon);
    }
    case Family::Multiplier:
      return est_multiplier(std::get<MultiplierObservation>(obs));
    case Family::NsumGeneral:
      return est_nsum_general(std::get<NsumGeneralObservation>(obs),
                              std::get<NsumGeneralConfig>(cfg).total);
    case Family::NsumHidden: {
      const auto e = est_nsum_hidden(std::get<NsumHiddenObservation>(obs));
      return id == ids::nsum_hidden ? e.simplified : e.mme;
    }
    case Family::HTCluster:
      return est_ht(std::get<HTClusterObservation>(obs));
    case Family::CRC2: {
      const auto e = est_crc2(std::get<CRC2Observation>(obs));
      return id == ids::crc_lp ? e.lincoln_petersen : e.chapman;
    }
    case Family::CRCk: {
      const auto& o = std::get<CRCkObservation>(obs);
      return id == ids::crc_k_mle ? est_crck(o) : est_seber_mean(o);
    }
  }
  return Estimate::undefined(id);
}

}  // namespace hiddenset

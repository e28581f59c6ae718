#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "distributions.hpp"
#include "rng.hpp"

namespace hiddenset {

enum class Family {
  Tank,
  Interval,
  BinomialCount,
  ZTPoisson,
  WaitingTime,
  Multiplier,
  CRC2,
  CRCk,
  NsumGeneral,
  NsumHidden,
  HTCluster,
};

inline constexpr Family kAllFamilies[] = {
    Family::Tank,       Family::Interval,    Family::BinomialCount,
    Family::ZTPoisson,  Family::WaitingTime, Family::Multiplier,
    Family::CRC2,       Family::CRCk,        Family::NsumGeneral,
    Family::NsumHidden, Family::HTCluster};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::Tank: return "tank";
    case Family::Interval: return "interval";
    case Family::BinomialCount: return "binomial";
    case Family::ZTPoisson: return "ztpoisson";
    case Family::WaitingTime: return "waiting";
    case Family::Multiplier: return "multiplier";
    case Family::CRC2: return "crc2";
    case Family::CRCk: return "crck";
    case Family::NsumGeneral: return "nsum_general";
    case Family::NsumHidden: return "nsum_hidden";
    case Family::HTCluster: return "ht_cluster";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view name) {
  for (Family f : kAllFamilies)
    if (family_name(f) == name) return f;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Model configurations

/// Serial-number labels {offset+1, ..., offset+N}; n drawn without replacement.
struct TankConfig {
  std::int64_t population = 0;
  std::int64_t sample_size = 0;
  std::int64_t offset = 0;
  friend bool operator==(const TankConfig&, const TankConfig&) = default;
};

/// n i.i.d. draws on (0, theta) from a boundary density.
struct IntervalConfig {
  double theta = 0.0;
  std::int64_t sample_size = 0;
  BoundaryDensity density;
  friend bool operator==(const IntervalConfig&, const IntervalConfig&) = default;
};

/// n i.i.d. Binomial(N, p) counts.
struct BinomialCountConfig {
  std::int64_t population = 0;
  double p = 0.0;
  std::int64_t repetitions = 1;
  friend bool operator==(const BinomialCountConfig&, const BinomialCountConfig&) = default;
};

struct ZTPoissonConfig {
  std::int64_t population = 0;
  double lambda = 0.0;
  bool known_lambda = false;
  friend bool operator==(const ZTPoissonConfig&, const ZTPoissonConfig&) = default;
};

/// Exponential(lambda) failure times censored at `horizon`. An infinite
/// horizon observes every failure.
struct WaitingTimeConfig {
  static constexpr double kInfiniteHorizon = std::numeric_limits<double>::infinity();
  std::int64_t population = 0;
  double lambda = 0.0;
  double horizon = kInfiniteHorizon;
  double detection_probability() const {
    return std::isinf(horizon) ? 1.0 : -std::expm1(-lambda * horizon);
  }
  friend bool operator==(const WaitingTimeConfig&, const WaitingTimeConfig&) = default;
};

/// Benchmark sample s_1 of trait carriers (prevalence p) and an independent
/// uniform second sample of size n.
///
/// `redraw_first` regenerates s_1 for every sample pair; otherwise s_1 is
/// created once per replication and reused. `fixed_benchmark` pins
/// |s_1| = round(p N) instead of drawing it as Binomial(N, p).
struct MultiplierConfig {
  std::int64_t population = 0;
  double p = 0.0;
  std::int64_t sample_size = 0;
  bool redraw_first = false;
  bool fixed_benchmark = false;
  friend bool operator==(const MultiplierConfig&, const MultiplierConfig&) = default;
};

struct CRC2Config {
  std::int64_t population = 0;
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  friend bool operator==(const CRC2Config&, const CRC2Config&) = default;
};

/// k sequential uniform samples of sizes n_1..n_k.
///
/// With `summary_only` the marked-population recursion is simulated directly
/// (m_i ~ Hypergeometric(N, M_i, n_i)) and no per-unit histories are built.
struct CRCkConfig {
  std::int64_t population = 0;
  std::vector<std::int64_t> sizes;
  bool summary_only = false;
  friend bool operator==(const CRCkConfig&, const CRCkConfig&) = default;
};

/// Scenario 1: sample n units of the general population V \ U, |V| = M.
struct NsumGeneralConfig {
  std::int64_t total = 0;
  std::int64_t hidden = 0;
  double edge_probability = 0.0;
  std::int64_t sample_size = 0;
  friend bool operator==(const NsumGeneralConfig&, const NsumGeneralConfig&) = default;
};

/// Scenario 2: sample n units of the hidden population itself.
struct NsumHiddenConfig {
  std::int64_t hidden = 0;
  double edge_probability = 0.0;
  std::int64_t sample_size = 0;
  friend bool operator==(const NsumHiddenConfig&, const NsumHiddenConfig&) = default;
};

/// Cluster design: each of n draws picks a cluster uniformly, then an
/// unsampled unit inside it.
///
/// `replicated` marks cluster-replication schedules, where n may exceed
/// min N_h. Only the per-cluster draw counts are simulated then, which is the
/// multinomial representation the estimator depends on.
struct HTClusterConfig {
  std::vector<std::int64_t> cluster_sizes;
  std::int64_t sample_size = 0;
  bool replicated = false;
  std::int64_t population() const {
    return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), std::int64_t{0});
  }
  friend bool operator==(const HTClusterConfig&, const HTClusterConfig&) = default;
};

using ModelConfig =
    std::variant<TankConfig, IntervalConfig, BinomialCountConfig, ZTPoissonConfig,
                 WaitingTimeConfig, MultiplierConfig, CRC2Config, CRCkConfig,
                 NsumGeneralConfig, NsumHiddenConfig, HTClusterConfig>;

inline Family family_of(const ModelConfig& cfg) {
  return static_cast<Family>(cfg.index());
}

/// The estimand: N, or theta for the interval family.
inline double target_size(const ModelConfig& cfg) {
  return std::visit(
      [](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, IntervalConfig>) return c.theta;
        else if constexpr (std::is_same_v<T, NsumGeneralConfig> ||
                           std::is_same_v<T, NsumHiddenConfig>)
          return static_cast<double>(c.hidden);
        else if constexpr (std::is_same_v<T, HTClusterConfig>)
          return static_cast<double>(c.population());
        else return static_cast<double>(c.population);
      },
      cfg);
}

/// Sample sizes as reported in results (family-specific meaning).
inline std::vector<std::int64_t> sample_sizes(const ModelConfig& cfg) {
  return std::visit(
      [](const auto& c) -> std::vector<std::int64_t> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TankConfig> || std::is_same_v<T, IntervalConfig> ||
                      std::is_same_v<T, MultiplierConfig> ||
                      std::is_same_v<T, NsumGeneralConfig> ||
                      std::is_same_v<T, NsumHiddenConfig> ||
                      std::is_same_v<T, HTClusterConfig>)
          return {c.sample_size};
        else if constexpr (std::is_same_v<T, BinomialCountConfig>)
          return {c.repetitions};
        else if constexpr (std::is_same_v<T, CRC2Config>)
          return {c.n1, c.n2};
        else if constexpr (std::is_same_v<T, CRCkConfig>)
          return c.sizes;
        else
          return {};
      },
      cfg);
}

/// All invariant violations of a configuration; empty when valid.
inline std::vector<std::string> validation_errors(const ModelConfig& cfg) {
  std::vector<std::string> errs;
  auto check = [&](bool ok, const char* msg) {
    if (!ok) errs.emplace_back(msg);
  };
  auto prob_open = [](double p) { return p > 0.0 && p < 1.0; };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TankConfig>) {
          check(c.population >= 1, "population must be positive");
          check(c.sample_size >= 1 && c.sample_size <= c.population,
                "sample_size must lie in [1, population]");
        } else if constexpr (std::is_same_v<T, IntervalConfig>) {
          check(c.theta > 0.0 && std::isfinite(c.theta), "theta must be positive");
          check(c.sample_size >= 1, "sample_size must be positive");
          check(c.density.degree >= 0.0, "polynomial degree must be non-negative");
        } else if constexpr (std::is_same_v<T, BinomialCountConfig>) {
          check(c.population >= 1, "population must be positive");
          // p = 1 is the census end of a finite-population schedule.
          check(c.p > 0.0 && c.p <= 1.0, "p must lie in (0,1]");
          check(c.repetitions >= 1, "repetitions must be positive");
        } else if constexpr (std::is_same_v<T, ZTPoissonConfig>) {
          check(c.population >= 1, "population must be positive");
          check(c.lambda > 0.0 && std::isfinite(c.lambda), "lambda must be positive");
        } else if constexpr (std::is_same_v<T, WaitingTimeConfig>) {
          check(c.population >= 1, "population must be positive");
          check(c.lambda > 0.0 && std::isfinite(c.lambda), "lambda must be positive");
          check(c.horizon > 0.0, "horizon must be positive");
        } else if constexpr (std::is_same_v<T, MultiplierConfig>) {
          check(c.population >= 1, "population must be positive");
          check(prob_open(c.p), "p must lie in (0,1)");
          check(c.sample_size >= 1 && c.sample_size <= c.population,
                "sample_size must lie in [1, population]");
        } else if constexpr (std::is_same_v<T, CRC2Config>) {
          check(c.population >= 1, "population must be positive");
          check(c.n1 >= 1 && c.n1 <= c.population, "n1 must lie in [1, population]");
          check(c.n2 >= 1 && c.n2 <= c.population, "n2 must lie in [1, population]");
        } else if constexpr (std::is_same_v<T, CRCkConfig>) {
          check(c.population >= 1, "population must be positive");
          check(c.sizes.size() >= 2, "at least two samples are required");
          for (auto n : c.sizes)
            if (n < 1 || n > c.population) {
              errs.emplace_back("every sample size must lie in [1, population]");
              break;
            }
        } else if constexpr (std::is_same_v<T, NsumGeneralConfig>) {
          check(c.total >= 2, "total must be at least 2");
          check(c.hidden >= 0 && c.hidden < c.total, "hidden must lie in [0, total)");
          check(c.edge_probability > 0.0 && c.edge_probability <= 1.0,
                "edge_probability must lie in (0,1]");
          check(c.sample_size >= 1 && c.sample_size <= c.total - c.hidden,
                "sample_size must lie in [1, total - hidden]");
        } else if constexpr (std::is_same_v<T, NsumHiddenConfig>) {
          check(c.hidden >= 2, "hidden must be at least 2");
          check(c.edge_probability > 0.0 && c.edge_probability <= 1.0,
                "edge_probability must lie in (0,1]");
          check(c.sample_size >= 1 && c.sample_size <= c.hidden,
                "sample_size must lie in [1, hidden]");
        } else if constexpr (std::is_same_v<T, HTClusterConfig>) {
          check(!c.cluster_sizes.empty(), "at least one cluster is required");
          const auto smallest =
              c.cluster_sizes.empty()
                  ? std::int64_t{0}
                  : *std::min_element(c.cluster_sizes.begin(), c.cluster_sizes.end());
          check(smallest >= 1, "cluster sizes must be positive");
          check(c.sample_size >= 1, "sample_size must be positive");
          if (!c.replicated)
            check(c.sample_size < smallest, "sample_size must be below the smallest cluster size");
        }
      },
      cfg);
  return errs;
}

inline void validate(const ModelConfig& cfg) {
  auto errs = validation_errors(cfg);
  if (errs.empty()) return;
  std::string msg(family_name(family_of(cfg)));
  msg += ": ";
  for (std::size_t i = 0; i < errs.size(); ++i) {
    if (i) msg += "; ";
    msg += errs[i];
  }
  throw ParameterError(msg);
}

// ---------------------------------------------------------------------------
// Observations

struct TankObservation {
  std::vector<std::int64_t> labels;  // strictly increasing
};

struct IntervalObservation {
  std::vector<double> draws;  // sorted
};

struct BinomialCountObservation {
  std::vector<std::int64_t> counts;
};

/// Positive counts pooled over `realizations` independent query rounds.
struct ZTPoissonObservation {
  std::vector<std::int64_t> counts;
  std::int64_t realizations = 1;
  std::int64_t observed() const { return static_cast<std::int64_t>(counts.size()); }
};

/// One censored failure-time record per realization.
struct WaitingTimeObservation {
  std::vector<std::vector<double>> times;
  std::vector<std::int64_t> counts() const {
    std::vector<std::int64_t> out;
    out.reserve(times.size());
    for (const auto& t : times) out.push_back(static_cast<std::int64_t>(t.size()));
    return out;
  }
};

struct MultiplierObservation {
  std::int64_t benchmark = 0;    // x = |s_1|
  std::int64_t sample_size = 0;  // n = |s_2|
  std::int64_t overlap = 0;      // m = |s_1 ∩ s_2|
};

struct CRC2Observation {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t recaptured = 0;
};

/// Capture-history summary for k samples.
///
/// `table[mask]` counts units whose history bits equal `mask` (bit i set when
/// captured by sample i). Cell 0 is the unobserved never-captured cell and is
/// kept at 0. The table is only materialized when histories are simulated
/// and k <= kMaxTableSamples.
struct CRCkObservation {
  static constexpr std::size_t kMaxTableSamples = 20;
  std::vector<std::int64_t> sizes;          // n_i
  std::vector<std::int64_t> marked_before;  // M_i, with M_1 = 0
  std::vector<std::int64_t> recaptured;     // m_i, with m_1 = 0
  std::int64_t distinct = 0;                // r
  std::vector<std::int64_t> table;
  std::size_t samples() const { return sizes.size(); }
};

struct NsumGeneralObservation {
  std::vector<std::int64_t> degree_total;   // d_i^V
  std::vector<std::int64_t> degree_hidden;  // d_i^U
};

struct NsumHiddenObservation {
  std::vector<std::int64_t> degree_hidden;  // d_i^U
  std::vector<std::int64_t> degree_sample;  // d_i^s
};

struct HTClusterObservation {
  std::int64_t clusters = 0;
  std::int64_t sample_size = 0;
  std::vector<std::int64_t> cluster;        // 0-based cluster of each draw
  std::vector<std::int64_t> cluster_size;   // N_h of that cluster
  std::vector<double> inclusion;            // n / (H N_h)
  std::vector<std::int64_t> unit;           // 1-based unit within cluster, 0 if untracked
};

using Observation =
    std::variant<TankObservation, IntervalObservation, BinomialCountObservation,
                 ZTPoissonObservation, WaitingTimeObservation, MultiplierObservation,
                 CRC2Observation, CRCkObservation, NsumGeneralObservation,
                 NsumHiddenObservation, HTClusterObservation>;

inline Family family_of(const Observation& obs) {
  return static_cast<Family>(obs.index());
}

/// The benchmark sample of the multiplier design. Units are exchangeable, so
/// only its size matters for every downstream quantity.
struct BenchmarkSet {
  std::int64_t population = 0;
  std::int64_t size = 0;
};

// ---------------------------------------------------------------------------
// Simulators

namespace detail {

template <class T>
const T& expect_config(const ModelConfig& cfg, const char* who) {
  const T* c = std::get_if<T>(&cfg);
  if (!c) throw ParameterError(std::string(who) + ": unsupported model family");
  validate(cfg);
  return *c;
}

/// Adds 1 to both endpoints' degrees for every edge of G(n, pi) on nodes
/// 0..n-1. Geometric skipping over the pair list, O(n + edges).
inline void add_random_graph_degrees(std::int64_t n, double pi, RngState& rng,
                                     std::vector<std::int64_t>& degree) {
  if (n < 2) return;
  if (pi >= 1.0) {
    for (std::int64_t i = 0; i < n; ++i) degree[static_cast<std::size_t>(i)] += n - 1;
    return;
  }
  const double log_q = std::log1p(-pi);
  std::int64_t v = 1, w = -1;
  while (v < n) {
    const double skip = std::floor(std::log(rng.uniform_open()) / log_q);
    w += 1 + static_cast<std::int64_t>(std::min(skip, 4.0e18));
    while (w >= v && v < n) {
      w -= v;
      ++v;
    }
    if (v < n) {
      ++degree[static_cast<std::size_t>(v)];
      ++degree[static_cast<std::size_t>(w)];
    }
  }
}

}  // namespace detail

/// Tank or Interval observation.
inline Observation simulate_ordered(const ModelConfig& cfg, RngState& rng) {
  if (const auto* t = std::get_if<TankConfig>(&cfg)) {
    validate(cfg);
    auto labels = draw_without_replacement(t->population, t->sample_size, rng);
    if (t->offset != 0)
      for (auto& x : labels) x += t->offset;
    return TankObservation{std::move(labels)};
  }
  const auto& c = detail::expect_config<IntervalConfig>(cfg, "simulate_ordered");
  std::vector<double> draws(static_cast<std::size_t>(c.sample_size));
  for (auto& x : draws) x = inverse_cdf_boundary(rng.uniform_open(), c.theta, c.density);
  std::sort(draws.begin(), draws.end());
  return IntervalObservation{std::move(draws)};
}

/// BinomialCount, ZTPoisson or WaitingTime observation.
inline Observation simulate_counts(const ModelConfig& cfg, RngState& rng) {
  if (const auto* b = std::get_if<BinomialCountConfig>(&cfg)) {
    validate(cfg);
    BinomialCountObservation obs;
    obs.counts.resize(static_cast<std::size_t>(b->repetitions));
    for (auto& x : obs.counts) x = draw_binomial(b->population, b->p, rng);
    return obs;
  }
  if (const auto* z = std::get_if<ZTPoissonConfig>(&cfg)) {
    validate(cfg);
    // Per-unit Poisson draws kept when positive: the number kept is
    // Binomial(N, 1 - e^-lambda) and each kept count is zero-truncated
    // Poisson, so draw it in that factorized form.
    const std::int64_t kept = draw_binomial(z->population, -std::expm1(-z->lambda), rng);
    ZTPoissonObservation obs;
    obs.counts.resize(static_cast<std::size_t>(kept));
    for (auto& x : obs.counts) x = draw_zt_poisson(z->lambda, rng);
    return obs;
  }
  const auto& w = detail::expect_config<WaitingTimeConfig>(cfg, "simulate_counts");
  std::vector<double> times;
  for (std::int64_t i = 0; i < w.population; ++i) {
    const double t = draw_exponential(w.lambda, rng);
    if (t < w.horizon) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  WaitingTimeObservation obs;
  obs.times.push_back(std::move(times));
  return obs;
}

/// Creates the multiplier benchmark sample s_1.
inline BenchmarkSet draw_benchmark(const MultiplierConfig& c, RngState& rng) {
  const std::int64_t x =
      c.fixed_benchmark
          ? static_cast<std::int64_t>(std::llround(c.p * static_cast<double>(c.population)))
          : draw_binomial(c.population, c.p, rng);
  return {c.population, x};
}

/// Multiplier or CRC2 observation. For the multiplier, a supplied benchmark
/// set is reused as s_1; otherwise a fresh one is drawn.
inline Observation simulate_two_sample(const ModelConfig& cfg, RngState& rng,
                                       const std::optional<BenchmarkSet>& fixed_first = {}) {
  if (const auto* m = std::get_if<MultiplierConfig>(&cfg)) {
    validate(cfg);
    BenchmarkSet first;
    if (fixed_first) {
      if (fixed_first->population != m->population || fixed_first->size < 0 ||
          fixed_first->size > m->population)
        throw ParameterError("simulate_two_sample: benchmark set does not match population");
      first = *fixed_first;
    } else {
      first = draw_benchmark(*m, rng);
    }
    const std::int64_t overlap =
        draw_hypergeometric(m->population, first.size, m->sample_size, rng);
    return MultiplierObservation{first.size, m->sample_size, overlap};
  }
  const auto& c = detail::expect_config<CRC2Config>(cfg, "simulate_two_sample");
  return CRC2Observation{c.n1, c.n2, draw_hypergeometric(c.population, c.n1, c.n2, rng)};
}

inline Observation simulate_crck(const ModelConfig& cfg, RngState& rng) {
  const auto& c = detail::expect_config<CRCkConfig>(cfg, "simulate_crck");
  const std::size_t k = c.sizes.size();
  CRCkObservation obs;
  obs.sizes = c.sizes;
  obs.marked_before.assign(k, 0);
  obs.recaptured.assign(k, 0);

  if (c.summary_only) {
    std::int64_t marked = 0;
    for (std::size_t i = 0; i < k; ++i) {
      obs.marked_before[i] = marked;
      const std::int64_t m = draw_hypergeometric(c.population, marked, c.sizes[i], rng);
      obs.recaptured[i] = m;
      marked += c.sizes[i] - m;
    }
    obs.distinct = marked;
    return obs;
  }

  const std::size_t words = (k + 63) / 64;
  std::vector<std::uint64_t> history(static_cast<std::size_t>(c.population) * words, 0);
  std::vector<char> seen(static_cast<std::size_t>(c.population), 0);
  std::int64_t marked = 0;
  for (std::size_t i = 0; i < k; ++i) {
    obs.marked_before[i] = marked;
    std::int64_t m = 0;
    for (auto unit : draw_without_replacement(c.population, c.sizes[i], rng)) {
      const auto u = static_cast<std::size_t>(unit - 1);
      history[u * words + i / 64] |= std::uint64_t{1} << (i % 64);
      if (seen[u]) ++m;
      else seen[u] = 1;
    }
    obs.recaptured[i] = m;
    marked += c.sizes[i] - m;
  }
  obs.distinct = marked;
  if (k <= CRCkObservation::kMaxTableSamples) {
    obs.table.assign(std::size_t{1} << k, 0);
    for (std::size_t u = 0; u < static_cast<std::size_t>(c.population); ++u)
      if (seen[u]) ++obs.table[static_cast<std::size_t>(history[u * words])];
  }
  return obs;
}

/// Degree observations on an Erdős–Rényi(pi) graph. Only edges incident to
/// sampled units are generated; edges among sampled units are shared by both
/// endpoints.
inline Observation simulate_nsum(const ModelConfig& cfg, RngState& rng) {
  if (const auto* g = std::get_if<NsumGeneralConfig>(&cfg)) {
    validate(cfg);
    const auto n = static_cast<std::size_t>(g->sample_size);
    NsumGeneralObservation obs;
    obs.degree_hidden.resize(n);
    obs.degree_total.assign(n, 0);
    const std::int64_t outside = g->total - g->hidden - g->sample_size;
    for (std::size_t i = 0; i < n; ++i) {
      obs.degree_hidden[i] = draw_binomial(g->hidden, g->edge_probability, rng);
      obs.degree_total[i] =
          obs.degree_hidden[i] + draw_binomial(outside, g->edge_probability, rng);
    }
    detail::add_random_graph_degrees(g->sample_size, g->edge_probability, rng,
                                     obs.degree_total);
    return obs;
  }
  const auto& h = detail::expect_config<NsumHiddenConfig>(cfg, "simulate_nsum");
  const auto n = static_cast<std::size_t>(h.sample_size);
  NsumHiddenObservation obs;
  obs.degree_sample.assign(n, 0);
  detail::add_random_graph_degrees(h.sample_size, h.edge_probability, rng, obs.degree_sample);
  obs.degree_hidden.resize(n);
  const std::int64_t outside = h.hidden - h.sample_size;
  for (std::size_t i = 0; i < n; ++i)
    obs.degree_hidden[i] =
        obs.degree_sample[i] + draw_binomial(outside, h.edge_probability, rng);
  return obs;
}

inline Observation simulate_ht_cluster(const ModelConfig& cfg, RngState& rng) {
  const auto& c = detail::expect_config<HTClusterConfig>(cfg, "simulate_ht_cluster");
  const auto H = static_cast<std::int64_t>(c.cluster_sizes.size());
  HTClusterObservation obs;
  obs.clusters = H;
  obs.sample_size = c.sample_size;
  const auto n = static_cast<std::size_t>(c.sample_size);
  obs.cluster.reserve(n);
  obs.cluster_size.reserve(n);
  obs.inclusion.reserve(n);
  obs.unit.reserve(n);
  std::vector<std::vector<std::int64_t>> taken(c.replicated ? 0 : c.cluster_sizes.size());
  for (std::size_t d = 0; d < n; ++d) {
    const auto h = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(H)));
    const std::int64_t size = c.cluster_sizes[static_cast<std::size_t>(h)];
    std::int64_t unit = 0;
    if (!c.replicated) {
      auto& used = taken[static_cast<std::size_t>(h)];
      // The j-th untaken unit, j uniform over the remaining ones.
      unit = static_cast<std::int64_t>(
                 rng.below(static_cast<std::uint64_t>(size - static_cast<std::int64_t>(used.size())))) +
             1;
      for (auto u : used)
        if (u <= unit) ++unit;
      used.insert(std::upper_bound(used.begin(), used.end(), unit), unit);
    }
    obs.cluster.push_back(h);
    obs.cluster_size.push_back(size);
    obs.inclusion.push_back(static_cast<double>(c.sample_size) /
                            (static_cast<double>(H) * static_cast<double>(size)));
    obs.unit.push_back(unit);
  }
  return obs;
}

/// Dispatch on the configured family.
inline Observation simulate(const ModelConfig& cfg, RngState& rng,
                            const std::optional<BenchmarkSet>& fixed_first = {}) {
  switch (family_of(cfg)) {
    case Family::Tank:
    case Family::Interval: return simulate_ordered(cfg, rng);
    case Family::BinomialCount:
    case Family::ZTPoisson:
    case Family::WaitingTime: return simulate_counts(cfg, rng);
    case Family::Multiplier:
    case Family::CRC2: return simulate_two_sample(cfg, rng, fixed_first);
    case Family::CRCk: return simulate_crck(cfg, rng);
    case Family::NsumGeneral:
    case Family::NsumHidden: return simulate_nsum(cfg, rng);
    case Family::HTCluster: return simulate_ht_cluster(cfg, rng);
  }
  throw ParameterError("simulate: unknown family");
}

}  // namespace hiddenset

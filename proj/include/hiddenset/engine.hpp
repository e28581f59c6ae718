#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "estimators.hpp"
#include "models.hpp"
#include "numeric.hpp"
#include "regimes.hpp"
#include "rng.hpp"

namespace hiddenset {

// ---------------------------------------------------------------------------
// Accumulation

/// Streaming mean / sum of squared deviations (Welford), mergeable (Chan et al.).
struct MomentAccumulator {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const MomentAccumulator& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const auto n = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / n;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }

  /// Unbiased sample variance; 0 for fewer than two values.
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

/// Kolmogorov–Smirnov distance between the standardized sample and N(0,1).
/// nullopt with fewer than 50 values or zero sample variance.
inline std::optional<double> normality_stat(std::span<const double> values) {
  if (values.size() < 50) return std::nullopt;
  MomentAccumulator acc;
  for (double v : values) acc.add(v);
  const double sd = std::sqrt(acc.variance());
  if (!(sd > 0.0)) return std::nullopt;
  std::vector<double> z(values.begin(), values.end());
  std::sort(z.begin(), z.end());
  const auto n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double f = numeric::standard_normal_cdf((z[i] - acc.mean) / sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Weighted variant used by exact enumeration: `atoms` are (value, probability).
inline std::optional<double> weighted_normality_stat(std::vector<std::pair<double, double>> atoms) {
  double w = 0.0, mean = 0.0;
  for (auto [v, p] : atoms) {
    w += p;
    mean += p * v;
  }
  if (!(w > 0.0)) return std::nullopt;
  mean /= w;
  double var = 0.0;
  for (auto [v, p] : atoms) var += p * (v - mean) * (v - mean);
  const double sd = std::sqrt(var / w);
  if (!(sd > 0.0)) return std::nullopt;
  std::sort(atoms.begin(), atoms.end());
  double below = 0.0, d = 0.0;
  for (std::size_t i = 0; i < atoms.size();) {
    double mass = 0.0;
    std::size_t j = i;
    while (j < atoms.size() && atoms[j].first == atoms[i].first) mass += atoms[j++].second;
    const double f = numeric::standard_normal_cdf((atoms[i].first - mean) / sd);
    d = std::max({d, f - below / w, (below + mass) / w - f});
    below += mass;
    i = j;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Results

struct CellStats {
  std::int64_t t = 0;
  std::string estimator;
  double target = 0.0;
  std::vector<std::int64_t> sample_sizes;
  std::int64_t k = 1;
  std::int64_t replications = 0;
  std::int64_t valid = 0;
  double mean = std::nan("");
  double bias = std::nan("");
  double variance = std::nan("");
  double mse = std::nan("");
  double mc_se = std::nan("");
  double ks_stat = std::nan("");
  std::vector<double> eps;
  std::vector<double> p_outside;
  std::uint64_t seed = 0;
  bool exact = false;
  bool degenerate = false;

  double excluded_fraction() const {
    return replications > 0 ? 1.0 - static_cast<double>(valid) / static_cast<double>(replications) : 0.0;
  }
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

enum class ExactMode { Off, Auto, Force };

struct EngineSettings {
  std::int64_t replications = 10000;
  std::uint64_t master_seed = 1;
  std::vector<double> eps{0.5};
  unsigned threads = 0;  // 0: hardware concurrency
  ExactMode exact = ExactMode::Auto;
  double exact_threshold = 1e6;
  EstimatorOptions estimator_options;
  bool keep_values = false;
  /// Test hook: every replication reuses the stream of replication 0.
  bool force_same_stream = false;
};

/// Per-estimator outcome of one cell, optionally with the raw replication values.
struct CellRun {
  std::vector<CellStats> stats;
  std::vector<std::vector<double>> values;  // filled when keep_values
};

// ---------------------------------------------------------------------------
// One replication

namespace detail {

inline bool pooled_family(Family f) {
  return f == Family::Interval || f == Family::BinomialCount || f == Family::ZTPoisson ||
         f == Family::WaitingTime;
}

/// Concatenates k observations of a pooled family into one.
inline Observation pool(std::vector<Observation>&& parts) {
  Observation out = std::move(parts.front());
  for (std::size_t i = 1; i < parts.size(); ++i) {
    std::visit(
        [&](auto& acc) {
          using T = std::decay_t<decltype(acc)>;
          auto& next = std::get<T>(parts[i]);
          if constexpr (std::is_same_v<T, IntervalObservation>) {
            acc.draws.insert(acc.draws.end(), next.draws.begin(), next.draws.end());
          } else if constexpr (std::is_same_v<T, BinomialCountObservation>) {
            acc.counts.insert(acc.counts.end(), next.counts.begin(), next.counts.end());
          } else if constexpr (std::is_same_v<T, ZTPoissonObservation>) {
            acc.counts.insert(acc.counts.end(), next.counts.begin(), next.counts.end());
            acc.realizations += next.realizations;
          } else if constexpr (std::is_same_v<T, WaitingTimeObservation>) {
            for (auto& t : next.times) acc.times.push_back(std::move(t));
          }
        },
        out);
  }
  if (auto* iv = std::get_if<IntervalObservation>(&out)) std::sort(iv->draws.begin(), iv->draws.end());
  return out;
}

/// Combines per-sample estimates of one replication: max for the tank MLE
/// (largest label across all samples), mean of the defined ones otherwise.
inline Estimate combine(std::string_view id, std::span<const Estimate> parts) {
  if (parts.size() == 1) return parts.front();
  const bool take_max = id == ids::tank_mle;
  double acc = take_max ? -std::numeric_limits<double>::infinity() : 0.0;
  std::int64_t ok = 0;
  for (const auto& e : parts) {
    if (!e.ok()) continue;
    acc = take_max ? std::max(acc, e.value) : acc + e.value;
    ++ok;
  }
  if (ok == 0) return Estimate::undefined(id);
  return Estimate::make(id, take_max ? acc : acc / static_cast<double>(ok));
}

inline void run_replication(const ModelConfig& cfg, std::int64_t k,
                            std::span<const std::string> estimators, const EstimatorOptions& opts,
                            RngState& rng, std::span<Estimate> out) {
  const Family f = family_of(cfg);
  if (f == Family::CRCk || k == 1 || pooled_family(f)) {
    Observation obs;
    if (f == Family::CRCk || k == 1) {
      obs = simulate(cfg, rng);
    } else {
      std::vector<Observation> parts;
      parts.reserve(static_cast<std::size_t>(k));
      for (std::int64_t j = 0; j < k; ++j) parts.push_back(simulate(cfg, rng));
      obs = pool(std::move(parts));
    }
    for (std::size_t e = 0; e < estimators.size(); ++e)
      out[e] = evaluate_estimator(estimators[e], cfg, obs, opts);
    return;
  }
  std::optional<BenchmarkSet> first;
  if (const auto* m = std::get_if<MultiplierConfig>(&cfg); m && !m->redraw_first)
    first = draw_benchmark(*m, rng);
  std::vector<std::vector<Estimate>> per(estimators.size());
  for (auto& v : per) v.reserve(static_cast<std::size_t>(k));
  for (std::int64_t j = 0; j < k; ++j) {
    const Observation obs = simulate(cfg, rng, first);
    for (std::size_t e = 0; e < estimators.size(); ++e)
      per[e].push_back(evaluate_estimator(estimators[e], cfg, obs, opts));
  }
  for (std::size_t e = 0; e < estimators.size(); ++e) out[e] = combine(estimators[e], per[e]);
}

// ---------------------------------------------------------------------------
// Exact enumeration

struct Atom {
  Observation obs;
  double probability;
};

inline double binomial_coefficient(std::int64_t n, std::int64_t k) {
  return std::exp(numeric::log_choose(static_cast<double>(n), static_cast<double>(k)));
}

inline double hypergeometric_pmf(std::int64_t N, std::int64_t K, std::int64_t n, std::int64_t m) {
  return std::exp(numeric::log_choose(static_cast<double>(K), static_cast<double>(m)) +
                  numeric::log_choose(static_cast<double>(N - K), static_cast<double>(n - m)) -
                  numeric::log_choose(static_cast<double>(N), static_cast<double>(n)));
}

/// Number of outcome atoms of a single-sample cell, or nullopt when the
/// family has no enumerator.
inline std::optional<double> atom_count(const ModelConfig& cfg, std::int64_t k) {
  if (k != 1) return std::nullopt;
  return std::visit(
      [](const auto& c) -> std::optional<double> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TankConfig>) {
          return binomial_coefficient(c.population, c.sample_size);
        } else if constexpr (std::is_same_v<T, CRC2Config>) {
          return static_cast<double>(std::min(c.n1, c.n2) + 1);
        } else if constexpr (std::is_same_v<T, MultiplierConfig>) {
          const double per = static_cast<double>(c.sample_size + 1);
          return c.fixed_benchmark ? per : per * static_cast<double>(c.population + 1);
        } else if constexpr (std::is_same_v<T, HTClusterConfig>) {
          return std::pow(static_cast<double>(c.cluster_sizes.size()),
                          static_cast<double>(c.sample_size));
        } else {
          return std::nullopt;
        }
      },
      cfg);
}

/// Calls `visit(obs, probability)` for every outcome of a single sample.
inline void enumerate_atoms(const ModelConfig& cfg,
                            const std::function<void(const Observation&, double)>& visit) {
  if (const auto* c = std::get_if<TankConfig>(&cfg)) {
    const auto n = static_cast<std::size_t>(c->sample_size);
    const double p = 1.0 / binomial_coefficient(c->population, c->sample_size);
    TankObservation obs;
    obs.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) obs.labels[i] = static_cast<std::int64_t>(i) + 1;
    for (;;) {
      TankObservation shifted = obs;
      for (auto& x : shifted.labels) x += c->offset;
      visit(shifted, p);
      std::size_t i = n;
      while (i > 0 && obs.labels[i - 1] == c->population - static_cast<std::int64_t>(n - i)) --i;
      if (i == 0) break;
      ++obs.labels[i - 1];
      for (std::size_t j = i; j < n; ++j) obs.labels[j] = obs.labels[j - 1] + 1;
    }
    return;
  }
  if (const auto* c = std::get_if<CRC2Config>(&cfg)) {
    const std::int64_t lo = std::max<std::int64_t>(0, c->n1 + c->n2 - c->population);
    for (std::int64_t m = lo; m <= std::min(c->n1, c->n2); ++m)
      visit(CRC2Observation{c->n1, c->n2, m}, hypergeometric_pmf(c->population, c->n1, c->n2, m));
    return;
  }
  if (const auto* c = std::get_if<MultiplierConfig>(&cfg)) {
    auto with_benchmark = [&](std::int64_t x, double px) {
      const std::int64_t lo = std::max<std::int64_t>(0, x + c->sample_size - c->population);
      for (std::int64_t m = lo; m <= std::min(x, c->sample_size); ++m)
        visit(MultiplierObservation{x, c->sample_size, m},
              px * hypergeometric_pmf(c->population, x, c->sample_size, m));
    };
    if (c->fixed_benchmark) {
      with_benchmark(std::llround(c->p * static_cast<double>(c->population)), 1.0);
    } else {
      for (std::int64_t x = 0; x <= c->population; ++x)
        with_benchmark(x, binomial_coefficient(c->population, x) *
                              std::pow(c->p, static_cast<double>(x)) *
                              std::pow(1.0 - c->p, static_cast<double>(c->population - x)));
    }
    return;
  }
  if (const auto* c = std::get_if<HTClusterConfig>(&cfg)) {
    const auto H = static_cast<std::int64_t>(c->cluster_sizes.size());
    const auto n = static_cast<std::size_t>(c->sample_size);
    const double p = std::pow(static_cast<double>(H), -static_cast<double>(n));
    std::vector<std::int64_t> seq(n, 0);
    for (;;) {
      HTClusterObservation obs;
      obs.clusters = H;
      obs.sample_size = c->sample_size;
      for (auto h : seq) {
        const auto size = c->cluster_sizes[static_cast<std::size_t>(h)];
        obs.cluster.push_back(h);
        obs.cluster_size.push_back(size);
        obs.inclusion.push_back(static_cast<double>(c->sample_size) /
                                (static_cast<double>(H) * static_cast<double>(size)));
        obs.unit.push_back(0);
      }
      visit(obs, p);
      std::size_t i = 0;
      while (i < n && ++seq[i] == H) seq[i++] = 0;
      if (i == n) break;
    }
    return;
  }
  throw ConfigurationError("exact enumeration not available for " +
                           std::string(family_name(family_of(cfg))));
}

inline CellRun run_cell_exact(const ModelConfig& cfg, std::int64_t k,
                              std::span<const std::string> estimators, const EngineSettings& s,
                              std::int64_t t) {
  const double target = target_size(cfg);
  std::vector<std::vector<std::pair<double, double>>> atoms(estimators.size());
  std::vector<std::vector<double>> invalid_mass(estimators.size(), std::vector<double>(1, 0.0));
  std::vector<std::int64_t> valid(estimators.size(), 0);
  std::int64_t count = 0;
  double total = 0.0;
  enumerate_atoms(cfg, [&](const Observation& obs, double p) {
    ++count;
    total += p;
    for (std::size_t e = 0; e < estimators.size(); ++e) {
      const auto est = evaluate_estimator(estimators[e], cfg, obs, s.estimator_options);
      if (est.ok()) {
        atoms[e].emplace_back(est.value, p);
        ++valid[e];
      } else {
        invalid_mass[e][0] += p;
      }
    }
  });
  CellRun run;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    CellStats st;
    st.t = t;
    st.estimator = estimators[e];
    st.target = target;
    st.sample_sizes = sample_sizes(cfg);
    st.k = k;
    st.replications = count;
    st.valid = valid[e];
    st.eps = s.eps;
    st.seed = s.master_seed;
    st.exact = true;
    double w = 0.0, mean = 0.0;
    for (auto [v, p] : atoms[e]) {
      w += p;
      mean += p * v;
    }
    if (w > 0.0) {
      mean /= w;
      double var = 0.0;
      for (auto [v, p] : atoms[e]) var += p * (v - mean) * (v - mean);
      var /= w;
      st.mean = mean;
      st.bias = mean - target;
      st.variance = var;
      st.mse = st.bias * st.bias + var;
      st.mc_se = 0.0;
      if (auto ks = weighted_normality_stat(atoms[e])) st.ks_stat = *ks;
    } else {
      st.degenerate = true;
    }
    for (double eps : s.eps) {
      double outside = invalid_mass[e][0];
      for (auto [v, p] : atoms[e])
        if (std::fabs(v - target) > eps) outside += p;
      st.p_outside.push_back(std::clamp(outside / total, 0.0, 1.0));
    }
    run.stats.push_back(std::move(st));
  }
  return run;
}

}  // namespace detail

/// Runs R replications of one cell (k_t samples each) and reduces them.
///
/// Replication r uses the stream derived from (master_seed, t, r), and the
/// reduction walks replications in index order in fixed-size blocks, so
/// the result does not depend on the thread count.
inline CellRun run_cell(const ModelConfig& cfg, std::int64_t k,
                        std::span<const std::string> estimators, const EngineSettings& s,
                        std::int64_t t = 1) {
  validate(cfg);
  const Family f = family_of(cfg);
  for (const auto& id : estimators)
    if (!estimator_supports(id, f))
      throw ConfigurationError("estimator '" + id + "' is not compatible with family " +
                               std::string(family_name(f)));
  if (k < 1) throw ConfigurationError("k_t must be positive");
  if (f == Family::CRCk && static_cast<std::size_t>(k) != std::get<CRCkConfig>(cfg).sizes.size())
    throw ConfigurationError("crck cells carry k_t capture occasions; k_t must equal the number of sample sizes");

  if (s.exact != ExactMode::Off) {
    const auto atoms = detail::atom_count(cfg, f == Family::CRCk ? 0 : k);
    if (atoms && (s.exact == ExactMode::Force || *atoms <= s.exact_threshold))
      return detail::run_cell_exact(cfg, k, estimators, s, t);
    if (s.exact == ExactMode::Force)
      throw ConfigurationError("exact enumeration requested but unavailable for this cell");
  }
  if (s.replications < 2) throw ConfigurationError("replications must be at least 2");

  const auto R = static_cast<std::size_t>(s.replications);
  const std::size_t E = estimators.size();
  std::vector<double> values(R * E);
  std::vector<EstimateStatus> status(R * E);

  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (R + kBlock - 1) / kBlock;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::vector<Estimate> out(E);
    for (std::size_t b = next++; b < blocks; b = next++) {
      for (std::size_t r = b * kBlock; r < std::min(R, (b + 1) * kBlock); ++r) {
        RngState rng = derive_rng(s.master_seed, static_cast<std::uint64_t>(t),
                                  s.force_same_stream ? 0 : r);
        detail::run_replication(cfg, k, estimators, s.estimator_options, rng, out);
        for (std::size_t e = 0; e < E; ++e) {
          values[e * R + r] = out[e].value;
          status[e * R + r] = out[e].status;
        }
      }
    }
  };
  unsigned threads = s.threads ? s.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  const double target = target_size(cfg);
  CellRun run;
  for (std::size_t e = 0; e < E; ++e) {
    std::span<const double> v(values.data() + e * R, R);
    std::span<const EstimateStatus> st(status.data() + e * R, R);
    MomentAccumulator total;
    std::vector<double> ok_values;
    ok_values.reserve(R);
    for (std::size_t b = 0; b < blocks; ++b) {
      MomentAccumulator block;
      for (std::size_t r = b * kBlock; r < std::min(R, (b + 1) * kBlock); ++r)
        if (st[r] == EstimateStatus::Ok) {
          block.add(v[r]);
          ok_values.push_back(v[r]);
        }
      total.merge(block);
    }
    CellStats cs;
    cs.t = t;
    cs.estimator = estimators[e];
    cs.target = target;
    cs.sample_sizes = sample_sizes(cfg);
    cs.k = k;
    cs.replications = s.replications;
    cs.valid = total.count;
    cs.eps = s.eps;
    cs.seed = s.master_seed;
    if (total.count > 0) {
      cs.mean = total.mean;
      cs.bias = total.mean - target;
      cs.variance = total.variance();
      cs.mse = cs.bias * cs.bias + total.m2 / static_cast<double>(total.count);
      cs.mc_se = std::sqrt(cs.variance / static_cast<double>(total.count));
      if (auto ks = normality_stat(ok_values)) cs.ks_stat = *ks;
    } else {
      cs.degenerate = true;
    }
    for (double eps : s.eps) {
      std::int64_t outside = 0;
      for (std::size_t r = 0; r < R; ++r)
        if (st[r] != EstimateStatus::Ok || std::fabs(v[r] - target) > eps) ++outside;
      cs.p_outside.push_back(static_cast<double>(outside) / static_cast<double>(R));
    }
    run.stats.push_back(std::move(cs));
    if (s.keep_values) run.values.emplace_back(ok_values);
  }
  return run;
}

/// Runs every cell of a schedule; cell t seeds its replications from
/// (master_seed, t). Rows are ordered by cell, then estimator.
inline std::vector<CellStats> run_schedule(const RegimeSchedule& schedule,
                                           std::span<const std::string> estimators,
                                           const EngineSettings& s) {
  std::vector<CellStats> rows;
  for (const auto& cell : schedule.cells) {
    auto run = run_cell(cell.cfg, cell.k, estimators, s, cell.t);
    for (auto& st : run.stats) rows.push_back(std::move(st));
  }
  return rows;
}

/// Least squares of log(mse) on log(x).
inline RateFit fit_loglog_rate(std::span<const double> mse, std::span<const double> x) {
  if (mse.size() != x.size()) throw ParameterError("fit_loglog_rate: size mismatch");
  if (mse.size() < 3) throw ParameterError("fit_loglog_rate: need at least 3 cells");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < mse.size(); ++i) {
    if (!(mse[i] > 0.0) || !std::isfinite(mse[i])) throw ParameterError("fit_loglog_rate: degenerate fit (mse <= 0)");
    if (!(x[i] > 0.0)) throw ParameterError("fit_loglog_rate: sizes must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(mse[i]));
  }
  const auto n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw ParameterError("fit_loglog_rate: sizes must not all be equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = syy - fit.slope * sxy;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

inline RateFit fit_loglog_rate(std::span<const CellStats> cells, std::span<const double> x) {
  std::vector<double> mse;
  for (const auto& c : cells) mse.push_back(c.mse);
  return fit_loglog_rate(mse, x);
}

/// (t, P(|estimate - target| > eps)) along the cells.
inline std::vector<std::pair<std::int64_t, double>> consistency_curve(std::span<const CellStats> cells,
                                                                      double eps) {
  std::vector<std::pair<std::int64_t, double>> out;
  for (const auto& c : cells) {
    const auto it = std::find(c.eps.begin(), c.eps.end(), eps);
    if (it == c.eps.end())
      throw ParameterError("consistency_curve: eps " + std::to_string(eps) + " was not recorded");
    out.emplace_back(c.t, c.p_outside[static_cast<std::size_t>(it - c.eps.begin())]);
  }
  return out;
}

}  // namespace hiddenset

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "models.hpp"

namespace hiddenset {

/// Raised for unsupported or inconsistent experiment setups.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RegimeKind { FinitePopulation, Infill, Outfill };

inline constexpr RegimeKind kAllRegimes[] = {RegimeKind::FinitePopulation, RegimeKind::Infill,
                                             RegimeKind::Outfill};

inline std::string_view regime_name(RegimeKind k) {
  switch (k) {
    case RegimeKind::FinitePopulation: return "finite";
    case RegimeKind::Infill: return "infill";
    case RegimeKind::Outfill: return "outfill";
  }
  return "?";
}

inline std::optional<RegimeKind> parse_regime(std::string_view s) {
  for (auto k : kAllRegimes)
    if (regime_name(k) == s) return k;
  return std::nullopt;
}

/// One step t of a regime: the model at that step and the number of
/// repeated samples k_t. For the k-sample capture-recapture family k_t is
/// the number of capture occasions of the single experiment.
struct ScheduleCell {
  std::int64_t t = 0;
  ModelConfig cfg;
  std::int64_t k = 1;
  friend bool operator==(const ScheduleCell&, const ScheduleCell&) = default;
};

struct RegimeSchedule {
  RegimeKind kind = RegimeKind::Outfill;
  Family family = Family::Tank;
  std::vector<double> ratios;
  std::vector<ScheduleCell> cells;
  friend bool operator==(const RegimeSchedule&, const RegimeSchedule&) = default;
};

struct ScheduleOptions {
  /// k-sample CRC outfill with k_t = ceil(log(N_t / tail_target) / -log(1 - p)),
  /// which keeps the expected number of never-captured units N_t (1-p)^k_t
  /// below tail_target.
  bool growing_k = false;
  double tail_target = 0.1;
  friend bool operator==(const ScheduleOptions&, const ScheduleOptions&) = default;
};

/// Whether build_schedule accepts the (family, regime) pair.
inline bool regime_supported(Family f, RegimeKind k) {
  switch (k) {
    case RegimeKind::Outfill: return true;
    case RegimeKind::Infill: return f != Family::CRCk;
    case RegimeKind::FinitePopulation:
      return f == Family::Tank || f == Family::BinomialCount || f == Family::WaitingTime ||
             f == Family::Multiplier || f == Family::CRC2 || f == Family::NsumGeneral ||
             f == Family::NsumHidden;
  }
  return false;
}

/// round(c * size) clamped to [1, size - 1].
inline std::int64_t ratio_size(double c, std::int64_t size) {
  const auto n = static_cast<std::int64_t>(std::llround(c * static_cast<double>(size)));
  return std::clamp<std::int64_t>(n, 1, std::max<std::int64_t>(1, size - 1));
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& msg) { throw ConfigurationError(msg); }

inline std::int64_t grid_int(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || !std::isfinite(v))
    config_fail(std::string(what) + " grid values must be positive integers");
  return static_cast<std::int64_t>(v);
}

inline void need_ratios(std::span<const double> r, std::size_t count, Family f, bool unit_interval) {
  if (r.size() != count)
    config_fail(std::string(family_name(f)) + " outfill needs " + std::to_string(count) +
                " ratio(s), got " + std::to_string(r.size()));
  for (double c : r) {
    if (unit_interval ? !(c > 0.0 && c < 1.0) : !(c > 0.0 && std::isfinite(c)))
      config_fail(unit_interval ? "ratio outside (0,1)" : "ratio must be positive");
  }
}

inline ModelConfig outfill_cell(Family f, const ModelConfig& base, double g,
                                std::span<const double> r, const ScheduleOptions& opts,
                                std::int64_t& k_out) {
  k_out = 1;
  switch (f) {
    case Family::Tank: {
      need_ratios(r, 1, f, true);
      auto c = std::get<TankConfig>(base);
      c.population = grid_int(g, "population");
      c.sample_size = ratio_size(r[0], c.population);
      return c;
    }
    case Family::Interval: {
      need_ratios(r, 1, f, false);
      auto c = std::get<IntervalConfig>(base);
      if (!(g > 0.0)) config_fail("theta grid values must be positive");
      c.theta = g;
      c.sample_size = std::max<std::int64_t>(1, std::llround(r[0] * g));
      return c;
    }
    case Family::BinomialCount: {
      need_ratios(r, 1, f, false);
      auto c = std::get<BinomialCountConfig>(base);
      c.population = grid_int(g, "population");
      c.repetitions = std::max<std::int64_t>(1, std::llround(r[0] * static_cast<double>(c.population)));
      return c;
    }
    case Family::ZTPoisson: {
      need_ratios(r, 0, f, true);
      auto c = std::get<ZTPoissonConfig>(base);
      c.population = grid_int(g, "population");
      return c;
    }
    case Family::WaitingTime: {
      need_ratios(r, 1, f, false);
      auto c = std::get<WaitingTimeConfig>(base);
      c.population = grid_int(g, "population");
      c.horizon = r[0] * static_cast<double>(c.population);
      return c;
    }
    case Family::Multiplier: {
      need_ratios(r, 2, f, true);
      auto c = std::get<MultiplierConfig>(base);
      c.population = grid_int(g, "population");
      c.p = r[0];
      c.sample_size = ratio_size(r[1], c.population);
      return c;
    }
    case Family::CRC2: {
      if (r.size() == 1) {
        need_ratios(r, 1, f, true);
      } else {
        need_ratios(r, 2, f, true);
      }
      auto c = std::get<CRC2Config>(base);
      c.population = grid_int(g, "population");
      c.n1 = ratio_size(r[0], c.population);
      c.n2 = ratio_size(r.size() == 2 ? r[1] : r[0], c.population);
      return c;
    }
    case Family::CRCk: {
      auto c = std::get<CRCkConfig>(base);
      c.population = grid_int(g, "population");
      if (opts.growing_k) {
        need_ratios(r, 1, f, true);
        if (!(opts.tail_target > 0.0)) config_fail("tail_target must be positive");
        const double k = std::ceil(std::log(static_cast<double>(c.population) / opts.tail_target) /
                                   -std::log1p(-r[0]));
        k_out = std::max<std::int64_t>(2, static_cast<std::int64_t>(k));
        c.sizes.assign(static_cast<std::size_t>(k_out), ratio_size(r[0], c.population));
      } else {
        if (r.size() < 2) config_fail("crck outfill needs one ratio per sample (at least 2)");
        need_ratios(r, r.size(), f, true);
        c.sizes.clear();
        for (double ci : r) c.sizes.push_back(ratio_size(ci, c.population));
        k_out = static_cast<std::int64_t>(c.sizes.size());
      }
      return c;
    }
    case Family::NsumGeneral: {
      need_ratios(r, 2, f, true);
      auto c = std::get<NsumGeneralConfig>(base);
      c.total = grid_int(g, "total");
      c.hidden = ratio_size(r[0], c.total);
      c.sample_size = ratio_size(r[1], c.total - c.hidden);
      return c;
    }
    case Family::NsumHidden: {
      need_ratios(r, 1, f, true);
      auto c = std::get<NsumHiddenConfig>(base);
      c.hidden = grid_int(g, "population");
      c.sample_size = ratio_size(r[0], c.hidden);
      return c;
    }
    case Family::HTCluster: {
      need_ratios(r, 1, f, true);
      const auto& b = std::get<HTClusterConfig>(base);
      const std::int64_t rep = grid_int(g, "replication");
      HTClusterConfig c;
      c.replicated = true;
      for (std::int64_t i = 0; i < rep; ++i)
        c.cluster_sizes.insert(c.cluster_sizes.end(), b.cluster_sizes.begin(), b.cluster_sizes.end());
      c.sample_size = ratio_size(r[0], c.population());
      return c;
    }
  }
  config_fail("unknown family");
}

inline ModelConfig finite_cell(Family f, const ModelConfig& base, double g, bool last) {
  auto census_check = [&](bool is_census) {
    if (last && !is_census) config_fail("finite-population grid must end at the census cell");
  };
  switch (f) {
    case Family::Tank: {
      auto c = std::get<TankConfig>(base);
      c.sample_size = grid_int(g, "sample size");
      census_check(c.sample_size == c.population);
      return c;
    }
    case Family::BinomialCount: {
      auto c = std::get<BinomialCountConfig>(base);
      if (!(g > 0.0 && g <= 1.0)) config_fail("finite-population p grid must lie in (0,1]");
      c.p = g;
      census_check(g == 1.0);
      return c;
    }
    case Family::WaitingTime: {
      auto c = std::get<WaitingTimeConfig>(base);
      if (!(g > 0.0)) config_fail("finite-population horizon grid must be positive");
      c.horizon = g;
      census_check(std::isinf(g));
      return c;
    }
    case Family::Multiplier: {
      auto c = std::get<MultiplierConfig>(base);
      c.sample_size = grid_int(g, "sample size");
      census_check(c.sample_size == c.population);
      return c;
    }
    case Family::CRC2: {
      auto c = std::get<CRC2Config>(base);
      c.n2 = grid_int(g, "sample size");
      census_check(c.n2 == c.population);
      return c;
    }
    case Family::NsumGeneral: {
      auto c = std::get<NsumGeneralConfig>(base);
      c.sample_size = grid_int(g, "sample size");
      census_check(c.sample_size == c.total - c.hidden);
      return c;
    }
    case Family::NsumHidden: {
      auto c = std::get<NsumHiddenConfig>(base);
      c.sample_size = grid_int(g, "sample size");
      census_check(c.sample_size == c.hidden);
      return c;
    }
    default: break;
  }
  config_fail("finite-population regime not supported for " + std::string(family_name(f)));
}

}  // namespace detail

/// Materializes a regime as explicit cells.
///
/// grid meaning by regime:
///   finite  - growing sample size (p for binomial, horizon for waiting times),
///             ending at the census;
///   infill  - the repeated-sample counts k_t;
///   outfill - the population size N_t (M_t for nsum_general, theta for
///             interval, the cluster replication factor for ht_cluster).
/// Outfill sample sizes are round(c N_t) clamped to [1, N_t - 1].
inline RegimeSchedule build_schedule(Family family, RegimeKind kind, const ModelConfig& base,
                                     std::span<const double> grid, std::span<const double> ratios,
                                     const ScheduleOptions& opts = {}) {
  if (family_of(base) != family)
    detail::config_fail("base model family does not match the requested family");
  if (!regime_supported(family, kind))
    detail::config_fail(std::string(regime_name(kind)) + " regime not supported for " +
                        std::string(family_name(family)));
  if (grid.empty()) detail::config_fail("grid must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool ok = kind == RegimeKind::FinitePopulation ? grid[i] >= grid[i - 1] : grid[i] > grid[i - 1];
    if (!ok)
      detail::config_fail(kind == RegimeKind::FinitePopulation ? "grid must be non-decreasing"
                                                              : "grid must be strictly increasing");
  }
  if (opts.growing_k && (family != Family::CRCk || kind != RegimeKind::Outfill))
    detail::config_fail("growing_k applies only to crck outfill");

  RegimeSchedule s{kind, family, std::vector<double>(ratios.begin(), ratios.end()), {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ScheduleCell cell;
    cell.t = static_cast<std::int64_t>(i + 1);
    switch (kind) {
      case RegimeKind::Outfill:
        cell.cfg = detail::outfill_cell(family, base, grid[i], ratios, opts, cell.k);
        break;
      case RegimeKind::Infill:
        if (!ratios.empty()) detail::config_fail("infill takes no ratios");
        cell.cfg = base;
        cell.k = detail::grid_int(grid[i], "k_t");
        break;
      case RegimeKind::FinitePopulation:
        if (!ratios.empty()) detail::config_fail("finite-population regime takes no ratios");
        cell.cfg = detail::finite_cell(family, base, grid[i], i + 1 == grid.size());
        break;
    }
    const auto errs = validation_errors(cell.cfg);
    if (!errs.empty())
      detail::config_fail("cell t=" + std::to_string(cell.t) + ": " + errs.front());
    s.cells.push_back(std::move(cell));
  }
  return s;
}

}  // namespace hiddenset

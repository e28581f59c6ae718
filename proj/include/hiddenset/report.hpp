#pragma once

// Running an experiment and writing its outputs:
//   cells.csv          one row per (cell, estimator)
//   summary.json       version, config echo, schedule echo, fitted rates, timestamp
//   plot_<metric>_<estimator>.csv   two-column curves over the regime axis

#include <charconv>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace hiddenset {

inline constexpr std::string_view kVersion = "0.1.0";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form. NaN is written as an empty field.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct RateEntry {
  std::string estimator;
  std::optional<RateFit> fit;
  std::string error;  // set when the fit is not available
};

struct Report {
  ExperimentConfig config;
  RegimeSchedule schedule;
  std::vector<CellStats> cells;
  std::vector<RateEntry> rates;
};

/// Regime axis: population size (outfill), k_t (infill), grid value (finite).
inline std::string_view axis_name(RegimeKind k) {
  switch (k) {
    case RegimeKind::Outfill: return "population_size";
    case RegimeKind::Infill: return "k_t";
    case RegimeKind::FinitePopulation: return "grid";
  }
  return "x";
}

inline double axis_value(const ExperimentConfig& c, const CellStats& s) {
  switch (c.regime) {
    case RegimeKind::Outfill: return s.target;
    case RegimeKind::Infill: return static_cast<double>(s.k);
    case RegimeKind::FinitePopulation: return c.grid[static_cast<std::size_t>(s.t - 1)];
  }
  return 0.0;
}

inline std::vector<CellStats> cells_for(const std::vector<CellStats>& all, std::string_view estimator) {
  std::vector<CellStats> out;
  for (const auto& c : all)
    if (c.estimator == estimator) out.push_back(c);
  return out;
}

/// Log-log MSE fits per estimator. Finite-population schedules end at a
/// census with zero MSE and get no fit.
inline std::vector<RateEntry> fit_rates(const ExperimentConfig& c, const std::vector<CellStats>& cells) {
  std::vector<RateEntry> out;
  for (const auto& id : c.estimators) {
    RateEntry e{id, std::nullopt, ""};
    if (c.regime == RegimeKind::FinitePopulation) {
      e.error = "no rate fit for finite-population schedules";
    } else {
      const auto mine = cells_for(cells, id);
      std::vector<double> x;
      for (const auto& s : mine) x.push_back(axis_value(c, s));
      try {
        e.fit = fit_loglog_rate(mine, x);
      } catch (const ParameterError& err) {
        e.error = err.what();
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline Report run_experiment(const ExperimentConfig& c) {
  Report r{c, schedule_of(c), {}, {}};
  r.cells = run_schedule(r.schedule, c.estimators, engine_settings(c));
  r.rates = fit_rates(c, r.cells);
  return r;
}

inline std::string cells_csv_header(const std::vector<double>& eps) {
  std::string h =
      "experiment_id,family,regime,estimator,t,population_size,sample_sizes,k_t,replications,valid,"
      "mean,bias,variance,mse,mc_se,ks_stat";
  for (double e : eps) h += ",p_outside_" + format_number(e);
  return h + ",seed";
}

inline std::string cells_csv(const Report& r) {
  std::string out = cells_csv_header(r.config.eps) + "\n";
  const std::string fam(family_name(r.config.family)), reg(regime_name(r.config.regime));
  for (const auto& s : r.cells) {
    std::string sizes;
    for (auto n : s.sample_sizes) sizes += (sizes.empty() ? "" : ";") + format_number(n);
    out += r.config.experiment_id + ',' + fam + ',' + reg + ',' + s.estimator + ',' + format_number(s.t) + ',' +
           format_number(s.target) + ',' + sizes + ',' + format_number(s.k) + ',' +
           format_number(s.replications) + ',' + format_number(s.valid) + ',' + format_number(s.mean) + ',' +
           format_number(s.bias) + ',' + format_number(s.variance) + ',' + format_number(s.mse) + ',' +
           format_number(s.mc_se) + ',' + format_number(s.ks_stat);
    for (double p : s.p_outside) out += ',' + format_number(p);
    out += ',' + std::to_string(s.seed) + '\n';
  }
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json summary_json(const Report& r, const std::string& timestamp) {
  json rates = json::array();
  for (const auto& e : r.rates) {
    json j = {{"estimator", e.estimator}, {"x", axis_name(r.config.regime)}};
    if (e.fit) {
      j["slope"] = e.fit->slope;
      j["intercept"] = e.fit->intercept;
      j["r_squared"] = e.fit->r_squared;
    } else {
      j["error"] = e.error;
    }
    rates.push_back(std::move(j));
  }
  return {{"version", kVersion},
          {"config", config_to_json(r.config)},
          {"schedule", schedule_to_json(r.schedule)},
          {"rates", rates},
          {"timestamp", timestamp}};
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + p.string());
}

}  // namespace detail

/// Writes cells.csv, summary.json and the plot files into `dir`.
inline void write_outputs(const Report& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  detail::write_file(dir / "cells.csv", cells_csv(r));
  detail::write_file(dir / "summary.json", summary_json(r, utc_timestamp()).dump(2) + "\n");

  const std::string x(axis_name(r.config.regime));
  std::vector<std::pair<std::string, std::function<double(const CellStats&)>>> metrics{
      {"mean", [](const CellStats& s) { return s.mean; }},
      {"bias", [](const CellStats& s) { return s.bias; }},
      {"variance", [](const CellStats& s) { return s.variance; }},
      {"mse", [](const CellStats& s) { return s.mse; }},
      {"ks_stat", [](const CellStats& s) { return s.ks_stat; }}};
  for (std::size_t i = 0; i < r.config.eps.size(); ++i)
    metrics.emplace_back("p_outside_" + format_number(r.config.eps[i]),
                         [i](const CellStats& s) { return s.p_outside[i]; });

  for (const auto& id : r.config.estimators) {
    const auto mine = cells_for(r.cells, id);
    for (const auto& [name, get] : metrics) {
      std::string text = x + ',' + name + '\n';
      for (const auto& s : mine) text += format_number(axis_value(r.config, s)) + ',' + format_number(get(s)) + '\n';
      detail::write_file(dir / ("plot_" + name + "_" + id + ".csv"), text);
    }
  }
}

}  // namespace hiddenset

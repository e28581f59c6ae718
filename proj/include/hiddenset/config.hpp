#pragma once

// Experiment description: one JSON document per experiment.
//
//   {
//     "experiment_id": "tank_outfill",
//     "family": "tank",
//     "regime": "outfill",
//     "model": {"offset": 0},
//     "grid": [100, 200, 400],
//     "ratios": [0.5],
//     "estimators": ["tank.goodman"],
//     "replications": 10000,            optional, default 10^4
//     "eps": [0.5],                     optional
//     "seed": 1,                        optional
//     "output_dir": "out",              optional
//     "threads": 0,                     optional, 0 = hardware concurrency
//     "exact": "auto",                  optional: off | auto | force
//     "exact_threshold": 1e6,           optional
//     "growing_k": false,               optional, crck outfill only
//     "tail_target": 0.1,               optional
//     "estimator_options": {"prior_a": 2, "prior_b": 2, "posterior_cap": 0}
//   }
//
// Model keys depend on the family (see model_from_json). Keys the schedule
// overwrites (population, sample sizes under outfill) may be omitted.

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "engine.hpp"
#include "regimes.hpp"

namespace hiddenset {

using json = nlohmann::ordered_json;

/// All problems found in a configuration document, each as "path: message".
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s;
    for (const auto& x : e) s += (s.empty() ? "" : "\n") + x;
    return s;
  }
  std::vector<std::string> errors_;
};

struct ExperimentConfig {
  std::string experiment_id;
  Family family = Family::Tank;
  RegimeKind regime = RegimeKind::Outfill;
  ModelConfig model = TankConfig{};
  std::vector<double> grid;
  std::vector<double> ratios;
  std::vector<std::string> estimators;
  std::int64_t replications = 10000;
  std::vector<double> eps{0.5};
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned threads = 0;
  ExactMode exact = ExactMode::Auto;
  double exact_threshold = 1e6;
  ScheduleOptions schedule_options;
  EstimatorOptions estimator_options;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline std::string_view exact_mode_name(ExactMode m) {
  switch (m) {
    case ExactMode::Off: return "off";
    case ExactMode::Auto: return "auto";
    case ExactMode::Force: return "force";
  }
  return "?";
}

namespace detail {

/// Collects errors while reading one object; unknown keys are reported on finish().
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) fail(path_.empty() ? "document" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const std::string& where, const std::string& msg) { errors_.push_back(where + ": " + msg); }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  const json* node(const std::string& key, bool required) {
    seen_.insert(key);
    if (!has(key)) {
      if (required) fail(at(key), "missing required key");
      return nullptr;
    }
    return &j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out, bool required = false) {
    const json* n = node(key, required);
    if (!n) return;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (n->is_number_float()) {
          const double d = n->get<double>();
          if (d != std::floor(d)) throw std::invalid_argument("expected an integer");
          out = static_cast<T>(d);
          return;
        }
        if (!n->is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (n->is_number_integer() && !n->is_number_unsigned() && n->get<std::int64_t>() < 0)
            throw std::invalid_argument("expected a non-negative integer");
        }
      }
      out = n->get<T>();
    } catch (const std::exception& e) {
      fail(at(key), std::string("wrong type (") + e.what() + ")");
    }
  }

  void finish() {
    if (!j_.is_object()) return;
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(at(k), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

/// Infinite horizons are written as the string "inf".
inline double read_horizon(Reader& r, double fallback) {
  const json* n = r.node("horizon", false);
  if (!n) return fallback;
  if (n->is_string() && n->get<std::string>() == "inf") return WaitingTimeConfig::kInfiniteHorizon;
  if (n->is_number()) return n->get<double>();
  r.fail(r.at("horizon"), "expected a number or \"inf\"");
  return fallback;
}

inline BoundaryDensity read_density(Reader& r) {
  std::string name = "uniform";
  double degree = 0.0;
  r.get("density", name);
  r.get("degree", degree);
  if (name == "uniform") return BoundaryDensity::uniform();
  if (name == "polynomial") return BoundaryDensity::polynomial(degree);
  if (name == "exponential") return BoundaryDensity::exponential();
  r.fail(r.at("density"), "expected uniform, polynomial or exponential");
  return {};
}

inline std::string_view density_name(const BoundaryDensity& d) {
  switch (d.kind) {
    case BoundaryDensity::Kind::Uniform: return "uniform";
    case BoundaryDensity::Kind::Polynomial: return "polynomial";
    case BoundaryDensity::Kind::Exponential: return "exponential";
  }
  return "?";
}

}  // namespace detail

/// Reads the family-specific model object at `path`.
inline ModelConfig model_from_json(Family f, const json& j, const std::string& path,
                                   std::vector<std::string>& errors) {
  detail::Reader r(j, path, errors);
  ModelConfig out;
  switch (f) {
    case Family::Tank: {
      TankConfig c;
      r.get("population", c.population);
      r.get("sample_size", c.sample_size);
      r.get("offset", c.offset);
      out = c;
      break;
    }
    case Family::Interval: {
      IntervalConfig c;
      c.theta = 1.0;
      r.get("theta", c.theta);
      r.get("sample_size", c.sample_size);
      c.density = detail::read_density(r);
      out = c;
      break;
    }
    case Family::BinomialCount: {
      BinomialCountConfig c;
      r.get("population", c.population);
      r.get("p", c.p, true);
      r.get("repetitions", c.repetitions);
      out = c;
      break;
    }
    case Family::ZTPoisson: {
      ZTPoissonConfig c;
      r.get("population", c.population);
      r.get("lambda", c.lambda, true);
      r.get("known_lambda", c.known_lambda);
      out = c;
      break;
    }
    case Family::WaitingTime: {
      WaitingTimeConfig c;
      r.get("population", c.population);
      r.get("lambda", c.lambda, true);
      c.horizon = detail::read_horizon(r, c.horizon);
      out = c;
      break;
    }
    case Family::Multiplier: {
      MultiplierConfig c;
      r.get("population", c.population);
      r.get("p", c.p);
      r.get("sample_size", c.sample_size);
      r.get("redraw_first", c.redraw_first);
      r.get("fixed_benchmark", c.fixed_benchmark);
      out = c;
      break;
    }
    case Family::CRC2: {
      CRC2Config c;
      r.get("population", c.population);
      r.get("n1", c.n1);
      r.get("n2", c.n2);
      out = c;
      break;
    }
    case Family::CRCk: {
      CRCkConfig c;
      r.get("population", c.population);
      r.get("sizes", c.sizes);
      r.get("summary_only", c.summary_only);
      out = c;
      break;
    }
    case Family::NsumGeneral: {
      NsumGeneralConfig c;
      r.get("total", c.total);
      r.get("hidden", c.hidden);
      r.get("edge_probability", c.edge_probability, true);
      r.get("sample_size", c.sample_size);
      out = c;
      break;
    }
    case Family::NsumHidden: {
      NsumHiddenConfig c;
      r.get("hidden", c.hidden);
      r.get("edge_probability", c.edge_probability, true);
      r.get("sample_size", c.sample_size);
      out = c;
      break;
    }
    case Family::HTCluster: {
      HTClusterConfig c;
      r.get("cluster_sizes", c.cluster_sizes, true);
      r.get("sample_size", c.sample_size);
      r.get("replicated", c.replicated);
      out = c;
      break;
    }
  }
  r.finish();
  return out;
}

inline json model_to_json(const ModelConfig& cfg) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TankConfig>)
          return {{"population", c.population}, {"sample_size", c.sample_size}, {"offset", c.offset}};
        else if constexpr (std::is_same_v<T, IntervalConfig>)
          return {{"theta", c.theta},
                  {"sample_size", c.sample_size},
                  {"density", detail::density_name(c.density)},
                  {"degree", c.density.degree}};
        else if constexpr (std::is_same_v<T, BinomialCountConfig>)
          return {{"population", c.population}, {"p", c.p}, {"repetitions", c.repetitions}};
        else if constexpr (std::is_same_v<T, ZTPoissonConfig>)
          return {{"population", c.population}, {"lambda", c.lambda}, {"known_lambda", c.known_lambda}};
        else if constexpr (std::is_same_v<T, WaitingTimeConfig>)
          return {{"population", c.population},
                  {"lambda", c.lambda},
                  {"horizon", std::isinf(c.horizon) ? json("inf") : json(c.horizon)}};
        else if constexpr (std::is_same_v<T, MultiplierConfig>)
          return {{"population", c.population},     {"p", c.p},
                  {"sample_size", c.sample_size},   {"redraw_first", c.redraw_first},
                  {"fixed_benchmark", c.fixed_benchmark}};
        else if constexpr (std::is_same_v<T, CRC2Config>)
          return {{"population", c.population}, {"n1", c.n1}, {"n2", c.n2}};
        else if constexpr (std::is_same_v<T, CRCkConfig>)
          return {{"population", c.population}, {"sizes", c.sizes}, {"summary_only", c.summary_only}};
        else if constexpr (std::is_same_v<T, NsumGeneralConfig>)
          return {{"total", c.total},
                  {"hidden", c.hidden},
                  {"edge_probability", c.edge_probability},
                  {"sample_size", c.sample_size}};
        else if constexpr (std::is_same_v<T, NsumHiddenConfig>)
          return {{"hidden", c.hidden}, {"edge_probability", c.edge_probability}, {"sample_size", c.sample_size}};
        else
          return {{"cluster_sizes", c.cluster_sizes}, {"sample_size", c.sample_size}, {"replicated", c.replicated}};
      },
      cfg);
}

inline json schedule_to_json(const RegimeSchedule& s) {
  json cells = json::array();
  for (const auto& c : s.cells) cells.push_back({{"t", c.t}, {"k", c.k}, {"model", model_to_json(c.cfg)}});
  return {{"family", family_name(s.family)},
          {"regime", regime_name(s.kind)},
          {"ratios", s.ratios},
          {"cells", cells}};
}

inline RegimeSchedule schedule_from_json(const json& j) {
  std::vector<std::string> errors;
  RegimeSchedule s;
  detail::Reader r(j, "schedule", errors);
  std::string fam, reg;
  r.get("family", fam, true);
  r.get("regime", reg, true);
  r.get("ratios", s.ratios);
  const auto f = parse_family(fam);
  const auto k = parse_regime(reg);
  if (!f) r.fail(r.at("family"), "unknown family '" + fam + "'");
  if (!k) r.fail(r.at("regime"), "unknown regime '" + reg + "'");
  const json* cells = r.node("cells", true);
  r.finish();
  if (f && k && cells && cells->is_array()) {
    s.family = *f;
    s.kind = *k;
    for (std::size_t i = 0; i < cells->size(); ++i) {
      const std::string path = "schedule.cells[" + std::to_string(i) + "]";
      detail::Reader cr((*cells)[i], path, errors);
      ScheduleCell cell;
      cr.get("t", cell.t, true);
      cr.get("k", cell.k, true);
      const json* m = cr.node("model", true);
      cr.finish();
      if (m) cell.cfg = model_from_json(*f, *m, path + ".model", errors);
      s.cells.push_back(std::move(cell));
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return s;
}

/// Parses and validates an experiment document. Throws ConfigError listing
/// every problem found.
inline ExperimentConfig parse_config_json(const json& j) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  detail::Reader r(j, "", errors);

  std::string fam, reg, exact = "auto";
  r.get("experiment_id", c.experiment_id, true);
  r.get("family", fam, true);
  r.get("regime", reg, true);
  r.get("grid", c.grid, true);
  r.get("ratios", c.ratios);
  r.get("estimators", c.estimators, true);
  r.get("replications", c.replications);
  r.get("eps", c.eps);
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  r.get("threads", c.threads);
  r.get("exact", exact);
  r.get("exact_threshold", c.exact_threshold);
  r.get("growing_k", c.schedule_options.growing_k);
  r.get("tail_target", c.schedule_options.tail_target);

  if (const json* o = r.node("estimator_options", false)) {
    detail::Reader er(*o, "estimator_options", errors);
    er.get("prior_a", c.estimator_options.prior_a);
    er.get("prior_b", c.estimator_options.prior_b);
    er.get("posterior_cap", c.estimator_options.posterior_cap);
    er.finish();
  }

  const auto f = parse_family(fam);
  if (!fam.empty() && !f) r.fail("family", "unknown family '" + fam + "'");
  const auto k = parse_regime(reg);
  if (!reg.empty() && !k) r.fail("regime", "unknown regime '" + reg + "' (finite, infill, outfill)");
  if (f) c.family = *f;
  if (k) c.regime = *k;

  const json* model = r.node("model", false);
  if (f) c.model = model_from_json(*f, model ? *model : json::object(), "model", errors);
  r.finish();

  if (exact == "off") c.exact = ExactMode::Off;
  else if (exact == "auto") c.exact = ExactMode::Auto;
  else if (exact == "force") c.exact = ExactMode::Force;
  else errors.push_back("exact: expected off, auto or force");

  if (c.experiment_id.empty() && r.has("experiment_id")) errors.push_back("experiment_id: must not be empty");
  if (c.replications < 2) errors.push_back("replications: must be at least 2");
  if (c.eps.empty()) errors.push_back("eps: must list at least one tolerance");
  for (std::size_t i = 0; i < c.eps.size(); ++i)
    if (!(c.eps[i] > 0.0) || !std::isfinite(c.eps[i]))
      errors.push_back("eps[" + std::to_string(i) + "]: must be positive");
  if (r.has("estimators") && c.estimators.empty()) errors.push_back("estimators: must not be empty");
  for (std::size_t i = 0; i < c.estimators.size(); ++i) {
    const auto& id = c.estimators[i];
    const std::string where = "estimators[" + std::to_string(i) + "]";
    if (!find_estimator(id)) errors.push_back(where + ": unknown estimator '" + id + "'");
    else if (f && !estimator_supports(id, *f))
      errors.push_back(where + ": estimator '" + id + "' is not compatible with family '" + fam + "'");
  }
  if (f && k && !regime_supported(*f, *k))
    errors.push_back("regime: " + reg + " regime not supported for family '" + fam + "'");
  if (k && *k == RegimeKind::Outfill)
    for (std::size_t i = 0; i < c.ratios.size(); ++i)
      if (!(c.ratios[i] > 0.0 && c.ratios[i] < 1.0) && c.family != Family::Interval &&
          c.family != Family::BinomialCount && c.family != Family::WaitingTime)
        errors.push_back("ratios[" + std::to_string(i) + "]: ratio outside (0,1)");

  // The schedule checks the remaining cross-field rules (grid order, ratio
  // counts, per-cell model validity).
  if (errors.empty()) {
    try {
      build_schedule(c.family, c.regime, c.model, c.grid, c.ratios, c.schedule_options);
    } catch (const ConfigurationError& e) {
      errors.push_back(std::string("schedule: ") + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

inline ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("document: ") + e.what()});
  }
  return parse_config_json(j);
}

inline json config_to_json(const ExperimentConfig& c) {
  return {{"experiment_id", c.experiment_id},
          {"family", family_name(c.family)},
          {"regime", regime_name(c.regime)},
          {"model", model_to_json(c.model)},
          {"grid", c.grid},
          {"ratios", c.ratios},
          {"estimators", c.estimators},
          {"replications", c.replications},
          {"eps", c.eps},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"threads", c.threads},
          {"exact", exact_mode_name(c.exact)},
          {"exact_threshold", c.exact_threshold},
          {"growing_k", c.schedule_options.growing_k},
          {"tail_target", c.schedule_options.tail_target},
          {"estimator_options",
           {{"prior_a", c.estimator_options.prior_a},
            {"prior_b", c.estimator_options.prior_b},
            {"posterior_cap", c.estimator_options.posterior_cap}}}};
}

inline RegimeSchedule schedule_of(const ExperimentConfig& c) {
  return build_schedule(c.family, c.regime, c.model, c.grid, c.ratios, c.schedule_options);
}

inline EngineSettings engine_settings(const ExperimentConfig& c) {
  EngineSettings s;
  s.replications = c.replications;
  s.master_seed = c.seed;
  s.eps = c.eps;
  s.threads = c.threads;
  s.exact = c.exact;
  s.exact_threshold = c.exact_threshold;
  s.estimator_options = c.estimator_options;
  return s;
}

}  // namespace hiddenset

// hiddenset command line: run experiments, list the registry, query oracles.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "hiddenset/oracles.hpp"
#include "hiddenset/report.hpp"

namespace hs = hiddenset;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

std::string show(const hs::oracle::Decimal& d) { return hs::format_number(d.convert_to<double>()); }

std::string show(const hs::oracle::Rational& q) {
  return boost::multiprecision::numerator(q).str() +
         (boost::multiprecision::denominator(q) == 1 ? "" : "/" + boost::multiprecision::denominator(q).str());
}

void print_moments(const hs::oracle::ExactMoments& m, double target) {
  hs::oracle::Decimal bias = m.expectation - hs::oracle::Decimal(target);
  if (m.exact_expectation) bias = hs::oracle::detail::to_decimal(*m.exact_expectation - hs::oracle::Rational(target));
  std::cout << "E=" << show(m.expectation) << " bias=" << show(bias) << " Var=" << show(m.variance)
            << " support=" << m.support;
  if (m.conditioning != 1) std::cout << " P(condition)=" << show(m.conditioning);
  std::cout << '\n';
  if (m.exact_expectation && m.exact_variance)
    std::cout << "exact: E=" << show(*m.exact_expectation) << " Var=" << show(*m.exact_variance) << '\n';
}

std::int64_t to_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw hs::ParameterError(std::string(what) + ": expected an integer, got '" + s + "'");
  return v;
}

int run_oracle(const std::string& name, const std::vector<std::string>& a) {
  auto need = [&](std::size_t n, const char* usage) {
    if (a.size() != n) throw hs::ParameterError(std::string("usage: oracle ") + usage);
  };
  if (name == "exact-tank") {
    need(3, "exact-tank <N> <n> <estimator>");
    const auto N = to_int(a[0], "N");
    print_moments(hs::oracle::exact_tank_moments(N, to_int(a[1], "n"), a[2]), double(N));
  } else if (name == "exact-two-sample") {
    need(4, "exact-two-sample <N> <n1> <n2> <lp|chapman|mbm-conditional>");
    const auto N = to_int(a[0], "N");
    print_moments(hs::oracle::exact_two_sample_moments(N, to_int(a[1], "n1"), to_int(a[2], "n2"), a[3]),
                  double(N));
  } else if (name == "chapman-bias") {
    need(3, "chapman-bias <N> <n1> <n2>");
    const auto b = hs::oracle::chapman_bias_closed_form(to_int(a[0], "N"), to_int(a[1], "n1"), to_int(a[2], "n2"));
    if (!b) throw hs::ParameterError("closed form needs n1 + n2 < N");
    std::cout << "bias=" << show(hs::oracle::detail::to_decimal(*b)) << " exact=" << show(*b) << '\n';
  } else if (name == "exact-ht") {
    if (a.size() < 2) throw hs::ParameterError("usage: oracle exact-ht <n> <size_1> ... <size_H>");
    std::vector<std::int64_t> sizes;
    std::int64_t total = 0;
    for (std::size_t i = 1; i < a.size(); ++i) {
      sizes.push_back(to_int(a[i], "cluster size"));
      total += sizes.back();
    }
    print_moments(hs::oracle::exact_ht_moments(static_cast<std::int64_t>(sizes.size()), sizes, to_int(a[0], "n")),
                  double(total));
  } else {
    throw hs::ParameterError("unknown oracle '" + name +
                             "' (exact-tank, exact-two-sample, chapman-bias, exact-ht)");
  }
  return kOk;
}

void print_list() {
  std::cout << "estimators:\n";
  for (const auto& e : hs::kEstimators) std::printf("  %-22s %s\n", std::string(e.id).c_str(),
                                                    std::string(hs::family_name(e.family)).c_str());
  std::cout << "\nregimes: finite infill outfill\n\ncompatibility (family x regime):\n";
  std::printf("  %-14s %-7s %-7s %-7s\n", "family", "finite", "infill", "outfill");
  for (auto f : hs::kAllFamilies) {
    auto mark = [&](hs::RegimeKind k) { return hs::regime_supported(f, k) ? "yes" : "-"; };
    std::printf("  %-14s %-7s %-7s %-7s\n", std::string(hs::family_name(f)).c_str(),
                mark(hs::RegimeKind::FinitePopulation), mark(hs::RegimeKind::Infill), mark(hs::RegimeKind::Outfill));
  }
}

int run_config(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
               std::optional<unsigned> threads) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error: cannot read " << path << '\n';
    return kInvalid;
  }
  std::stringstream text;
  text << f.rdbuf();
  auto cfg = hs::parse_config(text.str());
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (!out.empty()) cfg.output_dir = out;
  const auto report = hs::run_experiment(cfg);
  hs::write_outputs(report, cfg.output_dir);
  std::cerr << cfg.experiment_id << ": " << report.cells.size() << " rows written to " << cfg.output_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-set size estimation: simulation, estimators and exact oracles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hs::kVersion));

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config, "Experiment config file")->required();
  run->add_option("--out", out, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Master seed (overrides seed)");
  run->add_option("--threads", threads, "Worker threads, 0 = all cores");

  auto* list = app.add_subcommand("list", "List families, estimators, regimes and compatibility");

  std::string oracle_name;
  std::vector<std::string> oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Exact moments on small instances");
  oracle->add_option("name", oracle_name, "exact-tank | exact-two-sample | chapman-bias | exact-ht")->required();
  oracle->add_option("params", oracle_args, "Oracle parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*list) {
      print_list();
      return kOk;
    }
    if (*oracle) return run_oracle(oracle_name, oracle_args);
    return run_config(config, out, seed, threads);
  } catch (const hs::ConfigError& e) {
    for (const auto& err : e.errors()) std::cerr << "error: " << err << '\n';
    return kInvalid;
  } catch (const hs::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return *oracle ? kInvalid : kRuntime;
  } catch (const hs::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

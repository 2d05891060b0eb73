#ifndef TDC_TOOLS_CLI_HPP
#define TDC_TOOLS_CLI_HPP

// Command line front end: bench, estimate and curve subcommands. Kept in a
// header so the tests can drive it in-process.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tdc/copula.hpp"
#include "tdc/csv.hpp"
#include "tdc/empirical.hpp"
#include "tdc/harness.hpp"
#include "tdc/mse.hpp"
#include "tdc/random.hpp"
#include "tdc/selection.hpp"

namespace tdc::cli {

enum exit_code : int { ok = 0, failure = 1, usage = 2 };

/// Thrown for invalid flag combinations detected after parsing.
class usage_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelArgs {
  std::string family;
  std::optional<double> theta;
  double rho = 0.0;
  double nu = 4.0;
};

inline const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"gumbel",   "clayton",  "survival-clayton",
                                              "survival-gumbel", "gaussian", "student"};
  return names;
}

inline CopulaModel make_model(const ModelArgs& a) {
  auto theta = [&]() {
    if (!a.theta) throw usage_error("--theta is required for the " + a.family + " copula");
    return *a.theta;
  };
  if (a.family == "gumbel") return CopulaModel::gumbel(theta());
  if (a.family == "clayton") return CopulaModel::clayton(theta());
  if (a.family == "survival-clayton") return CopulaModel::survival(CopulaModel::clayton(theta()));
  if (a.family == "survival-gumbel") return CopulaModel::survival(CopulaModel::gumbel(theta()));
  if (a.family == "gaussian") return CopulaModel::gaussian(a.rho);
  if (a.family == "student") return CopulaModel::student_t(a.rho, a.nu);
  throw usage_error("unknown copula '" + a.family + "'");
}

/// "1,2,5" or "plugin,twostep" or "all".
inline std::vector<Method> parse_methods(const std::string& text) {
  if (text == "all") return {all_methods.begin(), all_methods.end()};
  std::vector<Method> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_method(item));
  }
  if (out.empty()) throw usage_error("no methods given");
  return out;
}

inline std::optional<Family> parse_plugin_family(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "clayton") return Family::clayton;
  if (s == "gumbel") return Family::gumbel;
  throw usage_error("plug-in family must be clayton or gumbel");
}

inline Tail parse_tail(const std::string& s) {
  if (s == "lower") return Tail::lower;
  if (s == "upper") return Tail::upper;
  throw usage_error("tail must be lower or upper");
}

inline std::string format_value(double x, int digits = 4) {
  if (std::isnan(x)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::string format_full(double x) {
  if (std::isnan(x)) return "NA";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// Writes to --out when given, else to `out`.
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

inline CsvColumn parse_column(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoul(s);
  return s;
}

struct SampleArgs {
  std::string input;
  std::string x = "0";
  std::string y = "1";
  std::string header = "auto";
  bool log_returns = false;
  ModelArgs generator;
  std::size_t n = 1000;
  std::uint64_t seed = 7;
};

inline void add_sample_flags(CLI::App* app, SampleArgs& a) {
  app->add_option("--input", a.input, "CSV file with two numeric columns");
  app->add_option("--x", a.x, "first column (index or header name)")->capture_default_str();
  app->add_option("--y", a.y, "second column (index or header name)")->capture_default_str();
  app->add_option("--header", a.header, "header row")->check(CLI::IsMember({"auto", "yes", "no"}))->capture_default_str();
  app->add_flag("--log-returns", a.log_returns, "use log differences of the columns");
}

inline CsvOptions csv_options(const SampleArgs& a) {
  CsvOptions opt;
  opt.x = parse_column(a.x);
  opt.y = parse_column(a.y);
  opt.header = a.header == "yes" ? CsvHeader::present : a.header == "no" ? CsvHeader::absent : CsvHeader::detect;
  opt.log_returns = a.log_returns;
  return opt;
}

// Sample for the curve command: CSV input or a simulated copula sample.
inline std::vector<Point> load_sample(const SampleArgs& a) {
  if (!a.input.empty()) return read_pairs_file(a.input, csv_options(a)).points;
  if (a.generator.family.empty()) throw usage_error("give --input or --generator");
  RandomStream rng(a.seed);
  return sample(make_model(a.generator), a.n, rng);
}

inline void require_selection_size(std::size_t n) {
  if (n < 50) throw data_error("need at least 50 observations, got " + std::to_string(n));
}

// ---- bench ------------------------------------------------------------------

struct BenchArgs {
  ModelArgs model = [] {
    ModelArgs m;
    m.family = "gumbel";
    return m;
  }();
  std::vector<std::size_t> sizes{500, 1000, 2000};
  std::size_t reps = 100;
  std::string tail = "upper";
  std::string methods = "1,2,3,4,5,6";
  std::string family;
  std::uint64_t seed = 7;
  std::size_t workers = 1;
  std::string out;
  std::string format = "tsv";
  std::string dataset;
};

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  std::vector<ExperimentResult> results;
  for (std::size_t n : a.sizes) {
    ExperimentSpec spec;
    spec.generator = make_model(a.model);
    spec.dataset = a.dataset.empty() ? a.model.family : a.dataset;
    spec.n = n;
    spec.replications = a.reps;
    spec.methods = parse_methods(a.methods);
    spec.tail = parse_tail(a.tail);
    spec.selection.family = parse_plugin_family(a.family);
    spec.seed = a.seed;
    results.push_back(run_experiment(spec, a.workers));
  }
  emit(a.out, emit_table(results, parse_table_format(a.format)), out);
  return ok;
}

// ---- estimate ---------------------------------------------------------------

struct EstimateArgs {
  SampleArgs sample;
  std::string tail = "both";
  std::string methods = "1,2,3,4,5,6";
  std::string family;
  std::size_t m = 0;
  bool details = false;
  std::string out;
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const auto data = read_pairs_file(a.sample.input, csv_options(a.sample));
  require_selection_size(data.size());
  const auto s = pseudo_sample(data.points);
  const auto methods = parse_methods(a.methods);
  std::vector<Tail> tails;
  if (a.tail == "both")
    tails = {Tail::lower, Tail::upper};
  else
    tails = {parse_tail(a.tail)};
  SelectionConfig cfg;
  cfg.family = parse_plugin_family(a.family);
  cfg.average_m = a.m;
  const double rho = pearson(data.points);

  std::ostringstream os;
  if (a.details) {
    os << "tail\tmethod\testimate\tthreshold\tlength\ttheta_hat\tfallback\n";
  } else {
    os << "tail";
    for (Method m : methods) os << '\t' << to_string(m);
    os << "\trho\n";
  }
  for (Tail tail : tails) {
    PsiCache cache(s, tail, plugin_family(cfg, tail), cfg);
    if (!a.details) os << to_string(tail);
    for (Method m : methods) {
      std::optional<SelectionResult> r;
      std::string failure;
      try {
        r = estimate_method(s, tail, m, cfg, &cache);
      } catch (const std::exception& e) {
        failure = e.what();
      }
      if (a.details) {
        os << to_string(tail) << '\t' << to_string(m) << '\t';
        if (r) {
          os << format_value(r->estimate) << '\t' << (r->threshold ? std::to_string(*r->threshold) : "NA") << '\t'
             << r->length << '\t' << (r->theta_hat ? format_value(*r->theta_hat) : "NA") << '\t'
             << (r->diagnostics.fallback ? "yes" : "no") << '\n';
        } else {
          os << "NA\tNA\tNA\tNA\t" << failure << '\n';
        }
      } else {
        os << '\t' << (r ? format_value(r->estimate) : "NA");
      }
    }
    if (!a.details) os << '\t' << format_value(rho) << '\n';
  }
  if (a.details) os << "both\trho\t" << format_value(rho) << "\tNA\tNA\tNA\tno\n";
  emit(a.out, os.str(), out);
  return ok;
}

// ---- curve ------------------------------------------------------------------

struct CurveArgs {
  std::string kind;
  SampleArgs sample;
  ModelArgs model;
  std::string tail = "lower";
  std::size_t n = 1000;
  std::size_t i = 1;
  std::size_t j_max = 0;
  std::size_t step = 0;
  std::string out;
};

inline int cmd_curve(const CurveArgs& a, std::ostream& out) {
  const Tail tail = parse_tail(a.tail);
  std::ostringstream os;
  if (a.kind == "phi") {
    const auto fam = parse_plugin_family(a.model.family.empty() ? (tail == Tail::lower ? "clayton" : "gumbel")
                                                                : a.model.family);
    const auto map = phi_map(*fam, a.n, tail, search_range(a.n, tail));
    os << "theta\tphi\trank\n";
    for (std::size_t k = 0; k < map->thetas().size(); ++k)
      os << format_full(map->thetas()[k]) << '\t' << format_full(map->raw_ranks()[k] / double(a.n)) << '\t'
         << map->raw_ranks()[k] << '\n';
  } else if (a.kind == "rho") {
    ModelArgs m = a.model;
    if (m.family.empty()) m.family = "clayton";
    const auto model = make_model(m);
    const std::size_t j_max = a.j_max ? a.j_max : std::max<std::size_t>(a.i + 1, a.n / 10);
    if (a.i < 1 || j_max >= a.n) throw usage_error("need 1 <= i and j-max < n");
    os << "j\trho\n";
    for (std::size_t j = a.i; j <= j_max; ++j) os << j << '\t' << format_full(corr_rho(model, a.n, a.i, j)) << '\n';
  } else if (a.kind == "mse" || a.kind == "crossing") {
    const auto points = load_sample(a.sample);
    require_selection_size(points.size());
    const auto s = pseudo_sample(points);
    SelectionConfig cfg;
    cfg.family = parse_plugin_family(a.model.family);
    const Family fam = plugin_family(cfg, tail);
    PsiCache cache(s, tail, fam, cfg);
    const std::size_t n = s.size();
    if (a.kind == "mse") {
      const auto r = select_simple_plugin_with(cache, s, tail, fam, cfg);
      os << "rank\tu\tlog_mse\n";
      for (const auto& [i, v] : r.diagnostics.mse_curve)
        os << i << '\t' << format_full(double(i) / double(n)) << '\t' << format_full(std::log(v)) << '\n';
    } else {
      const auto range = search_range(n, tail, cfg);
      const auto map = phi_map(fam, n, tail, range);
      const std::size_t step = a.step ? a.step : std::max<std::size_t>(1, range.size() / 200);
      os << "rank\tu\tpsi\tphi_inverse\n";
      for (std::size_t i = range.lo; i <= range.hi; i += step) {
        const auto p = cache(i);
        os << i << '\t' << format_full(double(i) / double(n)) << '\t' << (p ? format_full(*p) : "NA") << '\t'
           << format_full(map->inverse_clamped(double(i) / double(n))) << '\n';
      }
    }
  } else {
    throw usage_error("unknown curve kind '" + a.kind + "'");
  }
  emit(a.out, os.str(), out);
  return ok;
}

// ---- entry point ------------------------------------------------------------

inline void add_model_flags(CLI::App* app, ModelArgs& m) {
  app->add_option("--theta", m.theta, "Archimedean parameter");
  app->add_option("--rho", m.rho, "correlation parameter (gaussian, student)");
  app->add_option("--nu", m.nu, "degrees of freedom (student)");
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail dependence coefficient estimation with plug-in threshold selection", "tdc"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Monte Carlo study of the estimation methods");
  b->add_option("--generator", bench.model.family, "copula to simulate")
      ->check(CLI::IsMember(generator_names()))
      ->capture_default_str();
  add_model_flags(b, bench.model);
  b->add_option("--n", bench.sizes, "sample sizes")->delimiter(',');
  b->add_option("--reps", bench.reps, "replications per sample size")->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--tail", bench.tail)->check(CLI::IsMember({"lower", "upper"}))->capture_default_str();
  b->add_option("--methods", bench.methods, "method numbers or names, comma separated, or 'all'")->capture_default_str();
  b->add_option("--family", bench.family, "plug-in family")->check(CLI::IsMember({"clayton", "gumbel"}));
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--workers", bench.workers)->check(CLI::PositiveNumber)->capture_default_str();
  b->add_option("--dataset", bench.dataset, "row label");
  b->add_option("--out", bench.out, "output file (default stdout)");
  b->add_option("--format", bench.format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate tail dependence from a CSV file");
  add_sample_flags(e, est.sample);
  e->get_option("--input")->required();
  e->add_option("--tail", est.tail)->check(CLI::IsMember({"lower", "upper", "both"}))->capture_default_str();
  e->add_option("--methods", est.methods)->capture_default_str();
  e->add_option("--family", est.family, "plug-in family")->check(CLI::IsMember({"clayton", "gumbel"}));
  e->add_option("--m", est.m, "interval length of the average estimators (0: plateau length)");
  e->add_flag("--details", est.details, "one row per method with threshold and parameter");
  e->add_option("--out", est.out);

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "Export curve data: mse, phi, rho, crossing");
  c->add_option("--kind", curve.kind)->required()->check(CLI::IsMember({"mse", "phi", "rho", "crossing"}));
  add_sample_flags(c, curve.sample);
  c->add_option("--generator", curve.sample.generator.family, "copula to simulate when --input is absent")
      ->check(CLI::IsMember(generator_names()));
  c->add_option("--gen-theta", curve.sample.generator.theta, "generator Archimedean parameter");
  c->add_option("--gen-rho", curve.sample.generator.rho, "generator correlation");
  c->add_option("--gen-nu", curve.sample.generator.nu, "generator degrees of freedom");
  c->add_option("--seed", curve.sample.seed)->capture_default_str();
  c->add_option("--family", curve.model.family, "model family (phi, rho) or plug-in family (mse, crossing)")
      ->check(CLI::IsMember(generator_names()));
  add_model_flags(c, curve.model);
  c->add_option("--tail", curve.tail)->check(CLI::IsMember({"lower", "upper"}))->capture_default_str();
  c->add_option("--n", curve.n, "sample size")->check(CLI::Range(std::size_t{50}, std::size_t{100000000}))->capture_default_str();
  c->add_option("--i", curve.i, "first rank (rho)")->capture_default_str();
  c->add_option("--j-max", curve.j_max, "last rank (rho; default n/10)");
  c->add_option("--step", curve.step, "rank stride (crossing)");
  c->add_option("--out", curve.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? ok : usage;
  }
  try {
    if (*b) return cmd_bench(bench, out);
    if (*e) return cmd_estimate(est, out);
    curve.sample.n = curve.n;
    if (!curve.sample.generator.theta && curve.model.theta && curve.sample.generator.family != "gaussian" &&
        curve.sample.generator.family != "student")
      curve.sample.generator.theta = curve.model.theta;
    return cmd_curve(curve, out);
  } catch (const usage_error& ex) {
    err << "tdc: " << ex.what() << '\n';
    return usage;
  } catch (const data_error& ex) {
    err << "tdc: " << ex.what() << '\n';
    return usage;
  } catch (const domain_error& ex) {
    err << "tdc: " << ex.what() << '\n';
    return usage;
  } catch (const std::invalid_argument& ex) {
    err << "tdc: " << ex.what() << '\n';
    return usage;
  } catch (const std::exception& ex) {
    err << "tdc: " << ex.what() << '\n';
    return failure;
  }
}

}  // namespace tdc::cli

#endif  // TDC_TOOLS_CLI_HPP

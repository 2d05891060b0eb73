#ifndef TDC_HARNESS_HPP
#define TDC_HARNESS_HPP

// Monte Carlo study of the estimation methods: replicate samples from a known
// copula, run every method on each, and summarize bias, sd and RMSE.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "tdc/copula.hpp"
#include "tdc/empirical.hpp"
#include "tdc/error.hpp"
#include "tdc/random.hpp"
#include "tdc/selection.hpp"

namespace tdc {

struct ExperimentSpec {
  /// Row label in emitted tables; empty means the generator name.
  std::string dataset;
  CopulaModel generator = CopulaModel::gumbel(2.0);
  std::size_t n = 2000;
  std::size_t replications = 100;
  std::vector<Method> methods{Method::fixed1pct, Method::fixed2pct, Method::mle,
                              Method::plateau,   Method::plugin,    Method::twostep};
  Tail tail = Tail::upper;
  SelectionConfig selection;
  std::uint64_t seed = 7;
  std::size_t bootstrap = 1000;
};

struct MethodStats {
  Method method = Method::fixed1pct;
  /// Replications that produced an estimate / that threw.
  std::size_t ok = 0;
  std::size_t failed = 0;
  /// Replications whose selector reported a fallback.
  std::size_t fallback = 0;
  double mean = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  /// Bootstrap standard errors of bias and RMSE.
  double bias_se = 0.0;
  double rmse_se = 0.0;
};

struct ExperimentResult {
  std::string dataset;
  std::string generator;
  std::size_t n = 0;
  Tail tail = Tail::upper;
  double truth = 0.0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::vector<MethodStats> methods;
  /// estimates[r][k]: replication r, method k; NaN when the method failed.
  std::vector<std::vector<double>> estimates;
};

/// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

/// sqrt((1/N) sum (x_j - truth)^2).
inline double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw domain_error("rmse of an empty sample");
  KahanSum s;
  for (double x : estimates) s.add((x - truth) * (x - truth));
  return std::sqrt(s.value() / static_cast<double>(estimates.size()));
}

namespace detail {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
};

inline Moments moments(std::span<const double> x, double truth) {
  Moments m;
  if (x.empty()) return m;
  KahanSum s;
  for (double v : x) s.add(v);
  m.mean = s.value() / static_cast<double>(x.size());
  KahanSum d;
  for (double v : x) d.add((v - m.mean) * (v - m.mean));
  m.sd = x.size() > 1 ? std::sqrt(d.value() / static_cast<double>(x.size() - 1)) : 0.0;
  m.rmse = rmse(x, truth);
  return m;
}

inline double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  KahanSum s;
  for (double v : x) s.add(v);
  const double mean = s.value() / static_cast<double>(x.size());
  KahanSum d;
  for (double v : x) d.add((v - mean) * (v - mean));
  return std::sqrt(d.value() / static_cast<double>(x.size() - 1));
}

}  // namespace detail

/// Summary statistics of one method's estimates, with bootstrap standard
/// errors of bias and RMSE from `bootstrap` resamples drawn from `seed`.
inline MethodStats summarize(Method method, std::span<const double> estimates, double truth, std::size_t bootstrap,
                             std::uint64_t seed) {
  MethodStats st;
  st.method = method;
  std::vector<double> ok;
  for (double x : estimates) {
    if (std::isnan(x))
      ++st.failed;
    else
      ok.push_back(x);
  }
  st.ok = ok.size();
  if (ok.empty()) {
    st.mean = st.bias = st.sd = st.rmse = std::numeric_limits<double>::quiet_NaN();
    return st;
  }
  const auto m = detail::moments(ok, truth);
  st.mean = m.mean;
  st.bias = m.mean - truth;
  st.sd = m.sd;
  st.rmse = m.rmse;
  if (bootstrap > 1 && ok.size() > 1) {
    RandomStream rng(seed);
    std::vector<double> biases(bootstrap), rmses(bootstrap), draw(ok.size());
    for (std::size_t b = 0; b < bootstrap; ++b) {
      for (auto& v : draw) {
        const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ok.size()));
        v = ok[std::min(k, ok.size() - 1)];
      }
      const auto bm = detail::moments(draw, truth);
      biases[b] = bm.mean - truth;
      rmses[b] = bm.rmse;
    }
    st.bias_se = detail::sample_sd(biases);
    st.rmse_se = detail::sample_sd(rmses);
  }
  return st;
}

/// Estimates of every requested method on one replication. A method that
/// throws yields NaN; `fallback` marks selectors that fell back.
inline std::vector<double> run_replication(const ExperimentSpec& spec, std::size_t r, std::vector<char>* fallback = nullptr) {
  RandomStream rng = RandomStream::substream(spec.seed, r);
  const auto points = sample(spec.generator, spec.n, rng);
  const auto s = pseudo_sample(points);
  PsiCache cache(s, spec.tail, plugin_family(spec.selection, spec.tail), spec.selection);
  std::vector<double> out(spec.methods.size(), std::numeric_limits<double>::quiet_NaN());
  if (fallback) fallback->assign(spec.methods.size(), 0);
  for (std::size_t k = 0; k < spec.methods.size(); ++k) {
    try {
      const auto res = estimate_method(s, spec.tail, spec.methods[k], spec.selection, &cache);
      out[k] = res.estimate;
      if (fallback) (*fallback)[k] = res.diagnostics.fallback;
    } catch (const std::exception&) {
    }
  }
  return out;
}

/// Runs the study on `workers` threads. Replication r always draws from
/// substream (seed, r) and statistics are accumulated in replication order, so
/// the result does not depend on the worker count.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t workers = 1) {
  if (spec.replications < 1) throw domain_error("experiment needs at least one replication");
  if (spec.n < 50) throw domain_error("experiment sample size must be at least 50");
  if (spec.methods.empty()) throw domain_error("experiment needs at least one method");

  ExperimentResult res;
  res.dataset = spec.dataset.empty() ? spec.generator.name() : spec.dataset;
  res.generator = spec.generator.name();
  res.n = spec.n;
  res.tail = spec.tail;
  res.truth = tdc(spec.generator, spec.tail);
  res.seed = spec.seed;
  res.replications = spec.replications;
  res.estimates.assign(spec.replications, {});
  std::vector<std::vector<char>> fallbacks(spec.replications);

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t r = next++; r < spec.replications && !failed; r = next++) {
      try {
        res.estimates[r] = run_replication(spec, r, &fallbacks[r]);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, spec.replications);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t k = 0; k < spec.methods.size(); ++k) {
    std::vector<double> column(spec.replications);
    std::size_t fb = 0;
    for (std::size_t r = 0; r < spec.replications; ++r) {
      column[r] = res.estimates[r][k];
      fb += fallbacks[r][k] != 0;
    }
    auto st = summarize(spec.methods[k], column, res.truth, spec.bootstrap, substream_seed(spec.seed ^ 0xb007, k));
    st.fallback = fb;
    res.methods.push_back(st);
  }
  return res;
}

// ---- tables -----------------------------------------------------------------

enum class TableFormat { tsv, json };

inline TableFormat parse_table_format(std::string_view s) {
  if (s == "tsv") return TableFormat::tsv;
  if (s == "json") return TableFormat::json;
  throw std::invalid_argument("unknown table format '" + std::string(s) + "'");
}

namespace detail {

inline std::string fixed2(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline nlohmann::json number(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

inline double number(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

inline Tail parse_tail(const std::string& s) {
  if (s == "lower") return Tail::lower;
  if (s == "upper") return Tail::upper;
  throw data_error("unknown tail '" + s + "'");
}

}  // namespace detail

inline std::string table_tsv(std::span<const ExperimentResult> results) {
  std::ostringstream os;
  os << "dataset\tn\tmethod\tbias\tsd\trmse\tfailed\n";
  for (const auto& r : results)
    for (const auto& m : r.methods)
      os << r.dataset << '\t' << r.n << '\t' << to_string(m.method) << '\t' << detail::fixed2(m.bias) << '\t'
         << detail::fixed2(m.sd) << '\t' << detail::fixed2(m.rmse) << '\t' << m.failed << '\n';
  return os.str();
}

inline nlohmann::json to_json(const ExperimentResult& r) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : r.methods) {
    methods.push_back({{"method", std::string(to_string(m.method))},
                       {"ok", m.ok},
                       {"failed", m.failed},
                       {"fallback", m.fallback},
                       {"mean", detail::number(m.mean)},
                       {"bias", detail::number(m.bias)},
                       {"sd", detail::number(m.sd)},
                       {"rmse", detail::number(m.rmse)},
                       {"bias_se", detail::number(m.bias_se)},
                       {"rmse_se", detail::number(m.rmse_se)}});
  }
  return {{"dataset", r.dataset},
          {"generator", r.generator},
          {"n", r.n},
          {"tail", std::string(to_string(r.tail))},
          {"truth", r.truth},
          {"seed", r.seed},
          {"replications", r.replications},
          {"methods", std::move(methods)}};
}

inline std::string table_json(std::span<const ExperimentResult> results) {
  nlohmann::json doc = {{"experiments", nlohmann::json::array()}};
  for (const auto& r : results) doc["experiments"].push_back(to_json(r));
  return doc.dump(2) + "\n";
}

inline std::string emit_table(std::span<const ExperimentResult> results, TableFormat format) {
  return format == TableFormat::tsv ? table_tsv(results) : table_json(results);
}

/// Parses table_json output. Per-replication estimates are not serialized.
inline std::vector<ExperimentResult> read_table_json(const std::string& text) {
  std::vector<ExperimentResult> out;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& e : doc.at("experiments")) {
      ExperimentResult r;
      r.dataset = e.at("dataset").get<std::string>();
      r.generator = e.at("generator").get<std::string>();
      r.n = e.at("n").get<std::size_t>();
      r.tail = detail::parse_tail(e.at("tail").get<std::string>());
      r.truth = e.at("truth").get<double>();
      r.seed = e.at("seed").get<std::uint64_t>();
      r.replications = e.at("replications").get<std::size_t>();
      for (const auto& m : e.at("methods")) {
        MethodStats st;
        st.method = parse_method(m.at("method").get<std::string>());
        st.ok = m.at("ok").get<std::size_t>();
        st.failed = m.at("failed").get<std::size_t>();
        st.fallback = m.at("fallback").get<std::size_t>();
        st.mean = detail::number(m.at("mean"));
        st.bias = detail::number(m.at("bias"));
        st.sd = detail::number(m.at("sd"));
        st.rmse = detail::number(m.at("rmse"));
        st.bias_se = detail::number(m.at("bias_se"));
        st.rmse_se = detail::number(m.at("rmse_se"));
        r.methods.push_back(st);
      }
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw data_error(std::string("malformed result table: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw data_error(std::string("malformed result table: ") + ex.what());
  }
  return out;
}

}  // namespace tdc

#endif  // TDC_HARNESS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "tdc/harness.hpp"

using namespace tdc;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.generator = CopulaModel::gumbel(1.5);
  spec.n = 300;
  spec.replications = 6;
  spec.methods = {Method::fixed1pct, Method::fixed2pct, Method::mle, Method::plateau, Method::plugin};
  spec.tail = Tail::upper;
  spec.seed = 99;
  spec.bootstrap = 200;
  return spec;
}

}  // namespace

TEST(Rmse, Examples) {
  EXPECT_NEAR(rmse(std::vector<double>{0.5, 0.5}, 0.4), 0.1, 1e-15);
  EXPECT_NEAR(rmse(std::vector<double>{0.3, 0.5}, 0.4), 0.1, 1e-15);
  EXPECT_EQ(rmse(std::vector<double>{0.4, 0.4, 0.4}, 0.4), 0.0);
  EXPECT_THROW(rmse(std::vector<double>{}, 0.0), domain_error);
}

TEST(KahanSum, RecoversLostLowOrderBits) {
  KahanSum k;
  double naive = 0.0;
  k.add(1e16);
  naive += 1e16;
  for (int i = 0; i < 1000; ++i) {
    k.add(1.0);
    naive += 1.0;
  }
  k.add(-1e16);
  naive -= 1e16;
  EXPECT_EQ(k.value(), 1000.0);
  EXPECT_NE(naive, 1000.0);
}

TEST(Summarize, PopulationVarianceIdentity) {
  RandomStream rng(3);
  for (std::size_t n : {1u, 2u, 7u, 100u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = 0.3 + 0.1 * rng.normal();
    const auto st = summarize(Method::plugin, x, 0.35, 100, 1);
    const double N = double(n);
    EXPECT_NEAR(st.rmse * st.rmse, st.bias * st.bias + (N - 1) / N * st.sd * st.sd, 1e-12) << n;
    EXPECT_EQ(st.ok, n);
    EXPECT_EQ(st.failed, 0u);
  }
}

TEST(Summarize, FailuresAreCountedAndExcluded) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto st = summarize(Method::twostep, std::vector<double>{0.5, nan, 0.3, nan}, 0.4, 0, 0);
  EXPECT_EQ(st.ok, 2u);
  EXPECT_EQ(st.failed, 2u);
  EXPECT_NEAR(st.mean, 0.4, 1e-15);
  EXPECT_NEAR(st.rmse, 0.1, 1e-15);
  EXPECT_NEAR(st.sd, std::sqrt(0.02), 1e-15);
  const auto none = summarize(Method::twostep, std::vector<double>{nan}, 0.4, 0, 0);
  EXPECT_TRUE(std::isnan(none.bias));
}

TEST(Summarize, BootstrapStandardErrors) {
  RandomStream rng(4);
  std::vector<double> x(400);
  for (auto& v : x) v = 0.5 + 0.2 * rng.normal();
  const auto st = summarize(Method::plugin, x, 0.5, 1000, 8);
  // SE of the mean is sd/sqrt(N) = 0.01
  EXPECT_NEAR(st.bias_se, st.sd / 20.0, 0.0015);
  EXPECT_GT(st.rmse_se, 0.0);
  const auto again = summarize(Method::plugin, x, 0.5, 1000, 8);
  EXPECT_EQ(st.bias_se, again.bias_se);
}

TEST(RunExperiment, StrongDependenceSanity) {
  ExperimentSpec spec;
  spec.generator = CopulaModel::clayton(50.0);
  spec.n = 500;
  spec.replications = 1;
  spec.methods = {Method::fixed1pct};
  spec.tail = Tail::lower;
  const auto r = run_experiment(spec);
  EXPECT_NEAR(r.truth, std::exp2(-1.0 / 50.0), 1e-15);
  EXPECT_GT(r.methods[0].mean, 0.9);
  EXPECT_NEAR(r.methods[0].bias, r.methods[0].mean - r.truth, 1e-15);
  EXPECT_EQ(r.methods[0].sd, 0.0);
}

TEST(RunExperiment, ReplicationsUseTheirOwnSubstream) {
  const auto spec = small_spec();
  const auto r = run_experiment(spec);
  ASSERT_EQ(r.estimates.size(), spec.replications);
  for (std::size_t k : {0u, 4u}) EXPECT_EQ(run_replication(spec, k), r.estimates[k]);
  EXPECT_NE(r.estimates[0], r.estimates[1]);
  EXPECT_EQ(r.methods.size(), spec.methods.size());
  for (const auto& m : r.methods) {
    EXPECT_EQ(m.ok + m.failed, spec.replications);
    const double N = double(m.ok);
    EXPECT_NEAR(m.rmse * m.rmse, m.bias * m.bias + (N - 1) / N * m.sd * m.sd, 1e-12);
  }
}

TEST(RunExperiment, IndependentOfWorkerCount) {
  const auto spec = small_spec();
  const std::vector<ExperimentResult> one{run_experiment(spec, 1)};
  const std::vector<ExperimentResult> three{run_experiment(spec, 3)};
  const std::vector<ExperimentResult> many{run_experiment(spec, 16)};
  EXPECT_EQ(table_json(one), table_json(three));
  EXPECT_EQ(table_json(one), table_json(many));
}

TEST(RunExperiment, Validation) {
  auto spec = small_spec();
  spec.replications = 0;
  EXPECT_THROW(run_experiment(spec), domain_error);
  spec = small_spec();
  spec.n = 20;
  EXPECT_THROW(run_experiment(spec), domain_error);
}

TEST(Tables, TsvLayout) {
  ExperimentResult r;
  r.dataset = "gumbel";
  r.n = 500;
  MethodStats a;
  a.method = Method::fixed1pct;
  a.bias = -0.2249;
  a.sd = 0.0751;
  a.rmse = 0.2371;
  MethodStats b = a;
  b.method = Method::plugin;
  b.bias = -0.001;
  b.failed = 2;
  r.methods = {a, b};
  const std::vector<ExperimentResult> rs{r};
  EXPECT_EQ(emit_table(rs, TableFormat::tsv),
            "dataset\tn\tmethod\tbias\tsd\trmse\tfailed\n"
            "gumbel\t500\tfixed1pct\t-0.22\t0.08\t0.24\t0\n"
            "gumbel\t500\tplugin\t0.00\t0.08\t0.24\t2\n");
}

TEST(Tables, JsonRoundTrip) {
  auto spec = small_spec();
  spec.replications = 3;
  std::vector<ExperimentResult> rs{run_experiment(spec)};
  spec.n = 400;
  spec.methods = {Method::fixed1pct};
  rs.push_back(run_experiment(spec));
  const auto text = emit_table(rs, TableFormat::json);
  const auto back = read_table_json(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(table_json(back), text);
  EXPECT_EQ(back[0].methods[2].rmse, rs[0].methods[2].rmse);
  EXPECT_EQ(back[1].n, 400u);
  EXPECT_THROW(read_table_json("{\"experiments\": [{}]}"), data_error);
  EXPECT_THROW(read_table_json("not json"), data_error);
  EXPECT_EQ(parse_table_format("json"), TableFormat::json);
  EXPECT_THROW(parse_table_format("xml"), std::invalid_argument);
}

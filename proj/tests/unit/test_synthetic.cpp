#include <cmath>

#include "dgm/gaussian.h"
#include "dgm/synthetic.h"
#include "test_support.h"

namespace {

using dgm::ScenarioKind;
using dgm::SyntheticScenario;
using namespace dgm::testing;

SyntheticScenario scenario(ScenarioKind kind, std::uint64_t seed = 0) {
  SyntheticScenario s;
  s.kind = kind;
  s.seed = seed;
  return s;
}

TEST(Synthetic, Deterministic) {
  auto a = dgm::generate_scenario(scenario(ScenarioKind::true_distribution, 3));
  auto b = dgm::generate_scenario(scenario(ScenarioKind::true_distribution, 3));
  EXPECT_TRUE(dgm::same_contents(a.train, b.train));
  EXPECT_TRUE(dgm::same_contents(a.gen, b.gen));
  auto c = dgm::generate_scenario(scenario(ScenarioKind::true_distribution, 4));
  EXPECT_FALSE(dgm::same_contents(a.train, c.train));
}

TEST(Synthetic, ScenariosShareTrainAndTest) {
  auto t = dgm::generate_scenario(scenario(ScenarioKind::true_distribution, 1));
  for (auto kind : {ScenarioKind::shrinkage, ScenarioKind::memorized, ScenarioKind::underfit}) {
    auto o = dgm::generate_scenario(scenario(kind, 1));
    EXPECT_TRUE(dgm::same_contents(t.train, o.train));
    EXPECT_TRUE(dgm::same_contents(t.test, o.test));
  }
}

TEST(Synthetic, ParameterRanges) {
  auto p = dgm::mixture_params(scenario(ScenarioKind::true_distribution, 2));
  EXPECT_EQ(p.means.rows(), 5);
  EXPECT_EQ(p.means.cols(), 2);
  EXPECT_GE(p.variances.minCoeff(), 0.01);
  EXPECT_LE(p.variances.maxCoeff(), 0.09);
}

TEST(Synthetic, ShrinkageEmitsMeans) {
  auto d = dgm::generate_scenario(scenario(ScenarioKind::shrinkage, 5));
  for (std::size_t i = 0; i < d.gen.rows(); ++i) {
    bool found = false;
    for (Eigen::Index c = 0; c < d.params.means.rows(); ++c) {
      found = found || (d.gen.row(i)[0] == static_cast<float>(d.params.means(c, 0)) &&
                        d.gen.row(i)[1] == static_cast<float>(d.params.means(c, 1)));
    }
    ASSERT_TRUE(found) << i;
  }
}

TEST(Synthetic, MemorizedCopiesTrain) {
  auto d = dgm::generate_scenario(scenario(ScenarioKind::memorized, 6));
  for (std::size_t i = 0; i < d.gen.rows(); i += 37) {
    bool found = false;
    for (std::size_t j = 0; j < d.train.rows() && !found; ++j) {
      found = d.gen.row(i)[0] == d.train.row(j)[0] && d.gen.row(i)[1] == d.train.row(j)[1];
    }
    EXPECT_TRUE(found) << i;
  }
}

TEST(Synthetic, UnderfitWidensSpread) {
  auto s = scenario(ScenarioKind::underfit, 7);
  s.underfit_scale = 3.0;
  s.gen_count = 5000;
  auto d = dgm::generate_scenario(s);
  auto t = dgm::generate_scenario(scenario(ScenarioKind::true_distribution, 7));
  EXPECT_GT(dgm::summarize_gaussian(d.gen).cov.trace(), dgm::summarize_gaussian(t.gen).cov.trace());
  EXPECT_TRUE(dgm::is_standard_underfit_scale(4.5));
  EXPECT_FALSE(dgm::is_standard_underfit_scale(2.0));
}

TEST(Synthetic, NameParsing) {
  for (auto kind : {ScenarioKind::true_distribution, ScenarioKind::shrinkage, ScenarioKind::memorized,
                    ScenarioKind::underfit}) {
    EXPECT_EQ(dgm::parse_scenario_kind(dgm::to_string(kind)), kind);
  }
  EXPECT_FALSE(dgm::parse_scenario_kind("nonsense"));
}

TEST(GaussianCloud, MomentsMatchParameters) {
  auto cloud = dgm::gaussian_cloud(20000, 3, 0.5, 2.0, 1);
  auto s = dgm::summarize_gaussian(cloud);
  EXPECT_LT((s.mean.array() - 0.5).abs().maxCoeff(), 0.05);
  EXPECT_LT((s.cov - 2.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.1);
}

TEST(GaussianCloudSummary, SamplingLawMatchesRowDraws) {
  // across seeds the summary statistics should vary like those of real clouds
  const std::size_t n = 50, d = 3;
  double mean_sq = 0, trace = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    auto s = dgm::gaussian_cloud_summary(n, d, 1.0, 4.0, t);
    EXPECT_EQ(s.count, n);
    EXPECT_EQ(s.cov, s.cov.transpose());
    mean_sq += (s.mean.array() - 1.0).square().sum();
    trace += s.cov.trace();
  }
  // E|mean - mu|^2 = d * scale / n, E tr(cov) = d * scale
  EXPECT_NEAR(mean_sq / trials, d * 4.0 / n, 0.03);
  EXPECT_NEAR(trace / trials, d * 4.0, 0.3);
}

}  // namespace

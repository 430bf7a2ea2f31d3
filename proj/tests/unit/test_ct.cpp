#include <cmath>

#include "dgm/ct_score.h"
#include "dgm/distance.h"
#include "dgm/synthetic.h"
#include "test_support.h"

namespace {

using namespace dgm::testing;

double oracle_z(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a) {
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  }
  const double m = a.size(), n = b.size();
  return (u - m * n / 2) / std::sqrt(m * n * (m + n + 1) / 12);
}

TEST(MannWhitney, MatchesPairCount) {
  auto rng = engine(1);
  std::uniform_int_distribution<int> u(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(7 + trial), b(11);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    EXPECT_NEAR(dgm::mann_whitney_z(a, b), oracle_z(a, b), 1e-12);
  }
}

TEST(MannWhitney, Antisymmetric) {
  std::vector<double> a = {1, 2, 3, 9}, b = {0.5, 2, 4};
  EXPECT_NEAR(dgm::mann_whitney_z(a, b), -dgm::mann_whitney_z(b, a), 1e-14);
}

TEST(KMeans, SeparatesClustersAndIsDeterministic) {
  Eigen::MatrixXd x = normal_matrix(300, 2, 3, 0.1);
  x.block(100, 0, 100, 1).array() += 10.0;
  x.block(200, 1, 100, 1).array() += 10.0;
  auto rows = dgm::as_rows(set_of(x));
  dgm::KMeansOptions opt;
  opt.seed = 4;
  auto a = dgm::kmeans(rows, opt);
  auto b = dgm::kmeans(rows, opt);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_TRUE(a.converged);
  for (int block = 0; block < 3; ++block) {
    for (int i = 1; i < 100; ++i) EXPECT_EQ(a.assignment[block * 100 + i], a.assignment[block * 100]);
  }
  EXPECT_NE(a.assignment[0], a.assignment[100]);
  EXPECT_NE(a.assignment[100], a.assignment[200]);
  EXPECT_EQ(dgm::assign_to_centers(rows, a.centers), a.assignment);
}

TEST(AssignToCenters, TiesGoToLowerIndex) {
  dgm::RowMatrixD centers(2, 1);
  centers << 1, -1;
  dgm::RowMatrixD points(1, 1);
  points << 0;
  EXPECT_EQ(dgm::assign_to_centers(points, centers)[0], 0u);
}

TEST(CtScore, ModifiedIsSwappedScore) {
  auto train = random_set(200, 3, 10);
  auto gen = random_set(150, 3, 11, 0.8);
  auto test = random_set(150, 3, 12);
  dgm::CtConfig cfg;
  cfg.seed = 5;
  EXPECT_EQ(dgm::ct_modified(train, gen, test, cfg).score, dgm::ct_score(gen, train, test, cfg).score);
}

TEST(CtScore, CalibratedUnderTheNull) {
  int within = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    auto train = random_set(200, 2, 1000 + t);
    auto gen = random_set(100, 2, 2000 + t);
    auto test = random_set(100, 2, 3000 + t);
    dgm::CtConfig cfg;
    cfg.seed = t;
    within += std::abs(dgm::ct_score(train, gen, test, cfg).score) < 3.0;
  }
  EXPECT_GE(within, 95);
}

TEST(CtScore, CopiesScoreStronglyNegative) {
  dgm::SyntheticScenario s;
  s.kind = dgm::ScenarioKind::memorized;
  auto data = dgm::generate_scenario(s);
  auto res = dgm::ct_score(data.train, data.gen, data.test);
  EXPECT_LT(res.score, -10.0);
  EXPECT_EQ(res.pca_components, 2u);
  double total = 0;
  for (const auto& c : res.cells) total += c.weight;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(CtScore, NoAdmissibleCells) {
  auto train = random_set(30, 2, 1);
  auto gen = random_set(1, 2, 2);
  EXPECT_DGM_ERROR(dgm::ct_score(train, gen, random_set(30, 2, 3)), dgm::ErrorCode::NoAdmissibleCells);
}

}  // namespace

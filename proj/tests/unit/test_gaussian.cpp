#include <cmath>

#include "dgm/distance.h"
#include "dgm/gaussian.h"
#include "dgm/parallel.h"
#include "dgm/pca.h"
#include "test_support.h"

namespace {

using namespace dgm::testing;

TEST(GaussianSummary, MatchesNaiveOracle) {
  auto set = random_set(3000, 6, 10, 2.0, 5.0);
  auto x = as_double(set);
  Eigen::VectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / (x.rows() - 1.0);
  auto s = dgm::summarize_gaussian(set);
  EXPECT_EQ(s.count, 3000u);
  EXPECT_LT((s.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((s.cov - cov).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_EQ(s.cov, s.cov.transpose());
}

TEST(GaussianSummary, MergeEqualsWhole) {
  auto x = normal_matrix(700, 4, 11, 1.5, -2.0);
  auto whole = dgm::summarize_gaussian(x);
  auto merged = dgm::merge_summaries(dgm::summarize_gaussian(Eigen::MatrixXd(x.topRows(300))),
                                     dgm::summarize_gaussian(Eigen::MatrixXd(x.bottomRows(400))));
  EXPECT_EQ(merged.count, 700u);
  EXPECT_LT((merged.mean - whole.mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((merged.cov - whole.cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GaussianSummary, NeedsTwoRows) {
  EXPECT_THROW(dgm::summarize_gaussian(Eigen::MatrixXd::Ones(1, 3)), dgm::Error);
}

TEST(TraceSqrtProduct, DiagonalClosedForm) {
  Eigen::MatrixXd a = Eigen::Vector3d(4, 9, 1).asDiagonal();
  Eigen::MatrixXd b = Eigen::Vector3d(1, 4, 16).asDiagonal();
  EXPECT_NEAR(dgm::trace_sqrt_product(a, b), 2 + 6 + 4, 1e-12);
}

TEST(TraceSqrtProduct, SingularFirstArgument) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 4;
  Eigen::MatrixXd b = Eigen::Matrix3d::Identity() * 9;
  EXPECT_NEAR(dgm::trace_sqrt_product(a, b), 6.0, 1e-12);
}

TEST(SquaredDistance, SymmetricAndZeroOnSelf) {
  auto x = normal_matrix(2, 33, 12);
  Eigen::VectorXd a = x.row(0), b = x.row(1);
  double ab = dgm::squared_distance(a.data(), b.data(), 33);
  EXPECT_EQ(ab, dgm::squared_distance(b.data(), a.data(), 33));
  EXPECT_EQ(dgm::squared_distance(a.data(), a.data(), 33), 0.0);
  EXPECT_NEAR(ab, (a - b).squaredNorm(), 1e-12);
}

TEST(Knn, MatchesBruteForceWithLowIndexTies) {
  auto set = integer_set(120, 2, 13, -2, 2);
  auto rows = dgm::as_rows(set);
  auto res = dgm::knn(rows, rows, 4, true);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (Eigen::Index j = 0; j < rows.rows(); ++j) {
      if (i == j) continue;
      all.push_back({(rows.row(i) - rows.row(j)).norm(), static_cast<std::size_t>(j)});
    }
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < 4; ++r) {
      EXPECT_EQ(res.index(i, r), all[r].second);
      EXPECT_DOUBLE_EQ(res.distance(i, r), all[r].first);
    }
  }
}

TEST(DistanceMatrixView, ChunksMatchDirectEntries) {
  auto a = random_set(37, 5, 14);
  auto b = random_set(11, 5, 15);
  auto view = dgm::pairwise_distances(a, b, 8);
  auto full = view.materialize();
  std::size_t seen = 0;
  view.for_each_chunk([&](std::size_t first, const dgm::RowMatrixD& block) {
    EXPECT_EQ(first, seen);
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      for (Eigen::Index j = 0; j < block.cols(); ++j) EXPECT_EQ(block(i, j), full(first + i, j));
    }
    seen += block.rows();
  });
  EXPECT_EQ(seen, 37u);
  auto self = dgm::pairwise_distances(a).materialize();
  for (Eigen::Index i = 0; i < self.rows(); ++i) {
    EXPECT_EQ(self(i, i), 0.0);
    for (Eigen::Index j = 0; j < i; ++j) EXPECT_EQ(self(i, j), self(j, i));
  }
}

TEST(ParallelForBlocks, CoversRangeOnceInBlocks) {
  std::vector<int> hits(1000, 0);
  dgm::parallel_for_blocks(1000, 64, [&](std::size_t lo, std::size_t hi) {
    EXPECT_EQ(lo % 64, 0u);
    for (std::size_t i = lo; i < hi; ++i) ++hits[i];
  });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Pca, RecoversDominantAxisWithSignConvention) {
  Eigen::MatrixXd x = normal_matrix(2000, 3, 16);
  x.col(0) *= 0.1;
  x.col(1) *= 5.0;
  x.col(2) *= 1.0;
  auto model = dgm::pca_fit(dgm::as_rows(set_of(x)), 2);
  ASSERT_EQ(model.components(), 2u);
  EXPECT_NEAR(model.directions(1, 0), 1.0, 1e-3);
  EXPECT_NEAR(std::abs(model.directions(2, 1)), 1.0, 1e-3);
  EXPECT_GT(model.directions(2, 1), 0.0);
  EXPECT_GE(model.singular_values(0), model.singular_values(1));
  auto projected = model.project(set_of(x));
  EXPECT_EQ(projected.cols(), 2);
  EXPECT_NEAR(projected.col(0).mean(), 0.0, 1e-6);
}

}  // namespace

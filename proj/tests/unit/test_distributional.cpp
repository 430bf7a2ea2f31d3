#include <cmath>

#include "dgm/distributional.h"
#include "dgm/gaussian.h"
#include "test_support.h"

namespace {

using namespace dgm::testing;

// Tr((A B)^{1/2}) as Tr((A^{1/2} B A^{1/2})^{1/2}) in long double.
long double oracle_trace_sqrt(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  M al = a.cast<long double>(), bl = b.cast<long double>();
  Eigen::SelfAdjointEigenSolver<M> ea(al);
  M half = ea.eigenvectors() * ea.eigenvalues().cwiseMax(0.0L).cwiseSqrt().asDiagonal() *
           ea.eigenvectors().transpose();
  M inner = half * bl * half;
  inner = (inner + inner.transpose()) / 2;
  Eigen::SelfAdjointEigenSolver<M> ei(inner);
  long double t = 0;
  for (Eigen::Index i = 0; i < ei.eigenvalues().size(); ++i) t += std::sqrt(std::max(0.0L, ei.eigenvalues()(i)));
  return t;
}

double oracle_fd(const dgm::GaussianSummary& r, const dgm::GaussianSummary& g) {
  long double mean = (r.mean - g.mean).cast<long double>().squaredNorm();
  return static_cast<double>(mean + r.cov.trace() + g.cov.trace() - 2 * oracle_trace_sqrt(r.cov, g.cov));
}

TEST(FrechetDistance, MatchesLongDoubleOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = dgm::summarize_gaussian(normal_matrix(400, 12, seed, 1.0));
    auto g = dgm::summarize_gaussian(normal_matrix(300, 12, seed + 100, 1.3, 0.2));
    double fd = dgm::frechet_distance(r, g);
    double ref = oracle_fd(r, g);
    EXPECT_NEAR(fd, ref, 1e-8 * std::max(1.0, std::abs(ref)));
  }
}

TEST(FrechetDistance, OneDimensionalClosedForm) {
  dgm::GaussianSummary a{Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Constant(1, 1, 9.0), 10};
  dgm::GaussianSummary b{Eigen::VectorXd::Constant(1, -1.0), Eigen::MatrixXd::Constant(1, 1, 4.0), 10};
  EXPECT_NEAR(dgm::frechet_distance(a, b), 9.0 + 1.0, 1e-10);
}

TEST(FrechetDistance, ZeroOnIdenticalSummaries) {
  auto s = dgm::summarize_gaussian(normal_matrix(200, 8, 3));
  double fd = dgm::frechet_distance(s, s);
  EXPECT_GE(fd, 0.0);
  EXPECT_LT(fd, 1e-9);
}

TEST(FrechetDistance, SymmetricWithinRoundoff) {
  auto a = dgm::summarize_gaussian(normal_matrix(100, 5, 4));
  auto b = dgm::summarize_gaussian(normal_matrix(100, 5, 5, 2.0));
  EXPECT_NEAR(dgm::frechet_distance(a, b), dgm::frechet_distance(b, a), 1e-10);
}

TEST(FrechetDistance, RankDeficientCovariances) {
  // fewer rows than dimensions: singular covariances on both sides
  auto a = dgm::summarize_gaussian(normal_matrix(6, 20, 6));
  auto b = dgm::summarize_gaussian(normal_matrix(6, 20, 7));
  double fd = dgm::frechet_distance(a, b);
  EXPECT_TRUE(std::isfinite(fd));
  EXPECT_NEAR(fd, oracle_fd(a, b), 1e-6 * std::max(1.0, fd));
}

TEST(FdInfinity, ExactLineIsRecovered) {
  std::vector<std::size_t> sizes;
  std::vector<double> values;
  for (std::size_t n = 1000; n <= 15000; n += 1000) {
    sizes.push_back(n);
    values.push_back(3.0 + 500.0 / static_cast<double>(n));
  }
  auto fit = dgm::fit_fd_trend(sizes, values);
  EXPECT_NEAR(fit.intercept, 3.0, 1e-9);
  EXPECT_NEAR(fit.slope, 500.0, 1e-6);
  EXPECT_NEAR(fit.fd_infinity(), 3.0, 1e-9);
  EXPECT_FALSE(fit.degenerate);
}

TEST(FdInfinity, ConstantValuesAreDegenerate) {
  auto fit = dgm::fit_fd_trend({100, 200, 300}, {2.0, 2.0, 2.0});
  EXPECT_TRUE(fit.degenerate);
  EXPECT_EQ(fit.slope, 0.0);
  EXPECT_EQ(fit.fd_infinity(), 2.0);
}

TEST(FdInfinity, GridShapes) {
  auto big = dgm::fd_infinity_grid(60000);
  ASSERT_EQ(big.size(), dgm::kFdInfinityPoints);
  EXPECT_EQ(big.front(), 5000u);
  EXPECT_EQ(big.back(), 50000u);
  auto small = dgm::fd_infinity_grid(2000);
  ASSERT_EQ(small.size(), dgm::kFdInfinityPoints);
  EXPECT_EQ(small.front(), 200u);
  EXPECT_EQ(small.back(), 2000u);
  for (std::size_t i = 1; i < small.size(); ++i) EXPECT_GT(small[i], small[i - 1]);
}

TEST(FdInfinity, CallbackSeedsAreDeterministic) {
  std::vector<std::uint64_t> seen_a, seen_b;
  auto run = [](std::vector<std::uint64_t>& seen) {
    return dgm::fd_infinity({100, 200, 400}, 77, [&](std::size_t n, std::uint64_t s) {
      seen.push_back(s);
      return 1.0 + 10.0 / static_cast<double>(n);
    });
  };
  auto fa = run(seen_a);
  auto fb = run(seen_b);
  EXPECT_EQ(seen_a, seen_b);
  EXPECT_NEAR(fa.fd_infinity(), 1.0, 1e-12);
}

TEST(FdInfinity, OnEmbeddingSets) {
  auto real = random_set(1500, 4, 8);
  auto gen = random_set(1500, 4, 9, 1.0, 0.5);
  auto fit = dgm::fd_infinity(real, gen, 3);
  EXPECT_EQ(fit.sizes.size(), dgm::kFdInfinityPoints);
  EXPECT_NEAR(fit.fd_infinity(), 4 * 0.25, 0.15);
  auto again = dgm::fd_infinity(real, gen, 3);
  EXPECT_EQ(fit.fd_values, again.fd_values);
}

TEST(Asw, ClosedFormOnMoments) {
  dgm::MomentSummary r{Eigen::Vector2d(0, 0), 8.0, 10};
  dgm::MomentSummary g{Eigen::Vector2d(2, 0), 2.0, 10};
  // (sqrt(2/2) - sqrt(8/2))^2 + 4/2
  EXPECT_NEAR(dgm::asw(r, g), 1.0 + 2.0, 1e-14);
}

TEST(Asw, SetAndSummaryRoutesAgree) {
  auto a = random_set(500, 7, 20, 1.0, 1.0);
  auto b = random_set(600, 7, 21, 2.0);
  double direct = dgm::asw(a, b);
  double via_summary = dgm::asw(dgm::summarize_gaussian(a), dgm::summarize_gaussian(b));
  EXPECT_NEAR(direct, via_summary, 1e-12);
  auto m = dgm::summarize_moments(a);
  auto x = as_double(a);
  Eigen::VectorXd mu = x.colwise().mean();
  double m2 = (x.rowwise() - mu.transpose()).squaredNorm() / x.rows() + mu.squaredNorm();
  EXPECT_NEAR(m.second_moment, m2, 1e-10);
  EXPECT_EQ(dgm::asw(a, a), 0.0);
}

}  // namespace

#include <cmath>

#include "dgm/memorization.h"
#include "test_support.h"

namespace {

using dgm::ErrorCode;
using dgm::MemorizationConfig;
using namespace dgm::testing;

MemorizationConfig cfg(std::size_t k, double tau = 0.5, bool intra = false) {
  MemorizationConfig c;
  c.k = k;
  c.tau = tau;
  c.intra_class = intra;
  return c;
}

TEST(CalibratedL2, HandWorkedExample) {
  auto m = dgm::calibrated_l2(column({0.1}), column({0.0, 1.0, 2.0}), cfg(1));
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].train_index, 0u);
  EXPECT_NEAR(m[0].l, 0.1, 1e-7);
  EXPECT_TRUE(m[0].memorized);
  // k = 2: neighbours of 0 are 1 and 2, mean distance 1.5
  auto m2 = dgm::calibrated_l2(column({0.1}), column({0.0, 1.0, 2.0}), cfg(2));
  EXPECT_NEAR(m2[0].l, 0.1 / 1.5, 1e-7);
}

TEST(CalibratedL2, ScaleInvariant) {
  auto train = integer_set(60, 3, 1, -5, 5);
  auto gen = integer_set(20, 3, 2, -5, 5);
  auto base = dgm::calibrated_l2(gen, train, cfg(4));
  for (double s : {3.0, 0.5, 0.25}) {
    auto scaled = dgm::calibrated_l2(set_of(as_double(gen) * s), set_of(as_double(train) * s), cfg(4));
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(scaled[i].train_index, base[i].train_index);
      EXPECT_NEAR(scaled[i].l, base[i].l, 1e-12);
    }
  }
}

TEST(CalibratedL2, ExactCopyGivesZero) {
  auto train = random_set(30, 4, 3);
  auto m = dgm::calibrated_l2(train.select(std::vector<std::size_t>{5, 7}), train, cfg(3));
  EXPECT_EQ(m[0].train_index, 5u);
  EXPECT_EQ(m[0].l, 0.0);
  EXPECT_EQ(m[1].train_index, 7u);
  EXPECT_DOUBLE_EQ(dgm::memorization_ratio(m), 1.0);
}

TEST(CalibratedL2, DefaultsAndErrors) {
  MemorizationConfig c;
  EXPECT_EQ(c.resolved_k(), 50u);
  c.intra_class = true;
  EXPECT_EQ(c.resolved_k(), 3u);
  c.tau = 0.0;
  EXPECT_DGM_ERROR(c.validate(), ErrorCode::InvalidArgument);

  EXPECT_DGM_ERROR(dgm::calibrated_l2(column({0.0}), column({0.0, 1.0}), cfg(2)), ErrorCode::TooFewTrainRows);
  EXPECT_DGM_ERROR(dgm::calibrated_l2(column({0.5}), column({0.0, 0.0, 0.0}), cfg(1)),
                   ErrorCode::DegenerateNeighborhood);
  EXPECT_DGM_ERROR(dgm::calibrated_l2(column({0.5}), column({0.0, 1.0, 2.0}), cfg(1, 0.5, true)),
                   ErrorCode::MissingLabels);
}

TEST(CalibratedL2, IntraClassSearchesOwnLabel) {
  auto train = dgm::EmbeddingSet::from_rows({{0}, {1}, {10}, {12}}, std::vector<std::int32_t>{0, 0, 1, 1});
  auto gen = dgm::EmbeddingSet::from_rows({{0.9}}, std::vector<std::int32_t>{1});
  auto m = dgm::calibrated_l2(gen, train, cfg(1, 0.5, true));
  EXPECT_EQ(m[0].train_index, 2u);
  EXPECT_NEAR(m[0].l, 9.1 / 2.0, 1e-6);
  auto missing = dgm::EmbeddingSet::from_rows({{0.9}}, std::vector<std::int32_t>{4});
  EXPECT_DGM_ERROR(dgm::calibrated_l2(missing, train, cfg(1, 0.5, true)), ErrorCode::TooFewTrainRows);
}

TEST(MemorizationRatio, ThresholdIsStrict) {
  std::vector<dgm::MemorizationMatch> m = {{0, 0, 0.1, true}, {1, 0, 0.3, false}, {2, 0, 0.2, false}};
  EXPECT_DOUBLE_EQ(dgm::memorization_ratio(m), 1.0 / 3);
  EXPECT_DOUBLE_EQ(dgm::memorization_ratio(m, 0.2), 1.0 / 3);
  EXPECT_DOUBLE_EQ(dgm::memorization_ratio(m, 0.25), 2.0 / 3);
  EXPECT_DGM_ERROR(dgm::memorization_ratio({}), ErrorCode::EmptyInput);
}

TEST(AuthPct, HandWorkedExamples) {
  auto train = column({0.0, 1.0, 5.0});
  // 0.2 and 4 sit inside their neighbour's gap; 3 and -2 do not; -1 ties exactly and is authentic
  EXPECT_DOUBLE_EQ(dgm::auth_pct(column({0.2, 4.0}), train), 0.0);
  EXPECT_DOUBLE_EQ(dgm::auth_pct(column({3.0, -2.0}), train), 100.0);
  EXPECT_DOUBLE_EQ(dgm::auth_pct(column({0.2, 4.0, 3.0, -2.0}), train), 50.0);
  EXPECT_DOUBLE_EQ(dgm::auth_pct(column({-1.0}), train), 100.0);
  EXPECT_DGM_ERROR(dgm::auth_pct(column({1.0}), column({0.0})), ErrorCode::TooFewTrainRows);
}

TEST(AuthPct, CopiesAreNeverAuthentic) {
  auto train = random_set(50, 3, 8);
  EXPECT_DOUBLE_EQ(dgm::auth_pct(train, train), 0.0);
}

}  // namespace

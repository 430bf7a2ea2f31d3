#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "dgm/distance.h"
#include "dgm/embedding_set.h"

namespace dgm {

/// Exact k-NN balls around every reference point. Immutable after build.
///
/// radius(j) is the distance from reference j to its k-th nearest other
/// reference point. Membership is closed: a point at exactly the radius is inside.
struct NeighborhoodIndex {
  std::shared_ptr<const RowMatrixD> points;
  std::size_t k = 0;
  std::vector<double> radii;
  KnnResult neighbors;  // k nearest other points of each reference row

  std::size_t size() const { return radii.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(points->cols()); }
};

NeighborhoodIndex build_index(const EmbeddingSet& reference, std::size_t k);
NeighborhoodIndex build_index(std::shared_ptr<const RowMatrixD> reference, std::size_t k);

struct PrdcResult {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
  std::size_t k = 0;
  std::size_t real_count = 0;
  std::size_t gen_count = 0;
};

inline constexpr std::size_t kPrdcDefaultK = 5;
inline constexpr std::size_t kPrdcDefaultCap = 10'000;

/// Sets above sample_cap rows are subsampled (seeded, without replacement) first.
PrdcResult prdc(const EmbeddingSet& gen, const EmbeddingSet& real, std::size_t k = kPrdcDefaultK,
                std::size_t sample_cap = kPrdcDefaultCap, std::uint64_t seed = 0);

struct PrecisionDensity {
  double precision = 0.0;
  double density = 0.0;
};

/// Fraction of gen rows inside some real ball, and mean ball count / k.
PrecisionDensity precision_density(const RowMatrixD& gen, const NeighborhoodIndex& real);
/// Fraction of real rows inside some gen ball.
double recall(const RowMatrixD& real, const NeighborhoodIndex& gen);
/// Fraction of real balls that contain at least one gen row.
double coverage(const NeighborhoodIndex& real, const RowMatrixD& gen);

struct RarityResult {
  /// Per query: smallest radius among the balls containing it; empty when off-manifold.
  std::vector<std::optional<double>> values;
  double on_manifold_fraction = 0.0;

  std::size_t on_manifold_count() const;
};

RarityResult rarity(const EmbeddingSet& queries, const NeighborhoodIndex& index);
RarityResult rarity(const RowMatrixD& queries, const NeighborhoodIndex& index);

}  // namespace dgm

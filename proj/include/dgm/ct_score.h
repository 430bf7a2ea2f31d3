#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dgm/distance.h"
#include "dgm/embedding_set.h"

namespace dgm {

struct KMeansOptions {
  std::size_t clusters = 3;
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // relative to the mean per-coordinate variance
  std::uint64_t seed = 0;
};

struct KMeansResult {
  RowMatrixD centers;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  bool converged = false;
};

/// k-means++ seeding followed by Lloyd iterations. Ties go to the lower center index.
KMeansResult kmeans(const RowMatrixD& points, const KMeansOptions& options);
std::vector<std::size_t> assign_to_centers(const RowMatrixD& points, const RowMatrixD& centers);

/// Mann-Whitney U of `first` against `second` (pairs with first > second, ties
/// counting one half, via midranks) standardized as
/// z = (U - mn/2) / sqrt(mn(m + n + 1) / 12).
double mann_whitney_z(std::span<const double> first, std::span<const double> second);

enum class CellWeighting { test_fraction, gen_fraction };
std::string_view to_string(CellWeighting weighting);

struct CtConfig {
  std::size_t cells = 3;
  std::size_t pca_components = 64;  // clipped to min(d, n_train)
  std::size_t min_cell_count = 2;   // per cell, for both gen and test
  std::uint64_t seed = 0;
  CellWeighting weighting = CellWeighting::test_fraction;
};

struct CtCell {
  std::size_t train_count = 0;
  std::size_t gen_count = 0;
  std::size_t test_count = 0;
  bool admissible = false;
  double z = 0.0;
  double weight = 0.0;  // renormalized over admissible cells
};

struct CtResult {
  double score = 0.0;
  std::size_t pca_components = 0;
  std::vector<CtCell> cells;
};

/// Cell-weighted Mann-Whitney z of gen-to-train against test-to-train
/// nearest-neighbour distances (to training rows of the same cell), after PCA
/// and k-means fitted on train.
CtResult ct_score(const EmbeddingSet& train, const EmbeddingSet& gen, const EmbeddingSet& test,
                  const CtConfig& cfg = {});

/// The same test with the training and generated sets exchanged.
CtResult ct_modified(const EmbeddingSet& train, const EmbeddingSet& gen, const EmbeddingSet& test,
                     const CtConfig& cfg = {});

}  // namespace dgm

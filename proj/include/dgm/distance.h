#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dgm/embedding_set.h"

namespace dgm {

using RowMatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultChunkRows = 1024;

RowMatrixD as_rows(const EmbeddingSet& set);

/// Squared Euclidean distance by direct differences, accumulated in a fixed order.
/// Bitwise symmetric in its arguments and exactly zero for identical rows.
double squared_distance(const double* x, const double* y, std::size_t dim) noexcept;

/// Lazily evaluated query x reference Euclidean distance matrix.
///
/// Rows are produced in chunks of `chunk_rows`; within a chunk rows are
/// computed in parallel, and chunks are delivered in order. Every entry is
/// computed from its two rows alone, so a pair of equal rows yields the same
/// distance wherever it appears.
class DistanceMatrixView {
 public:
  DistanceMatrixView(std::shared_ptr<const RowMatrixD> query, std::shared_ptr<const RowMatrixD> reference,
                     std::size_t chunk_rows = kDefaultChunkRows);

  std::size_t rows() const { return static_cast<std::size_t>(query_->rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(reference_->rows()); }
  std::size_t chunk_rows() const { return chunk_rows_; }
  bool is_self() const { return query_ == reference_; }

  double at(std::size_t i, std::size_t j) const;

  /// fn(first_row, block) with block of shape (rows in chunk) x cols().
  void for_each_chunk(const std::function<void(std::size_t, const RowMatrixD&)>& fn) const;

  RowMatrixD materialize() const;

 private:
  std::shared_ptr<const RowMatrixD> query_;
  std::shared_ptr<const RowMatrixD> reference_;
  std::size_t chunk_rows_;
};

DistanceMatrixView pairwise_distances(const EmbeddingSet& query, const EmbeddingSet& reference,
                                      std::size_t chunk_rows = kDefaultChunkRows);
/// Self-distance view: entries (i, j) and (j, i) are identical and the diagonal is zero.
DistanceMatrixView pairwise_distances(const EmbeddingSet& set, std::size_t chunk_rows = kDefaultChunkRows);

/// Exact k nearest neighbours of every query row, nearest first.
/// Ties at equal distance go to the lower reference index.
struct KnnResult {
  std::size_t k = 0;
  std::vector<std::size_t> indices;  // rows x k, row-major
  std::vector<double> distances;     // rows x k, row-major

  std::size_t rows() const { return k == 0 ? 0 : indices.size() / k; }
  std::size_t index(std::size_t row, std::size_t rank) const { return indices[row * k + rank]; }
  double distance(std::size_t row, std::size_t rank) const { return distances[row * k + rank]; }
};

/// With exclude_self, query row i never matches reference row i (query must be the reference).
KnnResult knn(const RowMatrixD& query, const RowMatrixD& reference, std::size_t k, bool exclude_self);

}  // namespace dgm

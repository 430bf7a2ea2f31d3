#include "dgm/distance.h"

#include <algorithm>
#include <cmath>

#include "dgm/error.h"
#include "dgm/parallel.h"

namespace dgm {

RowMatrixD as_rows(const EmbeddingSet& set) { return set.matrix().cast<double>(); }

double squared_distance(const double* x, const double* y, std::size_t dim) noexcept {
  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;
  std::size_t k = 0;
  for (; k + 4 <= dim; k += 4) {
    const double d0 = x[k] - y[k];
    const double d1 = x[k + 1] - y[k + 1];
    const double d2 = x[k + 2] - y[k + 2];
    const double d3 = x[k + 3] - y[k + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; k < dim; ++k) {
    const double dk = x[k] - y[k];
    s0 += dk * dk;
  }
  return (s0 + s1) + (s2 + s3);
}

DistanceMatrixView::DistanceMatrixView(std::shared_ptr<const RowMatrixD> query,
                                       std::shared_ptr<const RowMatrixD> reference, std::size_t chunk_rows)
    : query_(std::move(query)), reference_(std::move(reference)), chunk_rows_(std::max<std::size_t>(chunk_rows, 1)) {
  require(query_->cols() == reference_->cols(), ErrorCode::DimensionMismatch,
          "pairwise distances need equal dimensions (" + std::to_string(query_->cols()) + " vs " +
              std::to_string(reference_->cols()) + ")");
}

double DistanceMatrixView::at(std::size_t i, std::size_t j) const {
  const auto d = static_cast<std::size_t>(query_->cols());
  return std::sqrt(squared_distance(query_->row(static_cast<Eigen::Index>(i)).data(),
                                    reference_->row(static_cast<Eigen::Index>(j)).data(), d));
}

void DistanceMatrixView::for_each_chunk(const std::function<void(std::size_t, const RowMatrixD&)>& fn) const {
  const std::size_t n = rows();
  const std::size_t m = cols();
  const auto d = static_cast<std::size_t>(query_->cols());
  RowMatrixD block;
  for (std::size_t start = 0; start < n; start += chunk_rows_) {
    const std::size_t len = std::min(chunk_rows_, n - start);
    block.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(m));
    parallel_for_blocks(len, 16, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t r = lo; r < hi; ++r) {
        const double* q = query_->row(static_cast<Eigen::Index>(start + r)).data();
        double* out = block.row(static_cast<Eigen::Index>(r)).data();
        for (std::size_t j = 0; j < m; ++j) {
          out[j] = std::sqrt(squared_distance(q, reference_->row(static_cast<Eigen::Index>(j)).data(), d));
        }
      }
    });
    fn(start, block);
  }
}

RowMatrixD DistanceMatrixView::materialize() const {
  RowMatrixD full(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for_each_chunk([&](std::size_t start, const RowMatrixD& block) {
    full.middleRows(static_cast<Eigen::Index>(start), block.rows()) = block;
  });
  return full;
}

DistanceMatrixView pairwise_distances(const EmbeddingSet& query, const EmbeddingSet& reference,
                                      std::size_t chunk_rows) {
  require_same_dim(query, reference, "pairwise_distances");
  return {std::make_shared<const RowMatrixD>(as_rows(query)), std::make_shared<const RowMatrixD>(as_rows(reference)),
          chunk_rows};
}

DistanceMatrixView pairwise_distances(const EmbeddingSet& set, std::size_t chunk_rows) {
  auto rows = std::make_shared<const RowMatrixD>(as_rows(set));
  return {rows, rows, chunk_rows};
}

KnnResult knn(const RowMatrixD& query, const RowMatrixD& reference, std::size_t k, bool exclude_self) {
  require(query.cols() == reference.cols(), ErrorCode::DimensionMismatch, "knn needs equal dimensions");
  const auto n = static_cast<std::size_t>(query.rows());
  const auto m = static_cast<std::size_t>(reference.rows());
  const auto d = static_cast<std::size_t>(query.cols());
  if (exclude_self) {
    require(n == m, ErrorCode::InvalidArgument, "exclude_self needs the query to be the reference");
  }
  const std::size_t available = exclude_self ? m - 1 : m;
  require(k >= 1 && k <= available, ErrorCode::KTooLarge,
          "k = " + std::to_string(k) + " but only " + std::to_string(available) + " candidate neighbours");

  KnnResult result;
  result.k = k;
  result.indices.resize(n * k);
  result.distances.resize(n * k);
  parallel_for_blocks(n, 64, [&](std::size_t lo, std::size_t hi) {
    using Entry = std::pair<double, std::size_t>;  // (squared distance, index): lexicographic order breaks ties
    std::vector<Entry> heap;
    heap.reserve(k + 1);
    for (std::size_t i = lo; i < hi; ++i) {
      heap.clear();
      const double* q = query.row(static_cast<Eigen::Index>(i)).data();
      for (std::size_t j = 0; j < m; ++j) {
        if (exclude_self && j == i) continue;
        const Entry e{squared_distance(q, reference.row(static_cast<Eigen::Index>(j)).data(), d), j};
        if (heap.size() < k) {
          heap.push_back(e);
          std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = e;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      std::sort_heap(heap.begin(), heap.end());
      for (std::size_t r = 0; r < k; ++r) {
        result.indices[i * k + r] = heap[r].second;
        result.distances[i * k + r] = std::sqrt(heap[r].first);
      }
    }
  });
  return result;
}

}  // namespace dgm

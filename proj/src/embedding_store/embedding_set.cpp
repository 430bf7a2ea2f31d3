#include "dgm/embedding_set.h"

#include <cmath>
#include <cstring>

#include "dgm/error.h"

namespace dgm {

std::string_view to_string(SetRole role) {
  switch (role) {
    case SetRole::real_train:
      return "real_train";
    case SetRole::real_test:
      return "real_test";
    case SetRole::generated:
      return "generated";
  }
  return "unknown";
}

EmbeddingSet::EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<float> values,
                           std::optional<std::vector<std::int32_t>> labels, EmbeddingMeta meta)
    : rows_(rows), dim_(dim), meta_(std::move(meta)) {
  require(rows >= 1, ErrorCode::EmptySet, "embedding set needs at least one row");
  require(dim >= 1, ErrorCode::EmptySet, "embedding set needs at least one column");
  require(values.size() == rows * dim, ErrorCode::InvalidArgument,
          "expected " + std::to_string(rows * dim) + " values, got " + std::to_string(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::NonFiniteValue,
           "value at row " + std::to_string(i / dim) + ", column " + std::to_string(i % dim) + " is not finite");
    }
  }
  if (labels) {
    require(labels->size() == rows, ErrorCode::InvalidLabel,
            "label count " + std::to_string(labels->size()) + " does not match row count " + std::to_string(rows));
    for (std::size_t i = 0; i < rows; ++i) {
      require((*labels)[i] >= 0, ErrorCode::InvalidLabel, "label of row " + std::to_string(i) + " is negative");
    }
    labels_ = std::make_shared<const std::vector<std::int32_t>>(std::move(*labels));
  }
  values_ = std::make_shared<const std::vector<float>>(std::move(values));
}

EmbeddingSet EmbeddingSet::from_rows(const std::vector<std::vector<double>>& rows,
                                     std::optional<std::vector<std::int32_t>> labels) {
  require(!rows.empty(), ErrorCode::EmptySet, "embedding set needs at least one row");
  const std::size_t dim = rows.front().size();
  std::vector<float> values;
  values.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    require(r.size() == dim, ErrorCode::DimensionMismatch, "ragged rows");
    for (double v : r) values.push_back(static_cast<float>(v));
  }
  return EmbeddingSet(rows.size(), dim, std::move(values), std::move(labels));
}

EmbeddingSet EmbeddingSet::from_matrix(const Eigen::MatrixXd& matrix,
                                       std::optional<std::vector<std::int32_t>> labels) {
  const auto n = static_cast<std::size_t>(matrix.rows());
  const auto d = static_cast<std::size_t>(matrix.cols());
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      values[i * d + j] = static_cast<float>(matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  return EmbeddingSet(n, d, std::move(values), std::move(labels));
}

std::span<const std::int32_t> EmbeddingSet::labels() const noexcept {
  if (!labels_) return {};
  return {labels_->data(), labels_->size()};
}

Eigen::Map<const RowMatrixF> EmbeddingSet::matrix() const noexcept {
  return {values_->data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(dim_)};
}

Eigen::MatrixXd EmbeddingSet::to_double() const { return matrix().cast<double>(); }

EmbeddingSet EmbeddingSet::select(std::span<const std::size_t> indices) const {
  std::vector<float> values(indices.size() * dim_);
  std::optional<std::vector<std::int32_t>> labels;
  if (labels_) labels.emplace(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    require(i < rows_, ErrorCode::InvalidArgument, "row index " + std::to_string(i) + " out of range");
    std::memcpy(values.data() + k * dim_, values_->data() + i * dim_, dim_ * sizeof(float));
    if (labels) (*labels)[k] = (*labels_)[i];
  }
  return EmbeddingSet(indices.size(), dim_, std::move(values), std::move(labels), meta_);
}

EmbeddingSet EmbeddingSet::with_meta(EmbeddingMeta meta) const {
  EmbeddingSet copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

EmbeddingSet EmbeddingSet::without_labels() const {
  EmbeddingSet copy = *this;
  copy.labels_.reset();
  return copy;
}

bool same_contents(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.rows() != b.rows() || a.dim() != b.dim() || a.has_labels() != b.has_labels()) return false;
  const auto va = a.values();
  const auto vb = b.values();
  if (std::memcmp(va.data(), vb.data(), va.size_bytes()) != 0) return false;
  if (a.has_labels()) {
    const auto la = a.labels();
    const auto lb = b.labels();
    if (std::memcmp(la.data(), lb.data(), la.size_bytes()) != 0) return false;
  }
  return true;
}

void require_same_dim(const EmbeddingSet& a, const EmbeddingSet& b, std::string_view context) {
  require(a.dim() == b.dim(), ErrorCode::DimensionMismatch,
          std::string(context) + ": dimensions differ (" + std::to_string(a.dim()) + " vs " +
              std::to_string(b.dim()) + ")");
}

}  // namespace dgm

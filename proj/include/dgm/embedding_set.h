#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dgm {

enum class SetRole { real_train, real_test, generated };

std::string_view to_string(SetRole role);

struct EmbeddingMeta {
  std::string encoder_id;
  std::string source_id;

  bool empty() const { return encoder_id.empty() && source_id.empty(); }
};

using RowMatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An immutable n x d block of float32 feature vectors with optional class labels.
///
/// Construction validates every invariant (n, d >= 1, all values finite,
/// labels sized n and non-negative), so any EmbeddingSet that exists is valid.
/// Copies share the underlying storage.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t rows, std::size_t dim, std::vector<float> values,
               std::optional<std::vector<std::int32_t>> labels = std::nullopt, EmbeddingMeta meta = {});

  static EmbeddingSet from_rows(const std::vector<std::vector<double>>& rows,
                                std::optional<std::vector<std::int32_t>> labels = std::nullopt);
  static EmbeddingSet from_matrix(const Eigen::MatrixXd& matrix,
                                  std::optional<std::vector<std::int32_t>> labels = std::nullopt);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<const float> values() const noexcept { return {values_->data(), values_->size()}; }
  std::span<const float> row(std::size_t i) const noexcept { return {values_->data() + i * dim_, dim_}; }

  bool has_labels() const noexcept { return labels_ != nullptr; }
  /// Empty span when the set carries no labels.
  std::span<const std::int32_t> labels() const noexcept;

  const EmbeddingMeta& meta() const noexcept { return meta_; }

  Eigen::Map<const RowMatrixF> matrix() const noexcept;
  /// Copy widened to double, one point per row.
  Eigen::MatrixXd to_double() const;

  /// Rows at the given indices, in the given order; labels follow their rows.
  EmbeddingSet select(std::span<const std::size_t> indices) const;
  EmbeddingSet with_meta(EmbeddingMeta meta) const;
  EmbeddingSet without_labels() const;

 private:
  std::size_t rows_;
  std::size_t dim_;
  std::shared_ptr<const std::vector<float>> values_;
  std::shared_ptr<const std::vector<std::int32_t>> labels_;
  EmbeddingMeta meta_;
};

/// Bitwise equality of data and labels (metadata ignored).
bool same_contents(const EmbeddingSet& a, const EmbeddingSet& b);

void require_same_dim(const EmbeddingSet& a, const EmbeddingSet& b, std::string_view context);

}  // namespace dgm

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dgm/distance.h"
#include "dgm/embedding_set.h"

namespace dgm {

/// Principal directions of a centered fit matrix.
///
/// Columns of `directions` are the top right singular vectors, ordered by
/// descending singular value, each signed so that its largest-magnitude
/// coordinate is positive (first such coordinate on ties).
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd directions;  // d x components
  Eigen::VectorXd singular_values;

  std::size_t components() const { return static_cast<std::size_t>(directions.cols()); }
  RowMatrixD project(const RowMatrixD& points) const;
  RowMatrixD project(const EmbeddingSet& set) const;
};

PcaModel pca_fit(const RowMatrixD& fit_on, std::size_t components);
PcaModel pca_fit(const EmbeddingSet& fit_on, std::size_t components);

/// Fits on `fit_on` and projects each set; outputs are stored as float32 embeddings.
std::vector<EmbeddingSet> pca_fit_project(const EmbeddingSet& fit_on, const std::vector<EmbeddingSet>& project,
                                          std::size_t components);

}  // namespace dgm

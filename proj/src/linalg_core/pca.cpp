#include "dgm/pca.h"

#include <algorithm>
#include <cmath>

#include "dgm/error.h"

namespace dgm {

RowMatrixD PcaModel::project(const RowMatrixD& points) const {
  require(points.cols() == mean.size(), ErrorCode::DimensionMismatch, "PCA projection dimension mismatch");
  RowMatrixD centered = points;
  centered.rowwise() -= mean.transpose();
  return centered * directions;
}

RowMatrixD PcaModel::project(const EmbeddingSet& set) const { return project(as_rows(set)); }

PcaModel pca_fit(const RowMatrixD& fit_on, std::size_t components) {
  const auto n = static_cast<std::size_t>(fit_on.rows());
  const auto d = static_cast<std::size_t>(fit_on.cols());
  require(components >= 1 && components <= std::min(n, d), ErrorCode::TooManyComponents,
          std::to_string(components) + " components requested, limit is min(n, d) = " +
              std::to_string(std::min(n, d)));

  PcaModel model;
  model.mean = fit_on.colwise().mean().transpose();
  RowMatrixD centered = fit_on;
  centered.rowwise() -= model.mean.transpose();

  // Right singular vectors of X are the eigenvectors of X^T X.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  gram.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  require(solver.info() == Eigen::Success, ErrorCode::EigenFailure, "PCA eigensolver did not converge");

  const auto c = static_cast<Eigen::Index>(components);
  model.directions.resize(static_cast<Eigen::Index>(d), c);
  model.singular_values.resize(c);
  for (Eigen::Index k = 0; k < c; ++k) {
    // Eigen sorts ascending.
    const Eigen::Index src = static_cast<Eigen::Index>(d) - 1 - k;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index argmax = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v[i]) > std::abs(v[argmax])) argmax = i;
    }
    if (v[argmax] < 0.0) v = -v;
    model.directions.col(k) = v;
    model.singular_values[k] = std::sqrt(std::max(solver.eigenvalues()[src], 0.0));
  }
  return model;
}

PcaModel pca_fit(const EmbeddingSet& fit_on, std::size_t components) { return pca_fit(as_rows(fit_on), components); }

std::vector<EmbeddingSet> pca_fit_project(const EmbeddingSet& fit_on, const std::vector<EmbeddingSet>& project,
                                          std::size_t components) {
  const PcaModel model = pca_fit(fit_on, components);
  std::vector<EmbeddingSet> out;
  out.reserve(project.size());
  for (const auto& set : project) {
    const RowMatrixD projected = model.project(set);
    std::vector<float> values(static_cast<std::size_t>(projected.size()));
    for (Eigen::Index i = 0; i < projected.size(); ++i) values[static_cast<std::size_t>(i)] = static_cast<float>(projected.data()[i]);
    std::optional<std::vector<std::int32_t>> labels;
    if (set.has_labels()) labels.emplace(set.labels().begin(), set.labels().end());
    out.emplace_back(set.rows(), components, std::move(values), std::move(labels), set.meta());
  }
  return out;
}

}  // namespace dgm

#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "dgm/embedding_set.h"

namespace dgm {

/// Sample mean and unbiased (n - 1) covariance of a set of embeddings.
struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t count = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
};

/// Two-pass, chunked, 64-bit accumulation. Requires n >= 2.
GaussianSummary summarize_gaussian(const EmbeddingSet& set);
GaussianSummary summarize_gaussian(const Eigen::MatrixXd& points);

/// Summary of the union of two disjoint samples, from their summaries alone.
GaussianSummary merge_summaries(const GaussianSummary& a, const GaussianSummary& b);

/// Throws InvalidArgument unless the summary is square, sized consistently and symmetric to 1e-8 (relative).
void validate_summary(const GaussianSummary& s);

/// Tr((a b)^{1/2}) for symmetric PSD a, b, as the sum of square roots of the eigenvalues of a b.
///
/// Eigenvalues below -d * eps are rejected (SignificantNegativeEigenvalue) and
/// those in [-d * eps, 0] are clamped to zero, with
/// eps = 1e-8 * max|diag(a)| * max|diag(b)|.
/// When a admits a Cholesky factor L the spectrum is taken from the symmetric
/// similarity transform L^T b L; otherwise from the general product a b.
double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace dgm

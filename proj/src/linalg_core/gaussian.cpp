#include "dgm/gaussian.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "dgm/error.h"

namespace dgm {

namespace {

constexpr Eigen::Index kChunkRows = 4096;

template <typename RowSource>
GaussianSummary summarize_rows(const RowSource& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  require(n >= 2, ErrorCode::TooFewSamples, "a Gaussian summary needs at least 2 rows, got " + std::to_string(n));

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  for (Eigen::Index start = 0; start < n; start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, n - start);
    sum += x.middleRows(start, len).template cast<double>().colwise().sum().transpose();
  }
  GaussianSummary s;
  s.count = static_cast<std::size_t>(n);
  s.mean = sum / static_cast<double>(n);

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd centered;
  for (Eigen::Index start = 0; start < n; start += kChunkRows) {
    const Eigen::Index len = std::min(kChunkRows, n - start);
    centered = x.middleRows(start, len).template cast<double>();
    centered.rowwise() -= s.mean.transpose();
    scatter.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  }
  scatter.triangularView<Eigen::StrictlyUpper>() = scatter.transpose();
  s.cov = scatter / static_cast<double>(n - 1);
  return s;
}

}  // namespace

GaussianSummary summarize_gaussian(const EmbeddingSet& set) { return summarize_rows(set.matrix()); }

GaussianSummary summarize_gaussian(const Eigen::MatrixXd& points) { return summarize_rows(points); }

GaussianSummary merge_summaries(const GaussianSummary& a, const GaussianSummary& b) {
  require(a.dim() == b.dim(), ErrorCode::DimensionMismatch, "cannot merge summaries of different dimension");
  require(a.count >= 2 && b.count >= 2, ErrorCode::TooFewSamples, "merge needs summaries of at least 2 rows");
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double n = na + nb;
  GaussianSummary out;
  out.count = a.count + b.count;
  out.mean = (na * a.mean + nb * b.mean) / n;
  const Eigen::VectorXd delta = a.mean - b.mean;
  Eigen::MatrixXd scatter = (na - 1.0) * a.cov + (nb - 1.0) * b.cov;
  scatter.noalias() += (na * nb / n) * delta * delta.transpose();
  out.cov = scatter / (n - 1.0);
  return out;
}

void validate_summary(const GaussianSummary& s) {
  const Eigen::Index d = s.mean.size();
  require(d >= 1 && s.cov.rows() == d && s.cov.cols() == d, ErrorCode::InvalidArgument,
          "covariance must be d x d with d = mean length");
  const double scale = std::max(1e-300, s.cov.cwiseAbs().maxCoeff());
  require((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * scale, ErrorCode::InvalidArgument,
          "covariance is not symmetric");
}

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index d = a.rows();
  require(a.cols() == d && b.rows() == d && b.cols() == d, ErrorCode::DimensionMismatch,
          "trace_sqrt_product needs two d x d matrices");
  const double scale = a.diagonal().cwiseAbs().maxCoeff() * b.diagonal().cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return 0.0;
  const double tolerance = static_cast<double>(d) * 1e-8 * scale;

  Eigen::VectorXd eigenvalues;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) {
    const Eigen::MatrixXd right = b * llt.matrixL();
    Eigen::MatrixXd similar = llt.matrixU() * right;
    similar = 0.5 * (similar + similar.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(similar, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "symmetric eigensolver did not converge");
    eigenvalues = solver.eigenvalues();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a * b, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigensolver did not converge");
    eigenvalues = solver.eigenvalues().real();
  }

  double total = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lambda = eigenvalues[i];
    if (!std::isfinite(lambda)) fail(ErrorCode::EigenFailure, "non-finite eigenvalue");
    if (lambda < -tolerance) {
      fail(ErrorCode::SignificantNegativeEigenvalue,
           "eigenvalue " + std::to_string(lambda) + " below -" + std::to_string(tolerance));
    }
    total += std::sqrt(std::max(lambda, 0.0));
  }
  return total;
}

}  // namespace dgm

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "dgm/distance.h"
#include "dgm/embedding_set.h"

namespace dgm {

inline constexpr double kMinKdeVariance = 1e-8;

struct KdeFitOptions {
  std::size_t iterations = 50;
  double step = 0.5;
  std::size_t max_halvings = 5;
};

/// Uniform mixture of isotropic Gaussians centered at the generated rows.
struct MogKde {
  RowMatrixD centers;
  Eigen::VectorXd log_variances;
  std::vector<double> objective_trace;  // mean train log-likelihood: initial value, then one per iteration
  std::size_t iterations = 0;

  std::size_t size() const { return static_cast<std::size_t>(centers.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(centers.cols()); }
  double final_train_log_likelihood() const { return objective_trace.back(); }
};

/// Log-variances start at log(max(|c - NN_train(c)|^2 / d, 1e-8)) and are
/// raised by projected ascent on the mean train log-likelihood. Each center
/// moves along its responsibility-normalized gradient (clipped to +-4 in log
/// space); a step that lowers the objective is halved, and abandoned after
/// max_halvings, which ends the fit.
MogKde fit_mog_kde(const EmbeddingSet& gen, const EmbeddingSet& train, const KdeFitOptions& options = {});

/// Mean per-point mixture log-likelihood.
double mean_log_likelihood(const MogKde& kde, const RowMatrixD& points);

/// Per center: log of the mean component likelihood over the points.
Eigen::VectorXd component_log_mean_likelihood(const MogKde& kde, const RowMatrixD& points);

struct FlsAffine {
  double a = 1.0;
  double b = 0.0;
};

struct FlsResult {
  double fls = 0.0;
  double pog = 0.0;  // percent of centers favouring train over test
  double mean_test_log_likelihood = 0.0;
};

FlsResult fls_metrics(const MogKde& kde, const EmbeddingSet& train, const EmbeddingSet& test,
                      const FlsAffine& affine = {});

}  // namespace dgm

#include "dgm/fls.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dgm/error.h"
#include "dgm/parallel.h"

namespace dgm {

namespace {

constexpr std::size_t kRowBlock = 64;
constexpr double kDirectionClip = 4.0;
const double kLogFloor = std::log(kMinKdeVariance);

struct Evaluation {
  double objective = 0.0;
  Eigen::VectorXd direction;
};

// Log density of every component at one point, given squared distances.
void component_log_densities(const double* sq, const Eigen::VectorXd& log_var, double dim, double* out) {
  const double base = -0.5 * dim * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index c = 0; c < log_var.size(); ++c) {
    out[c] = base - 0.5 * dim * log_var[c] - 0.5 * sq[c] * std::exp(-log_var[c]);
  }
}

double log_sum_exp(const double* v, Eigen::Index n) {
  const double peak = *std::max_element(v, v + n);
  if (!std::isfinite(peak)) return peak;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::exp(v[i] - peak);
  return peak + std::log(s);
}

// Squared distances from each point to each center, in row blocks; served
// from a cache when small enough.
class SquaredDistances {
 public:
  SquaredDistances(const RowMatrixD& points, const RowMatrixD& centers) : points_(points), centers_(centers) {
    const double cells = static_cast<double>(points.rows()) * static_cast<double>(centers.rows());
    if (cells <= 2.5e7) {
      cache_.resize(points.rows(), centers.rows());
      parallel_for_blocks(rows(), kRowBlock, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) compute(i, cache_.row(static_cast<Eigen::Index>(i)).data());
      });
      cached_ = true;
    }
  }

  std::size_t rows() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(centers_.rows()); }

  // Pointer to row i; `scratch` must hold cols() doubles when uncached.
  const double* row(std::size_t i, double* scratch) const {
    if (cached_) return cache_.row(static_cast<Eigen::Index>(i)).data();
    compute(i, scratch);
    return scratch;
  }

 private:
  void compute(std::size_t i, double* out) const {
    const auto d = static_cast<std::size_t>(points_.cols());
    const double* p = points_.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t c = 0; c < cols(); ++c) {
      out[c] = squared_distance(p, centers_.row(static_cast<Eigen::Index>(c)).data(), d);
    }
  }

  const RowMatrixD& points_;
  const RowMatrixD& centers_;
  RowMatrixD cache_;
  bool cached_ = false;
};

Evaluation evaluate(const SquaredDistances& dist, const Eigen::VectorXd& log_var, double dim, bool with_direction) {
  const std::size_t n = dist.rows();
  const std::size_t m = dist.cols();
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  std::vector<double> block_objective(blocks, 0.0);
  std::vector<Eigen::VectorXd> block_grad(blocks);
  std::vector<Eigen::VectorXd> block_mass(blocks);
  const double log_m = std::log(static_cast<double>(m));
  auto run_block = [&](std::size_t lo, std::size_t hi) {
    const std::size_t b = lo / kRowBlock;
    std::vector<double> scratch(m);
    std::vector<double> logp(m);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    double total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double* sq = dist.row(i, scratch.data());
      component_log_densities(sq, log_var, dim, logp.data());
      const double lse = log_sum_exp(logp.data(), static_cast<Eigen::Index>(m));
      total += lse - log_m;
      if (!with_direction) continue;
      for (std::size_t c = 0; c < m; ++c) {
        const double r = std::exp(logp[c] - lse);
        if (r == 0.0) continue;
        mass[static_cast<Eigen::Index>(c)] += r;
        grad[static_cast<Eigen::Index>(c)] += r * (-0.5 * dim + 0.5 * sq[c] * std::exp(-log_var[static_cast<Eigen::Index>(c)]));
      }
    }
    block_objective[b] = total;
    if (with_direction) {
      block_grad[b] = std::move(grad);
      block_mass[b] = std::move(mass);
    }
  };
  parallel_for_blocks(n, kRowBlock, run_block);

  Evaluation out;
  for (double v : block_objective) out.objective += v;
  out.objective /= static_cast<double>(n);
  if (!with_direction) return out;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t b = 0; b < blocks; ++b) {
    grad += block_grad[b];
    mass += block_mass[b];
  }
  out.direction = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(m); ++c) {
    if (mass[c] > 0.0) out.direction[c] = std::clamp(grad[c] / (mass[c] * dim), -kDirectionClip, kDirectionClip);
  }
  return out;
}

}  // namespace

MogKde fit_mog_kde(const EmbeddingSet& gen, const EmbeddingSet& train, const KdeFitOptions& options) {
  require_same_dim(gen, train, "fit_mog_kde");
  require(options.step > 0.0, ErrorCode::InvalidArgument, "KDE step size must be positive");
  MogKde kde;
  kde.centers = as_rows(gen);
  const RowMatrixD t = as_rows(train);
  const auto dim = static_cast<double>(gen.dim());

  const KnnResult nearest = knn(kde.centers, t, 1, false);
  kde.log_variances.resize(kde.centers.rows());
  for (std::size_t c = 0; c < kde.size(); ++c) {
    const double d = nearest.distance(c, 0);
    kde.log_variances[static_cast<Eigen::Index>(c)] = std::log(std::max(d * d / dim, kMinKdeVariance));
  }

  const SquaredDistances dist(t, kde.centers);
  Evaluation current = evaluate(dist, kde.log_variances, dim, true);
  kde.objective_trace.push_back(current.objective);
  for (std::size_t iter = 0; iter < options.iterations; ++iter) {
    double step = options.step;
    bool accepted = false;
    for (std::size_t attempt = 0; attempt <= options.max_halvings; ++attempt, step *= 0.5) {
      Eigen::VectorXd trial = kde.log_variances + step * current.direction;
      trial = trial.cwiseMax(kLogFloor);
      const double value = evaluate(dist, trial, dim, false).objective;
      if (value >= current.objective) {
        kde.log_variances = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    current = evaluate(dist, kde.log_variances, dim, true);
    kde.objective_trace.push_back(current.objective);
    kde.iterations = iter + 1;
  }
  return kde;
}

double mean_log_likelihood(const MogKde& kde, const RowMatrixD& points) {
  require(static_cast<std::size_t>(points.cols()) == kde.dim(), ErrorCode::DimensionMismatch,
          "points do not match the KDE dimension");
  const SquaredDistances dist(points, kde.centers);
  return evaluate(dist, kde.log_variances, static_cast<double>(kde.dim()), false).objective;
}

Eigen::VectorXd component_log_mean_likelihood(const MogKde& kde, const RowMatrixD& points) {
  require(static_cast<std::size_t>(points.cols()) == kde.dim(), ErrorCode::DimensionMismatch,
          "points do not match the KDE dimension");
  const auto n = static_cast<std::size_t>(points.rows());
  const std::size_t m = kde.size();
  const auto d = static_cast<std::size_t>(points.cols());
  const double dim = static_cast<double>(d);
  Eigen::VectorXd out(static_cast<Eigen::Index>(m));
  parallel_for_blocks(m, 16, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> sq(n);
    std::vector<double> logp(n);
    for (std::size_t c = lo; c < hi; ++c) {
      const double* center = kde.centers.row(static_cast<Eigen::Index>(c)).data();
      for (std::size_t i = 0; i < n; ++i) sq[i] = squared_distance(points.row(static_cast<Eigen::Index>(i)).data(), center, d);
      const double lv = kde.log_variances[static_cast<Eigen::Index>(c)];
      const double base = -0.5 * dim * std::log(2.0 * std::numbers::pi) - 0.5 * dim * lv;
      const double inv = std::exp(-lv);
      for (std::size_t i = 0; i < n; ++i) logp[i] = base - 0.5 * sq[i] * inv;
      out[static_cast<Eigen::Index>(c)] = log_sum_exp(logp.data(), static_cast<Eigen::Index>(n)) - std::log(static_cast<double>(n));
    }
  });
  return out;
}

FlsResult fls_metrics(const MogKde& kde, const EmbeddingSet& train, const EmbeddingSet& test, const FlsAffine& affine) {
  require(train.dim() == kde.dim() && test.dim() == kde.dim(), ErrorCode::DimensionMismatch,
          "train and test must match the KDE dimension");
  const RowMatrixD tr = as_rows(train);
  const RowMatrixD te = as_rows(test);
  FlsResult out;
  out.mean_test_log_likelihood = mean_log_likelihood(kde, te);
  out.fls = affine.a * (out.mean_test_log_likelihood / static_cast<double>(kde.dim())) + affine.b;
  const Eigen::VectorXd on_train = component_log_mean_likelihood(kde, tr);
  const Eigen::VectorXd on_test = component_log_mean_likelihood(kde, te);
  std::size_t overfit = 0;
  for (Eigen::Index c = 0; c < on_train.size(); ++c) overfit += on_train[c] > on_test[c] ? 1 : 0;
  out.pog = 100.0 * static_cast<double>(overfit) / static_cast<double>(kde.size());
  return out;
}

}  // namespace dgm

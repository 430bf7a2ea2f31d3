#include "dgm/distributional.h"

#include <algorithm>
#include <cmath>

#include "dgm/error.h"
#include "dgm/random.h"
#include "dgm/sampling.h"

namespace dgm {

namespace {

constexpr double kFallbackJitter = 1e-6;
constexpr std::size_t kLargeGridMin = 5'000;
constexpr std::size_t kLargeGridMax = 50'000;
constexpr std::size_t kDeskGridFloor = 100;

double frechet_terms(const GaussianSummary& real, const GaussianSummary& gen, const Eigen::MatrixXd& cov_r,
                     const Eigen::MatrixXd& cov_g) {
  const double mean_term = (real.mean - gen.mean).squaredNorm();
  const double traces = cov_r.trace() + cov_g.trace();
  double fd = mean_term + traces - 2.0 * trace_sqrt_product(cov_r, cov_g);
  const double tolerance = 1e-8 * (1.0 + traces + mean_term);
  if (fd < 0.0 && fd >= -tolerance) fd = 0.0;
  return fd;
}

}  // namespace

double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen) {
  validate_summary(real);
  validate_summary(gen);
  require(real.dim() == gen.dim(), ErrorCode::DimensionMismatch,
          "FD needs equal dimensions (" + std::to_string(real.dim()) + " vs " + std::to_string(gen.dim()) + ")");
  try {
    return frechet_terms(real, gen, real.cov, gen.cov);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SignificantNegativeEigenvalue) throw;
  }
  const auto d = static_cast<Eigen::Index>(real.dim());
  const Eigen::MatrixXd jitter = kFallbackJitter * Eigen::MatrixXd::Identity(d, d);
  return frechet_terms(real, gen, real.cov + jitter, gen.cov + jitter);
}

std::string_view to_string(TrendAxis axis) { return axis == TrendAxis::inverse_n ? "inverse_n" : "n"; }

double FdInfinityFit::fd_infinity() const {
  if (axis == TrendAxis::inverse_n || sizes.empty()) return intercept;
  return intercept + slope * static_cast<double>(sizes.back());
}

std::vector<std::size_t> fd_infinity_grid(std::size_t available) {
  std::size_t lo = kLargeGridMin;
  std::size_t hi = kLargeGridMax;
  if (available < kLargeGridMax) {
    lo = std::max(kDeskGridFloor, available / 10);
    hi = available;
    require(hi >= lo + (kFdInfinityPoints - 1), ErrorCode::TooFewSamples,
            "FD-infinity needs at least " + std::to_string(kDeskGridFloor + kFdInfinityPoints - 1) +
                " rows per set, got " + std::to_string(available));
  }
  std::vector<std::size_t> grid(kFdInfinityPoints);
  const double step = static_cast<double>(hi - lo) / static_cast<double>(kFdInfinityPoints - 1);
  for (std::size_t i = 0; i < kFdInfinityPoints; ++i) {
    grid[i] = lo + static_cast<std::size_t>(std::floor(step * static_cast<double>(i) + 1e-9));
  }
  grid.back() = hi;
  return grid;
}

FdInfinityFit fit_fd_trend(const std::vector<std::size_t>& sizes, const std::vector<double>& fd_values,
                           TrendAxis axis) {
  require(sizes.size() == fd_values.size(), ErrorCode::LengthMismatch, "sizes and FD values differ in length");
  require(sizes.size() >= 2, ErrorCode::TooFewSamples, "a trend needs at least two points");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    require(sizes[i] > sizes[i - 1], ErrorCode::InvalidArgument, "grid sizes must be strictly increasing");
  }
  FdInfinityFit fit;
  fit.sizes = sizes;
  fit.fd_values = fd_values;
  fit.axis = axis;

  const auto [lo_it, hi_it] = std::minmax_element(fd_values.begin(), fd_values.end());
  if (*hi_it - *lo_it <= 1e-12) {
    fit.degenerate = true;
    fit.slope = 0.0;
    fit.intercept = fd_values.front();
    return fit;
  }

  const auto count = static_cast<double>(sizes.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  std::vector<double> xs(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto n = static_cast<double>(sizes[i]);
    xs[i] = axis == TrendAxis::inverse_n ? 1.0 / n : n;
    mean_x += xs[i];
    mean_y += fd_values[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (fd_values[i] - mean_y);
  }
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  return fit;
}

FdInfinityFit fd_infinity(const std::vector<std::size_t>& grid, std::uint64_t seed, const FdAtSize& fd_at,
                          std::size_t repeats, TrendAxis axis) {
  require(repeats >= 1, ErrorCode::InvalidArgument, "repeats must be positive");
  const CounterRng root(seed);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CounterRng point = root.substream(static_cast<std::uint64_t>(i));
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) total += fd_at(grid[i], point.substream(r).next_u64());
    values[i] = total / static_cast<double>(repeats);
  }
  return fit_fd_trend(grid, values, axis);
}

FdInfinityFit fd_infinity(const EmbeddingSet& real, const EmbeddingSet& gen, std::uint64_t seed,
                          const FdInfinityOptions& options) {
  require_same_dim(real, gen, "fd_infinity");
  const std::vector<std::size_t> grid =
      options.grid.empty() ? fd_infinity_grid(std::min(real.rows(), gen.rows())) : options.grid;
  require(grid.back() <= std::min(real.rows(), gen.rows()), ErrorCode::TooFewSamples,
          "grid exceeds the available rows");
  const FdAtSize fd_at = [&](std::size_t size, std::uint64_t point_seed) {
    const CounterRng streams(point_seed);
    const auto real_sub = subsample(real, size, streams.substream("real").next_u64());
    const auto gen_sub = subsample(gen, size, streams.substream("gen").next_u64());
    return frechet_distance(summarize_gaussian(real_sub), summarize_gaussian(gen_sub));
  };
  return fd_infinity(grid, seed, fd_at, options.repeats, options.axis);
}

MomentSummary summarize_moments(const EmbeddingSet& set) {
  const auto x = set.matrix();
  const Eigen::Index n = x.rows();
  MomentSummary out;
  out.count = static_cast<std::size_t>(n);
  out.mean = x.cast<double>().colwise().sum().transpose() / static_cast<double>(n);
  double spread = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) spread += (x.row(i).cast<double>().transpose() - out.mean).squaredNorm();
  out.second_moment = spread / static_cast<double>(n) + out.mean.squaredNorm();
  return out;
}

MomentSummary summarize_moments(const GaussianSummary& summary) {
  require(summary.count >= 1, ErrorCode::TooFewSamples, "summary has no samples");
  MomentSummary out;
  out.count = summary.count;
  out.mean = summary.mean;
  const double n = static_cast<double>(summary.count);
  out.second_moment = summary.cov.trace() * (n - 1.0) / n + summary.mean.squaredNorm();
  return out;
}

double asw(const MomentSummary& real, const MomentSummary& gen) {
  require(real.mean.size() == gen.mean.size(), ErrorCode::DimensionMismatch, "ASW needs equal dimensions");
  require(real.count >= 2 && gen.count >= 2, ErrorCode::TooFewSamples, "ASW needs at least 2 rows per set");
  const auto d = static_cast<double>(real.mean.size());
  const double spread = std::sqrt(gen.second_moment / d) - std::sqrt(real.second_moment / d);
  return spread * spread + (gen.mean - real.mean).squaredNorm() / d;
}

double asw(const EmbeddingSet& real, const EmbeddingSet& gen) {
  require_same_dim(real, gen, "asw");
  return asw(summarize_moments(real), summarize_moments(gen));
}

double asw(const GaussianSummary& real, const GaussianSummary& gen) {
  return asw(summarize_moments(real), summarize_moments(gen));
}

}  // namespace dgm

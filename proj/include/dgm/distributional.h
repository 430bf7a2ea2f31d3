#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "dgm/embedding_set.h"
#include "dgm/gaussian.h"

namespace dgm {

/// Squared Wasserstein-2 distance between the Gaussians of two summaries:
/// |mu_r - mu_g|^2 + Tr(S_r) + Tr(S_g) - 2 Tr((S_r S_g)^{1/2}).
///
/// If the spectrum check rejects the inputs, both covariances get 1e-6 I added
/// and the computation is retried once.
double frechet_distance(const GaussianSummary& real, const GaussianSummary& gen);

enum class TrendAxis { inverse_n, n };
std::string_view to_string(TrendAxis axis);

/// FD evaluated on a grid of sample sizes plus the least-squares line through it.
struct FdInfinityFit {
  std::vector<std::size_t> sizes;
  std::vector<double> fd_values;
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;  // every FD value identical to 1e-12; slope forced to 0
  TrendAxis axis = TrendAxis::inverse_n;

  /// Extrapolated FD at N = infinity (the intercept against 1/N). Against N no
  /// extrapolation exists, so the trend at the largest grid size is reported.
  double fd_infinity() const;
};

struct FdInfinityOptions {
  std::vector<std::size_t> grid;  // empty: fd_infinity_grid(min(n_real, n_gen))
  std::size_t repeats = 1;        // independent subsamples averaged per grid point
  TrendAxis axis = TrendAxis::inverse_n;
};

inline constexpr std::size_t kFdInfinityPoints = 15;

/// 15 regular sizes from 5,000 to 50,000 when 50,000 rows are available;
/// otherwise 15 regular sizes over [max(100, n / 10), n].
std::vector<std::size_t> fd_infinity_grid(std::size_t available);

FdInfinityFit fit_fd_trend(const std::vector<std::size_t>& sizes, const std::vector<double>& fd_values,
                           TrendAxis axis = TrendAxis::inverse_n);

/// fd_at(N, seed) evaluates FD on one subsample of size N; seeds are derived
/// per grid point (and per repeat) from the master seed.
using FdAtSize = std::function<double(std::size_t, std::uint64_t)>;
FdInfinityFit fd_infinity(const std::vector<std::size_t>& grid, std::uint64_t seed, const FdAtSize& fd_at,
                          std::size_t repeats = 1, TrendAxis axis = TrendAxis::inverse_n);

FdInfinityFit fd_infinity(const EmbeddingSet& real, const EmbeddingSet& gen, std::uint64_t seed,
                          const FdInfinityOptions& options = {});

/// Mean and raw second moment M2 = (1/n) sum |x - mu|^2 + |mu|^2.
struct MomentSummary {
  Eigen::VectorXd mean;
  double second_moment = 0.0;
  std::size_t count = 0;
};

MomentSummary summarize_moments(const EmbeddingSet& set);
MomentSummary summarize_moments(const GaussianSummary& summary);

/// Closed-form approximate sliced Wasserstein distance:
/// (sqrt(M2_g / d) - sqrt(M2_r / d))^2 + |mu_g - mu_r|^2 / d.
double asw(const MomentSummary& real, const MomentSummary& gen);
double asw(const EmbeddingSet& real, const EmbeddingSet& gen);
double asw(const GaussianSummary& real, const GaussianSummary& gen);

}  // namespace dgm

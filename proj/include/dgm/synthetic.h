#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dgm/embedding_set.h"
#include "dgm/gaussian.h"

namespace dgm {

enum class ScenarioKind { true_distribution, shrinkage, memorized, underfit };

std::string_view to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view name);

/// Standard-deviation multipliers of the stock underfit scenarios.
inline constexpr double kUnderfitScales[] = {1.5, 3.0, 4.5};
bool is_standard_underfit_scale(double scale);

/// Uniform mixture of diagonal 2-D Gaussians: means ~ N(0, I), variances ~ U[0.01, 0.09].
struct SyntheticScenario {
  ScenarioKind kind = ScenarioKind::true_distribution;
  double underfit_scale = 1.5;  // used by the underfit kind only
  std::uint64_t seed = 0;
  std::size_t train_count = 1000;
  std::size_t test_count = 1000;
  std::size_t gen_count = 1000;
  std::size_t components = 5;
  std::size_t dim = 2;

  void validate() const;
};

struct MixtureParams {
  Eigen::MatrixXd means;      // components x dim
  Eigen::MatrixXd variances;  // components x dim
};

struct ScenarioData {
  EmbeddingSet train;
  EmbeddingSet test;
  EmbeddingSet gen;
  MixtureParams params;
};

/// Streams: "params", "train", "test" and "gen" children of the scenario seed.
///   true_distribution  fresh mixture draws
///   shrinkage          component means, chosen uniformly
///   memorized          training rows resampled with replacement
///   underfit           mixture draws with every component deviation multiplied by the scale
ScenarioData generate_scenario(const SyntheticScenario& scenario);
MixtureParams mixture_params(const SyntheticScenario& scenario);

/// n i.i.d. rows of N(mean_offset * 1, cov_scale * I).
EmbeddingSet gaussian_cloud(std::size_t n, std::size_t d, double mean_offset, double cov_scale, std::uint64_t seed);

/// Sample mean and covariance of such a cloud, drawn directly from their joint
/// sampling law (normal mean, Bartlett-factored Wishart scatter), without the rows.
GaussianSummary gaussian_cloud_summary(std::size_t n, std::size_t d, double mean_offset, double cov_scale,
                                       std::uint64_t seed);

}  // namespace dgm

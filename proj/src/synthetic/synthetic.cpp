#include "dgm/synthetic.h"

#include <cmath>
#include <vector>

#include "dgm/error.h"
#include "dgm/parallel.h"
#include "dgm/random.h"

namespace dgm {

namespace {

constexpr std::size_t kCloudBlockRows = 1024;

std::vector<float> draw_mixture(const MixtureParams& params, std::size_t n, double sd_scale, CounterRng rng) {
  const auto components = static_cast<std::uint64_t>(params.means.rows());
  const auto d = static_cast<std::size_t>(params.means.cols());
  std::vector<float> values(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(rng.below(components));
    for (std::size_t j = 0; j < d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double sd = sd_scale * std::sqrt(params.variances(c, jj));
      values[i * d + j] = static_cast<float>(params.means(c, jj) + sd * rng.normal());
    }
  }
  return values;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::true_distribution:
      return "true_distribution";
    case ScenarioKind::shrinkage:
      return "shrinkage";
    case ScenarioKind::memorized:
      return "memorized";
    case ScenarioKind::underfit:
      return "underfit";
  }
  return "unknown";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view name) {
  for (auto kind : {ScenarioKind::true_distribution, ScenarioKind::shrinkage, ScenarioKind::memorized,
                    ScenarioKind::underfit}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

bool is_standard_underfit_scale(double scale) {
  for (double s : kUnderfitScales) {
    if (scale == s) return true;
  }
  return false;
}

void SyntheticScenario::validate() const {
  require(train_count >= 1 && test_count >= 1 && gen_count >= 1, ErrorCode::InvalidArgument,
          "scenario counts must be positive");
  require(components >= 1 && dim >= 1, ErrorCode::InvalidArgument, "scenario needs components and dimensions");
  require(kind != ScenarioKind::underfit || (std::isfinite(underfit_scale) && underfit_scale > 0.0),
          ErrorCode::InvalidArgument, "underfit scale must be positive");
}

MixtureParams mixture_params(const SyntheticScenario& scenario) {
  CounterRng rng = CounterRng(scenario.seed).substream("params");
  const auto k = static_cast<Eigen::Index>(scenario.components);
  const auto d = static_cast<Eigen::Index>(scenario.dim);
  MixtureParams p;
  p.means.resize(k, d);
  p.variances.resize(k, d);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) p.means(c, j) = rng.normal();
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) p.variances(c, j) = rng.uniform(0.01, 0.09);
  }
  return p;
}

ScenarioData generate_scenario(const SyntheticScenario& scenario) {
  scenario.validate();
  const CounterRng root(scenario.seed);
  MixtureParams params = mixture_params(scenario);
  const std::size_t d = scenario.dim;

  EmbeddingSet train(scenario.train_count, d, draw_mixture(params, scenario.train_count, 1.0, root.substream("train")));
  EmbeddingSet test(scenario.test_count, d, draw_mixture(params, scenario.test_count, 1.0, root.substream("test")));

  CounterRng gen_rng = root.substream("gen");
  std::vector<float> gen_values;
  switch (scenario.kind) {
    case ScenarioKind::true_distribution:
      gen_values = draw_mixture(params, scenario.gen_count, 1.0, gen_rng);
      break;
    case ScenarioKind::underfit:
      gen_values = draw_mixture(params, scenario.gen_count, scenario.underfit_scale, gen_rng);
      break;
    case ScenarioKind::shrinkage:
      gen_values.resize(scenario.gen_count * d);
      for (std::size_t i = 0; i < scenario.gen_count; ++i) {
        const auto c = static_cast<Eigen::Index>(gen_rng.below(scenario.components));
        for (std::size_t j = 0; j < d; ++j) {
          gen_values[i * d + j] = static_cast<float>(params.means(c, static_cast<Eigen::Index>(j)));
        }
      }
      break;
    case ScenarioKind::memorized: {
      gen_values.resize(scenario.gen_count * d);
      const auto source = train.values();
      for (std::size_t i = 0; i < scenario.gen_count; ++i) {
        const std::size_t r = gen_rng.below(scenario.train_count);
        for (std::size_t j = 0; j < d; ++j) gen_values[i * d + j] = source[r * d + j];
      }
      break;
    }
  }
  EmbeddingSet gen(scenario.gen_count, d, std::move(gen_values));
  return {std::move(train), std::move(test), std::move(gen), std::move(params)};
}

EmbeddingSet gaussian_cloud(std::size_t n, std::size_t d, double mean_offset, double cov_scale, std::uint64_t seed) {
  require(n >= 1 && d >= 1, ErrorCode::InvalidArgument, "cloud needs n, d >= 1");
  require(cov_scale >= 0.0, ErrorCode::InvalidArgument, "covariance scale must be >= 0");
  const CounterRng root = CounterRng(seed).substream("cloud");
  const double sd = std::sqrt(cov_scale);
  std::vector<float> values(n * d);
  parallel_for_blocks(n, kCloudBlockRows, [&](std::size_t lo, std::size_t hi) {
    CounterRng rng = root.substream(static_cast<std::uint64_t>(lo / kCloudBlockRows));
    for (std::size_t i = lo * d; i < hi * d; ++i) values[i] = static_cast<float>(mean_offset + sd * rng.normal());
  });
  return EmbeddingSet(n, d, std::move(values));
}

GaussianSummary gaussian_cloud_summary(std::size_t n, std::size_t d, double mean_offset, double cov_scale,
                                       std::uint64_t seed) {
  require(n >= 2 && d >= 1, ErrorCode::InvalidArgument, "summary needs n >= 2, d >= 1");
  require(n >= d + 2, ErrorCode::TooFewSamples, "Bartlett sampling needs n >= d + 2");
  require(cov_scale >= 0.0, ErrorCode::InvalidArgument, "covariance scale must be >= 0");
  const CounterRng root = CounterRng(seed).substream("cloud_summary");
  const auto dd = static_cast<Eigen::Index>(d);
  const double nn = static_cast<double>(n);

  GaussianSummary s;
  s.count = n;
  CounterRng mean_rng = root.substream("mean");
  s.mean.resize(dd);
  const double mean_sd = std::sqrt(cov_scale / nn);
  for (Eigen::Index j = 0; j < dd; ++j) s.mean[j] = mean_offset + mean_sd * mean_rng.normal();

  // Scatter (n - 1) S ~ Wishart(n - 1, cov_scale I) = cov_scale * A A^T.
  const double dof = nn - 1.0;
  CounterRng diag_rng = root.substream("diagonal");
  CounterRng off_rng = root.substream("offdiagonal");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dd, dd);
  for (Eigen::Index i = 0; i < dd; ++i) {
    a(i, i) = std::sqrt(diag_rng.chi_square(dof - static_cast<double>(i)));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = off_rng.normal();
  }
  // symmetric rank update: half the flops of a general product, exactly symmetric after the copy
  s.cov = Eigen::MatrixXd::Zero(dd, dd);
  s.cov.selfadjointView<Eigen::Lower>().rankUpdate(a, cov_scale / dof);
  s.cov.triangularView<Eigen::StrictlyUpper>() = s.cov.transpose();
  return s;
}

}  // namespace dgm

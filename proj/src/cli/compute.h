#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dgm/analysis.h"
#include "dgm/ct_score.h"
#include "dgm/distributional.h"
#include "dgm/fls.h"
#include "dgm/kernel_metrics.h"
#include "dgm/neighborhood.h"

namespace dgm::cli {

inline const std::vector<std::string> kMetricNames{"fd",     "fd_inf",          "kd",      "is", "fls",
                                                   "fls_pog", "prdc",           "rarity",  "vendi",
                                                   "vendi_per_class", "authpct", "ct", "ct_mod", "mem_ratio", "asw"};

struct ComputeSettings {
  std::vector<std::string> metrics;
  std::uint64_t seed = 0;
  std::string model_id = "model";
  std::string dataset_id = "dataset";

  std::optional<std::filesystem::path> real, gen, train, test, probs;

  std::size_t prdc_k = kPrdcDefaultK;
  std::size_t prdc_cap = kPrdcDefaultCap;
  std::size_t rarity_k = kPrdcDefaultK;

  int kd_degree = 3;
  std::optional<double> kd_gamma;
  double kd_coef0 = 1.0;
  std::size_t kd_subsets = 0;  // 0: full-set estimator
  std::size_t kd_subset_size = 1000;

  std::string vendi_kernel = "linear";
  bool vendi_normalize = true;

  std::vector<std::size_t> fd_inf_grid;
  std::size_t fd_inf_repeats = 1;
  std::string fd_inf_axis = "inverse_n";

  CtConfig ct;

  KdeFitOptions fls_fit;
  FlsAffine fls_affine;

  std::optional<double> tau;
  std::optional<std::size_t> mem_k;
  bool intra_class = false;

  std::string is_marginal = "generated_marginal";
  bool allow_encoder_mismatch = false;
};

/// Validates roles and parameters, computes every requested metric, and
/// returns the report. Throws Error(MissingRole) before any work when a role is absent.
MetricReport compute_report(const ComputeSettings& settings);

/// "metric,value,error_code" lines.
std::string report_csv(const MetricReport& report);

std::string utc_timestamp();

}  // namespace dgm::cli

#include "dgm/memorization.h"

#include <algorithm>
#include <cmath>

#include "dgm/distance.h"
#include "dgm/error.h"
#include "dgm/sampling.h"

namespace dgm {

namespace {

void match_group(const RowMatrixD& gen, const std::vector<std::size_t>& gen_ids, const RowMatrixD& train,
                 const std::vector<std::size_t>& train_ids, const MemorizationConfig& cfg,
                 std::vector<MemorizationMatch>& out) {
  const std::size_t k = cfg.resolved_k();
  require(static_cast<std::size_t>(train.rows()) >= k + 1, ErrorCode::TooFewTrainRows,
          "calibration with k = " + std::to_string(k) + " needs at least " + std::to_string(k + 1) +
              " training rows, got " + std::to_string(train.rows()));
  const KnnResult nearest = knn(gen, train, 1, false);
  const KnnResult local = knn(train, train, k, true);
  for (std::size_t i = 0; i < gen_ids.size(); ++i) {
    const std::size_t j = nearest.index(i, 0);
    double scale = 0.0;
    for (std::size_t r = 0; r < k; ++r) scale += local.distance(j, r);
    scale /= static_cast<double>(k);
    require(scale > 0.0, ErrorCode::DegenerateNeighborhood,
            "training row " + std::to_string(train_ids[j]) + " (nearest to gen row " + std::to_string(gen_ids[i]) +
                ") has " + std::to_string(k) + " neighbours at distance 0");
    MemorizationMatch& m = out[gen_ids[i]];
    m.gen_index = gen_ids[i];
    m.train_index = train_ids[j];
    m.l = nearest.distance(i, 0) / scale;
    m.memorized = m.l < cfg.tau;
  }
}

RowMatrixD gather(const RowMatrixD& rows, const std::vector<std::size_t>& ids) {
  RowMatrixD out(static_cast<Eigen::Index>(ids.size()), rows.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(ids[i]));
  return out;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  return ids;
}

}  // namespace

void MemorizationConfig::validate() const {
  require(std::isfinite(tau) && tau > 0.0, ErrorCode::InvalidArgument,
          "tau must be > 0; it has no default and needs to be hand-tuned");
  require(resolved_k() >= 1, ErrorCode::InvalidArgument, "k must be >= 1");
}

std::vector<MemorizationMatch> calibrated_l2(const EmbeddingSet& gen, const EmbeddingSet& train,
                                             const MemorizationConfig& cfg) {
  cfg.validate();
  require_same_dim(gen, train, "calibrated_l2");
  const RowMatrixD g = as_rows(gen);
  const RowMatrixD t = as_rows(train);
  std::vector<MemorizationMatch> out(gen.rows());
  if (!cfg.intra_class) {
    match_group(g, iota(gen.rows()), t, iota(train.rows()), cfg, out);
    return out;
  }

  require(gen.has_labels() && train.has_labels(), ErrorCode::MissingLabels,
          "intra-class matching needs labels on both the generated and the training set");
  const auto train_groups = label_groups(train);
  for (const auto& [label, gen_ids] : label_groups(gen)) {
    const auto it = std::find_if(train_groups.begin(), train_groups.end(),
                                 [label = label](const auto& group) { return group.first == label; });
    require(it != train_groups.end(), ErrorCode::TooFewTrainRows,
            "no training rows with label " + std::to_string(label));
    match_group(gather(g, gen_ids), gen_ids, gather(t, it->second), it->second, cfg, out);
  }
  return out;
}

double memorization_ratio(const std::vector<MemorizationMatch>& matches) {
  require(!matches.empty(), ErrorCode::EmptyInput, "no matches");
  std::size_t hits = 0;
  for (const auto& m : matches) hits += m.memorized ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(matches.size());
}

double memorization_ratio(const std::vector<MemorizationMatch>& matches, double tau) {
  require(!matches.empty(), ErrorCode::EmptyInput, "no matches");
  std::size_t hits = 0;
  for (const auto& m : matches) hits += m.l < tau ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(matches.size());
}

double auth_pct(const EmbeddingSet& gen, const EmbeddingSet& train) {
  require_same_dim(gen, train, "auth_pct");
  require(train.rows() >= 2, ErrorCode::TooFewTrainRows, "AuthPct needs at least 2 training rows");
  const RowMatrixD g = as_rows(gen);
  const RowMatrixD t = as_rows(train);
  const KnnResult gap = knn(t, t, 1, true);
  const KnnResult nearest = knn(g, t, 1, false);
  std::size_t authentic = 0;
  for (std::size_t i = 0; i < gen.rows(); ++i) {
    if (!(nearest.distance(i, 0) < gap.distance(nearest.index(i, 0), 0))) ++authentic;
  }
  return 100.0 * static_cast<double>(authentic) / static_cast<double>(gen.rows());
}

}  // namespace dgm

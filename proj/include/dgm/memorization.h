#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dgm/embedding_set.h"

namespace dgm {

struct MemorizationConfig {
  std::optional<std::size_t> k;  // unset: 50, or 3 in intra-class mode
  double tau = 0.0;              // no default; must be set and > 0
  bool intra_class = false;

  std::size_t resolved_k() const { return k ? *k : (intra_class ? 3 : 50); }
  void validate() const;
};

struct MemorizationMatch {
  std::size_t gen_index = 0;
  std::size_t train_index = 0;  // nearest training row
  double l = 0.0;
  bool memorized = false;  // l < tau
};

/// l = |x - NN(x)| / mean distance from NN(x) to its k nearest other training rows.
/// In intra-class mode both searches only see training rows of the gen row's label.
std::vector<MemorizationMatch> calibrated_l2(const EmbeddingSet& gen, const EmbeddingSet& train,
                                             const MemorizationConfig& cfg);

/// Fraction of matches flagged memorized.
double memorization_ratio(const std::vector<MemorizationMatch>& matches);
/// Fraction with l < tau, ignoring the stored flags.
double memorization_ratio(const std::vector<MemorizationMatch>& matches, double tau);

/// Percentage of gen rows not closer to their nearest training row j than j is
/// to its own nearest training neighbour.
double auth_pct(const EmbeddingSet& gen, const EmbeddingSet& train);

}  // namespace dgm

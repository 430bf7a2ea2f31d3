#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dgm/embedding_set.h"

namespace dgm {

/// Draws `count` rows without replacement; a pure function of (set, count, seed, stratified).
///
/// Stratified mode draws count / |classes| rows from every class and requires
/// the division to be exact. Output is grouped by ascending class id.
EmbeddingSet subsample(const EmbeddingSet& set, std::size_t count, std::uint64_t seed, bool stratified = false);

/// Row indices chosen by subsample(), in output order.
std::vector<std::size_t> subsample_indices(const EmbeddingSet& set, std::size_t count, std::uint64_t seed,
                                           bool stratified = false);

/// Partition by label, classes in ascending id order; rows keep their relative order.
std::vector<std::pair<std::int32_t, EmbeddingSet>> split_by_label(const EmbeddingSet& set);

/// Row indices of each class, classes ascending.
std::vector<std::pair<std::int32_t, std::vector<std::size_t>>> label_groups(const EmbeddingSet& set);

}  // namespace dgm

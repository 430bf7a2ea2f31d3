#include "dgm/sampling.h"

#include <map>
#include <numeric>

#include "dgm/error.h"
#include "dgm/random.h"

namespace dgm {

namespace {

// First `count` entries of a seeded Fisher-Yates shuffle of `pool`.
std::vector<std::size_t> partial_shuffle(std::vector<std::size_t> pool, std::size_t count, CounterRng rng) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

std::vector<std::pair<std::int32_t, std::vector<std::size_t>>> label_groups(const EmbeddingSet& set) {
  require(set.has_labels(), ErrorCode::MissingLabels, "set has no labels");
  std::map<std::int32_t, std::vector<std::size_t>> groups;
  const auto labels = set.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return {groups.begin(), groups.end()};
}

std::vector<std::size_t> subsample_indices(const EmbeddingSet& set, std::size_t count, std::uint64_t seed,
                                           bool stratified) {
  require(count >= 1, ErrorCode::InvalidArgument, "subsample count must be positive");
  require(count <= set.rows(), ErrorCode::CountExceedsN,
          "cannot draw " + std::to_string(count) + " rows from " + std::to_string(set.rows()));
  const CounterRng root(seed);
  if (!stratified) {
    std::vector<std::size_t> all(set.rows());
    std::iota(all.begin(), all.end(), 0);
    return partial_shuffle(std::move(all), count, root.substream("subsample"));
  }

  require(set.has_labels(), ErrorCode::StratifiedWithoutLabels, "stratified subsampling needs labels");
  const auto groups = label_groups(set);
  require(count % groups.size() == 0, ErrorCode::NonDivisibleCount,
          std::to_string(count) + " is not divisible by " + std::to_string(groups.size()) + " classes");
  const std::size_t per_class = count / groups.size();
  std::vector<std::size_t> out;
  out.reserve(count);
  for (const auto& [label, rows] : groups) {
    require(per_class <= rows.size(), ErrorCode::CountExceedsN,
            "class " + std::to_string(label) + " has only " + std::to_string(rows.size()) + " rows, need " +
                std::to_string(per_class));
    const auto picked = partial_shuffle(rows, per_class, root.substream(static_cast<std::uint64_t>(label)));
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

EmbeddingSet subsample(const EmbeddingSet& set, std::size_t count, std::uint64_t seed, bool stratified) {
  const auto indices = subsample_indices(set, count, seed, stratified);
  return set.select(indices);
}

std::vector<std::pair<std::int32_t, EmbeddingSet>> split_by_label(const EmbeddingSet& set) {
  std::vector<std::pair<std::int32_t, EmbeddingSet>> out;
  for (const auto& [label, rows] : label_groups(set)) out.emplace_back(label, set.select(rows));
  return out;
}

}  // namespace dgm

#include "dgm/neighborhood.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dgm/error.h"
#include "dgm/parallel.h"
#include "dgm/random.h"
#include "dgm/sampling.h"

namespace dgm {

namespace {

constexpr std::size_t kRowBlock = 32;

double distance(const RowMatrixD& a, std::size_t i, const RowMatrixD& b, std::size_t j) {
  return std::sqrt(squared_distance(a.row(static_cast<Eigen::Index>(i)).data(),
                                    b.row(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(a.cols())));
}

void require_dims(const RowMatrixD& queries, const NeighborhoodIndex& index) {
  require(static_cast<std::size_t>(queries.cols()) == index.dim(), ErrorCode::DimensionMismatch,
          "query dimension " + std::to_string(queries.cols()) + " does not match index dimension " +
              std::to_string(index.dim()));
}

// Number of balls of `index` containing each query row.
std::vector<std::size_t> containing_counts(const RowMatrixD& queries, const NeighborhoodIndex& index) {
  const auto n = static_cast<std::size_t>(queries.rows());
  std::vector<std::size_t> counts(n, 0);
  parallel_for_blocks(n, kRowBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < index.size(); ++j) {
        if (distance(queries, i, *index.points, j) <= index.radii[j]) ++c;
      }
      counts[i] = c;
    }
  });
  return counts;
}

EmbeddingSet capped(const EmbeddingSet& set, std::size_t cap, std::uint64_t seed) {
  if (set.rows() <= cap) return set;
  return subsample(set, cap, seed);
}

}  // namespace

NeighborhoodIndex build_index(std::shared_ptr<const RowMatrixD> reference, std::size_t k) {
  NeighborhoodIndex index;
  index.k = k;
  index.neighbors = knn(*reference, *reference, k, true);
  index.radii.resize(static_cast<std::size_t>(reference->rows()));
  for (std::size_t j = 0; j < index.radii.size(); ++j) index.radii[j] = index.neighbors.distance(j, k - 1);
  index.points = std::move(reference);
  return index;
}

NeighborhoodIndex build_index(const EmbeddingSet& reference, std::size_t k) {
  return build_index(std::make_shared<const RowMatrixD>(as_rows(reference)), k);
}

PrecisionDensity precision_density(const RowMatrixD& gen, const NeighborhoodIndex& real) {
  require_dims(gen, real);
  require(gen.rows() >= 1, ErrorCode::EmptyInput, "no generated rows");
  const auto counts = containing_counts(gen, real);
  std::size_t inside = 0;
  std::size_t total = 0;
  for (std::size_t c : counts) {
    inside += c > 0 ? 1 : 0;
    total += c;
  }
  const auto n = static_cast<double>(counts.size());
  return {static_cast<double>(inside) / n, static_cast<double>(total) / (static_cast<double>(real.k) * n)};
}

double recall(const RowMatrixD& real, const NeighborhoodIndex& gen) {
  require_dims(real, gen);
  require(real.rows() >= 1, ErrorCode::EmptyInput, "no real rows");
  const auto counts = containing_counts(real, gen);
  const auto inside = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  return static_cast<double>(inside) / static_cast<double>(counts.size());
}

double coverage(const NeighborhoodIndex& real, const RowMatrixD& gen) {
  require_dims(gen, real);
  require(gen.rows() >= 1, ErrorCode::EmptyInput, "no generated rows");
  const std::size_t m = real.size();
  const auto n = static_cast<std::size_t>(gen.rows());
  std::vector<unsigned char> covered(m, 0);
  parallel_for_blocks(m, kRowBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (distance(*real.points, j, gen, i) <= real.radii[j]) {
          covered[j] = 1;
          break;
        }
      }
    }
  });
  const auto hits = std::count(covered.begin(), covered.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(m);
}

PrdcResult prdc(const EmbeddingSet& gen, const EmbeddingSet& real, std::size_t k, std::size_t sample_cap,
                std::uint64_t seed) {
  require_same_dim(gen, real, "prdc");
  require(k >= 1, ErrorCode::InvalidArgument, "k must be positive");
  require(sample_cap >= 1, ErrorCode::InvalidArgument, "sample cap must be positive");
  const CounterRng root(seed);
  const EmbeddingSet g = capped(gen, sample_cap, root.substream("gen").next_u64());
  const EmbeddingSet r = capped(real, sample_cap, root.substream("real").next_u64());
  require(g.rows() > k && r.rows() > k, ErrorCode::TooFewSamples,
          "PRDC needs more than k = " + std::to_string(k) + " rows per set (gen " + std::to_string(g.rows()) +
              ", real " + std::to_string(r.rows()) + ")");

  const auto gen_rows = std::make_shared<const RowMatrixD>(as_rows(g));
  const auto real_rows = std::make_shared<const RowMatrixD>(as_rows(r));
  const NeighborhoodIndex real_index = build_index(real_rows, k);
  const NeighborhoodIndex gen_index = build_index(gen_rows, k);

  PrdcResult out;
  const auto fidelity = precision_density(*gen_rows, real_index);
  out.precision = fidelity.precision;
  out.density = fidelity.density;
  out.recall = recall(*real_rows, gen_index);
  out.coverage = coverage(real_index, *gen_rows);
  out.k = k;
  out.real_count = r.rows();
  out.gen_count = g.rows();
  return out;
}

std::size_t RarityResult::on_manifold_count() const {
  return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto& v) { return v.has_value(); }));
}

RarityResult rarity(const RowMatrixD& queries, const NeighborhoodIndex& index) {
  require_dims(queries, index);
  require(queries.rows() >= 1, ErrorCode::EmptyInput, "no query rows");
  const auto n = static_cast<std::size_t>(queries.rows());
  RarityResult out;
  out.values.resize(n);
  parallel_for_blocks(n, kRowBlock, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double best = std::numeric_limits<double>::infinity();
      bool found = false;
      for (std::size_t j = 0; j < index.size(); ++j) {
        if (index.radii[j] < best && distance(queries, i, *index.points, j) <= index.radii[j]) {
          best = index.radii[j];
          found = true;
        }
      }
      if (found) out.values[i] = best;
    }
  });
  out.on_manifold_fraction = static_cast<double>(out.on_manifold_count()) / static_cast<double>(n);
  return out;
}

RarityResult rarity(const EmbeddingSet& queries, const NeighborhoodIndex& index) {
  require(queries.dim() == index.dim(), ErrorCode::DimensionMismatch,
          "query dimension " + std::to_string(queries.dim()) + " does not match index dimension " +
              std::to_string(index.dim()));
  return rarity(as_rows(queries), index);
}

}  // namespace dgm

#include "dgm/ct_score.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dgm/error.h"
#include "dgm/parallel.h"
#include "dgm/pca.h"
#include "dgm/random.h"

namespace dgm {

namespace {

double row_sq(const RowMatrixD& a, Eigen::Index i, const RowMatrixD& b, Eigen::Index j) {
  return squared_distance(a.row(i).data(), b.row(j).data(), static_cast<std::size_t>(a.cols()));
}

RowMatrixD plus_plus_seed(const RowMatrixD& points, std::size_t clusters, CounterRng rng) {
  const Eigen::Index n = points.rows();
  RowMatrixD centers(static_cast<Eigen::Index>(clusters), points.cols());
  std::vector<double> closest(static_cast<std::size_t>(n));
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  auto take = [&](Eigen::Index idx, Eigen::Index slot) {
    centers.row(slot) = points.row(idx);
    chosen[static_cast<std::size_t>(idx)] = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = row_sq(points, i, centers, slot);
      if (slot == 0 || d < closest[static_cast<std::size_t>(i)]) closest[static_cast<std::size_t>(i)] = d;
    }
  };

  take(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))), 0);
  for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(clusters); ++c) {
    const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double running = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        running += closest[static_cast<std::size_t>(i)];
        if (running >= target && closest[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i) {
          if (closest[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Fewer distinct points than clusters: reuse the first unchosen row.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    take(pick, c);
  }
  return centers;
}

RowMatrixD gather(const RowMatrixD& rows, const std::vector<std::size_t>& ids) {
  RowMatrixD out(static_cast<Eigen::Index>(ids.size()), rows.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(ids[i]));
  return out;
}

std::vector<double> nearest_train_distance(const RowMatrixD& points, const RowMatrixD& train) {
  const KnnResult nn = knn(points, train, 1, false);
  return nn.distances;
}

}  // namespace

std::vector<std::size_t> assign_to_centers(const RowMatrixD& points, const RowMatrixD& centers) {
  require(points.cols() == centers.cols(), ErrorCode::DimensionMismatch, "center dimension mismatch");
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::size_t> out(n);
  parallel_for_blocks(n, 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t best = 0;
      double best_d = row_sq(points, static_cast<Eigen::Index>(i), centers, 0);
      for (Eigen::Index c = 1; c < centers.rows(); ++c) {
        const double d = row_sq(points, static_cast<Eigen::Index>(i), centers, c);
        if (d < best_d) {
          best_d = d;
          best = static_cast<std::size_t>(c);
        }
      }
      out[i] = best;
    }
  });
  return out;
}

KMeansResult kmeans(const RowMatrixD& points, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(options.clusters >= 1, ErrorCode::InvalidArgument, "k-means needs at least one cluster");
  require(n >= options.clusters, ErrorCode::TooFewSamples,
          "k-means with " + std::to_string(options.clusters) + " clusters needs as many points, got " +
              std::to_string(n));

  const Eigen::RowVectorXd mean = points.colwise().mean();
  const double variance =
      (points.rowwise() - mean).array().square().sum() / static_cast<double>(points.size());
  const double threshold = options.tolerance * variance;

  KMeansResult result;
  result.centers = plus_plus_seed(points, options.clusters, CounterRng(options.seed).substream("kmeans++"));
  const auto k = static_cast<Eigen::Index>(options.clusters);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    result.assignment = assign_to_centers(points, result.centers);
    RowMatrixD sums = RowMatrixD::Zero(k, points.cols());
    std::vector<std::size_t> counts(options.clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(result.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[result.assignment[i]];
    }
    double shift = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;  // empty cluster keeps its center
      const Eigen::RowVectorXd updated = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      shift += (updated - result.centers.row(c)).squaredNorm();
      result.centers.row(c) = updated;
    }
    result.iterations = iter + 1;
    if (shift <= threshold) {
      result.converged = true;
      break;
    }
  }
  result.assignment = assign_to_centers(points, result.centers);
  return result;
}

double mann_whitney_z(std::span<const double> first, std::span<const double> second) {
  const std::size_t m = first.size();
  const std::size_t n = second.size();
  require(m >= 1 && n >= 1, ErrorCode::TooFewSamples, "Mann-Whitney needs two nonempty samples");
  std::vector<std::pair<double, bool>> pooled;  // (value, from first)
  pooled.reserve(m + n);
  for (double v : first) pooled.emplace_back(v, true);
  for (double v : second) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (pooled[t].second) rank_sum += midrank;
    }
    i = j;
  }
  const double mm = static_cast<double>(m);
  const double nn = static_cast<double>(n);
  const double u = rank_sum - mm * (mm + 1.0) / 2.0;
  return (u - mm * nn / 2.0) / std::sqrt(mm * nn * (mm + nn + 1.0) / 12.0);
}

std::string_view to_string(CellWeighting weighting) {
  return weighting == CellWeighting::test_fraction ? "test_fraction" : "gen_fraction";
}

CtResult ct_score(const EmbeddingSet& train, const EmbeddingSet& gen, const EmbeddingSet& test, const CtConfig& cfg) {
  require_same_dim(train, gen, "ct_score");
  require_same_dim(train, test, "ct_score");
  require(cfg.cells >= 1, ErrorCode::InvalidArgument, "C_T needs at least one cell");
  require(cfg.pca_components >= 1, ErrorCode::InvalidArgument, "C_T needs at least one PCA component");

  CtResult result;
  result.pca_components = std::min({cfg.pca_components, train.dim(), train.rows()});
  const PcaModel pca = pca_fit(train, result.pca_components);
  const RowMatrixD t = pca.project(train);
  const RowMatrixD g = pca.project(gen);
  const RowMatrixD q = pca.project(test);

  KMeansOptions km;
  km.clusters = cfg.cells;
  km.seed = cfg.seed;
  const KMeansResult cells = kmeans(t, km);
  const auto gen_cell = assign_to_centers(g, cells.centers);
  const auto test_cell = assign_to_centers(q, cells.centers);

  result.cells.resize(cfg.cells);
  std::vector<std::vector<std::size_t>> train_ids(cfg.cells), gen_ids(cfg.cells), test_ids(cfg.cells);
  for (std::size_t i = 0; i < cells.assignment.size(); ++i) train_ids[cells.assignment[i]].push_back(i);
  for (std::size_t i = 0; i < gen_cell.size(); ++i) gen_ids[gen_cell[i]].push_back(i);
  for (std::size_t i = 0; i < test_cell.size(); ++i) test_ids[test_cell[i]].push_back(i);

  double total_weight = 0.0;
  for (std::size_t c = 0; c < cfg.cells; ++c) {
    CtCell& cell = result.cells[c];
    cell.train_count = train_ids[c].size();
    cell.gen_count = gen_ids[c].size();
    cell.test_count = test_ids[c].size();
    cell.admissible = cell.train_count > 0 && cell.gen_count >= cfg.min_cell_count &&
                      cell.test_count >= cfg.min_cell_count && cell.gen_count > 0 && cell.test_count > 0;
    if (!cell.admissible) continue;
    // Distances are to the training rows of the same cell.
    const RowMatrixD cell_train = gather(t, train_ids[c]);
    cell.z = mann_whitney_z(nearest_train_distance(gather(g, gen_ids[c]), cell_train),
                            nearest_train_distance(gather(q, test_ids[c]), cell_train));
    cell.weight = cfg.weighting == CellWeighting::test_fraction
                      ? static_cast<double>(cell.test_count) / static_cast<double>(test.rows())
                      : static_cast<double>(cell.gen_count) / static_cast<double>(gen.rows());
    total_weight += cell.weight;
  }
  require(total_weight > 0.0, ErrorCode::NoAdmissibleCells,
          "no cell holds at least " + std::to_string(cfg.min_cell_count) + " generated and test rows");
  for (auto& cell : result.cells) {
    if (!cell.admissible) continue;
    cell.weight /= total_weight;
    result.score += cell.weight * cell.z;
  }
  return result;
}

CtResult ct_modified(const EmbeddingSet& train, const EmbeddingSet& gen, const EmbeddingSet& test,
                     const CtConfig& cfg) {
  return ct_score(gen, train, test, cfg);
}

}  // namespace dgm

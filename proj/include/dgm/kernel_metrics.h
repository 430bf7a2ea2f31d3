#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dgm/embedding_set.h"

namespace dgm {

/// Positive definite kernel on embedding rows.
///   polynomial: (gamma <x, y> + coef0)^degree, gamma defaulting to 1 / d
///   linear:     <x, y>
struct KernelSpec {
  enum class Kind { polynomial, linear };

  Kind kind = Kind::polynomial;
  int degree = 3;
  std::optional<double> gamma;  // unset: 1 / d
  double coef0 = 1.0;

  static KernelSpec polynomial(int degree = 3, std::optional<double> gamma = std::nullopt, double coef0 = 1.0);
  static KernelSpec linear();

  void validate() const;
  double resolved_gamma(std::size_t dim) const;
  /// Human-readable form with gamma resolved, e.g. "polynomial(degree=3,gamma=0.5,coef0=1)".
  std::string describe(std::size_t dim) const;
  /// Applies the kernel to a raw inner product.
  double apply(double inner, std::size_t dim) const;
};

/// Optional subset averaging, as used by other toolkits for comparability.
struct KdSubsetOptions {
  std::size_t subsets = 100;
  std::size_t subset_size = 1000;
  std::uint64_t seed = 0;
};

/// Unbiased MMD^2 estimate between generated and real sets (full sets). May be negative.
///
/// The value is bitwise identical when the two sets swap roles.
double kernel_distance(const EmbeddingSet& gen, const EmbeddingSet& real, const KernelSpec& kernel = {});

/// Mean of the unbiased estimate over seeded subsets drawn without replacement.
double kernel_distance_subsets(const EmbeddingSet& gen, const EmbeddingSet& real, const KernelSpec& kernel,
                               const KdSubsetOptions& options);

struct VendiResult {
  double score = 1.0;
  /// Spectrum of K / n, descending, negatives clamped and renormalized to sum 1.
  /// When the dual d x d route is taken only the min(n, d) leading values are kept.
  std::vector<double> eigenvalues;
  KernelSpec kernel;
  bool normalized = true;
  bool dual = false;
};

inline constexpr std::size_t kVendiDualThreshold = 20'000;

/// exp of the Shannon entropy of the eigenvalues of K / n (0 log 0 = 0).
///
/// normalize=true makes k(x, x) = 1: linear kernels see unit-normalized rows,
/// other kernels are cosine-normalized K_ij / sqrt(K_ii K_jj).
VendiResult vendi_score(const EmbeddingSet& set, const KernelSpec& kernel = KernelSpec::linear(),
                        bool normalize = true);

struct PerClassVendi {
  double mean = 0.0;
  std::vector<std::pair<std::int32_t, double>> per_class;
};

/// Vendi score inside each label group, averaged with equal class weights.
PerClassVendi per_class_vendi(const EmbeddingSet& set, const KernelSpec& kernel = KernelSpec::linear(),
                              bool normalize = true);

/// Rows of class probabilities p(y | x): entries in [0, 1], each row summing to 1 within 1e-6.
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(Eigen::MatrixXd probs);
  static ProbabilityMatrix from_set(const EmbeddingSet& set);

  const Eigen::MatrixXd& values() const { return probs_; }
  std::size_t rows() const { return static_cast<std::size_t>(probs_.rows()); }
  std::size_t classes() const { return static_cast<std::size_t>(probs_.cols()); }

 private:
  Eigen::MatrixXd probs_;
};

struct GeneratedMarginal {};
struct TrainFrequencies {
  std::vector<double> frequencies;
};
using MarginalMode = std::variant<GeneratedMarginal, TrainFrequencies>;

std::string marginal_mode_name(const MarginalMode& mode);

/// exp(mean_i KL(p(y | x_i) || p(y))).
double inception_style_score(const ProbabilityMatrix& probs, const MarginalMode& mode = GeneratedMarginal{});

}  // namespace dgm

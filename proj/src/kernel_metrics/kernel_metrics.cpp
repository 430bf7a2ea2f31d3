#include "dgm/kernel_metrics.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "dgm/distance.h"
#include "dgm/error.h"
#include "dgm/random.h"
#include "dgm/sampling.h"

namespace dgm {

namespace {

constexpr Eigen::Index kBlockRows = 1024;

double integer_power(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

// Sum of k(a_i, b_j) over all pairs, in fixed block order.
double cross_kernel_sum(const RowMatrixD& a, const RowMatrixD& b, const KernelSpec& kernel) {
  const auto dim = static_cast<std::size_t>(a.cols());
  double total = 0.0;
  Eigen::MatrixXd block;
  for (Eigen::Index start = 0; start < a.rows(); start += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, a.rows() - start);
    block.noalias() = a.middleRows(start, len) * b.transpose();
    total += block.unaryExpr([&](double inner) { return kernel.apply(inner, dim); }).sum();
  }
  return total;
}

// Mean of k(x_i, x_j) over ordered pairs i != j.
double mean_offdiagonal_kernel(const RowMatrixD& x, const KernelSpec& kernel) {
  const auto dim = static_cast<std::size_t>(x.cols());
  const Eigen::Index n = x.rows();
  double total = 0.0;
  Eigen::MatrixXd block;
  for (Eigen::Index start = 0; start < n; start += kBlockRows) {
    const Eigen::Index len = std::min(kBlockRows, n - start);
    block.noalias() = x.middleRows(start, len) * x.transpose();
    block = block.unaryExpr([&](double inner) { return kernel.apply(inner, dim); });
    for (Eigen::Index r = 0; r < len; ++r) block(r, start + r) = 0.0;
    total += block.sum();
  }
  const auto count = static_cast<double>(n) * static_cast<double>(n - 1);
  return total / count;
}

// Deterministic total order on sets, so that the cross term is always
// accumulated in the same orientation regardless of argument roles.
bool orders_first(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  const auto va = a.values();
  const auto vb = b.values();
  return std::memcmp(va.data(), vb.data(), va.size_bytes()) <= 0;
}

double unbiased_mmd(const EmbeddingSet& gen, const EmbeddingSet& real, const KernelSpec& kernel) {
  require(gen.rows() >= 2 && real.rows() >= 2, ErrorCode::TooFewSamples,
          "the unbiased estimator needs at least 2 rows per set");
  const RowMatrixD g = as_rows(gen);
  const RowMatrixD r = as_rows(real);
  const double within_gen = mean_offdiagonal_kernel(g, kernel);
  const double within_real = mean_offdiagonal_kernel(r, kernel);
  const double cross = orders_first(gen, real) ? cross_kernel_sum(g, r, kernel) : cross_kernel_sum(r, g, kernel);
  const double pairs = static_cast<double>(gen.rows()) * static_cast<double>(real.rows());
  return (within_gen + within_real) - 2.0 * (cross / pairs);
}

double entropy_exp(std::vector<double>& spectrum) {
  for (double& v : spectrum) v = std::max(v, 0.0);
  double total = 0.0;
  for (double v : spectrum) total += v;
  require(total > 0.0, ErrorCode::EigenFailure, "kernel matrix has no positive spectrum");
  double entropy = 0.0;
  for (double& v : spectrum) {
    v /= total;
    if (v > 0.0) entropy -= v * std::log(v);
  }
  return std::exp(entropy);
}

}  // namespace

KernelSpec KernelSpec::polynomial(int degree, std::optional<double> gamma, double coef0) {
  KernelSpec k;
  k.kind = Kind::polynomial;
  k.degree = degree;
  k.gamma = gamma;
  k.coef0 = coef0;
  k.validate();
  return k;
}

KernelSpec KernelSpec::linear() {
  KernelSpec k;
  k.kind = Kind::linear;
  k.degree = 1;
  k.gamma = 1.0;
  k.coef0 = 0.0;
  return k;
}

void KernelSpec::validate() const {
  if (kind == Kind::linear) return;
  require(degree >= 1, ErrorCode::InvalidArgument, "kernel degree must be >= 1");
  require(!gamma || *gamma > 0.0, ErrorCode::InvalidArgument, "kernel gamma must be > 0");
}

double KernelSpec::resolved_gamma(std::size_t dim) const {
  if (kind == Kind::linear) return 1.0;
  return gamma ? *gamma : 1.0 / static_cast<double>(dim);
}

std::string KernelSpec::describe(std::size_t dim) const {
  if (kind == Kind::linear) return "linear";
  std::ostringstream out;
  out.precision(17);
  out << "polynomial(degree=" << degree << ",gamma=" << resolved_gamma(dim) << ",coef0=" << coef0 << ")";
  return out.str();
}

double KernelSpec::apply(double inner, std::size_t dim) const {
  if (kind == Kind::linear) return inner;
  return integer_power(resolved_gamma(dim) * inner + coef0, degree);
}

double kernel_distance(const EmbeddingSet& gen, const EmbeddingSet& real, const KernelSpec& kernel) {
  kernel.validate();
  require_same_dim(gen, real, "kernel_distance");
  return unbiased_mmd(gen, real, kernel);
}

double kernel_distance_subsets(const EmbeddingSet& gen, const EmbeddingSet& real, const KernelSpec& kernel,
                               const KdSubsetOptions& options) {
  kernel.validate();
  require_same_dim(gen, real, "kernel_distance");
  require(options.subsets >= 1, ErrorCode::InvalidArgument, "need at least one subset");
  const std::size_t size = std::min({options.subset_size, gen.rows(), real.rows()});
  require(size >= 2, ErrorCode::TooFewSamples, "subsets need at least 2 rows");
  const CounterRng root(options.seed);
  double total = 0.0;
  for (std::size_t s = 0; s < options.subsets; ++s) {
    const CounterRng stream = root.substream(static_cast<std::uint64_t>(s));
    const auto g = subsample(gen, size, stream.substream("gen").next_u64());
    const auto r = subsample(real, size, stream.substream("real").next_u64());
    total += unbiased_mmd(g, r, kernel);
  }
  return total / static_cast<double>(options.subsets);
}

VendiResult vendi_score(const EmbeddingSet& set, const KernelSpec& kernel, bool normalize) {
  kernel.validate();
  RowMatrixD x = as_rows(set);
  const Eigen::Index n = x.rows();
  const auto dim = static_cast<std::size_t>(x.cols());
  const bool linear = kernel.kind == KernelSpec::Kind::linear;
  if (normalize && linear) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = x.row(i).norm();
      require(norm > 0.0, ErrorCode::ZeroNormRow, "row " + std::to_string(i) + " has zero norm");
      x.row(i) /= norm;
    }
  }

  VendiResult result;
  result.kernel = kernel;
  result.normalized = normalize;
  Eigen::VectorXd spectrum;
  if (linear && static_cast<std::size_t>(n) > kVendiDualThreshold && static_cast<Eigen::Index>(dim) < n) {
    // X^T X / n shares its nonzero spectrum with X X^T / n.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorCode::EigenFailure, "Vendi eigensolver did not converge");
    spectrum = solver.eigenvalues();
    result.dual = true;
  } else {
    Eigen::MatrixXd k = (x * x.transpose()).unaryExpr([&](double inner) { return kernel.apply(inner, dim); });
    if (normalize && !linear) {
      const Eigen::VectorXd diag = k.diagonal();
      for (Eigen::Index i = 0; i < n; ++i) {
        require(diag[i] > 0.0, ErrorCode::ZeroNormRow, "row " + std::to_string(i) + " has k(x, x) <= 0");
      }
      const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
      k = inv_sqrt.asDiagonal() * k * inv_sqrt.asDiagonal();
    }
    k /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
    require(solver.info() == Eigen::Success, ErrorCode::EigenFailure, "Vendi eigensolver did not converge");
    spectrum = solver.eigenvalues();
  }

  result.eigenvalues.assign(spectrum.data(), spectrum.data() + spectrum.size());
  std::sort(result.eigenvalues.begin(), result.eigenvalues.end(), std::greater<>());
  result.score = entropy_exp(result.eigenvalues);
  // Guard the [1, n] range against rounding in exp(log(...)).
  result.score = std::clamp(result.score, 1.0, static_cast<double>(n));
  return result;
}

PerClassVendi per_class_vendi(const EmbeddingSet& set, const KernelSpec& kernel, bool normalize) {
  const auto groups = split_by_label(set);
  PerClassVendi out;
  double total = 0.0;
  for (const auto& [label, members] : groups) {
    const double score = vendi_score(members, kernel, normalize).score;
    out.per_class.emplace_back(label, score);
    total += score;
  }
  out.mean = total / static_cast<double>(groups.size());
  return out;
}

ProbabilityMatrix::ProbabilityMatrix(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  require(probs_.rows() >= 1 && probs_.cols() >= 1, ErrorCode::InvalidDistribution, "empty probability matrix");
  for (Eigen::Index i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < probs_.cols(); ++c) {
      const double p = probs_(i, c);
      require(std::isfinite(p) && p >= 0.0 && p <= 1.0, ErrorCode::InvalidDistribution,
              "row " + std::to_string(i) + " has an entry outside [0, 1]");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::InvalidDistribution,
            "row " + std::to_string(i) + " sums to " + std::to_string(sum));
  }
}

ProbabilityMatrix ProbabilityMatrix::from_set(const EmbeddingSet& set) { return ProbabilityMatrix(set.to_double()); }

std::string marginal_mode_name(const MarginalMode& mode) {
  return std::holds_alternative<GeneratedMarginal>(mode) ? "generated_marginal" : "train_frequencies";
}

double inception_style_score(const ProbabilityMatrix& probs, const MarginalMode& mode) {
  const Eigen::MatrixXd& p = probs.values();
  Eigen::VectorXd marginal;
  if (const auto* freqs = std::get_if<TrainFrequencies>(&mode)) {
    require(freqs->frequencies.size() == probs.classes(), ErrorCode::InvalidDistribution,
            "train frequencies have " + std::to_string(freqs->frequencies.size()) + " classes, probabilities have " +
                std::to_string(probs.classes()));
    marginal = Eigen::Map<const Eigen::VectorXd>(freqs->frequencies.data(),
                                                 static_cast<Eigen::Index>(freqs->frequencies.size()));
    require((marginal.array() >= 0.0).all() && std::abs(marginal.sum() - 1.0) <= 1e-6,
            ErrorCode::InvalidDistribution, "train frequencies are not a distribution");
  } else {
    marginal = p.colwise().mean().transpose();
  }

  double total_kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double pc = p(i, c);
      if (pc == 0.0) continue;
      require(marginal[c] > 0.0, ErrorCode::SupportMismatch,
              "row " + std::to_string(i) + " puts mass on class " + std::to_string(c) + " where p(y) = 0");
      total_kl += pc * std::log(pc / marginal[c]);
    }
  }
  return std::exp(total_kl / static_cast<double>(p.rows()));
}

}  // namespace dgm

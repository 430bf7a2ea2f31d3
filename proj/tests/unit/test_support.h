#pragma once

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "dgm/embedding_set.h"
#include "dgm/error.h"

namespace dgm::testing {

// Independent of the library RNG so oracles never share its code path.
inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + 17); }

inline Eigen::MatrixXd normal_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0,
                                     double shift = 0.0) {
  auto rng = engine(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = shift + scale * nd(rng);
  }
  return m;
}

// Values rounded to float so that the set holds exactly what the oracle sees.
inline EmbeddingSet set_of(const Eigen::MatrixXd& m, std::optional<std::vector<std::int32_t>> labels = std::nullopt) {
  return EmbeddingSet::from_matrix(m, std::move(labels));
}

inline Eigen::MatrixXd as_double(const EmbeddingSet& s) { return s.to_double(); }

inline EmbeddingSet random_set(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0,
                               double shift = 0.0) {
  return set_of(normal_matrix(n, d, seed, scale, shift));
}

// Small integer coordinates: distances are exact and ties are common.
inline EmbeddingSet integer_set(std::size_t n, std::size_t d, std::uint64_t seed, int lo = -3, int hi = 3) {
  auto rng = engine(seed);
  std::uniform_int_distribution<int> u(lo, hi);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  }
  return set_of(m);
}

inline EmbeddingSet column(std::initializer_list<double> values) {
  std::vector<std::vector<double>> rows;
  for (double v : values) rows.push_back({v});
  return EmbeddingSet::from_rows(rows);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dgm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace dgm::testing

#define EXPECT_DGM_ERROR(stmt, expected_code)                                   \
  do {                                                                          \
    try {                                                                       \
      stmt;                                                                     \
      ADD_FAILURE() << "expected " << #expected_code << " from " << #stmt;      \
    } catch (const ::dgm::Error& e) {                                           \
      EXPECT_EQ(e.code(), expected_code) << e.what();                           \
    }                                                                           \
  } while (0)

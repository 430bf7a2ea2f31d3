#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dgm {

using Json = nlohmann::ordered_json;

inline constexpr double kStrongCorrelation = 0.5;
inline constexpr double kSignificanceLevel = 0.05;

struct CorrelationSummary {
  std::string first;
  std::string second;
  std::size_t n = 0;
  double r = 0.0;
  double p = 1.0;  // two-sided
  bool strong_and_significant = false;
};

bool is_strong_and_significant(double r, double p);

/// Product-moment r with a two-sided Student-t p-value on n - 2 degrees of freedom.
CorrelationSummary pearson(std::span<const double> x, std::span<const double> y, std::string first = "x",
                           std::string second = "y");

/// Two-sided p-value of a correlation r over n points.
double pearson_p_value(double r, std::size_t n);

struct MetricEntry {
  std::optional<double> value;  // unset: unavailable
  std::string error_code;
  std::string error_message;
  Json params = Json::object();
  Json details = Json::object();
};

/// One (model, dataset) evaluation, with every hyperparameter materialized.
struct MetricReport {
  std::string model_id;
  std::string dataset_id;
  std::string timestamp;
  Json config = Json::object();
  Json inputs = Json::object();
  std::map<std::string, MetricEntry> metrics;

  void validate() const;
  Json to_json() const;
  static MetricReport from_json(const Json& j);
};

inline constexpr int kReportSchemaVersion = 1;

MetricReport read_report(const std::filesystem::path& path);
/// Atomic write (temp file + rename), two-space indented.
void write_json_atomic(const Json& j, const std::filesystem::path& path);
void write_text_atomic(const std::string& text, const std::filesystem::path& path);

struct HumanEvalRecord {
  std::string model_id;
  double error_rate = 0.0;
  double standard_error = 0.0;
  std::size_t participants = 0;
  std::string dataset_id;  // optional trailing column; empty matches any dataset

  void validate() const;
};

/// Header "model,error_rate,stderr,participants", optionally followed by ",dataset".
std::vector<HumanEvalRecord> parse_human_csv(const std::string& text);
std::vector<HumanEvalRecord> read_human_csv(const std::filesystem::path& path);

inline constexpr const char* kHumanSeries = "human_error_rate";

/// Symmetric matrix over series (human error rate first, then metrics by name).
/// Cells are empty when fewer than 3 models share both series or one is constant.
struct CorrelationTable {
  std::string dataset_id;  // "pooled" for the concatenation over datasets
  std::vector<std::string> models;
  std::vector<std::string> series;
  std::vector<std::vector<std::optional<CorrelationSummary>>> cells;
  std::vector<std::vector<std::size_t>> counts;  // shared non-missing points per cell
};

/// One table per dataset id, plus a pooled table when several datasets are present.
std::vector<CorrelationTable> correlate_reports(const std::vector<MetricReport>& reports,
                                                const std::vector<HumanEvalRecord>& human);

Json to_json(const CorrelationSummary& s);
Json to_json(const CorrelationTable& table);
/// Wide matrix: dataset, series, then one r column per series (empty when unavailable).
std::string correlation_matrix_csv(const std::vector<CorrelationTable>& tables);
/// One line per cell: dataset, series pair, n, r, p, flag.
std::string correlation_cells_csv(const std::vector<CorrelationTable>& tables);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace dgm

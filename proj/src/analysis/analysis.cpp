#include "dgm/analysis.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dgm/error.h"

namespace dgm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& s, std::size_t line, const char* column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v), ErrorCode::ParseError,
          "line " + std::to_string(line) + ": bad " + column + " value '" + s + "'");
  return v;
}

void write_atomic(const std::string& text, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    require(static_cast<bool>(out), ErrorCode::IoFailure, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, ErrorCode::IoFailure, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// (dataset, model) -> metric values, for one correlation group.
struct Point {
  std::string label;
  double human = 0.0;
  const MetricReport* report = nullptr;
};

std::optional<double> series_value(const Point& p, const std::string& series) {
  if (series == kHumanSeries) return p.human;
  const auto it = p.report->metrics.find(series);
  if (it == p.report->metrics.end()) return std::nullopt;
  return it->second.value;
}

CorrelationTable build_table(std::string dataset_id, std::vector<Point> points) {
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.label < b.label; });
  require(points.size() >= 3, ErrorCode::InsufficientOverlap,
          "dataset '" + dataset_id + "' has " + std::to_string(points.size()) +
              " models with both a report and a human error rate; at least 3 are needed");
  CorrelationTable table;
  table.dataset_id = std::move(dataset_id);
  std::set<std::string> names;
  for (const auto& p : points) {
    table.models.push_back(p.label);
    for (const auto& [name, entry] : p.report->metrics) names.insert(name);
  }
  table.series.push_back(kHumanSeries);
  table.series.insert(table.series.end(), names.begin(), names.end());

  const std::size_t s = table.series.size();
  table.cells.assign(s, std::vector<std::optional<CorrelationSummary>>(s));
  table.counts.assign(s, std::vector<std::size_t>(s, 0));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a; b < s; ++b) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& p : points) {
        const auto x = series_value(p, table.series[a]);
        const auto y = series_value(p, table.series[b]);
        if (x && y) {
          xs.push_back(*x);
          ys.push_back(*y);
        }
      }
      table.counts[a][b] = table.counts[b][a] = xs.size();
      try {
        auto summary = pearson(xs, ys, table.series[a], table.series[b]);
        table.cells[a][b] = summary;
        std::swap(summary.first, summary.second);
        table.cells[b][a] = summary;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooFewPoints && e.code() != ErrorCode::ConstantSeries) throw;
      }
    }
  }
  return table;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool is_strong_and_significant(double r, double p) {
  return std::abs(r) >= kStrongCorrelation && p <= kSignificanceLevel;
}

double pearson_p_value(double r, std::size_t n) {
  require(n >= 3, ErrorCode::TooFewPoints, "a p-value needs at least 3 points");
  const double ar = std::min(std::abs(r), 1.0);
  if (ar >= 1.0) return 0.0;
  const double dof = static_cast<double>(n - 2);
  const double t = ar * std::sqrt(dof / (1.0 - ar * ar));
  const boost::math::students_t_distribution<double> dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

CorrelationSummary pearson(std::span<const double> x, std::span<const double> y, std::string first,
                           std::string second) {
  require(x.size() == y.size(), ErrorCode::LengthMismatch,
          "series lengths differ (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  require(x.size() >= 3, ErrorCode::TooFewPoints, "Pearson correlation needs at least 3 points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  require(sxx > 0.0, ErrorCode::ConstantSeries, "series '" + first + "' is constant");
  require(syy > 0.0, ErrorCode::ConstantSeries, "series '" + second + "' is constant");

  CorrelationSummary out;
  out.first = std::move(first);
  out.second = std::move(second);
  out.n = x.size();
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  out.p = pearson_p_value(out.r, out.n);
  out.strong_and_significant = is_strong_and_significant(out.r, out.p);
  return out;
}

void MetricReport::validate() const {
  require(!model_id.empty(), ErrorCode::InvalidArgument, "report has no model id");
  for (const auto& [name, entry] : metrics) {
    require(!entry.value || std::isfinite(*entry.value), ErrorCode::NonFiniteValue,
            "metric '" + name + "' is not finite");
    require(entry.value || !entry.error_code.empty(), ErrorCode::InvalidArgument,
            "metric '" + name + "' has neither a value nor an error");
    require(entry.params.is_object(), ErrorCode::InvalidArgument, "metric '" + name + "' has no parameters");
  }
}

Json MetricReport::to_json() const {
  validate();
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["model_id"] = model_id;
  j["dataset_id"] = dataset_id;
  j["timestamp"] = timestamp;
  j["config"] = config;
  j["inputs"] = inputs;
  Json m = Json::object();
  for (const auto& [name, entry] : metrics) {
    Json e;
    e["value"] = entry.value ? Json(*entry.value) : Json(nullptr);
    if (!entry.error_code.empty()) e["error"] = {{"code", entry.error_code}, {"message", entry.error_message}};
    e["params"] = entry.params;
    if (!entry.details.empty()) e["details"] = entry.details;
    m[name] = std::move(e);
  }
  j["metrics"] = std::move(m);
  return j;
}

MetricReport MetricReport::from_json(const Json& j) {
  try {
    require(j.is_object(), ErrorCode::ParseError, "report is not a JSON object");
    require(j.value("schema_version", 0) == kReportSchemaVersion, ErrorCode::VersionUnsupported,
            "unsupported report schema version");
    MetricReport r;
    r.model_id = j.at("model_id").get<std::string>();
    r.dataset_id = j.value("dataset_id", std::string());
    r.timestamp = j.value("timestamp", std::string());
    r.config = j.value("config", Json::object());
    r.inputs = j.value("inputs", Json::object());
    for (const auto& [name, e] : j.at("metrics").items()) {
      MetricEntry entry;
      if (!e.at("value").is_null()) entry.value = e.at("value").get<double>();
      if (e.contains("error")) {
        entry.error_code = e["error"].value("code", std::string());
        entry.error_message = e["error"].value("message", std::string());
      }
      entry.params = e.at("params");
      entry.details = e.value("details", Json::object());
      r.metrics.emplace(name, std::move(entry));
    }
    r.validate();
    return r;
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

MetricReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return MetricReport::from_json(j);
}

void write_json_atomic(const Json& j, const std::filesystem::path& path) { write_atomic(j.dump(2) + "\n", path); }

void write_text_atomic(const std::string& text, const std::filesystem::path& path) { write_atomic(text, path); }

void HumanEvalRecord::validate() const {
  require(!model_id.empty(), ErrorCode::InvalidArgument, "human record without a model id");
  require(error_rate >= 0.0 && error_rate <= 1.0, ErrorCode::InvalidArgument,
          "error rate for '" + model_id + "' is outside [0, 1]");
  require(standard_error >= 0.0, ErrorCode::InvalidArgument, "negative standard error for '" + model_id + "'");
  require(error_rate - 3.0 * standard_error >= -0.1 && error_rate + 3.0 * standard_error <= 1.1,
          ErrorCode::InvalidArgument, "error rate +- 3 standard errors for '" + model_id + "' leaves [-0.1, 1.1]");
}

std::vector<HumanEvalRecord> parse_human_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool with_dataset = false;
  bool header_seen = false;
  std::vector<HumanEvalRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    for (auto& f : fields) f = trim(f);
    if (!header_seen) {
      const std::vector<std::string> base{"model", "error_rate", "stderr", "participants"};
      with_dataset = fields.size() == 5 && fields[4] == "dataset";
      require(std::equal(base.begin(), base.end(), fields.begin(), fields.begin() + std::min(fields.size(), base.size())) &&
                  (fields.size() == 4 || with_dataset),
              ErrorCode::ParseError, "human CSV header must be 'model,error_rate,stderr,participants[,dataset]'");
      header_seen = true;
      continue;
    }
    require(fields.size() == (with_dataset ? 5u : 4u), ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": expected " + std::to_string(with_dataset ? 5 : 4) + " fields");
    HumanEvalRecord r;
    r.model_id = fields[0];
    r.error_rate = parse_number(fields[1], line_no, "error_rate");
    r.standard_error = parse_number(fields[2], line_no, "stderr");
    const double participants = parse_number(fields[3], line_no, "participants");
    require(participants >= 0.0 && participants == std::floor(participants), ErrorCode::ParseError,
            "line " + std::to_string(line_no) + ": participants must be a non-negative integer");
    r.participants = static_cast<std::size_t>(participants);
    if (with_dataset) r.dataset_id = fields[4];
    r.validate();
    out.push_back(std::move(r));
  }
  require(header_seen, ErrorCode::ParseError, "human CSV is empty");
  return out;
}

std::vector<HumanEvalRecord> read_human_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_human_csv(buf.str());
}

std::vector<CorrelationTable> correlate_reports(const std::vector<MetricReport>& reports,
                                                const std::vector<HumanEvalRecord>& human) {
  std::map<std::string, std::vector<Point>> groups;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& report : reports) {
    require(seen.emplace(report.dataset_id, report.model_id).second, ErrorCode::InvalidArgument,
            "duplicate report for model '" + report.model_id + "' on dataset '" + report.dataset_id + "'");
    const HumanEvalRecord* match = nullptr;
    for (const auto& h : human) {
      if (h.model_id != report.model_id) continue;
      if (!h.dataset_id.empty() && h.dataset_id != report.dataset_id) continue;
      require(match == nullptr, ErrorCode::InvalidArgument,
              "several human records match model '" + report.model_id + "'");
      match = &h;
    }
    if (match == nullptr) continue;
    groups[report.dataset_id].push_back({report.model_id, match->error_rate, &report});
  }
  require(!groups.empty(), ErrorCode::InsufficientOverlap, "no model has both a report and a human error rate");

  std::vector<CorrelationTable> tables;
  for (auto& [dataset, points] : groups) tables.push_back(build_table(dataset, points));
  if (groups.size() > 1) {
    std::vector<Point> pooled;
    for (auto& [dataset, points] : groups) {
      for (auto p : points) {
        p.label = dataset + "/" + p.label;
        pooled.push_back(p);
      }
    }
    tables.push_back(build_table("pooled", std::move(pooled)));
  }
  return tables;
}

Json to_json(const CorrelationSummary& s) {
  return {{"first", s.first}, {"second", s.second}, {"n", s.n},
          {"r", s.r},         {"p", s.p},           {"strong_and_significant", s.strong_and_significant}};
}

Json to_json(const CorrelationTable& table) {
  Json cells = Json::array();
  for (std::size_t a = 0; a < table.series.size(); ++a) {
    for (std::size_t b = a + 1; b < table.series.size(); ++b) {
      Json cell;
      cell["first"] = table.series[a];
      cell["second"] = table.series[b];
      cell["n"] = table.counts[a][b];
      if (const auto& s = table.cells[a][b]) {
        cell["r"] = s->r;
        cell["p"] = s->p;
        cell["strong_and_significant"] = s->strong_and_significant;
      } else {
        cell["r"] = nullptr;
        cell["p"] = nullptr;
        cell["strong_and_significant"] = false;
        cell["unavailable"] = true;
      }
      cells.push_back(std::move(cell));
    }
  }
  return {{"dataset_id", table.dataset_id}, {"models", table.models}, {"series", table.series}, {"cells", cells}};
}

std::string correlation_matrix_csv(const std::vector<CorrelationTable>& tables) {
  std::ostringstream out;
  for (const auto& t : tables) {
    out << "dataset,series";
    for (const auto& s : t.series) out << ',' << s;
    out << '\n';
    for (std::size_t a = 0; a < t.series.size(); ++a) {
      out << t.dataset_id << ',' << t.series[a];
      for (std::size_t b = 0; b < t.series.size(); ++b) {
        out << ',';
        if (const auto& s = t.cells[a][b]) out << format_double(s->r);
      }
      out << '\n';
    }
  }
  return out.str();
}

std::string correlation_cells_csv(const std::vector<CorrelationTable>& tables) {
  std::ostringstream out;
  out << "dataset,first,second,n,r,p,strong_and_significant\n";
  for (const auto& t : tables) {
    for (std::size_t a = 0; a < t.series.size(); ++a) {
      for (std::size_t b = a + 1; b < t.series.size(); ++b) {
        out << t.dataset_id << ',' << t.series[a] << ',' << t.series[b] << ',' << t.counts[a][b] << ',';
        if (const auto& s = t.cells[a][b]) {
          out << format_double(s->r) << ',' << format_double(s->p) << ',' << (s->strong_and_significant ? 1 : 0);
        } else {
          out << ",,0";
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace dgm

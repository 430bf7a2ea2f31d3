#include <cmath>
#include <fstream>

#include "dgm/analysis.h"
#include "test_support.h"

namespace {

using dgm::ErrorCode;
using namespace dgm::testing;

// Two-sided Student-t tail by Simpson quadrature of the density over [0, t].
double oracle_p(double r, std::size_t n) {
  const double df = static_cast<double>(n) - 2;
  const double t = std::abs(r) * std::sqrt(df / (1 - r * r));
  const double log_c = std::lgamma((df + 1) / 2) - std::lgamma(df / 2) - 0.5 * std::log(df * M_PI);
  auto f = [&](double x) { return std::exp(log_c - (df + 1) / 2 * std::log1p(x * x / df)); };
  const int steps = 20000;
  const double h = t / steps;
  double s = f(0) + f(t);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4 : 2) * f(i * h);
  return 1 - 2 * s * h / 3;
}

TEST(Pearson, PValueAgainstQuadrature) {
  EXPECT_NEAR(dgm::pearson_p_value(0.8, 5), oracle_p(0.8, 5), 1e-8);
  EXPECT_NEAR(dgm::pearson_p_value(0.8, 5), 0.1040880, 1e-6);
  for (double r : {-0.9, -0.3, 0.1, 0.5, 0.66}) {
    for (std::size_t n : {4u, 10u, 30u}) EXPECT_NEAR(dgm::pearson_p_value(r, n), oracle_p(r, n), 1e-8);
  }
  EXPECT_EQ(dgm::pearson_p_value(1.0, 6), 0.0);
}

TEST(Pearson, CoefficientAndFlags) {
  std::vector<double> x = {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> y = {2, 1, 4, 3, 7, 8, 6, 9};
  auto s = dgm::pearson(x, y, "a", "b");
  Eigen::Map<Eigen::VectorXd> xv(x.data(), 8), yv(y.data(), 8);
  Eigen::VectorXd xc = xv.array() - xv.mean(), yc = yv.array() - yv.mean();
  EXPECT_NEAR(s.r, xc.dot(yc) / (xc.norm() * yc.norm()), 1e-14);
  EXPECT_EQ(s.n, 8u);
  EXPECT_EQ(s.strong_and_significant, std::abs(s.r) >= 0.5 && s.p <= 0.05);
  EXPECT_TRUE(dgm::is_strong_and_significant(-0.7, 0.01));
  // both thresholds are inclusive
  EXPECT_TRUE(dgm::is_strong_and_significant(0.5, 0.05));
  EXPECT_TRUE(dgm::is_strong_and_significant(-0.5, 0.05));
  EXPECT_FALSE(dgm::is_strong_and_significant(std::nextafter(0.5, 0.0), 0.01));
  EXPECT_FALSE(dgm::is_strong_and_significant(0.9, std::nextafter(0.05, 1.0)));
}

TEST(Pearson, AffineInvariance) {
  std::vector<double> x = {0.3, 1.1, -2, 4, 5.5}, y = {1, 3, -1, 2, 8};
  auto base = dgm::pearson(x, y);
  std::vector<double> y2;
  for (double v : y) y2.push_back(-3.0 * v + 7.0);
  auto flipped = dgm::pearson(x, y2);
  EXPECT_NEAR(flipped.r, -base.r, 1e-12);
  EXPECT_NEAR(flipped.p, base.p, 1e-12);
}

TEST(Pearson, Errors) {
  std::vector<double> a = {1, 2, 3}, b = {1, 2}, c = {4, 4, 4};
  EXPECT_DGM_ERROR(dgm::pearson(a, b), ErrorCode::LengthMismatch);
  EXPECT_DGM_ERROR(dgm::pearson(b, b), ErrorCode::TooFewPoints);
  EXPECT_DGM_ERROR(dgm::pearson(a, c), ErrorCode::ConstantSeries);
}

dgm::MetricReport report(const std::string& model, const std::string& dataset, double fd, double kd) {
  dgm::MetricReport r;
  r.model_id = model;
  r.dataset_id = dataset;
  r.timestamp = "2026-01-01T00:00:00Z";
  r.metrics["fd"].value = fd;
  r.metrics["kd"].value = kd;
  r.metrics["prdc.precision"].error_code = "TooFewSamples";
  r.metrics["prdc.precision"].error_message = "not enough rows";
  return r;
}

TEST(MetricReport, JsonRoundTrip) {
  auto r = report("m1", "d1", 1.25, -0.5);
  r.metrics["fd"].params = {{"dim", 4}};
  auto j = r.to_json();
  EXPECT_EQ(j["schema_version"], dgm::kReportSchemaVersion);
  EXPECT_TRUE(j["metrics"]["prdc.precision"]["value"].is_null());
  auto back = dgm::MetricReport::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  TempDir dir;
  dgm::write_json_atomic(j, dir / "r.json");
  EXPECT_EQ(dgm::read_report(dir / "r.json").to_json(), j);
}

TEST(HumanCsv, ParsesOptionalDatasetColumn) {
  auto recs = dgm::parse_human_csv("model,error_rate,stderr,participants\na,0.2,0.01,30\nb,0.4,0.02,25\n");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].model_id, "b");
  EXPECT_DOUBLE_EQ(recs[1].error_rate, 0.4);
  EXPECT_EQ(recs[1].participants, 25u);
  auto with_ds = dgm::parse_human_csv("model,error_rate,stderr,participants,dataset\na,0.2,0.01,30,x\n");
  EXPECT_EQ(with_ds[0].dataset_id, "x");
  EXPECT_THROW(dgm::parse_human_csv("model,error_rate\na,0.2\n"), dgm::Error);
}

TEST(Correlate, PerDatasetAndPooled) {
  std::vector<dgm::MetricReport> reports;
  std::vector<dgm::HumanEvalRecord> human;
  const double err[] = {0.1, 0.2, 0.3, 0.45};
  for (int i = 0; i < 4; ++i) {
    std::string m = "m" + std::to_string(i);
    reports.push_back(report(m, "d1", 10.0 * err[i] + 1, 0.1 * i * i));
    reports.push_back(report(m, "d2", -err[i], 1.0));
    human.push_back({m, err[i], 0.01, 20, ""});
  }
  auto tables = dgm::correlate_reports(reports, human);
  ASSERT_EQ(tables.size(), 3u);
  EXPECT_EQ(tables[2].dataset_id, "pooled");
  const auto& t = tables[0];
  ASSERT_EQ(t.series.front(), dgm::kHumanSeries);
  std::size_t fd = std::find(t.series.begin(), t.series.end(), "fd") - t.series.begin();
  ASSERT_LT(fd, t.series.size());
  ASSERT_TRUE(t.cells[0][fd]);
  EXPECT_NEAR(t.cells[0][fd]->r, 1.0, 1e-12);
  EXPECT_EQ(t.counts[0][fd], 4u);
  // d2 kd is constant: no cell
  const auto& t2 = tables[1];
  std::size_t kd = std::find(t2.series.begin(), t2.series.end(), "kd") - t2.series.begin();
  ASSERT_LT(kd, t2.series.size());
  EXPECT_FALSE(t2.cells[0][kd]);
  EXPECT_NE(dgm::correlation_matrix_csv(tables).find("pooled"), std::string::npos);
  EXPECT_NE(dgm::correlation_cells_csv(tables).find("fd"), std::string::npos);
}

TEST(Correlate, NeedsThreeModels) {
  std::vector<dgm::MetricReport> reports = {report("a", "d", 1, 1), report("b", "d", 2, 2)};
  std::vector<dgm::HumanEvalRecord> human = {{"a", 0.1, 0.01, 5, ""}, {"b", 0.2, 0.01, 5, ""}};
  EXPECT_DGM_ERROR(dgm::correlate_reports(reports, human), ErrorCode::InsufficientOverlap);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 12345.0}) EXPECT_EQ(std::stod(dgm::format_double(v)), v);
}

}  // namespace

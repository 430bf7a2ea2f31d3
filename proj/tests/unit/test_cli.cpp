#include <fstream>
#include <sstream>

#include "dgm/analysis.h"
#include "dgm/cli.h"
#include "dgm/embedding_io.h"
#include "test_support.h"

namespace {

using namespace dgm::testing;

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "dgm");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  return dgm::run_cli(static_cast<int>(args.size()), argv.data());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_EQ(run({"synth", "--scenario", "memorized", "--seed", "2", "--out", (dir / "syn").string(), "--n-train",
                   "300", "--n-test", "300", "--n-gen", "300"}),
              0);
  }
  std::string p(const std::string& name) const { return (dir / "syn" / name).string(); }
  TempDir dir;
};

TEST_F(CliTest, SynthWritesSetsAndManifest) {
  EXPECT_EQ(dgm::read_embeddings(p("train.dgme")).rows(), 300u);
  EXPECT_EQ(dgm::read_embeddings(p("gen.dgme")).meta().encoder_id, "synthetic");
  auto manifest = dgm::Json::parse(read_file(p("manifest.json")));
  EXPECT_EQ(manifest["scenario"], "memorized");
}

TEST_F(CliTest, ComputeIsDeterministic) {
  std::vector<std::string> args = {"compute",  "--real", p("test.dgme"), "--gen",     p("gen.dgme"),
                                   "--train",  p("train.dgme"), "--test", p("test.dgme"), "--metrics",
                                   "fd,kd,prdc,authpct,ct,ct_mod,fls,fls_pog,vendi", "--seed", "4"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", (dir / "a.json").string()});
  b.insert(b.end(), {"--out", (dir / "b.json").string()});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  auto ja = dgm::Json::parse(read_file(dir / "a.json"));
  auto jb = dgm::Json::parse(read_file(dir / "b.json"));
  ja.erase("timestamp");
  jb.erase("timestamp");
  EXPECT_EQ(ja, jb);
  EXPECT_LT(ja["metrics"]["ct"]["value"].get<double>(), -5.0);
  EXPECT_EQ(ja["metrics"]["authpct"]["value"].get<double>(), 0.0);
  EXPECT_TRUE(ja["metrics"].contains("precision"));
  auto report = dgm::read_report(dir / "a.json");
  EXPECT_TRUE(report.metrics.at("fd").value.has_value());
}

TEST_F(CliTest, ComputeCsvFormat) {
  ASSERT_EQ(run({"compute", "--real", p("test.dgme"), "--gen", p("gen.dgme"), "--metrics", "fd,asw", "--format",
                 "csv", "--out", (dir / "r.csv").string()}),
            0);
  auto text = read_file(dir / "r.csv");
  EXPECT_NE(text.find("fd"), std::string::npos);
  EXPECT_NE(text.find("asw"), std::string::npos);
}

TEST_F(CliTest, MissingRoleIsUsageError) {
  EXPECT_EQ(run({"compute", "--gen", p("gen.dgme"), "--metrics", "fd"}), 2);
  EXPECT_EQ(run({"compute", "--gen", p("gen.dgme"), "--train", p("train.dgme"), "--metrics", "mem_ratio"}), 2);
  EXPECT_EQ(run({"compute", "--metrics", "bogus", "--gen", p("gen.dgme")}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
}

TEST_F(CliTest, AllMetricsFailingExitsThree) {
  auto tiny = dgm::EmbeddingSet::from_rows({{0.0, 0.0}, {1.0, 1.0}});
  dgm::write_embeddings(tiny, dir / "tiny.dgme");
  EXPECT_EQ(run({"compute", "--real", (dir / "tiny.dgme").string(), "--gen", (dir / "tiny.dgme").string(),
                 "--metrics", "prdc", "--out", (dir / "t.json").string()}),
            3);
  auto j = dgm::Json::parse(read_file(dir / "t.json"));
  EXPECT_TRUE(j["metrics"]["precision"]["value"].is_null());
  EXPECT_TRUE(j["metrics"]["precision"].contains("error"));
}

TEST_F(CliTest, EncoderMismatchRefused) {
  auto other = dgm::read_embeddings(p("gen.dgme")).with_meta({"other-encoder", "x"});
  dgm::write_embeddings(other, dir / "other.dgme");
  std::vector<std::string> args = {"compute", "--real", p("test.dgme"), "--gen", (dir / "other.dgme").string(),
                                   "--metrics", "fd", "--out", (dir / "m.json").string()};
  EXPECT_EQ(run(args), 2);
  args.push_back("--allow-encoder-mismatch");
  EXPECT_EQ(run(args), 0);
}

TEST_F(CliTest, MemcheckWritesMatches) {
  ASSERT_EQ(run({"memcheck", "--gen", p("gen.dgme"), "--train", p("train.dgme"), "--tau", "0.1", "--out",
                 (dir / "mem").string()}),
            0);
  auto csv = read_file(dir / "mem" / "matches.csv");
  EXPECT_EQ(csv.rfind("gen_index,train_index,l,memorized", 0), 0u);
  auto summary = dgm::Json::parse(read_file(dir / "mem" / "summary.json"));
  EXPECT_DOUBLE_EQ(summary["ratio"].get<double>(), 1.0);
  EXPECT_EQ(run({"memcheck", "--gen", p("gen.dgme"), "--train", p("train.dgme"), "--out", (dir / "m2").string()}),
            2);
}

TEST_F(CliTest, CorrelateReports) {
  const double err[] = {0.1, 0.25, 0.3, 0.5};
  std::ofstream human(dir / "human.csv");
  human << "model,error_rate,stderr,participants\n";
  std::filesystem::create_directories(dir / "reports");
  for (int i = 0; i < 4; ++i) {
    dgm::MetricReport r;
    r.model_id = "m" + std::to_string(i);
    r.dataset_id = "d";
    r.timestamp = "2026-01-01T00:00:00Z";
    r.metrics["fd"].value = 3.0 * err[i];
    dgm::write_json_atomic(r.to_json(), dir / "reports" / (r.model_id + ".json"));
    human << r.model_id << "," << err[i] << ",0.01,10\n";
  }
  human.close();
  ASSERT_EQ(run({"correlate", "--reports", (dir / "reports").string(), "--human", (dir / "human.csv").string(),
                 "--out", (dir / "corr").string()}),
            0);
  EXPECT_TRUE(std::filesystem::exists(dir / "corr" / "correlation_matrix.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "corr" / "correlation_cells.csv"));
  auto j = dgm::Json::parse(read_file(dir / "corr" / "correlation.json"));
  EXPECT_FALSE(j.empty());
}

TEST_F(CliTest, InfoReadsHeaders) {
  EXPECT_EQ(run({"info", p("train.dgme"), "--json"}), 0);
  EXPECT_EQ(run({"info", (dir / "missing.dgme").string()}), 2);
}

}  // namespace

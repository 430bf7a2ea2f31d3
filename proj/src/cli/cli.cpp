#include "dgm/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "compute.h"
#include "dgm/embedding_io.h"
#include "dgm/error.h"
#include "dgm/memorization.h"
#include "dgm/synthetic.h"

namespace dgm {

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAllFailed = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SynthArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  fs::path out;
  std::optional<double> scale;
  std::optional<double> scale_unchecked;
  std::size_t n_train = 1000, n_test = 1000, n_gen = 1000;
};

struct MemcheckArgs {
  fs::path gen, train, out;
  std::optional<double> tau;
  std::optional<std::size_t> k;
  bool intra_class = false;
};

struct CorrelateArgs {
  std::vector<fs::path> reports;
  fs::path human, out;
};

struct InfoArgs {
  std::vector<fs::path> files;
  bool json = false;
};

struct ComputeArgs {
  cli::ComputeSettings settings;
  std::string metrics;
  std::string fd_inf_grid;
  std::string ct_weighting = "test_fraction";
  std::optional<fs::path> out;
  std::string format = "json";
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorCode::IoFailure, "cannot create directory " + dir.string());
}

int cmd_compute(ComputeArgs& args) {
  auto& s = args.settings;
  s.metrics = split_list(args.metrics);
  for (const auto& v : split_list(args.fd_inf_grid)) s.fd_inf_grid.push_back(std::stoull(v));
  s.ct.weighting = args.ct_weighting == "gen_fraction" ? CellWeighting::gen_fraction : CellWeighting::test_fraction;

  const MetricReport report = cli::compute_report(s);
  const std::string text = args.format == "csv" ? cli::report_csv(report) : report.to_json().dump(2) + "\n";
  if (args.out) {
    write_text_atomic(text, *args.out);
  } else {
    std::cout << text;
  }
  const bool any_ok = std::any_of(report.metrics.begin(), report.metrics.end(),
                                  [](const auto& kv) { return kv.second.value.has_value(); });
  for (const auto& [name, entry] : report.metrics) {
    if (!entry.value) std::cerr << "dgm: " << name << " failed: " << entry.error_code << ": " << entry.error_message << "\n";
  }
  return any_ok ? kExitOk : kExitAllFailed;
}

int cmd_synth(const SynthArgs& args) {
  const auto kind = parse_scenario_kind(args.scenario);
  require(kind.has_value(), ErrorCode::InvalidArgument,
          "unknown scenario '" + args.scenario + "' (expected true_distribution, shrinkage, memorized or underfit)");
  SyntheticScenario sc;
  sc.kind = *kind;
  sc.seed = args.seed;
  sc.train_count = args.n_train;
  sc.test_count = args.n_test;
  sc.gen_count = args.n_gen;
  if (sc.kind == ScenarioKind::underfit) {
    require(!(args.scale && args.scale_unchecked), ErrorCode::InvalidArgument,
            "pass either --scale or --scale-unchecked, not both");
    if (args.scale_unchecked) {
      require(*args.scale_unchecked > 0.0 && std::isfinite(*args.scale_unchecked), ErrorCode::InvalidArgument,
              "--scale-unchecked must be positive");
      sc.underfit_scale = *args.scale_unchecked;
    } else {
      require(args.scale.has_value(), ErrorCode::InvalidArgument,
              "underfit needs --scale in {1.5, 3.0, 4.5} (or any positive value via --scale-unchecked)");
      require(is_standard_underfit_scale(*args.scale), ErrorCode::InvalidArgument,
              "--scale must be one of {1.5, 3.0, 4.5}; use --scale-unchecked for any positive value");
      sc.underfit_scale = *args.scale;
    }
  } else {
    require(!args.scale && !args.scale_unchecked, ErrorCode::InvalidArgument,
            "--scale only applies to the underfit scenario");
  }

  const ScenarioData data = generate_scenario(sc);
  ensure_directory(args.out);
  const std::string source = "synthetic/" + std::string(to_string(sc.kind)) + "/seed=" + std::to_string(sc.seed);
  write_embeddings(data.train.with_meta({"synthetic", source + "/train"}), args.out / "train.dgme");
  write_embeddings(data.test.with_meta({"synthetic", source + "/test"}), args.out / "test.dgme");
  write_embeddings(data.gen.with_meta({"synthetic", source + "/gen"}), args.out / "gen.dgme");

  Json manifest;
  manifest["scenario"] = to_string(sc.kind);
  manifest["seed"] = sc.seed;
  manifest["underfit_scale"] = sc.kind == ScenarioKind::underfit ? Json(sc.underfit_scale) : Json(nullptr);
  manifest["counts"] = {{"train", sc.train_count}, {"test", sc.test_count}, {"gen", sc.gen_count}};
  manifest["components"] = sc.components;
  manifest["dim"] = sc.dim;
  Json means = Json::array();
  Json variances = Json::array();
  for (Eigen::Index c = 0; c < data.params.means.rows(); ++c) {
    means.push_back(std::vector<double>(data.params.means.row(c).begin(), data.params.means.row(c).end()));
    variances.push_back(std::vector<double>(data.params.variances.row(c).begin(), data.params.variances.row(c).end()));
  }
  manifest["means"] = means;
  manifest["variances"] = variances;
  manifest["streams"] = {"params", "train", "test", "gen"};
  manifest["files"] = {{"train", "train.dgme"}, {"test", "test.dgme"}, {"gen", "gen.dgme"}};
  write_json_atomic(manifest, args.out / "manifest.json");
  std::cout << "wrote " << (args.out / "train.dgme").string() << ", test.dgme, gen.dgme, manifest.json\n";
  return kExitOk;
}

int cmd_memcheck(const MemcheckArgs& args) {
  require(args.tau.has_value(), ErrorCode::InvalidArgument,
          "--tau is required: the threshold has no default and needs to be hand-tuned "
          "(run once, inspect the printed l deciles, then choose tau)");
  MemorizationConfig cfg;
  cfg.tau = *args.tau;
  cfg.k = args.k;
  cfg.intra_class = args.intra_class;
  cfg.validate();
  const EmbeddingSet gen = read_embeddings(args.gen);
  const EmbeddingSet train = read_embeddings(args.train);
  const auto matches = calibrated_l2(gen, train, cfg);

  ensure_directory(args.out);
  std::ostringstream csv;
  csv << "gen_index,train_index,l,memorized\n";
  for (const auto& m : matches) {
    csv << m.gen_index << ',' << m.train_index << ',' << format_double(m.l) << ',' << (m.memorized ? 1 : 0) << '\n';
  }
  write_text_atomic(csv.str(), args.out / "matches.csv");

  std::vector<double> ls;
  for (const auto& m : matches) ls.push_back(m.l);
  std::sort(ls.begin(), ls.end());
  Json deciles = Json::array();
  std::cout << "l deciles:";
  for (int q = 0; q <= 10; ++q) {
    const double pos = q / 10.0 * static_cast<double>(ls.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, ls.size() - 1);
    const double v = ls[lo] + (pos - static_cast<double>(lo)) * (ls[hi] - ls[lo]);
    deciles.push_back(v);
    std::cout << ' ' << format_double(v);
  }
  const double ratio = memorization_ratio(matches);
  std::cout << "\nmemorization ratio at tau=" << format_double(cfg.tau) << ": " << format_double(ratio) << "\n";

  Json summary;
  summary["ratio"] = ratio;
  summary["tau"] = cfg.tau;
  summary["k"] = cfg.resolved_k();
  summary["intra_class"] = cfg.intra_class;
  summary["gen_count"] = gen.rows();
  summary["train_count"] = train.rows();
  summary["l_deciles"] = deciles;
  summary["inputs"] = {{"gen", args.gen.string()}, {"train", args.train.string()}};
  write_json_atomic(summary, args.out / "summary.json");
  return kExitOk;
}

int cmd_correlate(const CorrelateArgs& args) {
  std::vector<MetricReport> reports;
  for (const auto& path : args.reports) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.path().extension() == ".json") found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      for (const auto& f : found) reports.push_back(read_report(f));
    } else {
      reports.push_back(read_report(path));
    }
  }
  const auto human = read_human_csv(args.human);
  const auto tables = correlate_reports(reports, human);
  ensure_directory(args.out);
  write_text_atomic(correlation_matrix_csv(tables), args.out / "correlation_matrix.csv");
  write_text_atomic(correlation_cells_csv(tables), args.out / "correlation_cells.csv");
  Json j;
  j["thresholds"] = {{"strong_abs_r", kStrongCorrelation}, {"significance_p", kSignificanceLevel}};
  j["pooling"] = "concatenate";
  j["tables"] = Json::array();
  for (const auto& t : tables) j["tables"].push_back(to_json(t));
  write_json_atomic(j, args.out / "correlation.json");
  for (const auto& t : tables) {
    std::cout << t.dataset_id << ": " << t.models.size() << " models, " << t.series.size() << " series\n";
  }
  return kExitOk;
}

int cmd_info(const InfoArgs& args) {
  Json all = Json::array();
  for (const auto& path : args.files) {
    Json j;
    j["path"] = path.string();
    if (path.extension() == ".csv") {
      const EmbeddingSet set = read_embeddings(path);
      j["format"] = "csv";
      j["rows"] = set.rows();
      j["dim"] = set.dim();
      j["has_labels"] = set.has_labels();
      j["encoder_id"] = set.meta().encoder_id;
      j["source_id"] = set.meta().source_id;
    } else {
      const EmbeddingHeader h = read_header(path);
      j["format"] = "dgme";
      j["version"] = h.version;
      j["rows"] = h.rows;
      j["dim"] = h.dim;
      j["dtype"] = "float32";
      j["has_labels"] = h.has_labels;
      j["file_bytes"] = h.file_bytes;
      EmbeddingMeta meta;
      if (fs::exists(sidecar_path(path))) meta = read_embeddings(path).meta();
      j["encoder_id"] = meta.encoder_id;
      j["source_id"] = meta.source_id;
    }
    all.push_back(j);
  }
  if (args.json) {
    std::cout << all.dump(2) << "\n";
    return kExitOk;
  }
  for (const auto& j : all) {
    std::cout << j["path"].get<std::string>() << "\n";
    for (const auto& [key, value] : j.items()) {
      if (key == "path") continue;
      std::cout << "  " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Evaluation metrics for generative models over precomputed embeddings", "dgm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dgm 1.0.0");

  ComputeArgs compute;
  auto& s = compute.settings;
  auto* c = app.add_subcommand("compute", "Compute metrics and write a report");
  c->add_option("--real", s.real, "Reference (real) embeddings");
  c->add_option("--gen", s.gen, "Generated embeddings");
  c->add_option("--train", s.train, "Training embeddings");
  c->add_option("--test", s.test, "Held-out test embeddings");
  c->add_option("--probs", s.probs, "Class-probability matrix of generated samples (for is)");
  c->add_option("--metrics", compute.metrics, "Comma-separated metric names")->required();
  c->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  c->add_option("--model-id", s.model_id)->capture_default_str();
  c->add_option("--dataset-id", s.dataset_id)->capture_default_str();
  c->add_option("--out", compute.out, "Report path (default: stdout)");
  c->add_option("--format", compute.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  c->add_option("--prdc-k", s.prdc_k)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--prdc-cap", s.prdc_cap)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--rarity-k", s.rarity_k)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--kd-degree", s.kd_degree)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--kd-gamma", s.kd_gamma, "Default 1/d")->check(CLI::PositiveNumber);
  c->add_option("--kd-coef0", s.kd_coef0)->capture_default_str();
  c->add_option("--kd-subsets", s.kd_subsets, "0 uses the full sets")->capture_default_str();
  c->add_option("--kd-subset-size", s.kd_subset_size)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--vendi-kernel", s.vendi_kernel)->check(CLI::IsMember({"linear", "polynomial"}))->capture_default_str();
  c->add_flag("!--vendi-no-normalize", s.vendi_normalize, "Skip unit normalization");
  c->add_option("--fd-inf-grid", compute.fd_inf_grid, "Comma-separated sample sizes (default: automatic)");
  c->add_option("--fd-inf-repeats", s.fd_inf_repeats)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--fd-inf-axis", s.fd_inf_axis)->check(CLI::IsMember({"inverse_n", "n"}))->capture_default_str();
  c->add_option("--ct-cells", s.ct.cells)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--ct-pca", s.ct.pca_components)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--ct-min-cell", s.ct.min_cell_count)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--ct-weighting", compute.ct_weighting)
      ->check(CLI::IsMember({"test_fraction", "gen_fraction"}))
      ->capture_default_str();
  c->add_option("--fls-iters", s.fls_fit.iterations)->capture_default_str();
  c->add_option("--fls-step", s.fls_fit.step)->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--fls-a", s.fls_affine.a)->capture_default_str();
  c->add_option("--fls-b", s.fls_affine.b)->capture_default_str();
  c->add_option("--tau", s.tau, "Memorization threshold (required for mem_ratio)");
  c->add_option("--mem-k", s.mem_k, "Default 50, or 3 with --intra-class")->check(CLI::PositiveNumber);
  c->add_flag("--intra-class", s.intra_class);
  c->add_option("--is-marginal", s.is_marginal)
      ->check(CLI::IsMember({"generated_marginal", "train_frequencies"}))
      ->capture_default_str();
  c->add_flag("--allow-encoder-mismatch", s.allow_encoder_mismatch);

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "Write a synthetic memorization scenario");
  sy->add_option("--scenario", synth.scenario, "true_distribution | shrinkage | memorized | underfit")->required();
  sy->add_option("--seed", synth.seed)->capture_default_str();
  sy->add_option("--out", synth.out, "Output directory")->required();
  sy->add_option("--scale", synth.scale, "Underfit deviation multiplier: 1.5, 3.0 or 4.5");
  sy->add_option("--scale-unchecked", synth.scale_unchecked, "Any positive underfit multiplier");
  sy->add_option("--n-train", synth.n_train)->check(CLI::PositiveNumber)->capture_default_str();
  sy->add_option("--n-test", synth.n_test)->check(CLI::PositiveNumber)->capture_default_str();
  sy->add_option("--n-gen", synth.n_gen)->check(CLI::PositiveNumber)->capture_default_str();

  MemcheckArgs mem;
  auto* mc = app.add_subcommand("memcheck", "Calibrated l2 memorization check");
  mc->add_option("--gen", mem.gen)->required();
  mc->add_option("--train", mem.train)->required();
  mc->add_option("--out", mem.out, "Output directory")->required();
  mc->add_option("--tau", mem.tau, "Threshold; needs to be hand-tuned");
  mc->add_option("--k", mem.k, "Default 50, or 3 with --intra-class")->check(CLI::PositiveNumber);
  mc->add_flag("--intra-class", mem.intra_class);

  CorrelateArgs corr;
  auto* co = app.add_subcommand("correlate", "Correlate metric reports with human error rates");
  co->add_option("--reports", corr.reports, "Report files or directories")->required();
  co->add_option("--human", corr.human, "CSV: model,error_rate,stderr,participants")->required();
  co->add_option("--out", corr.out, "Output directory")->required();

  InfoArgs info;
  auto* in = app.add_subcommand("info", "Print embedding file headers");
  in->add_option("files", info.files)->required();
  in->add_flag("--json", info.json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_compute(compute);
    if (sy->parsed()) return cmd_synth(synth);
    if (mc->parsed()) return cmd_memcheck(mem);
    if (co->parsed()) return cmd_correlate(corr);
    if (in->parsed()) return cmd_info(info);
  } catch (const Error& e) {
    std::cerr << "dgm: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dgm: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dgm

#include "compute.h"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dgm/embedding_io.h"
#include "dgm/error.h"
#include "dgm/gaussian.h"
#include "dgm/memorization.h"
#include "dgm/random.h"

namespace dgm::cli {

namespace {

const std::map<std::string, std::vector<std::string>> kRoles{
    {"fd", {"real", "gen"}},          {"fd_inf", {"real", "gen"}},
    {"kd", {"real", "gen"}},          {"is", {"probs"}},
    {"fls", {"train", "gen", "test"}}, {"fls_pog", {"train", "gen", "test"}},
    {"prdc", {"real", "gen"}},        {"rarity", {"real", "gen"}},
    {"vendi", {"gen"}},               {"vendi_per_class", {"gen"}},
    {"authpct", {"train", "gen"}},    {"ct", {"train", "gen", "test"}},
    {"ct_mod", {"train", "gen", "test"}}, {"mem_ratio", {"train", "gen"}},
    {"asw", {"real", "gen"}},
};

const std::optional<std::filesystem::path>& role_path(const ComputeSettings& s, const std::string& role) {
  if (role == "real") return s.real;
  if (role == "gen") return s.gen;
  if (role == "train") return s.train;
  if (role == "test") return s.test;
  return s.probs;
}

std::uint64_t metric_seed(std::uint64_t root, const std::string& name) {
  return CounterRng(root).substream(name).next_u64();
}

KernelSpec kd_kernel(const ComputeSettings& s) { return KernelSpec::polynomial(s.kd_degree, s.kd_gamma, s.kd_coef0); }

KernelSpec vendi_kernel(const ComputeSettings& s) {
  return s.vendi_kernel == "linear" ? KernelSpec::linear() : KernelSpec::polynomial(3);
}

TrendAxis trend_axis(const ComputeSettings& s) { return s.fd_inf_axis == "n" ? TrendAxis::n : TrendAxis::inverse_n; }

Json kernel_json(const KernelSpec& k, std::size_t dim) {
  if (k.kind == KernelSpec::Kind::linear) return {{"kind", "linear"}};
  return {{"kind", "polynomial"}, {"degree", k.degree}, {"gamma", k.resolved_gamma(dim)}, {"coef0", k.coef0}};
}

Json settings_json(const ComputeSettings& s) {
  Json j;
  j["metrics"] = s.metrics;
  j["seed"] = s.seed;
  j["prdc"] = {{"k", s.prdc_k}, {"sample_cap", s.prdc_cap}, {"ball", "closed"}};
  j["rarity"] = {{"k", s.rarity_k}, {"reference", "real"}, {"ball", "closed"}};
  j["kd"] = {{"kernel", "polynomial"},
             {"degree", s.kd_degree},
             {"gamma", s.kd_gamma ? Json(*s.kd_gamma) : Json("1/d")},
             {"coef0", s.kd_coef0},
             {"estimator", "unbiased"},
             {"subsets", s.kd_subsets},
             {"subset_size", s.kd_subset_size}};
  j["vendi"] = {{"kernel", s.vendi_kernel}, {"normalize", s.vendi_normalize}};
  j["fd_inf"] = {{"grid", s.fd_inf_grid.empty() ? Json("auto") : Json(s.fd_inf_grid)},
                 {"points", kFdInfinityPoints},
                 {"repeats", s.fd_inf_repeats},
                 {"axis", s.fd_inf_axis}};
  j["ct"] = {{"cells", s.ct.cells},
             {"pca_components", s.ct.pca_components},
             {"min_cell_count", s.ct.min_cell_count},
             {"weighting", to_string(s.ct.weighting)},
             {"kmeans_max_iterations", KMeansOptions{}.max_iterations},
             {"kmeans_tolerance", KMeansOptions{}.tolerance}};
  j["fls"] = {{"iterations", s.fls_fit.iterations},
              {"step", s.fls_fit.step},
              {"max_halvings", s.fls_fit.max_halvings},
              {"variance_floor", kMinKdeVariance},
              {"affine_a", s.fls_affine.a},
              {"affine_b", s.fls_affine.b}};
  MemorizationConfig mem;
  mem.k = s.mem_k;
  mem.intra_class = s.intra_class;
  j["memorization"] = {{"tau", s.tau ? Json(*s.tau) : Json(nullptr)},
                       {"k", mem.resolved_k()},
                       {"intra_class", s.intra_class}};
  j["is"] = {{"marginal", s.is_marginal}};
  return j;
}

Json input_json(const std::filesystem::path& path, const EmbeddingSet& set) {
  return {{"path", path.string()},     {"rows", set.rows()},
          {"dim", set.dim()},          {"has_labels", set.has_labels()},
          {"encoder_id", set.meta().encoder_id}, {"source_id", set.meta().source_id}};
}

// Linear-interpolation quantiles of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

MetricReport compute_report(const ComputeSettings& settings) {
  require(!settings.metrics.empty(), ErrorCode::InvalidArgument, "no metrics requested");
  std::vector<std::string> missing;
  std::set<std::string> needed;
  for (const auto& m : settings.metrics) {
    const auto it = kRoles.find(m);
    require(it != kRoles.end(), ErrorCode::InvalidArgument, "unknown metric '" + m + "'");
    for (const auto& role : it->second) {
      needed.insert(role);
      if (!role_path(settings, role) &&
          std::find(missing.begin(), missing.end(), role) == missing.end()) {
        missing.push_back(role);
      }
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& r : missing) names += (names.empty() ? "" : ", ") + r;
    fail(ErrorCode::MissingRole, "requested metrics need input role(s): " + names + " (pass --" + missing.front() + ")");
  }
  const bool wants_mem = std::find(settings.metrics.begin(), settings.metrics.end(), "mem_ratio") != settings.metrics.end();
  require(!wants_mem || settings.tau.has_value(), ErrorCode::InvalidArgument,
          "mem_ratio needs --tau; the threshold has no default and needs to be hand-tuned");

  MetricReport report;
  report.model_id = settings.model_id;
  report.dataset_id = settings.dataset_id;
  report.timestamp = utc_timestamp();
  report.config = settings_json(settings);

  std::map<std::string, EmbeddingSet> sets;
  for (const auto& role : needed) {
    const auto& path = *role_path(settings, role);
    sets.emplace(role, read_embeddings(path));
    report.inputs[role] = input_json(path, sets.at(role));
  }
  if (!settings.allow_encoder_mismatch) {
    std::string encoder;
    std::string first_role;
    for (const auto& [role, set] : sets) {
      if (role == "probs" || set.meta().encoder_id.empty()) continue;
      if (encoder.empty()) {
        encoder = set.meta().encoder_id;
        first_role = role;
      }
      require(set.meta().encoder_id == encoder, ErrorCode::InvalidArgument,
              "encoder mismatch: " + first_role + " uses '" + encoder + "', " + role + " uses '" +
                  set.meta().encoder_id + "' (override with --allow-encoder-mismatch)");
    }
  }
  auto set = [&](const char* role) -> const EmbeddingSet& { return sets.at(role); };

  auto record_failure = [&](const std::vector<std::string>& names, const Json& params, const std::string& code,
                            const std::string& message) {
    for (const auto& n : names) {
      MetricEntry e;
      e.error_code = code;
      e.error_message = message;
      e.params = params;
      report.metrics[n] = std::move(e);
    }
  };
  // fn fills params first, then values; a throw records the error under every name.
  auto run = [&](const std::vector<std::string>& names, const std::function<void(Json&)>& fn) {
    Json params = Json::object();
    try {
      fn(params);
    } catch (const Error& e) {
      std::string message = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      if (message.rfind(prefix, 0) == 0) message = message.substr(prefix.size());
      record_failure(names, params, std::string(to_string(e.code())), message);
    } catch (const std::exception& e) {
      record_failure(names, params, "InternalError", e.what());
    }
  };
  auto put = [&](const std::string& name, double value, const Json& params, Json details = Json::object()) {
    MetricEntry e;
    e.value = value;
    e.params = params;
    e.details = std::move(details);
    report.metrics[name] = std::move(e);
  };

  std::optional<MogKde> kde;
  auto fitted_kde = [&]() -> const MogKde& {
    if (!kde) kde = fit_mog_kde(set("gen"), set("train"), settings.fls_fit);
    return *kde;
  };
  auto fls_params = [&](Json& p) {
    p = {{"iterations", settings.fls_fit.iterations}, {"step", settings.fls_fit.step},
         {"max_halvings", settings.fls_fit.max_halvings}, {"variance_floor", kMinKdeVariance},
         {"affine_a", settings.fls_affine.a}, {"affine_b", settings.fls_affine.b},
         {"pog_rule", "log mean component likelihood, train > test (strict)"}};
  };

  std::set<std::string> done;
  for (const auto& metric : settings.metrics) {
    if (!done.insert(metric).second) continue;
    if (metric == "fd") {
      run({"fd"}, [&](Json& p) {
        p = {{"covariance", "unbiased (n - 1)"}, {"fallback_jitter", 1e-6}};
        put("fd", frechet_distance(summarize_gaussian(set("real")), summarize_gaussian(set("gen"))), p);
      });
    } else if (metric == "fd_inf") {
      run({"fd_inf"}, [&](Json& p) {
        FdInfinityOptions opt;
        opt.grid = settings.fd_inf_grid;
        opt.repeats = settings.fd_inf_repeats;
        opt.axis = trend_axis(settings);
        const std::uint64_t seed = metric_seed(settings.seed, metric);
        const auto grid =
            opt.grid.empty() ? fd_infinity_grid(std::min(set("real").rows(), set("gen").rows())) : opt.grid;
        p = {{"grid", grid}, {"repeats", opt.repeats}, {"axis", to_string(opt.axis)}, {"seed", seed}};
        opt.grid = grid;
        const FdInfinityFit fit = fd_infinity(set("real"), set("gen"), seed, opt);
        put("fd_inf", fit.fd_infinity(), p,
            {{"sizes", fit.sizes}, {"fd_values", fit.fd_values}, {"slope", fit.slope},
             {"intercept", fit.intercept}, {"degenerate", fit.degenerate}});
      });
    } else if (metric == "kd") {
      run({"kd"}, [&](Json& p) {
        const KernelSpec kernel = kd_kernel(settings);
        p = kernel_json(kernel, set("gen").dim());
        p["estimator"] = "unbiased";
        if (settings.kd_subsets == 0) {
          p["subsets"] = 0;
          put("kd", kernel_distance(set("gen"), set("real"), kernel), p);
        } else {
          KdSubsetOptions opt{settings.kd_subsets, settings.kd_subset_size, metric_seed(settings.seed, metric)};
          p["subsets"] = opt.subsets;
          p["subset_size"] = opt.subset_size;
          p["seed"] = opt.seed;
          put("kd", kernel_distance_subsets(set("gen"), set("real"), kernel, opt), p);
        }
      });
    } else if (metric == "is") {
      run({"is"}, [&](Json& p) {
        const ProbabilityMatrix probs = ProbabilityMatrix::from_set(set("probs"));
        p = {{"marginal", settings.is_marginal}, {"classes", probs.classes()}};
        MarginalMode mode = GeneratedMarginal{};
        if (settings.is_marginal == "train_frequencies") {
          require(settings.train.has_value(), ErrorCode::MissingRole,
                  "train_frequencies marginal needs --train with labels");
          const EmbeddingSet train = read_embeddings(*settings.train);
          require(train.has_labels(), ErrorCode::MissingLabels, "train_frequencies marginal needs training labels");
          std::vector<double> freq(probs.classes(), 0.0);
          for (auto label : train.labels()) {
            require(static_cast<std::size_t>(label) < freq.size(), ErrorCode::InvalidLabel,
                    "training label " + std::to_string(label) + " exceeds the class count");
            freq[static_cast<std::size_t>(label)] += 1.0;
          }
          for (double& f : freq) f /= static_cast<double>(train.rows());
          p["frequencies"] = freq;
          mode = TrainFrequencies{std::move(freq)};
        }
        put("is", inception_style_score(probs, mode), p);
      });
    } else if (metric == "prdc") {
      run({"precision", "recall", "density", "coverage"}, [&](Json& p) {
        const std::uint64_t seed = metric_seed(settings.seed, metric);
        p = {{"k", settings.prdc_k}, {"sample_cap", settings.prdc_cap}, {"seed", seed}, {"ball", "closed"}};
        const PrdcResult r = prdc(set("gen"), set("real"), settings.prdc_k, settings.prdc_cap, seed);
        p["real_count"] = r.real_count;
        p["gen_count"] = r.gen_count;
        put("precision", r.precision, p);
        put("recall", r.recall, p);
        put("density", r.density, p);
        put("coverage", r.coverage, p);
      });
    } else if (metric == "rarity") {
      run({"rarity"}, [&](Json& p) {
        p = {{"k", settings.rarity_k}, {"reference", "real"}, {"ball", "closed"}, {"summary", "mean over on-manifold"}};
        const NeighborhoodIndex index = build_index(set("real"), settings.rarity_k);
        const RarityResult r = rarity(set("gen"), index);
        require(r.on_manifold_count() > 0, ErrorCode::EmptyInput, "no generated row is on-manifold");
        double total = 0.0;
        for (const auto& v : r.values) total += v.value_or(0.0);
        put("rarity", total / static_cast<double>(r.on_manifold_count()), p,
            {{"on_manifold_fraction", r.on_manifold_fraction}, {"on_manifold_count", r.on_manifold_count()}});
      });
    } else if (metric == "vendi") {
      run({"vendi"}, [&](Json& p) {
        const KernelSpec kernel = vendi_kernel(settings);
        p = {{"kernel", kernel_json(kernel, set("gen").dim())}, {"normalize", settings.vendi_normalize}};
        const VendiResult r = vendi_score(set("gen"), kernel, settings.vendi_normalize);
        p["dual"] = r.dual;
        put("vendi", r.score, p);
      });
    } else if (metric == "vendi_per_class") {
      run({"vendi_per_class"}, [&](Json& p) {
        const KernelSpec kernel = vendi_kernel(settings);
        p = {{"kernel", kernel_json(kernel, set("gen").dim())}, {"normalize", settings.vendi_normalize},
             {"averaging", "equal class weights"}};
        const PerClassVendi r = per_class_vendi(set("gen"), kernel, settings.vendi_normalize);
        Json per_class = Json::object();
        for (const auto& [label, score] : r.per_class) per_class[std::to_string(label)] = score;
        put("vendi_per_class", r.mean, p, {{"per_class", per_class}});
      });
    } else if (metric == "authpct") {
      run({"authpct"}, [&](Json& p) {
        p = {{"rule", "authentic unless d(gen, NN_train) < NN gap of that training row"}};
        put("authpct", auth_pct(set("gen"), set("train")), p);
      });
    } else if (metric == "ct" || metric == "ct_mod") {
      run({metric}, [&](Json& p) {
        CtConfig cfg = settings.ct;
        cfg.seed = metric_seed(settings.seed, "ct");
        p = {{"cells", cfg.cells}, {"pca_components", cfg.pca_components}, {"min_cell_count", cfg.min_cell_count},
             {"weighting", to_string(cfg.weighting)}, {"seed", cfg.seed},
             {"kmeans_max_iterations", KMeansOptions{}.max_iterations},
             {"kmeans_tolerance", KMeansOptions{}.tolerance}, {"roles_swapped", metric == "ct_mod"}};
        const CtResult r = metric == "ct" ? ct_score(set("train"), set("gen"), set("test"), cfg)
                                          : ct_modified(set("train"), set("gen"), set("test"), cfg);
        p["pca_components_used"] = r.pca_components;
        Json cells = Json::array();
        for (const auto& c : r.cells) {
          cells.push_back({{"train_count", c.train_count}, {"gen_count", c.gen_count}, {"test_count", c.test_count},
                           {"admissible", c.admissible}, {"z", c.z}, {"weight", c.weight}});
        }
        put(metric, r.score, p, {{"cells", cells}});
      });
    } else if (metric == "fls" || metric == "fls_pog") {
      run({metric}, [&](Json& p) {
        fls_params(p);
        const MogKde& fit = fitted_kde();
        const FlsResult r = fls_metrics(fit, set("train"), set("test"), settings.fls_affine);
        Json details{{"fit_iterations", fit.iterations},
                     {"final_train_log_likelihood", fit.final_train_log_likelihood()},
                     {"mean_test_log_likelihood", r.mean_test_log_likelihood}};
        put(metric, metric == "fls" ? r.fls : r.pog, p, details);
      });
    } else if (metric == "mem_ratio") {
      run({"mem_ratio"}, [&](Json& p) {
        MemorizationConfig cfg;
        cfg.k = settings.mem_k;
        cfg.tau = *settings.tau;
        cfg.intra_class = settings.intra_class;
        p = {{"tau", cfg.tau}, {"k", cfg.resolved_k()}, {"intra_class", cfg.intra_class}};
        const auto matches = calibrated_l2(set("gen"), set("train"), cfg);
        std::vector<double> ls;
        for (const auto& m : matches) ls.push_back(m.l);
        std::sort(ls.begin(), ls.end());
        Json deciles = Json::array();
        for (int q = 0; q <= 10; ++q) deciles.push_back(quantile(ls, q / 10.0));
        put("mem_ratio", memorization_ratio(matches), p, {{"l_deciles", deciles}});
      });
    } else if (metric == "asw") {
      run({"asw"}, [&](Json& p) {
        p = {{"second_moment", "population (1/n)"}};
        put("asw", asw(set("real"), set("gen")), p);
      });
    }
  }
  return report;
}

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "metric,value,error_code\n";
  for (const auto& [name, entry] : report.metrics) {
    out << name << ',' << (entry.value ? format_double(*entry.value) : "") << ',' << entry.error_code << '\n';
  }
  return out.str();
}

}  // namespace dgm::cli

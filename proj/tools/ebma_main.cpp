// Batch front end: dataset ingestion, method selection, simulation and
// cross-validation execution, CSV/JSON reporting.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ebma/cv.hpp"
#include "ebma/errors.hpp"
#include "ebma/io.hpp"
#include "ebma/methods.hpp"
#include "ebma/simulation.hpp"
#include "ebma/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ebma;

namespace {

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string header_line(const std::string& command, std::uint64_t seed,
                        const std::string& manifest_hash,
                        const std::string& extra = "") {
  std::ostringstream out;
  out << "# ebma " << kVersion << " command=" << command << " seed=" << seed
      << " manifest=" << manifest_hash;
  if (!extra.empty()) out << ' ' << extra;
  return out.str();
}

struct CommonFitFlags {
  std::string model_prior = "betabinomial";
  int k_max = -1;  // -1 = unset
  double trim = 0.10;
  double fixed_g = 0.0;  // 0 = unset
  double hyper_a = 3.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model-prior", model_prior, "Model prior: betabinomial or uniform");
    cmd->add_option("--k-max", k_max, "Cap on the number of predictors per model");
    cmd->add_option("--trim", trim, "Trim fraction for robust targets (default 0.10)");
    cmd->add_option("--g", fixed_g, "Scale for the fixed-g method (default n)");
    cmd->add_option("--hyper-a", hyper_a, "Heavy-tailed prior parameter a (default 3)");
  }

  MethodOptions to_options() const {
    MethodOptions opts;
    opts.prior_kind = prior_kind_from_tag(model_prior);
    if (k_max >= 0) opts.k_max = k_max;
    opts.trim_frac = trim;
    if (fixed_g > 0.0) opts.fixed_g = fixed_g;
    opts.hyper_a = hyper_a;
    return opts;
  }

  std::string manifest_part() const {
    std::ostringstream out;
    out << "prior=" << model_prior << "|kmax=" << k_max << "|trim=" << format_g17(trim)
        << "|g=" << format_g17(fixed_g) << "|a=" << format_g17(hyper_a);
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

void write_fit_artifacts(const std::string& out_dir, const std::string& header,
                         const NamedDataset& named, Method method,
                         const MethodFit& fit, const json& manifest_json) {
  fs::create_directories(out_dir);
  const Dataset& data = named.data;
  const int p = static_cast<int>(data.p());

  std::ostringstream models;
  models << header << "\nmodel,log_marginal,post_prob\n";
  std::ostringstream inclusion;
  inclusion << header << "\npredictor,inclusion_prob\n";
  std::ostringstream coefficients;
  coefficients << header << "\npredictor,beta_bma\n";

  if (fit.posterior) {
    const EnsemblePosterior& post = *fit.posterior;
    for (std::size_t i = 0; i < post.models.size(); ++i) {
      models << post.models[i].bitstring() << ','
             << format_g17(post.log_marginals[static_cast<Eigen::Index>(i)]) << ','
             << format_g17(post.post_probs[static_cast<Eigen::Index>(i)]) << '\n';
    }
    for (int j = 0; j < p; ++j) {
      inclusion << named.predictors[static_cast<std::size_t>(j)] << ','
                << format_g17(post.inclusion_probs[j]) << '\n';
    }
  } else {
    models << ModelIndex::full_model(p).bitstring() << ",nan,1\n";
    for (int j = 0; j < p; ++j) {
      inclusion << named.predictors[static_cast<std::size_t>(j)] << ",1\n";
    }
  }
  for (int j = 0; j < p; ++j) {
    coefficients << named.predictors[static_cast<std::size_t>(j)] << ','
                 << format_g17(fit.plane.beta[j]) << '\n';
  }

  write_text_file(out_dir + "/models.csv", models.str());
  write_text_file(out_dir + "/inclusion.csv", inclusion.str());
  write_text_file(out_dir + "/coefficients.csv", coefficients.str());

  if (!fit.hyperparams.empty()) {
    std::ostringstream hp;
    hp << header << "\nmodel,g,rho,objective,converged,theta\n";
    for (const auto& rec : fit.hyperparams) {
      hp << rec.model.bitstring() << ',';
      hp << (rec.g ? format_g17(*rec.g) : "") << ',';
      hp << (rec.rho ? format_g17(*rec.rho) : "") << ',';
      hp << (rec.objective ? format_g17(*rec.objective) : "") << ',';
      hp << (rec.converged ? '1' : '0') << ',';
      for (Eigen::Index t = 0; t < rec.theta.size(); ++t) {
        if (t > 0) hp << ';';
        hp << format_g17(rec.theta[t]);
      }
      hp << '\n';
    }
    write_text_file(out_dir + "/hyperparams.csv", hp.str());
  }

  json fj = manifest_json;
  fj["version"] = kVersion;
  fj["method"] = method_tag(method);
  fj["response"] = named.response;
  fj["predictors"] = named.predictors;
  fj["ybar_train"] = fit.plane.ybar_train;
  fj["col_means"] = std::vector<double>(fit.plane.col_means.data(),
                                        fit.plane.col_means.data() + p);
  fj["beta_bma"] =
      std::vector<double>(fit.plane.beta.data(), fit.plane.beta.data() + p);
  fj["warning"] = fit.warning;
  write_text_file(out_dir + "/fit.json", fj.dump(2) + "\n");
}

int cmd_fit(const std::string& data_path, const std::string& response,
            const std::string& method_tag_str, const CommonFitFlags& flags,
            std::uint64_t seed, const std::string& out_dir) {
  const Method method = method_from_tag(method_tag_str);
  const NamedDataset named = load_dataset_csv(data_path, response);
  const MethodOptions opts = flags.to_options();

  std::ostringstream manifest;
  manifest << "fit|data=" << data_path << "|response=" << response
           << "|method=" << method_tag_str << '|' << flags.manifest_part()
           << "|seed=" << seed;
  const std::string hash = hex16(fnv1a64(manifest.str()));
  const std::string header = header_line("fit", seed, hash);

  const MethodFit fit = fit_method(named.data, method, opts);

  json mj;
  mj["command"] = "fit";
  mj["seed"] = seed;
  mj["manifest"] = hash;
  mj["model_prior"] = flags.model_prior;
  if (flags.k_max >= 0) {
    mj["k_max"] = flags.k_max;
  } else {
    mj["k_max"] = nullptr;
  }
  mj["trim"] = flags.trim;
  if (flags.fixed_g > 0.0) {
    mj["fixed_g"] = flags.fixed_g;
  } else {
    mj["fixed_g"] = nullptr;
  }
  mj["hyper_a"] = flags.hyper_a;

  write_fit_artifacts(out_dir, header, named, method, fit, mj);
  if (fit.warning) {
    std::cerr << "warning: some per-model fits carried a convergence or "
                 "multimodality flag\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int cmd_predict(const std::string& fit_dir, const std::string& test_path,
                const std::string& out_path) {
  const json fj = json::parse(read_text_file(fit_dir + "/fit.json"));
  const std::vector<std::string> predictors = fj.at("predictors");
  const double ybar = fj.at("ybar_train");
  const std::vector<double> means = fj.at("col_means");
  const std::vector<double> beta = fj.at("beta_bma");
  const std::uint64_t seed = fj.at("seed");

  const DataTable table = read_csv_table(test_path);
  const int p = static_cast<int>(predictors.size());
  MatrixXd x(table.values.rows(), p);
  std::vector<std::string> missing;
  for (int j = 0; j < p; ++j) {
    const int col = table.column_index(predictors[static_cast<std::size_t>(j)]);
    if (col < 0) {
      missing.push_back(predictors[static_cast<std::size_t>(j)]);
      continue;
    }
    x.col(j) = table.values.col(col);
  }
  if (!missing.empty()) {
    std::string msg = test_path + ": missing predictor columns:";
    for (const auto& name : missing) msg += " " + name;
    throw InvalidInputError(msg);
  }

  FittedModel plane;
  plane.ybar_train = ybar;
  plane.col_means = Eigen::Map<const VectorXd>(means.data(), p);
  plane.beta = Eigen::Map<const VectorXd>(beta.data(), p);
  const VectorXd pred = plane.predict(x);

  std::ostringstream manifest;
  manifest << "predict|fit=" << fj.at("manifest").get<std::string>()
           << "|test=" << test_path;
  std::ostringstream out;
  out << header_line("predict", seed, hex16(fnv1a64(manifest.str()))) << '\n';
  out << "row,prediction\n";
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    out << (i + 1) << ',' << format_g17(pred[i]) << '\n';
  }
  write_text_file(out_path, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

ContaminationScheme parse_scheme(const json& j, const std::string& field,
                                 std::vector<std::string>& bad) {
  ContaminationScheme scheme;
  if (j.is_null()) return scheme;
  const std::string kind = j.value("kind", "none");
  if (kind == "none") {
    scheme.kind = ContaminationScheme::Kind::None;
  } else if (kind == "mean-shift") {
    scheme.kind = ContaminationScheme::Kind::MeanShift;
  } else if (kind == "variance-inflation") {
    scheme.kind = ContaminationScheme::Kind::VarianceInflation;
  } else {
    bad.push_back(field + ".kind");
  }
  scheme.k_value = j.value("k", 0.0);
  scheme.pi = j.value("pi", 0.0);
  const std::string sel = j.value("selection", "fixed-count");
  if (sel == "fixed-count") {
    scheme.selection = ContaminationScheme::Selection::FixedCount;
  } else if (sel == "bernoulli") {
    scheme.selection = ContaminationScheme::Selection::Bernoulli;
  } else {
    bad.push_back(field + ".selection");
  }
  return scheme;
}

SimConfig parse_sim_config(const json& j) {
  std::vector<std::string> bad;
  SimConfig cfg;
  cfg.n_train = j.value("n_train", 100);
  cfg.n_test = j.value("n_test", 100);
  cfg.p = j.value("p", 0);
  cfg.corr = j.value("corr", 0.6);
  if (j.contains("beta_true") && j["beta_true"].is_array()) {
    const std::vector<double> b = j["beta_true"];
    cfg.beta_true = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  } else {
    bad.push_back("beta_true");
  }
  cfg.sigma = j.value("sigma", 1.0);
  cfg.alpha = j.value("alpha", 0.0);
  cfg.train_scheme = parse_scheme(j.value("train_scheme", json()), "train_scheme", bad);
  cfg.test_scheme = parse_scheme(j.value("test_scheme", json()), "test_scheme", bad);
  cfg.n_reps = j.value("n_reps", 0);
  cfg.seed = j.value("seed", 0ULL);

  try {
    for (const std::string& tag : j.value("methods", std::vector<std::string>{})) {
      cfg.methods.push_back(method_from_tag(tag));
    }
  } catch (const InvalidInputError&) {
    bad.push_back("methods");
  }
  try {
    cfg.reference_method = method_from_tag(j.value("reference_method", ""));
  } catch (const InvalidInputError&) {
    bad.push_back("reference_method");
  }
  try {
    cfg.method_options.prior_kind =
        prior_kind_from_tag(j.value("model_prior", "betabinomial"));
  } catch (const InvalidInputError&) {
    bad.push_back("model_prior");
  }
  if (j.contains("k_max") && !j["k_max"].is_null()) {
    cfg.method_options.k_max = j["k_max"].get<int>();
  }
  cfg.method_options.trim_frac = j.value("trim", 0.10);
  if (j.contains("fixed_g") && !j["fixed_g"].is_null()) {
    cfg.method_options.fixed_g = j["fixed_g"].get<double>();
  }
  cfg.method_options.hyper_a = j.value("hyper_a", 3.0);

  if (!bad.empty()) {
    std::string msg = "invalid simulation config, offending fields:";
    for (const auto& f : bad) msg += " " + f;
    throw ConfigError(msg);
  }
  return cfg;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads) {
  const json j = json::parse(read_text_file(config_path));
  const SimConfig cfg = parse_sim_config(j);
  cfg.validate();

  // hash the parsed content, not the file path, so equal manifests give
  // byte-identical outputs regardless of where the config lives
  const std::string hash = hex16(fnv1a64("simulate|" + j.dump()));
  const std::string header = header_line("simulate", cfg.seed, hash);

  const SimReport report = run_simulation(cfg, threads);
  fs::create_directories(out_dir);
  write_text_file(out_dir + "/reps.csv", sim_rows_csv(report, header));
  write_text_file(out_dir + "/summary.csv", sim_summary_csv(report, header));
  return 0;
}

// ---------------------------------------------------------------------------
// cv
// ---------------------------------------------------------------------------

int cmd_cv(const std::string& data_path, const std::string& response,
           const std::string& methods_csv, int k_folds, int t_reps,
           const std::string& reference, std::uint64_t seed,
           const CommonFitFlags& flags, bool log_response,
           const std::string& out_path, int threads) {
  std::vector<Method> methods;
  {
    std::istringstream ss(methods_csv);
    std::string tag;
    while (std::getline(ss, tag, ',')) {
      if (!tag.empty()) methods.push_back(method_from_tag(tag));
    }
  }
  if (methods.empty()) throw InvalidInputError("cv: no methods given");
  const Method ref = method_from_tag(reference);
  if (std::find(methods.begin(), methods.end(), ref) == methods.end()) {
    throw InvalidInputError("cv: reference method must be in --methods");
  }

  const NamedDataset named = load_dataset_csv(data_path, response, log_response);
  const int n = static_cast<int>(named.data.n());
  if (k_folds > n) throw InvalidInputError("cv: K exceeds the number of cases");
  if (t_reps < 1) throw InvalidInputError("cv: need T >= 1");
  const MethodOptions opts = flags.to_options();

  // one shared set of partitions so every method sees the same splits
  Rng rng(seed);
  const std::vector<FoldPartition> parts = draw_partitions(n, k_folds, t_reps, rng);

  std::vector<double> ecve(methods.size(), 0.0);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    double total = 0.0;
    for (const auto& part : parts) {
      total += cve(named.data, methods[m], opts, part, threads);
    }
    ecve[m] = total / static_cast<double>(parts.size());
  }
  const auto ref_idx = static_cast<std::size_t>(
      std::find(methods.begin(), methods.end(), ref) - methods.begin());

  std::ostringstream manifest;
  manifest << "cv|data=" << data_path << "|response=" << response
           << "|methods=" << methods_csv << "|k=" << k_folds << "|t=" << t_reps
           << "|reference=" << reference << "|seed=" << seed << '|'
           << flags.manifest_part() << "|log=" << (log_response ? 1 : 0);
  std::ostringstream out;
  out << header_line("cv", seed, hex16(fnv1a64(manifest.str())),
                     std::string("log_response=") + (log_response ? "1" : "0"))
      << '\n';
  out << "method,K,T,ecve,percent_reduction_vs_reference\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const double red = 100.0 * (ecve[ref_idx] - ecve[m]) / ecve[ref_idx];
    out << method_tag(methods[m]) << ',' << k_folds << ','
        << static_cast<int>(parts.size()) << ',' << format_g17(ecve[m]) << ','
        << format_g17(red) << '\n';
  }
  write_text_file(out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian model averaging for linear regression with tunable g priors"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "Fit one method to a CSV dataset");
  std::string fit_data, fit_response, fit_method_tag, fit_out;
  std::uint64_t fit_seed = 0;
  CommonFitFlags fit_flags;
  fit->add_option("--data", fit_data, "Dataset CSV")->required();
  fit->add_option("--response", fit_response, "Response column name")->required();
  fit->add_option("--method", fit_method_tag,
                  "fixed-g | eb-local | eb-global | hyper-gn | null-mixture | robust-full")
      ->required();
  fit_flags.add_to(fit);
  fit->add_option("--seed", fit_seed, "Recorded in output headers");
  fit->add_option("--out", fit_out, "Output directory")->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Predict new cases from a saved fit");
  std::string pred_fit, pred_test, pred_out;
  predict->add_option("--fit", pred_fit, "Directory written by fit")->required();
  predict->add_option("--test", pred_test, "Test CSV with the predictor columns")
      ->required();
  predict->add_option("--out", pred_out, "Predictions CSV")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run a contamination study");
  std::string sim_config, sim_out;
  int sim_threads = 1;
  simulate->add_option("--config", sim_config, "JSON study configuration")->required();
  simulate->add_option("--out", sim_out, "Output directory")->required();
  simulate->add_option("--threads", sim_threads, "Worker threads (default 1)");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "K-fold cross-validation scoring");
  std::string cv_data, cv_response, cv_methods, cv_reference, cv_out;
  int cv_k = 10, cv_t = 1, cv_threads = 1;
  std::uint64_t cv_seed = 0;
  bool cv_log = false;
  CommonFitFlags cv_flags;
  cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
  cv_cmd->add_option("--response", cv_response, "Response column name")->required();
  cv_cmd->add_option("--methods", cv_methods, "Comma-separated method tags")->required();
  cv_cmd->add_option("--k", cv_k, "Number of folds")->required();
  cv_cmd->add_option("--t", cv_t, "Number of random partitions")->required();
  cv_cmd->add_option("--reference", cv_reference, "Reference method tag")->required();
  cv_cmd->add_option("--seed", cv_seed, "Partition seed")->required();
  cv_flags.add_to(cv_cmd);
  cv_cmd->add_flag("--log-response", cv_log, "Log-transform the response before fitting");
  cv_cmd->add_option("--threads", cv_threads, "Worker threads (default 1)");
  cv_cmd->add_option("--out", cv_out, "Report CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      return cmd_fit(fit_data, fit_response, fit_method_tag, fit_flags, fit_seed, fit_out);
    }
    if (*predict) {
      return cmd_predict(pred_fit, pred_test, pred_out);
    }
    if (*simulate) {
      return cmd_simulate(sim_config, sim_out, sim_threads);
    }
    if (*cv_cmd) {
      return cmd_cv(cv_data, cv_response, cv_methods, cv_k, cv_t, cv_reference, cv_seed,
                    cv_flags, cv_log, cv_out, cv_threads);
    }
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ebma/cv.hpp"
#include "ebma/gprior.hpp"
#include "ebma/io.hpp"
#include "ebma/methods.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace ebma;

namespace {

std::string cli_path() {
  const char* env = std::getenv("EBMA_CLI");
  REQUIRE_MESSAGE(env != nullptr, "EBMA_CLI must point at the built binary");
  return env;
}

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[512];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) {
    output.append(buf, got);
  }
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), output};
}

fs::path workdir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "ebma_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string shifted_line_csv(double beta, double shift) {
  const Dataset data = make_single_outlier_dataset(11, beta, shift);
  std::ostringstream out;
  out << "y,x1\n";
  for (int i = 0; i < 11; ++i) {
    out << format_g17(data.y[i]) << ',' << format_g17(data.x_raw(i, 0)) << '\n';
  }
  return out.str();
}

std::string noisy_csv(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  VectorXd beta = VectorXd::Zero(p);
  beta[0] = 1.0;
  const Dataset data = testutil::random_dataset(n, p, beta, 0.2, 1.0, rng);
  std::ostringstream out;
  out << "y";
  for (int j = 0; j < p; ++j) out << ",x" << (j + 1);
  out << '\n';
  for (int i = 0; i < n; ++i) {
    out << format_g17(data.y[i]);
    for (int j = 0; j < p; ++j) out << ',' << format_g17(data.x_raw(i, j));
    out << '\n';
  }
  return out.str();
}

std::string strip_header_comment(const std::string& content) {
  const auto pos = content.find('\n');
  REQUIRE(pos != std::string::npos);
  REQUIRE(content.rfind("# ebma", 0) == 0);
  return content.substr(pos + 1);
}

std::vector<std::vector<std::string>> parse_csv_cells(const std::string& content) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream ss(content);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("fit: two-model toy run writes normalized posterior") {
  const fs::path dir = workdir();
  write_text_file((dir / "toy.csv").string(), shifted_line_csv(0.5, -5.0));
  const CliResult res = run_cli("fit --data " + (dir / "toy.csv").string() +
                                " --response y --method fixed-g --out " +
                                (dir / "fit_toy").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);

  const std::string content = read_text_file((dir / "fit_toy/models.csv").string());
  const auto rows = parse_csv_cells(content);
  REQUIRE(rows.size() == 3);  // header + two models
  CHECK(rows[0][0] == "model");
  const double p0 = std::stod(rows[1][2]);
  const double p1 = std::stod(rows[2][2]);
  CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-12));

  // every artifact starts with the version/command/seed/manifest header
  for (const char* token : {"# ebma ", "command=fit", "seed=0", "manifest="}) {
    CHECK(content.substr(0, content.find('\n')).find(token) != std::string::npos);
  }
}

TEST_CASE("fit: tuned scale lands at the reported shrinkage") {
  const fs::path dir = workdir();
  write_text_file((dir / "ex2.csv").string(), shifted_line_csv(0.5, -5.0));
  const CliResult res = run_cli("fit --data " + (dir / "ex2.csv").string() +
                                " --response y --method eb-local --out " +
                                (dir / "fit_eb").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const auto rows =
      parse_csv_cells(read_text_file((dir / "fit_eb/hyperparams.csv").string()));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][2] == "rho");
  const double rho = std::stod(rows[1][2]);
  CHECK(std::abs(rho - 0.967) < 2e-3);
}

TEST_CASE("fit: coefficients file matches the in-process computation byte for byte") {
  const fs::path dir = workdir();
  const std::string csv = noisy_csv(25, 3, 321);
  write_text_file((dir / "noisy.csv").string(), csv);
  const CliResult res = run_cli("fit --data " + (dir / "noisy.csv").string() +
                                " --response y --method eb-local --out " +
                                (dir / "fit_noisy").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);

  const NamedDataset named = load_dataset_csv((dir / "noisy.csv").string(), "y");
  const MethodFit fit = fit_method(named.data, Method::EBLocal, MethodOptions{});
  std::ostringstream expected;
  expected << "predictor,beta_bma\n";
  for (int j = 0; j < 3; ++j) {
    expected << "x" << (j + 1) << ',' << format_g17(fit.plane.beta[j]) << '\n';
  }
  const std::string actual =
      strip_header_comment(read_text_file((dir / "fit_noisy/coefficients.csv").string()));
  CHECK(actual == expected.str());
}

TEST_CASE("predict: training means map to the training mean response") {
  const fs::path dir = workdir();
  write_text_file((dir / "noisy2.csv").string(), noisy_csv(30, 2, 99));
  REQUIRE(run_cli("fit --data " + (dir / "noisy2.csv").string() +
                  " --response y --method hyper-gn --out " + (dir / "fit_h").string())
              .exit_code == 0);

  const NamedDataset named = load_dataset_csv((dir / "noisy2.csv").string(), "y");
  std::ostringstream test_csv;
  test_csv << "x1,x2\n"
           << format_g17(named.data.col_means[0]) << ','
           << format_g17(named.data.col_means[1]) << '\n';
  write_text_file((dir / "at_means.csv").string(), test_csv.str());

  REQUIRE(run_cli("predict --fit " + (dir / "fit_h").string() + " --test " +
                  (dir / "at_means.csv").string() + " --out " +
                  (dir / "pred_means.csv").string())
              .exit_code == 0);
  const auto rows =
      parse_csv_cells(read_text_file((dir / "pred_means.csv").string()));
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[1][1]) == doctest::Approx(named.data.ybar()).epsilon(1e-12));
}

TEST_CASE("predict: fixed scale reproduces the averaged line on the fixture") {
  const fs::path dir = workdir();
  write_text_file((dir / "ex2b.csv").string(), shifted_line_csv(0.5, -5.0));
  const double g = std::exp(0.901);
  {
    std::ostringstream cmd;
    cmd << "fit --data " << (dir / "ex2b.csv").string()
        << " --response y --method fixed-g --g " << format_g17(g) << " --out "
        << (dir / "fit_g").string();
    REQUIRE(run_cli(cmd.str()).exit_code == 0);
  }
  std::ostringstream test_csv;
  test_csv << "x1\n";
  for (int i = 1; i <= 11; ++i) test_csv << (i - 6) << '\n';
  write_text_file((dir / "grid.csv").string(), test_csv.str());
  REQUIRE(run_cli("predict --fit " + (dir / "fit_g").string() + " --test " +
                  (dir / "grid.csv").string() + " --out " + (dir / "pred_g.csv").string())
              .exit_code == 0);

  // expected: s * beta_ls * x - shift/n with shift = -5
  const Dataset data = make_single_outlier_dataset(11, 0.5, -5.0);
  const OlsFit fit = ols_fit(data, ModelIndex::full_model(1));
  const ModelPrior prior{ModelPrior::Kind::BetaBinomial11, 1, {}};
  const EnsemblePosterior post = ensemble_posterior(
      data, {GPriorSetting::zero_mean(ModelIndex::full_model(1), g, GStrategy::FixedG)},
      prior);
  const double s = (g / (1.0 + g)) * post.post_probs[1];

  const auto rows = parse_csv_cells(read_text_file((dir / "pred_g.csv").string()));
  REQUIRE(rows.size() == 12);
  for (int i = 1; i <= 11; ++i) {
    const double x = i - 6;
    const double expected = s * fit.beta_ls[0] * x - (-5.0) / 11.0;
    CHECK(std::abs(std::stod(rows[static_cast<std::size_t>(i)][1]) - expected) < 1e-10);
  }
}

TEST_CASE("fit + predict round trip is deterministic") {
  const fs::path dir = workdir();
  write_text_file((dir / "noisy3.csv").string(), noisy_csv(24, 2, 5150));
  write_text_file((dir / "t3.csv").string(), "x1,x2\n0.5,-0.25\n1,1\n");
  for (int round = 0; round < 2; ++round) {
    const std::string out_dir = (dir / ("fit_r" + std::to_string(round))).string();
    REQUIRE(run_cli("fit --data " + (dir / "noisy3.csv").string() +
                    " --response y --method null-mixture --seed 11 --out " + out_dir)
                .exit_code == 0);
    REQUIRE(run_cli("predict --fit " + out_dir + " --test " + (dir / "t3.csv").string() +
                    " --out " + out_dir + "/pred.csv")
                .exit_code == 0);
  }
  CHECK(read_text_file((dir / "fit_r0/fit.json").string()) ==
        read_text_file((dir / "fit_r1/fit.json").string()));
  CHECK(read_text_file((dir / "fit_r0/pred.csv").string()) ==
        read_text_file((dir / "fit_r1/pred.csv").string()));
  CHECK(read_text_file((dir / "fit_r0/hyperparams.csv").string()) ==
        read_text_file((dir / "fit_r1/hyperparams.csv").string()));
}

TEST_CASE("fit: the robust comparator writes a degenerate model table") {
  const fs::path dir = workdir();
  write_text_file((dir / "rnoisy.csv").string(), noisy_csv(30, 2, 1234));
  const CliResult res = run_cli("fit --data " + (dir / "rnoisy.csv").string() +
                                " --response y --method robust-full --out " +
                                (dir / "fit_rob").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const auto models =
      parse_csv_cells(read_text_file((dir / "fit_rob/models.csv").string()));
  REQUIRE(models.size() == 2);
  CHECK(models[1][0] == "11");
  CHECK(std::stod(models[1][2]) == 1.0);
  CHECK(fs::exists(dir / "fit_rob/coefficients.csv"));
  CHECK_FALSE(fs::exists(dir / "fit_rob/hyperparams.csv"));

  // the saved plane predicts through the generic path
  REQUIRE(run_cli("predict --fit " + (dir / "fit_rob").string() + " --test " +
                  (dir / "rnoisy.csv").string() + " --out " +
                  (dir / "rob_pred.csv").string())
              .exit_code == 0);
  CHECK(parse_csv_cells(read_text_file((dir / "rob_pred.csv").string())).size() == 31);
}

TEST_CASE("fit: malformed CSV reports the line number") {
  const fs::path dir = workdir();
  write_text_file((dir / "bad.csv").string(), "y,x1\n1,2\noops,3\n");
  const CliResult res = run_cli("fit --data " + (dir / "bad.csv").string() +
                                " --response y --method fixed-g --out " +
                                (dir / "fit_bad").string());
  CHECK(res.exit_code != 0);
  CHECK(res.output.find("line 3") != std::string::npos);
}

TEST_CASE("simulate: reruns and thread counts give identical bytes") {
  const fs::path dir = workdir();
  const std::string config = R"({
    "n_train": 40, "n_test": 30, "p": 2, "corr": 0.6,
    "beta_true": [1.0, 0.0], "sigma": 1.0,
    "train_scheme": {"kind": "mean-shift", "k": 10.0, "pi": 0.05},
    "test_scheme": {"kind": "none"},
    "n_reps": 4, "seed": 17,
    "methods": ["null-mixture", "eb-local", "hyper-gn"],
    "reference_method": "hyper-gn"
  })";
  write_text_file((dir / "sim.json").string(), config);
  for (const auto& [name, threads] : std::vector<std::pair<std::string, int>>{
           {"s1", 1}, {"s2", 1}, {"s4", 4}}) {
    const CliResult res = run_cli("simulate --config " + (dir / "sim.json").string() +
                                  " --out " + (dir / name).string() + " --threads " +
                                  std::to_string(threads));
    REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  }
  const std::string base = read_text_file((dir / "s1/reps.csv").string());
  CHECK(base == read_text_file((dir / "s2/reps.csv").string()));
  CHECK(base == read_text_file((dir / "s4/reps.csv").string()));
  CHECK(read_text_file((dir / "s1/summary.csv").string()) ==
        read_text_file((dir / "s4/summary.csv").string()));

  // numeric cells round-trip exactly at 17 significant digits
  for (const auto& row : parse_csv_cells(base)) {
    if (row[0] == "rep") continue;
    for (std::size_t c = 2; c < row.size(); ++c) {
      const double v = std::stod(row[c]);
      CHECK(format_g17(v) == row[c]);
    }
  }
}

TEST_CASE("simulate: invalid config names the offending fields") {
  const fs::path dir = workdir();
  write_text_file((dir / "bad_sim.json").string(),
                  R"({"p": 2, "corr": 2.0, "beta_true": [1, 0], "n_reps": 0,
                      "methods": ["fixed-g"], "reference_method": "fixed-g",
                      "train_scheme": {"kind": "nope"}})");
  const CliResult res = run_cli("simulate --config " + (dir / "bad_sim.json").string() +
                                " --out " + (dir / "bad_out").string());
  CHECK(res.exit_code != 0);
  CHECK(res.output.find("train_scheme.kind") != std::string::npos);
}

TEST_CASE("simulate: the five contamination patterns all run") {
  const fs::path dir = workdir();
  const std::vector<std::pair<std::string, std::string>> grid = {
      {"ms_no", R"("train_scheme": {"kind":"mean-shift","k":10.0,"pi":0.05}, "test_scheme": {"kind":"none"})"},
      {"ms_ms", R"("train_scheme": {"kind":"mean-shift","k":10.0,"pi":0.05}, "test_scheme": {"kind":"mean-shift","k":10.0,"pi":0.05})"},
      {"vi_no", R"("train_scheme": {"kind":"variance-inflation","k":10.0,"pi":0.05}, "test_scheme": {"kind":"none"})"},
      {"vi_vi", R"("train_scheme": {"kind":"variance-inflation","k":10.0,"pi":0.05}, "test_scheme": {"kind":"variance-inflation","k":10.0,"pi":0.05})"},
      {"no_no", R"("train_scheme": {"kind":"none"}, "test_scheme": {"kind":"none"})"},
  };
  for (const auto& [name, schemes] : grid) {
    const std::string config = R"({"n_train": 40, "n_test": 20, "p": 5, "corr": 0.6,
      "beta_true": [1.0, 0.0, 0.0, 0.0, 0.0], "sigma": 1.0, "n_reps": 2, "seed": 3,
      "methods": ["fixed-g", "robust-full"], "reference_method": "fixed-g", )" +
                               schemes + "}";
    write_text_file((dir / (name + ".json")).string(), config);
    const CliResult res = run_cli("simulate --config " + (dir / (name + ".json")).string() +
                                  " --out " + (dir / ("out_" + name)).string());
    REQUIRE_MESSAGE(res.exit_code == 0, res.output);
    CHECK(fs::exists(dir / ("out_" + name) / "summary.csv"));
  }
}

TEST_CASE("simulate: ten predictors with the larger complexity ladder run") {
  const fs::path dir = workdir();
  const std::vector<std::pair<std::string, std::string>> ladders = {
      {"c1", "[0.5, 0, 0, 0, 0, 0, 0, 0, 0, 0]"},
      {"c5", "[0.5, 1.0, 1.5, 2.0, 2.5, 0, 0, 0, 0, 0]"},
      {"c10", "[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]"},
  };
  for (const auto& [name, beta] : ladders) {
    const std::string config = R"({"n_train": 60, "n_test": 20, "p": 10, "corr": 0.6,
      "beta_true": )" + beta + R"(, "sigma": 1.0, "n_reps": 1, "seed": 4,
      "train_scheme": {"kind":"mean-shift","k":10.0,"pi":0.05},
      "test_scheme": {"kind":"none"},
      "methods": ["fixed-g", "robust-full"], "reference_method": "fixed-g"})";
    write_text_file((dir / ("p10_" + name + ".json")).string(), config);
    const CliResult res =
        run_cli("simulate --config " + (dir / ("p10_" + name + ".json")).string() +
                " --out " + (dir / ("out_p10_" + name)).string());
    REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  }
}

TEST_CASE("cv: leave-one-out matches the library and the reference row is zero") {
  const fs::path dir = workdir();
  write_text_file((dir / "cvdata.csv").string(), noisy_csv(20, 2, 777));
  const CliResult res = run_cli(
      "cv --data " + (dir / "cvdata.csv").string() +
      " --response y --methods fixed-g,eb-local --k 20 --t 1 --reference fixed-g "
      "--seed 9 --out " +
      (dir / "cv.csv").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);

  const NamedDataset named = load_dataset_csv((dir / "cvdata.csv").string(), "y");
  Rng rng(9);
  const FoldPartition loo = kfold_partition(20, 20, rng);
  const double expected = cve(named.data, Method::FixedG, MethodOptions{}, loo);

  const auto rows = parse_csv_cells(read_text_file((dir / "cv.csv").string()));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "fixed-g");
  CHECK(std::stod(rows[1][3]) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(std::stod(rows[1][4]) == 0.0);
}

TEST_CASE("cv: the log-transform flag is applied and recorded") {
  const fs::path dir = workdir();
  // positive response
  Rng rng(31);
  VectorXd beta(2);
  beta << 0.4, 0.0;
  const Dataset raw = testutil::random_dataset(18, 2, beta, 3.0, 0.3, rng);
  std::ostringstream csv;
  csv << "y,x1,x2\n";
  for (int i = 0; i < 18; ++i) {
    csv << format_g17(std::exp(raw.y[i])) << ',' << format_g17(raw.x_raw(i, 0)) << ','
        << format_g17(raw.x_raw(i, 1)) << '\n';
  }
  write_text_file((dir / "pos.csv").string(), csv.str());

  const CliResult res = run_cli(
      "cv --data " + (dir / "pos.csv").string() +
      " --response y --methods fixed-g --k 18 --t 1 --reference fixed-g --seed 2 "
      "--log-response --out " +
      (dir / "cv_log.csv").string());
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const std::string content = read_text_file((dir / "cv_log.csv").string());
  CHECK(content.find("log_response=1") != std::string::npos);

  const NamedDataset named = load_dataset_csv((dir / "pos.csv").string(), "y", true);
  Rng prng(2);
  const double expected =
      cve(named.data, Method::FixedG, MethodOptions{}, kfold_partition(18, 18, prng));
  const auto rows = parse_csv_cells(content);
  CHECK(std::stod(rows[1][3]) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("cv: K larger than n is rejected") {
  const fs::path dir = workdir();
  write_text_file((dir / "tiny.csv").string(), noisy_csv(8, 1, 5));
  const CliResult res = run_cli("cv --data " + (dir / "tiny.csv").string() +
                                " --response y --methods fixed-g --k 9 --t 1 "
                                "--reference fixed-g --seed 1 --out " +
                                (dir / "cv_bad.csv").string());
  CHECK(res.exit_code != 0);
  CHECK(res.output.find("K exceeds") != std::string::npos);
}

#include "ebma/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "ebma/errors.hpp"
#include "ebma/io.hpp"

namespace ebma {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> sample_without_replacement(int n, int m, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int j = 0; j < m; ++j) {
    const auto pick = j + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - j)));
    std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  return idx;
}

MethodSummary summarize(const std::string& tag, const MatrixXd& values, int col) {
  std::vector<double> finite;
  finite.reserve(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    if (std::isfinite(values(r, col))) finite.push_back(values(r, col));
  }
  MethodSummary s;
  s.method = tag;
  if (finite.empty()) {
    s.min = s.q25 = s.median = s.q75 = s.max = s.mean = kNaN;
    return s;
  }
  s.min = quantile(finite, 0.0);
  s.q25 = quantile(finite, 0.25);
  s.median = quantile(finite, 0.5);
  s.q75 = quantile(finite, 0.75);
  s.max = quantile(finite, 1.0);
  s.mean = std::accumulate(finite.begin(), finite.end(), 0.0) /
           static_cast<double>(finite.size());
  return s;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

void SimConfig::validate() const {
  std::vector<std::string> bad;
  if (n_train < 3) bad.push_back("n_train");
  if (n_test < 1) bad.push_back("n_test");
  if (p < 1 || p > 20) bad.push_back("p");
  if (p >= 1 && !(corr < 1.0 && (p == 1 || corr > -1.0 / (p - 1)))) bad.push_back("corr");
  if (beta_true.size() != p) bad.push_back("beta_true");
  if (!(sigma >= 0.0)) bad.push_back("sigma");
  if (n_reps < 1) bad.push_back("n_reps");
  if (methods.empty()) bad.push_back("methods");
  if (std::find(methods.begin(), methods.end(), reference_method) == methods.end()) {
    bad.push_back("reference_method");
  }
  auto check_scheme = [&](const ContaminationScheme& s, const std::string& name) {
    if (s.kind == ContaminationScheme::Kind::None) return;
    if (!(s.pi >= 0.0 && s.pi <= 1.0)) bad.push_back(name + ".pi");
    if (s.kind == ContaminationScheme::Kind::VarianceInflation && !(s.k_value > 0.0)) {
      bad.push_back(name + ".k");
    }
  };
  check_scheme(train_scheme, "train_scheme");
  check_scheme(test_scheme, "test_scheme");
  if (!(method_options.trim_frac >= 0.0 && method_options.trim_frac < 0.5)) {
    bad.push_back("trim");
  }
  if (!bad.empty()) {
    std::string msg = "invalid simulation config, offending fields:";
    for (const auto& f : bad) msg += " " + f;
    throw ConfigError(msg);
  }
}

MatrixXd gen_design(int n, int p, double corr, Rng& rng) {
  if (n < 1 || p < 1) throw ConfigError("gen_design: need n >= 1 and p >= 1");
  if (!(corr < 1.0 && (p == 1 || corr > -1.0 / (p - 1)))) {
    throw ConfigError("gen_design: correlation outside (-1/(p-1), 1)");
  }
  MatrixXd x(n, p);
  if (corr >= 0.0) {
    // row = sqrt(1-c) z + sqrt(c) w 1
    const double a = std::sqrt(1.0 - corr);
    const double b = std::sqrt(corr);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = a * rng.normal();
      const double w = b * rng.normal();
      for (int j = 0; j < p; ++j) x(i, j) += w;
    }
  } else {
    // symmetric square root of (1-c)I + c11': aI + b11'
    const double a = std::sqrt(1.0 - corr);
    const double b = (std::sqrt(1.0 + corr * (p - 1)) - a) / p;
    VectorXd z(p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) z[j] = rng.normal();
      const double zsum = z.sum();
      for (int j = 0; j < p; ++j) x(i, j) = a * z[j] + b * zsum;
    }
  }
  return x;
}

std::pair<VectorXd, std::vector<std::uint8_t>> gen_response(
    const MatrixXd& x, const VectorXd& beta_true, double alpha, double sigma,
    const ContaminationScheme& scheme, Rng& rng) {
  const int n = static_cast<int>(x.rows());
  if (beta_true.size() != x.cols()) {
    throw InvalidInputError("gen_response: beta length does not match design");
  }
  VectorXd eps(n);
  for (int i = 0; i < n; ++i) eps[i] = sigma * rng.normal();
  VectorXd y = (x * beta_true).array() + alpha + eps.array();

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(n), 0);
  if (scheme.kind != ContaminationScheme::Kind::None && scheme.pi > 0.0) {
    if (scheme.selection == ContaminationScheme::Selection::Bernoulli) {
      for (int i = 0; i < n; ++i) {
        if (rng.uniform() < scheme.pi) mask[static_cast<std::size_t>(i)] = 1;
      }
    } else {
      const int m = static_cast<int>(std::floor(scheme.pi * n));
      for (int i : sample_without_replacement(n, m, rng)) {
        mask[static_cast<std::size_t>(i)] = 1;
      }
    }
    const double root_k = std::sqrt(std::max(scheme.k_value, 0.0));
    for (int i = 0; i < n; ++i) {
      if (!mask[static_cast<std::size_t>(i)]) continue;
      if (scheme.kind == ContaminationScheme::Kind::MeanShift) {
        y[i] += scheme.k_value;
      } else {
        y[i] += (root_k - 1.0) * eps[i];
      }
    }
  }
  return {std::move(y), std::move(mask)};
}

FittedModel robust_full_model_predictor(const Dataset& data, double trim_frac) {
  MethodOptions opts;
  opts.trim_frac = trim_frac;
  return fit_method(data, Method::RobustFull, opts).plane;
}

SimReport run_simulation(const SimConfig& config, int threads) {
  config.validate();
  const int reps = config.n_reps;
  const int n_methods = static_cast<int>(config.methods.size());

  SimReport report;
  report.methods = config.methods;
  report.mspe = MatrixXd::Constant(reps, n_methods, kNaN);
  report.rr = MatrixXd::Constant(reps, n_methods, kNaN);

  auto run_rep = [&](int rep) {
    Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(rep));
    const MatrixXd x_train = gen_design(config.n_train, config.p, config.corr, rng);
    VectorXd y_train = gen_response(x_train, config.beta_true, config.alpha,
                                    config.sigma, config.train_scheme, rng)
                           .first;
    const MatrixXd x_test = gen_design(config.n_test, config.p, config.corr, rng);
    const VectorXd y_test = gen_response(x_test, config.beta_true, config.alpha,
                                         config.sigma, config.test_scheme, rng)
                                .first;
    const Dataset train(std::move(y_train), x_train);
    for (int m = 0; m < n_methods; ++m) {
      try {
        const MethodFit fit = fit_method(train, config.methods[static_cast<std::size_t>(m)],
                                         config.method_options);
        const VectorXd pred = fit.plane.predict(x_test);
        report.mspe(rep, m) = (pred - y_test).squaredNorm() / config.n_test;
      } catch (const std::exception&) {
        // failed cell stays NaN
      }
    }
  };

  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    for (int rep = 0; rep < reps; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1)) {
          run_rep(rep);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  const auto ref_it =
      std::find(config.methods.begin(), config.methods.end(), config.reference_method);
  const int ref = static_cast<int>(ref_it - config.methods.begin());
  for (int rep = 0; rep < reps; ++rep) {
    const double ref_mspe = report.mspe(rep, ref);
    for (int m = 0; m < n_methods; ++m) {
      report.rr(rep, m) = 100.0 * (ref_mspe - report.mspe(rep, m)) / ref_mspe;
    }
  }

  for (int m = 0; m < n_methods; ++m) {
    const std::string tag = method_tag(config.methods[static_cast<std::size_t>(m)]);
    report.mspe_summary.push_back(summarize(tag, report.mspe, m));
    report.rr_summary.push_back(summarize(tag, report.rr, m));
  }
  return report;
}

std::string sim_rows_csv(const SimReport& report, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << "\n";
  out << "rep,method,mspe,rr\n";
  for (Eigen::Index rep = 0; rep < report.mspe.rows(); ++rep) {
    for (Eigen::Index m = 0; m < report.mspe.cols(); ++m) {
      out << rep << ',' << method_tag(report.methods[static_cast<std::size_t>(m)]) << ','
          << format_g17(report.mspe(rep, m)) << ',' << format_g17(report.rr(rep, m))
          << '\n';
    }
  }
  return out.str();
}

std::string sim_summary_csv(const SimReport& report, const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << header_comment << "\n";
  out << "method,metric,min,q25,median,q75,max,mean\n";
  auto emit = [&](const std::vector<MethodSummary>& rows, const char* metric) {
    for (const auto& s : rows) {
      out << s.method << ',' << metric << ',' << format_g17(s.min) << ','
          << format_g17(s.q25) << ',' << format_g17(s.median) << ','
          << format_g17(s.q75) << ',' << format_g17(s.max) << ','
          << format_g17(s.mean) << '\n';
    }
  };
  emit(report.mspe_summary, "mspe");
  emit(report.rr_summary, "rr");
  return out.str();
}

}  // namespace ebma

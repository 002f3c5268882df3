#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ergmpool/diagnostics.hpp"
#include "ergmpool/errors.hpp"
#include "ergmpool/exact.hpp"
#include "ergmpool/graph_io.hpp"
#include "ergmpool/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace ergmpool;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kEstimation = 2, kIo = 3 };

struct Common {
  fs::path out = ".";
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  bool quiet = false;
};

struct ModelOpts {
  std::string model_file;
  std::string terms;

  ModelSpec load() const {
    if (!model_file.empty() && !terms.empty())
      throw UsageError("give either --model or --terms, not both");
    if (!model_file.empty()) return ModelSpec::read(model_file);
    if (terms.empty()) throw UsageError("a model is required (--model FILE or --terms TEXT)");
    std::string text = terms;
    std::replace(text.begin(), text.end(), ';', '\n');
    try {
      return ModelSpec::parse(text, "--terms");
    } catch (const ParseError& e) {
      throw ModelError(e.what());
    }
  }
};

struct ChainOpts {
  std::size_t draws = 2048;
  std::optional<std::size_t> burn_in;
  std::optional<std::size_t> thin;
};

struct EstimOpts {
  ChainOpts chain;
  std::string method = "gt";
  std::size_t max_iterations = 30;
  double t_ratio = 0.1;
  std::optional<double> hotelling;

  EstimatorConfig resolve(std::size_t n, const Common& c) const {
    EstimatorConfig cfg = EstimatorConfig::defaults(n, c.seed);
    cfg.chain.n_draws = chain.draws;
    if (chain.burn_in) cfg.chain.burn_in = *chain.burn_in;
    if (chain.thin) cfg.chain.thin = *chain.thin;
    cfg.method = method == "sa" ? EstimationMethod::StochasticApproximation
                                : EstimationMethod::GeyerThompson;
    cfg.max_iterations = max_iterations;
    cfg.t_ratio_threshold = t_ratio;
    cfg.hotelling_pvalue = hotelling;
    cfg.threads = c.threads;
    return cfg;
  }
};

void add_estimation_flags(CLI::App* cmd, EstimOpts& e) {
  cmd->add_option("--method", e.method, "gt (Geyer-Thompson) or sa (stochastic approximation)")
      ->check(CLI::IsMember({"gt", "sa"}));
  cmd->add_option("--draws", e.chain.draws, "MCMC draws per iteration")->check(CLI::PositiveNumber);
  cmd->add_option("--burn-in", e.chain.burn_in, "burn-in toggles (default 1e4 n)");
  cmd->add_option("--thin", e.chain.thin, "toggles between draws (default 1e2 n)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", e.max_iterations, "iteration cap");
  cmd->add_option("--t-ratio", e.t_ratio, "convergence threshold on |t-ratios|");
  cmd->add_option("--hotelling", e.hotelling, "also require a Hotelling p-value above this");
}

void add_model_flags(CLI::App* cmd, ModelOpts& m) {
  cmd->add_option("--model", m.model_file, "model file, one term per line");
  cmd->add_option("--terms", m.terms, "inline model, terms separated by ';'");
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec(m.row(r).transpose()));
  return rows;
}

Eigen::VectorXd parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double x = 0.0;
    const char* b = tok.data() + tok.find_first_not_of(' ');
    auto [ptr, ec] = std::from_chars(b, tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw UsageError(what + ": '" + tok + "' is not a number");
    v.push_back(x);
  }
  if (v.empty()) throw UsageError(what + " is empty");
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  return vec(parse_vector(text, what));
}

void check_length(const Eigen::VectorXd& v, const ModelSpec& model, const std::string& what) {
  if (v.size() != static_cast<Eigen::Index>(model.size()))
    throw DimensionError(what + " has " + std::to_string(v.size()) + " entries, model has " +
                         std::to_string(model.size()) + " terms");
}

class Output {
 public:
  Output(const Common& c, CLI::App* app, std::vector<std::string> argv)
      : dir_(c.out), app_(app), argv_(std::move(argv)), seed_(c.seed) {
    fs::create_directories(dir_);
  }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream f(dir_ / name);
    if (!f) throw IoError("cannot write " + (dir_ / name).string());
    f.precision(17);
    return f;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  fs::path path(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void manifest() {
    json m;
    m["software"] = "ergmpool";
    m["version"] = ERGMPOOL_VERSION;
    m["command"] = argv_;
    m["seed"] = seed_;
    m["subcommand"] = json::array();
    json options = json::object();
    for (const CLI::App* cmd = app_; cmd != nullptr;) {
      const auto subs = cmd->get_subcommands();
      cmd = subs.empty() ? nullptr : subs.front();
      if (cmd == nullptr) break;
      m["subcommand"].push_back(cmd->get_name());
      for (const CLI::Option* opt : cmd->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help") continue;
        if (opt->count() > 0) {
          const auto& r = opt->results();
          options[name] = r.size() == 1 ? json(r.front()) : json(r);
        } else {
          options[name] = opt->get_default_str();
        }
      }
    }
    m["options"] = options;
    m["outputs"] = files_;
    std::ofstream f(dir_ / "manifest.json");
    if (!f) throw IoError("cannot write " + (dir_ / "manifest.json").string());
    f << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  CLI::App* app_;
  std::vector<std::string> argv_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
};

json diagnostics_json(const FitResult& fit) {
  const auto& d = fit.diagnostics;
  json j;
  j["method"] = d.method;
  j["iterations"] = d.iterations;
  j["t_ratios"] = vec(d.t_ratios);
  if (d.hotelling_pvalue) j["hotelling_pvalue"] = *d.hotelling_pvalue;
  j["mc_draws"] = d.mc_draws;
  j["fisher_draws"] = d.fisher_draws;
  j["simulated_mean"] = vec(d.simulated_mean);
  j["mple_clipped"] = d.mple_clipped;
  j["warnings"] = d.warnings;
  return j;
}

json coefficients_json(const FitResult& fit, const std::string& interval_key) {
  const Eigen::VectorXd se = fit.standard_errors();
  const Eigen::MatrixXd ci = fit.intervals(0.95);
  json terms = json::array();
  for (std::size_t k = 0; k < fit.labels.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    terms.push_back({{"term", fit.labels[k]},
                     {"estimate", fit.theta_hat[e]},
                     {"se", se[e]},
                     {interval_key, {ci(e, 0), ci(e, 1)}}});
  }
  return terms;
}

void print_table(const FitResult& fit, const std::string& interval) {
  const Eigen::VectorXd se = fit.standard_errors();
  const Eigen::MatrixXd ci = fit.intervals(0.95);
  std::cout << (fit.converged ? "converged" : "NOT converged") << " after "
            << fit.diagnostics.iterations << " iterations\n";
  std::cout << "term  estimate  se  " << interval << "\n";
  for (std::size_t k = 0; k < fit.labels.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    std::cout << fit.labels[k] << "  " << fit.theta_hat[e] << "  " << se[e] << "  (" << ci(e, 0)
              << ", " << ci(e, 1) << ")\n";
  }
}

// fit ------------------------------------------------------------------

struct FitOpts {
  fs::path data;
  ModelOpts model;
  EstimOpts est;
  bool pooled = false;
  bool map = false;
  fs::path prior;
  std::optional<double> n0;
};

int run_fit(const FitOpts& o, Output& out, const Common& c) {
  if (o.pooled == o.map) throw UsageError("choose exactly one of --pooled and --map");
  const ModelSpec model = o.model.load();
  const GraphSet set = read_graph_set(o.data);
  const EstimatorConfig cfg = o.est.resolve(set.order(), c);
  json j;
  j["model"] = model.canonical();
  j["fingerprint"] = model.fingerprint();
  j["m"] = set.size();
  j["n"] = set.order();
  FitResult fit;
  if (o.pooled) {
    fit = pooled_mle(set, model, cfg);
    j["estimator"] = "pooled_mle";
    j["weight"] = fit.weight;
    j["mean_statistics"] = vec(statistics_mean(model, set).values);
    j["coefficients"] = coefficients_json(fit, "wald_ci");
    j["covariance"] = mat(fit.covariance);
  } else {
    if (o.prior.empty()) throw UsageError("--map needs --prior FILE");
    PriorSpec prior = read_prior(o.prior);
    if (o.n0) prior.n0 = *o.n0;
    const PosteriorResult post = conjugate_map(set, model, prior, cfg);
    fit = post.fit;
    j["estimator"] = "conjugate_map";
    j["n0"] = post.n0;
    j["delta"] = post.delta;
    j["tau_bar"] = vec(prior.tau_bar.values);
    j["target"] = vec(post.target);
    j["coefficients"] = coefficients_json(fit, "credible_interval");
    j["laplace_covariance"] = mat(post.laplace_cov);
  }
  j["converged"] = fit.converged;
  j["fisher_info"] = mat(fit.fisher_info);
  j["diagnostics"] = diagnostics_json(fit);
  out.write_json("fit.json", j);
  if (!c.quiet) print_table(fit, o.pooled ? "95% wald_ci" : "95% credible_interval");
  if (!fit.converged) {
    std::cerr << "error: estimation did not converge (see diagnostics in fit.json)\n";
    return kEstimation;
  }
  return kOk;
}

// simulate ---------------------------------------------------------------

struct VertexOpts {
  std::optional<std::size_t> n;
  fs::path covariates;  // directory with nodes.csv, *.mat, constraints.txt

  std::pair<CovariateSet, SupportConstraint> load() const {
    std::size_t order = 0;
    if (n) {
      order = *n;
    } else if (!covariates.empty()) {
      const auto peek = peek_order(covariates);
      if (!peek) throw UsageError("--n is required when " + covariates.string() + " has no edge lists");
      order = *peek;
    } else {
      throw UsageError("give --n or --covariates DIR");
    }
    if (covariates.empty()) return {CovariateSet(order), SupportConstraint(order)};
    if (!fs::is_directory(covariates)) throw IoError("not a directory: " + covariates.string());
    SupportConstraint constraint(order);
    if (fs::exists(covariates / "constraints.txt"))
      constraint = read_constraint(covariates / "constraints.txt", order);
    return {read_covariates(covariates, order), constraint};
  }
};

void add_vertex_flags(CLI::App* cmd, VertexOpts& v) {
  cmd->add_option("--n", v.n, "number of vertices")->check(CLI::PositiveNumber);
  cmd->add_option("--covariates", v.covariates,
                  "directory with nodes.csv, *.mat and constraints.txt");
}

struct SimOpts {
  ModelOpts model;
  VertexOpts vertices;
  std::string theta;
  ChainOpts chain;
};

int run_simulate(const SimOpts& o, Output& out, const Common& c) {
  const ModelSpec model = o.model.load();
  const auto [cov, constraint] = o.vertices.load();
  const Eigen::VectorXd theta = parse_vector(o.theta, "--theta");
  check_length(theta, model, "--theta");
  ChainConfig cc = ChainConfig::defaults(cov.order(), o.chain.draws, c.seed);
  if (o.chain.burn_in) cc.burn_in = *o.chain.burn_in;
  if (o.chain.thin) cc.thin = *o.chain.thin;
  cc.keep_graphs = true;
  const SampleBatch batch = sample_ergm(BoundModel(model, cov), theta, constraint, cc, c.threads);
  write_graph_set(GraphSet(batch.graphs, cov, constraint), out.path("graphs"));
  auto csv = out.open("statistics.csv");
  const auto labels = model.labels();
  for (std::size_t k = 0; k < labels.size(); ++k) csv << (k ? "," : "") << labels[k];
  csv << '\n';
  for (Eigen::Index r = 0; r < batch.stats.rows(); ++r) {
    for (Eigen::Index k = 0; k < batch.stats.cols(); ++k) csv << (k ? "," : "") << num(batch.stats(r, k));
    csv << '\n';
  }
  if (!c.quiet)
    std::cout << batch.size() << " graphs, mean statistics " << batch.mean().transpose()
              << ", acceptance " << batch.acceptance_rate << "\n";
  return kOk;
}

// prior ------------------------------------------------------------------

struct PriorOpts {
  ModelOpts model;
  VertexOpts vertices;
  std::optional<double> mean_degree;
  std::optional<double> mass_kda;
  double n0 = 0.01;
  std::size_t sims = 500;
};

int run_prior(const PriorOpts& o, Output& out, const Common& c, bool protein) {
  const ModelSpec model = o.model.load();
  const auto [cov, constraint] = o.vertices.load();
  double degree = 0.0;
  if (protein) {
    if (!o.mass_kda) throw UsageError("prior protein needs --mass-kda");
    const ProteinDegree pd = protein_mean_degree(*o.mass_kda);
    degree = pd.mean_degree;
    if (!c.quiet)
      std::cout << "A_u " << pd.unfolded_area << ", A_f " << pd.folded_area << ", mean degree "
                << pd.mean_degree << "\n";
  } else {
    if (!o.mean_degree) throw UsageError("prior bernoulli needs --mean-degree");
    degree = *o.mean_degree;
  }
  const PriorSpec prior =
      build_bernoulli_prior(model, cov, constraint, degree, o.n0, o.sims, c.seed, c.threads);
  write_prior(prior, out.path("prior.txt"));
  for (const auto& w : prior.warnings) std::cerr << "warning: " << w << "\n";
  if (!c.quiet) {
    const double p = *prior.edge_probability;
    std::cout << "p " << p << ", edge coefficient " << std::log(p / (1 - p)) << "\n";
    for (std::size_t k = 0; k < prior.labels.size(); ++k)
      std::cout << prior.labels[k] << "  " << prior.tau_bar.values[static_cast<Eigen::Index>(k)]
                << "  (MC se " << prior.tau_se[static_cast<Eigen::Index>(k)] << ")\n";
  }
  return kOk;
}

// cv-delta ---------------------------------------------------------------

struct CvOpts {
  fs::path data;
  ModelOpts model;
  EstimOpts est;
  fs::path prior;
  std::string grid = "0,0.01,0.1,1";
  std::size_t sim_draws = 100;
  bool square_of_mean = false;
};

int run_cv(const CvOpts& o, Output& out, const Common& c) {
  const ModelSpec model = o.model.load();
  const GraphSet set = read_graph_set(o.data);
  const PriorSpec prior = read_prior(o.prior);
  check_prior(prior, model);
  const auto grid = parse_list(o.grid, "--grid");
  const CvTable table =
      tune_delta_cv(set, model, prior.tau_bar, grid, o.est.resolve(set.order(), c), o.sim_draws,
                    c.seed, o.square_of_mean ? CvLoss::SquaredMean : CvLoss::SquaredPerDraw);
  auto csv = out.open("cv.csv");
  csv << "n0,delta,cv_error,failed_folds\n";
  for (const auto& r : table.rows)
    csv << num(r.n0) << ',' << num(r.delta) << ',' << num(r.cv_error) << ',' << r.failed_folds
        << '\n';
  for (const auto& m : table.messages) std::cerr << "warning: " << m << "\n";
  if (!table.argmin) {
    std::cerr << "error: every grid point had failed folds\n";
    return kEstimation;
  }
  if (!c.quiet)
    std::cout << "argmin n0 " << table.rows[*table.argmin].n0 << " (delta "
              << table.rows[*table.argmin].delta << ")\n";
  return kOk;
}

// gof / gli --------------------------------------------------------------

struct GofOpts {
  fs::path data;
  ModelOpts model;
  fs::path fit;
  std::size_t draws = 1000;
  std::optional<std::size_t> burn_in;
};

Eigen::MatrixXd read_matrix(const json& j) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()),
                    j.empty() ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t k = 0; k < j[r].size(); ++k)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          j[r][k].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[r][k].get<double>();
  return m;
}

std::vector<Graph> predictive_from_fit(const fs::path& file, const ModelSpec& model,
                                       const GraphSet& set, const PredictiveConfig& pc) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(file.string(), 0, e.what());
  }
  if (j.value("fingerprint", "") != model.fingerprint())
    throw ModelError(file.string() + " was fitted with a different model");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(j["coefficients"].size()));
  for (std::size_t k = 0; k < j["coefficients"].size(); ++k)
    theta[static_cast<Eigen::Index>(k)] = j["coefficients"][k]["estimate"].get<double>();
  if (!j.value("converged", false)) throw EstimationError(file.string() + " holds an unconverged fit");
  if (j["estimator"] == "conjugate_map") {
    PosteriorResult post;
    post.map = theta;
    post.laplace_cov = read_matrix(j["laplace_covariance"]);
    post.fit.theta_hat = theta;
    post.fit.converged = true;
    return predictive_graphs(post, model, set, pc);
  }
  FitResult fit;
  fit.theta_hat = theta;
  fit.converged = true;
  return predictive_graphs(fit, model, set, pc);
}

PredictiveConfig predictive_config(const GofOpts& o, const GraphSet& set, const Common& c) {
  PredictiveConfig pc;
  pc.n_pred_draws = o.draws;
  pc.burn_in = o.burn_in ? *o.burn_in : 10000 * set.order();
  pc.seed = c.seed;
  pc.threads = c.threads;
  return pc;
}

int run_gof(const GofOpts& o, Output& out, const Common& c) {
  const ModelSpec model = o.model.load();
  const GraphSet set = read_graph_set(o.data);
  const auto pred = predictive_from_fit(o.fit, model, set, predictive_config(o, set, c));
  const GofReport report = gof_report(pred, set);
  for (const auto& band : report.bands) {
    auto csv = out.open("gof_" + band.statistic + ".csv");
    csv << "bin,q025,q250,q500,q750,q975,observed_mean\n";
    for (std::size_t b = 0; b < band.bins.size(); ++b) {
      const auto e = static_cast<Eigen::Index>(b);
      csv << band.bins[b];
      for (Eigen::Index l = 0; l < band.quantiles.cols(); ++l) csv << ',' << num(band.quantiles(e, l));
      csv << ',' << num(band.observed_mean[e]) << '\n';
    }
    auto per = out.open("gof_" + band.statistic + "_observed.csv");
    per << "graph";
    for (const auto& b : band.bins) per << ',' << b;
    per << '\n';
    for (Eigen::Index r = 0; r < band.observed.rows(); ++r) {
      per << r;
      for (Eigen::Index b = 0; b < band.observed.cols(); ++b) per << ',' << num(band.observed(r, b));
      per << '\n';
    }
  }
  if (!c.quiet)
    std::cout << report.n_pred_draws << " predictive draws; observed means inside the 95% band for "
              << report.families_covered() << " of 4 statistics\n";
  return kOk;
}

int run_gli(const GofOpts& o, Output& out, const Common& c) {
  const GraphSet set = read_graph_set(o.data);
  std::vector<Graph> pred;
  if (!o.fit.empty()) pred = predictive_from_fit(o.fit, o.model.load(), set, predictive_config(o, set, c));
  const GliReport report = gli_report(pred, set);
  auto csv = out.open("gli.csv");
  csv << "source,index,transitivity,sd_degree,sd_core,sd_m_eccentricity,unreachable_pairs\n";
  auto rows = [&](const std::string& source, const std::vector<GliRow>& v) {
    for (std::size_t k = 0; k < v.size(); ++k)
      csv << source << ',' << k << ',' << num(v[k].transitivity) << ',' << num(v[k].sd_degree)
          << ',' << num(v[k].sd_core) << ',' << num(v[k].sd_eccentricity) << ','
          << v[k].unreachable_pairs << '\n';
  };
  rows("observed", report.observed);
  rows("predictive", report.predictive);
  if (!c.quiet)
    std::cout << report.observed.size() << " observed and " << report.predictive.size()
              << " predictive graphs\n";
  return kOk;
}

// study ------------------------------------------------------------------

struct StudyOpts {
  ModelOpts model;
  VertexOpts vertices;
  EstimOpts est;
  std::string theta;
  std::string m_grid = "1,5,20";
  std::size_t replicates = 200;
  double level = 0.95;
  std::optional<std::size_t> data_burn_in;
  std::optional<std::size_t> data_thin;
  // delta sweep
  fs::path prior;
  std::string deltas = "0,0.001,0.01,0.02,0.05,0.1,0.2,0.3,0.4,0.5,0.75,0.9";
  std::size_t m = 1;
};

CoverageStudyConfig study_config(const StudyOpts& o, const Common& c) {
  CoverageStudyConfig cfg;
  cfg.model = o.model.load();
  std::tie(cfg.covariates, cfg.constraint) = o.vertices.load();
  cfg.theta_star = parse_vector(o.theta, "--theta");
  check_length(cfg.theta_star, cfg.model, "--theta");
  cfg.replicates = o.replicates;
  cfg.level = o.level;
  const std::size_t n = cfg.covariates.order();
  cfg.estimator = o.est.resolve(n, c);
  cfg.data_chain = ChainConfig::defaults(n, 1, c.seed);
  if (o.data_burn_in) cfg.data_chain.burn_in = *o.data_burn_in;
  if (o.data_thin) cfg.data_chain.thin = *o.data_thin;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  return cfg;
}

void write_vector_cols(std::ostream& os, const std::vector<std::string>& labels,
                       const std::string& prefix) {
  for (const auto& l : labels) os << ',' << prefix << '_' << l;
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) os << ',' << num(v[k]);
}

int run_coverage(const StudyOpts& o, Output& out, const Common& c) {
  CoverageStudyConfig cfg = study_config(o, c);
  cfg.m_grid.clear();
  for (double m : parse_list(o.m_grid, "--m-grid")) {
    if (!(m >= 1) || m != std::floor(m)) throw UsageError("--m-grid entries must be positive integers");
    cfg.m_grid.push_back(static_cast<std::size_t>(m));
  }
  const CoverageTable t = run_coverage_study(cfg);
  auto csv = out.open("coverage.csv");
  csv << "m,fitted,failed";
  for (const char* p : {"mean", "bias", "se", "sd", "coverage"}) write_vector_cols(csv, t.labels, p);
  csv << '\n';
  for (const auto& cell : t.cells) {
    csv << cell.m << ',' << cell.fitted << ',' << cell.failed;
    for (const auto* v : {&cell.mean_estimate, &cell.bias, &cell.mean_se, &cell.sd_estimate,
                          &cell.coverage})
      write_vector(csv, *v);
    csv << '\n';
  }
  for (const auto& m : t.messages) std::cerr << "warning: " << m << "\n";
  if (!c.quiet)
    for (const auto& cell : t.cells)
      std::cout << "m " << cell.m << ": coverage " << cell.coverage.transpose() << ", se "
                << cell.mean_se.transpose() << " (" << cell.failed << " failed)\n";
  return kOk;
}

int run_sweep(const StudyOpts& o, Output& out, const Common& c) {
  DeltaSweepConfig cfg;
  cfg.study = study_config(o, c);
  if (o.prior.empty()) throw UsageError("study delta-sweep needs --prior FILE");
  cfg.prior = read_prior(o.prior);
  cfg.m = o.m;
  cfg.delta_grid = parse_list(o.deltas, "--deltas");
  const DeltaSweepTable t = run_delta_sweep(cfg);
  auto csv = out.open("delta_sweep.csv");
  csv << "delta,n0,fitted,failed";
  for (const char* p : {"map", "bias", "se", "coverage"}) write_vector_cols(csv, t.labels, p);
  csv << '\n';
  for (const auto& r : t.rows) {
    csv << num(r.delta) << ',' << num(r.n0) << ',' << r.fitted << ',' << r.failed;
    for (const auto* v : {&r.mean_map, &r.bias, &r.mean_se, &r.coverage}) write_vector(csv, *v);
    csv << '\n';
  }
  for (const auto& m : t.messages) std::cerr << "warning: " << m << "\n";
  if (!c.quiet)
    for (const auto& r : t.rows)
      std::cout << "delta " << r.delta << ": map " << r.mean_map.transpose() << ", coverage "
                << r.coverage.transpose() << "\n";
  return kOk;
}

// oracle -----------------------------------------------------------------

struct OracleOpts {
  ModelOpts model;
  VertexOpts vertices;
  std::string theta;
  std::string target;
};

int run_oracle(const OracleOpts& o, Output& out, const Common& c) {
  const ModelSpec model = o.model.load();
  const auto [cov, constraint] = o.vertices.load();
  if (o.theta.empty() == o.target.empty()) throw UsageError("give exactly one of --theta and --target");
  const EnumerationTable table = enumerate(model, cov.order(), cov, constraint, c.threads);
  json j;
  j["model"] = model.canonical();
  j["labels"] = model.labels();
  j["n"] = cov.order();
  j["free_dyads"] = table.free_dyads;
  j["graphs"] = table.total;
  Eigen::VectorXd theta;
  if (!o.target.empty()) {
    const Eigen::VectorXd target = parse_vector(o.target, "--target");
    check_length(target, model, "--target");
    const ExactFit f = exact_mle(table, target);
    theta = f.theta;
    j["target"] = vec(target);
    j["mle"] = vec(f.theta);
    j["newton_iterations"] = f.iterations;
    j["gradient_norm"] = f.gradient_norm;
  } else {
    theta = parse_vector(o.theta, "--theta");
    check_length(theta, model, "--theta");
  }
  const ExactMoments mom = exact_moments(table, theta);
  j["theta"] = vec(theta);
  j["psi"] = mom.psi;
  j["mean"] = vec(mom.mean);
  j["covariance"] = mat(mom.covariance);
  out.write_json("oracle.json", j);
  if (!c.quiet)
    std::cout << "psi " << mom.psi << ", mean " << mom.mean.transpose() << ", theta "
              << theta.transpose() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pooled maximum likelihood and conjugate MAP inference for ERGMs on graph sets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ERGMPOOL_VERSION));
  Common common;
  std::size_t env_threads = default_threads();
  common.threads = env_threads;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", common.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", common.seed, "random seed")->capture_default_str();
    cmd->add_option("--threads", common.threads,
                    "worker threads (default: ERGMPOOL_THREADS or all cores)")
        ->capture_default_str();
    cmd->add_flag("--quiet", common.quiet, "no summary on standard output");
  };

  FitOpts fit;
  auto* fit_cmd = app.add_subcommand("fit", "pooled MLE or conjugate MAP fit of a graph set");
  fit_cmd->add_option("data", fit.data, "graph set directory")->required();
  add_model_flags(fit_cmd, fit.model);
  add_estimation_flags(fit_cmd, fit.est);
  fit_cmd->add_flag("--pooled", fit.pooled, "pooled maximum likelihood");
  fit_cmd->add_flag("--map", fit.map, "conjugate MAP with a Laplace approximation");
  fit_cmd->add_option("--prior", fit.prior, "prior file (with --map)");
  fit_cmd->add_option("--n0", fit.n0, "override the prior's pseudo-sample size");
  add_common(fit_cmd);

  SimOpts sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw graphs from an ERGM");
  add_model_flags(sim_cmd, sim.model);
  add_vertex_flags(sim_cmd, sim.vertices);
  sim_cmd->add_option("--theta", sim.theta, "comma-separated coefficients")->required();
  sim_cmd->add_option("--draws", sim.chain.draws, "graphs to draw")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--burn-in", sim.chain.burn_in, "burn-in toggles (default 1e4 n)");
  sim_cmd->add_option("--thin", sim.chain.thin, "toggles between draws (default 1e2 n)");
  add_common(sim_cmd);

  PriorOpts prior;
  auto* prior_cmd = app.add_subcommand("prior", "build a conjugate prior file");
  prior_cmd->require_subcommand(1);
  auto* bern_cmd = prior_cmd->add_subcommand("bernoulli", "Bernoulli-graph prior from a mean degree");
  auto* prot_cmd = prior_cmd->add_subcommand("protein", "Bernoulli prior from a protein mass");
  for (auto* cmd : {bern_cmd, prot_cmd}) {
    add_model_flags(cmd, prior.model);
    add_vertex_flags(cmd, prior.vertices);
    cmd->add_option("--n0", prior.n0, "pseudo-sample size")->capture_default_str();
    cmd->add_option("--sims", prior.sims, "simulated Bernoulli graphs")->capture_default_str();
    add_common(cmd);
  }
  bern_cmd->add_option("--mean-degree", prior.mean_degree, "expected mean degree")->required();
  prot_cmd->add_option("--mass-kda", prior.mass_kda, "protein mass in kDa")->required();

  CvOpts cv;
  auto* cv_cmd = app.add_subcommand("cv-delta", "leave-one-out cross validation of n0");
  cv_cmd->add_option("data", cv.data, "graph set directory")->required();
  add_model_flags(cv_cmd, cv.model);
  add_estimation_flags(cv_cmd, cv.est);
  cv_cmd->add_option("--prior", cv.prior, "prior file")->required();
  cv_cmd->add_option("--grid", cv.grid, "comma-separated n0 values")->capture_default_str();
  cv_cmd->add_option("--sim-draws", cv.sim_draws, "graphs simulated per fold")->capture_default_str();
  cv_cmd->add_flag("--square-of-mean", cv.square_of_mean,
                   "score the squared mean Hamming distance instead of the mean squared distance");
  add_common(cv_cmd);

  GofOpts gof;
  auto* gof_cmd = app.add_subcommand("gof", "posterior predictive goodness of fit");
  auto* gli_cmd = app.add_subcommand("gli", "graph-level indices of observed and predictive graphs");
  for (auto* cmd : {gof_cmd, gli_cmd}) {
    cmd->add_option("data", gof.data, "graph set directory")->required();
    add_model_flags(cmd, gof.model);
    cmd->add_option("--draws", gof.draws, "predictive draws")->capture_default_str();
    cmd->add_option("--burn-in", gof.burn_in, "toggles per predictive chain (default 1e4 n)");
    add_common(cmd);
  }
  gof_cmd->add_option("--fit", gof.fit, "fit.json from the fit subcommand")->required();
  gli_cmd->add_option("--fit", gof.fit, "fit.json; adds predictive rows");

  StudyOpts study;
  auto* study_cmd = app.add_subcommand("study", "simulation studies");
  study_cmd->require_subcommand(1);
  auto* cov_cmd = study_cmd->add_subcommand("coverage", "Wald coverage, bias and SE by m");
  auto* sweep_cmd = study_cmd->add_subcommand("delta-sweep", "MAP bias and coverage by delta");
  for (auto* cmd : {cov_cmd, sweep_cmd}) {
    add_model_flags(cmd, study.model);
    add_vertex_flags(cmd, study.vertices);
    add_estimation_flags(cmd, study.est);
    cmd->add_option("--theta", study.theta, "generating coefficients")->required();
    cmd->add_option("--replicates", study.replicates, "data sets per cell")->capture_default_str();
    cmd->add_option("--level", study.level, "nominal interval level")->capture_default_str();
    cmd->add_option("--data-burn-in", study.data_burn_in, "burn-in when simulating data sets");
    cmd->add_option("--data-thin", study.data_thin, "thinning when simulating data sets");
    add_common(cmd);
  }
  cov_cmd->add_option("--m-grid", study.m_grid, "comma-separated sample sizes")->capture_default_str();
  sweep_cmd->add_option("--prior", study.prior, "prior file")->required();
  sweep_cmd->add_option("--deltas", study.deltas, "comma-separated relative prior weights")
      ->capture_default_str();
  sweep_cmd->add_option("--m", study.m, "graphs per data set")->capture_default_str();

  OracleOpts oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact moments and MLE by enumeration");
  add_model_flags(oracle_cmd, oracle.model);
  add_vertex_flags(oracle_cmd, oracle.vertices);
  oracle_cmd->add_option("--theta", oracle.theta, "coefficients for exact moments");
  oracle_cmd->add_option("--target", oracle.target, "target statistics for the exact MLE");
  add_common(oracle_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (common.threads == 0) common.threads = env_threads;
    Output out(common, &app, std::vector<std::string>(argv, argv + argc));
    int code = kOk;
    if (*fit_cmd) code = run_fit(fit, out, common);
    else if (*sim_cmd) code = run_simulate(sim, out, common);
    else if (*bern_cmd) code = run_prior(prior, out, common, false);
    else if (*prot_cmd) code = run_prior(prior, out, common, true);
    else if (*cv_cmd) code = run_cv(cv, out, common);
    else if (*gof_cmd) code = run_gof(gof, out, common);
    else if (*gli_cmd) code = run_gli(gof, out, common);
    else if (*cov_cmd) code = run_coverage(study, out, common);
    else if (*sweep_cmd) code = run_sweep(study, out, common);
    else if (*oracle_cmd) code = run_oracle(oracle, out, common);
    out.manifest();
    return code;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const EstimationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEstimation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}

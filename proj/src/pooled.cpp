#include "ergmpool/pooled.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "ergmpool/errors.hpp"
#include "ergmpool/util.hpp"

namespace ergmpool {

double relative_weight(double n0, std::size_t m) {
  if (!(n0 >= 0.0) || !std::isfinite(n0)) {
    throw UsageError("prior pseudo-sample size n0 must be finite and >= 0, got " +
                     std::to_string(n0));
  }
  if (m == 0) throw UsageError("relative prior weight needs at least one graph");
  return n0 / (n0 + static_cast<double>(m));
}

Eigen::VectorXd blended_target(const Eigen::VectorXd& tau_bar, const Eigen::VectorXd& g_bar,
                               double delta) {
  if (tau_bar.size() != g_bar.size()) {
    throw DimensionError("tau_bar has length " + std::to_string(tau_bar.size()) +
                         ", mean statistics have length " + std::to_string(g_bar.size()));
  }
  return delta * tau_bar + (1.0 - delta) * g_bar;
}

namespace {

TargetProblem make_problem(const GraphSet& set, const ModelSpec& model,
                           const Eigen::VectorXd& target, StatLabel label) {
  return {model, {target, label}, set.covariates(), set.constraint(), set.graphs()};
}

Eigen::VectorXd mean_statistics(const GraphSet& set, const ModelSpec& model) {
  if (set.size() == 0) throw UsageError("graph set is empty");
  return statistics_mean(model, set).values;
}

}  // namespace

FitResult pooled_mle(const GraphSet& set, const ModelSpec& model, const EstimatorConfig& cfg) {
  const Eigen::VectorXd g_bar = mean_statistics(set, model);
  FitResult res = fit(make_problem(set, model, g_bar, StatLabel::Mean), cfg);
  res.set_weight(static_cast<double>(set.size()));
  return res;
}

PosteriorResult conjugate_map(const GraphSet& set, const ModelSpec& model, const PriorSpec& prior,
                              const EstimatorConfig& cfg) {
  check_prior(prior, model);
  const std::size_t m = set.size();
  const double delta = relative_weight(prior.n0, m);
  const Eigen::VectorXd g_bar = mean_statistics(set, model);

  PosteriorResult post;
  post.delta = delta;
  post.n0 = prior.n0;
  post.m = m;
  post.target = blended_target(prior.tau_bar.values, g_bar, delta);
  post.fit = fit(make_problem(set, model, post.target, StatLabel::Target), cfg);
  post.fit.set_weight(static_cast<double>(m) + prior.n0);
  post.map = post.fit.theta_hat;
  post.q = post.fit.weight * post.fit.fisher_info;
  post.laplace_cov = post.fit.covariance;
  post.credible_intervals = post.fit.intervals(0.95);
  return post;
}

PriorSpec build_bernoulli_prior(const ModelSpec& model, const CovariateSet& cov,
                                const SupportConstraint& constraint, double mean_degree,
                                double n0, std::size_t n_sims, std::uint64_t seed,
                                std::size_t threads) {
  const std::size_t n = cov.order();
  if (constraint.order() != n) throw DimensionError("constraint and covariates differ in order");
  if (n < 2 || !(mean_degree > 0.0 && mean_degree < static_cast<double>(n - 1))) {
    throw UsageError("mean degree must lie in (0, n - 1) = (0, " + std::to_string(n - 1) +
                     "), got " + std::to_string(mean_degree));
  }
  if (!(n0 >= 0.0) || !std::isfinite(n0)) throw UsageError("n0 must be finite and >= 0");
  if (n_sims < 2) throw UsageError("prior needs at least 2 simulated graphs");

  const BoundModel bound(model, cov);
  const double p = mean_degree / static_cast<double>(n - 1);
  const SampleBatch batch = sample_bernoulli(bound, p, constraint, n_sims, seed, false, threads);

  PriorSpec prior;
  prior.tau_bar = {batch.mean(), StatLabel::Prior};
  prior.n0 = n0;
  prior.fingerprint = model.fingerprint();
  prior.labels = model.labels();
  prior.edge_probability = p;
  prior.tau_se = (row_covariance(batch.stats).diagonal() / static_cast<double>(n_sims))
                     .cwiseMax(0.0)
                     .cwiseSqrt();
  // tau_bar is the centroid of the simulated rows, so it is interior to their
  // hull exactly when the rows span every coordinate direction.
  const Eigen::MatrixXd centered = batch.stats.rowwise() - prior.tau_bar.values.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
  qr.setThreshold(1e-10);
  if (qr.rank() < centered.cols()) {
    prior.warnings.push_back("simulated statistics span " + std::to_string(qr.rank()) + " of " +
                             std::to_string(centered.cols()) +
                             " dimensions; prior expected statistics are on the boundary of "
                             "their hull");
  }
  try {
    check_support_bounds(bound, constraint, prior.tau_bar.values);
  } catch (const HullInfeasibleError& e) {
    prior.warnings.push_back(e.what());
  }
  return prior;
}

ProteinDegree protein_mean_degree(double mass_kda) {
  if (!(mass_kda > 0.0) || !std::isfinite(mass_kda)) {
    throw UsageError("protein mass must be positive, got " + std::to_string(mass_kda) + " kDa");
  }
  const double daltons = 1000.0 * mass_kda;
  ProteinDegree out;
  out.unfolded_area = 1.48 * daltons + 21.0;
  out.folded_area = 6.3 * std::pow(daltons, 0.73);
  out.mean_degree = 12.0 * (1.0 - out.folded_area / out.unfolded_area);
  return out;
}

Eigen::MatrixXd posterior_sample(const PosteriorResult& result, std::size_t n_draws,
                                 std::uint64_t seed) {
  const Eigen::Index p = result.map.size();
  Eigen::LLT<Eigen::MatrixXd> llt(result.laplace_cov);
  if (llt.info() != Eigen::Success || !result.laplace_cov.allFinite()) {
    throw NumericalError("Laplace covariance is not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n_draws), p);
  Eigen::VectorXd e(p);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index k = 0; k < p; ++k) e[k] = z(rng);
    out.row(r) = (result.map + l * e).transpose();
  }
  return out;
}

CvTable tune_delta_cv(const GraphSet& set, const ModelSpec& model, const StatVector& tau_bar,
                      const std::vector<double>& n0_grid, const EstimatorConfig& cfg,
                      std::size_t sim_draws, std::uint64_t seed, CvLoss loss) {
  const std::size_t m = set.size();
  if (m < 2) throw UsageError("cross validation needs at least 2 graphs");
  if (n0_grid.empty()) throw UsageError("n0 grid is empty");
  if (sim_draws == 0) throw UsageError("cross validation needs at least 1 simulated graph");
  for (double n0 : n0_grid) relative_weight(n0, m - 1);

  const BoundModel bound(model, set.covariates());
  const std::size_t cells = n0_grid.size() * m;
  std::vector<double> score(cells, 0.0);
  std::vector<std::string> failure(cells);
  const std::size_t threads = cfg.threads ? cfg.threads : default_threads();
  EstimatorConfig inner = cfg;
  inner.threads = 1;

  parallel_for(cells, threads, [&](std::size_t cell) {
    const std::size_t gi = cell / m;
    const std::size_t fold = cell % m;
    const GraphSet train = set.without(fold);
    EstimatorConfig fc = inner;
    fc.chain.seed = derive_seed(seed, fold);
    PriorSpec prior;
    prior.tau_bar = tau_bar;
    prior.n0 = n0_grid[gi];
    try {
      const PosteriorResult post = conjugate_map(train, model, prior, fc);
      if (!post.converged()) {
        failure[cell] = "fold " + std::to_string(fold) + ", n0 " + std::to_string(prior.n0) +
                        ": estimation did not converge";
        return;
      }
      ChainConfig sc = cfg.chain;
      sc.n_draws = sim_draws;
      sc.chains = 1;
      sc.keep_graphs = true;
      sc.start.reset();
      sc.seed = derive_seed(seed, fold, 0x5117);
      const SampleBatch sims = sample_ergm(bound, post.map, set.constraint(), sc, 1);
      const Graph& held = set[fold];
      double sum_sq = 0.0;
      double sum = 0.0;
      for (const auto& g : sims.graphs) {
        const auto h = static_cast<double>(hamming_distance(g, held));
        sum += h;
        sum_sq += h * h;
      }
      const double k = static_cast<double>(sims.graphs.size());
      score[cell] = loss == CvLoss::SquaredPerDraw ? sum_sq / k : (sum / k) * (sum / k);
    } catch (const EstimationError& e) {
      failure[cell] = "fold " + std::to_string(fold) + ", n0 " + std::to_string(prior.n0) + ": " +
                      e.what();
    }
  });

  CvTable table;
  for (std::size_t gi = 0; gi < n0_grid.size(); ++gi) {
    CvRow row;
    row.n0 = n0_grid[gi];
    row.delta = relative_weight(row.n0, m - 1);
    for (std::size_t fold = 0; fold < m; ++fold) {
      const std::size_t cell = gi * m + fold;
      if (failure[cell].empty()) {
        row.cv_error += score[cell];
      } else {
        ++row.failed_folds;
        table.messages.push_back(failure[cell]);
      }
    }
    if (row.complete() && (!table.argmin || row.cv_error < table.rows[*table.argmin].cv_error))
      table.argmin = table.rows.size();
    table.rows.push_back(row);
  }
  return table;
}

void write_prior(const PriorSpec& prior, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << std::setprecision(17);
  out << "# conjugate prior\n";
  out << "fingerprint " << (prior.fingerprint.empty() ? "-" : prior.fingerprint) << '\n';
  out << "n0 " << prior.n0 << '\n';
  if (!prior.labels.empty()) {
    out << "labels";
    for (const auto& l : prior.labels) out << ' ' << l;
    out << '\n';
  }
  out << "tau_bar";
  for (Eigen::Index k = 0; k < prior.tau_bar.values.size(); ++k) out << ' ' << prior.tau_bar.values[k];
  out << '\n';
  if (prior.edge_probability) out << "edge_probability " << *prior.edge_probability << '\n';
}

PriorSpec read_prior(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  PriorSpec prior;
  bool have_tau = false;
  bool have_n0 = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream is(line);
    std::string key;
    if (!(is >> key)) continue;
    if (key == "fingerprint") {
      is >> prior.fingerprint;
      if (prior.fingerprint == "-") prior.fingerprint.clear();
    } else if (key == "n0") {
      if (!(is >> prior.n0)) throw ParseError(file.string(), lineno, "expected 'n0 <number>'");
      have_n0 = true;
    } else if (key == "labels") {
      std::string l;
      while (is >> l) prior.labels.push_back(l);
    } else if (key == "tau_bar") {
      std::vector<double> v;
      std::string tok;
      while (is >> tok) {
        try {
          std::size_t used = 0;
          v.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
          throw ParseError(file.string(), lineno, "non-numeric tau_bar entry '" + tok + "'");
        }
      }
      prior.tau_bar = {Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())),
                       StatLabel::Prior};
      have_tau = true;
    } else if (key == "edge_probability") {
      double p = 0.0;
      if (is >> p) prior.edge_probability = p;
    } else {
      throw ParseError(file.string(), lineno, "unknown key '" + key + "'");
    }
  }
  if (!have_tau) throw ParseError(file.string(), lineno, "missing 'tau_bar' line");
  if (!have_n0) throw ParseError(file.string(), lineno, "missing 'n0' line");
  if (!prior.labels.empty() && prior.labels.size() != static_cast<std::size_t>(prior.tau_bar.values.size()))
    throw ParseError(file.string(), lineno, "labels and tau_bar differ in length");
  return prior;
}

void check_prior(const PriorSpec& prior, const ModelSpec& model) {
  if (prior.tau_bar.values.size() != static_cast<Eigen::Index>(model.size())) {
    throw DimensionError("prior has " + std::to_string(prior.tau_bar.values.size()) +
                         " statistics, model has " + std::to_string(model.size()) + " terms");
  }
  if (!prior.fingerprint.empty() && prior.fingerprint != model.fingerprint()) {
    throw ModelError("prior was built for model " + prior.fingerprint + ", not " +
                     model.fingerprint());
  }
  if (!prior.tau_bar.values.allFinite()) throw UsageError("prior tau_bar must be finite");
  relative_weight(prior.n0, 1);
}

}  // namespace ergmpool

#include "ergmpool/estimator.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <sstream>

#include "ergmpool/errors.hpp"
#include "ergmpool/util.hpp"

namespace ergmpool {

std::string to_string(EstimationMethod m) {
  return m == EstimationMethod::GeyerThompson ? "geyer-thompson" : "stochastic-approximation";
}

EstimatorConfig EstimatorConfig::defaults(std::size_t n, std::uint64_t seed) {
  EstimatorConfig cfg;
  cfg.chain = ChainConfig::defaults(n, 2048, seed);
  return cfg;
}

void FitResult::set_weight(double w) {
  if (!(w > 0)) throw UsageError("effective sample size must be positive");
  covariance = covariance * (weight / w);
  weight = w;
}

Eigen::VectorXd FitResult::standard_errors() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

Eigen::MatrixXd FitResult::intervals(double level) const {
  if (!(level > 0 && level < 1)) throw UsageError("interval level must lie in (0, 1)");
  const double q = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
  const Eigen::VectorXd se = standard_errors();
  Eigen::MatrixXd out(theta_hat.size(), 2);
  out.col(0) = theta_hat - q * se;
  out.col(1) = theta_hat + q * se;
  return out;
}

namespace {

double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Solve h x = g; ridge-perturbed when h is singular or indefinite.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g, bool* ridged) {
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd x = llt.solve(g);
    if (x.allFinite()) return x;
  }
  if (ridged) *ridged = true;
  const double scale = std::max(h.trace() / static_cast<double>(h.rows()), 1e-12);
  for (double eps = 1e-8; eps < 1e6; eps *= 100) {
    const Eigen::MatrixXd hr =
        h + eps * scale * Eigen::MatrixXd::Identity(h.rows(), h.cols());
    Eigen::LLT<Eigen::MatrixXd> l2(hr);
    if (l2.info() == Eigen::Success) {
      Eigen::VectorXd x = l2.solve(g);
      if (x.allFinite()) return x;
    }
  }
  throw NumericalError("matrix could not be regularized");
}

Eigen::VectorXd column_sd(const Eigen::MatrixXd& stats) {
  if (stats.rows() < 2) return Eigen::VectorXd::Zero(stats.cols());
  return row_covariance(stats).diagonal().cwiseMax(0.0).cwiseSqrt();
}

struct Prepared {
  BoundModel bound;
  Eigen::VectorXd target;
  std::vector<std::string> labels;
};

Prepared prepare(const TargetProblem& problem) {
  const std::size_t n = problem.constraint.order();
  if (problem.covariates.order() != n) {
    throw DimensionError("covariates have order " + std::to_string(problem.covariates.order()) +
                         ", constraint has order " + std::to_string(n));
  }
  Prepared out{BoundModel(problem.model, problem.covariates), problem.target.values,
               problem.model.labels()};
  if (out.target.size() != static_cast<Eigen::Index>(problem.model.size())) {
    throw DimensionError("target has length " + std::to_string(out.target.size()) +
                         ", model has " + std::to_string(problem.model.size()) + " terms");
  }
  if (!out.target.allFinite()) throw UsageError("target statistics must be finite");
  for (const auto& g : problem.reference_graphs) {
    if (g.order() != n) throw DimensionError("reference graph order differs from the model");
  }
  out.bound.check_identifiable(problem.constraint);
  check_support_bounds(out.bound, problem.constraint, out.target);
  return out;
}

ChainConfig iteration_chain(const EstimatorConfig& cfg, std::uint64_t stream,
                            const std::optional<Graph>& warm) {
  ChainConfig cc = cfg.chain;
  cc.seed = derive_seed(cfg.chain.seed, stream);
  cc.keep_graphs = false;
  if (warm) cc.start = warm;
  return cc;
}

std::optional<Graph> default_start(const TargetProblem& problem, const EstimatorConfig& cfg) {
  if (cfg.chain.start) return cfg.chain.start;
  if (!problem.reference_graphs.empty()) return problem.reference_graphs.front();
  return std::nullopt;
}

// Coordinates whose sample never moves while the target asks for a different
// value: the importance-sampling problem is unbounded there, so push theta a
// unit step toward the target instead.
bool expand_degenerate(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target,
                       Eigen::VectorXd& theta, FitDiagnostics& diag) {
  const Eigen::VectorXd sd = column_sd(stats);
  const Eigen::VectorXd mean = stats.colwise().mean();
  bool moved = false;
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    if (sd[k] > 0.0 || std::abs(target[k] - mean[k]) <= 1e-12 * (1 + std::abs(target[k])))
      continue;
    theta[k] += target[k] > mean[k] ? 1.0 : -1.0;
    moved = true;
  }
  if (moved) diag.warnings.push_back("sampled statistics degenerate; took expansion step");
  return moved;
}

// Samples at theta-hat with the enlarged information sample and fills the
// information, covariance and final diagnostics.
void finish(FitResult& res, const Prepared& prep, const TargetProblem& problem,
            const EstimatorConfig& cfg, const std::optional<Graph>& warm, std::size_t threads) {
  ChainConfig cc = iteration_chain(cfg, 0xF15Eu, warm);
  cc.n_draws = cfg.chain.n_draws * std::max<std::size_t>(1, cfg.fisher_multiplier);
  const SampleBatch batch = sample_ergm(prep.bound, res.theta_hat, problem.constraint, cc, threads);
  res.fisher_info = estimate_statistic_covariance(batch);
  res.diagnostics.fisher_draws = batch.size();
  res.diagnostics.simulated_mean = batch.mean();
  res.diagnostics.t_ratios = t_ratios(batch.stats, prep.target);
  if (cfg.hotelling_pvalue)
    res.diagnostics.hotelling_pvalue = hotelling_pvalue(batch.stats, prep.target, batch.chains);
  res.weight = 1.0;
  try {
    res.covariance = spd_inverse(res.fisher_info, "estimated Fisher information");
  } catch (const NumericalError& e) {
    res.converged = false;
    res.diagnostics.warnings.push_back(e.what());
    res.covariance = Eigen::MatrixXd::Constant(res.fisher_info.rows(), res.fisher_info.cols(), NAN);
  }
}

bool converged_at(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target,
                  const EstimatorConfig& cfg, std::size_t chains) {
  const Eigen::VectorXd tr = t_ratios(stats, target);
  if (!(tr.cwiseAbs().maxCoeff() < cfg.t_ratio_threshold)) return false;
  if (cfg.hotelling_pvalue && hotelling_pvalue(stats, target, chains) <= *cfg.hotelling_pvalue)
    return false;
  return true;
}

constexpr double kThetaLimit = 1e3;

}  // namespace

void check_support_bounds(const BoundModel& model, const SupportConstraint& constraint,
                          const Eigen::VectorXd& target) {
  const SupportBounds b = model.support_bounds(constraint);
  const auto labels = model.spec().labels();
  std::vector<std::size_t> coords;
  std::vector<std::string> names;
  std::ostringstream msg;
  for (std::size_t k = 0; k < b.known.size(); ++k) {
    if (!b.known[k]) continue;
    const auto i = static_cast<Eigen::Index>(k);
    const double lo_tol = 1e-9 * (1 + std::abs(b.lower[i]));
    const double hi_tol = 1e-9 * (1 + std::abs(b.upper[i]));
    const char* where = nullptr;
    double bound = 0.0;
    if (target[i] <= b.lower[i] + lo_tol) {
      where = "minimum";
      bound = b.lower[i];
    } else if (target[i] >= b.upper[i] - hi_tol) {
      where = "maximum";
      bound = b.upper[i];
    }
    if (!where) continue;
    coords.push_back(k);
    names.push_back(labels[k]);
    msg << (coords.size() > 1 ? "; " : "") << "'" << labels[k] << "' = " << target[i]
        << " is at its " << where << " " << bound << " on the support";
  }
  if (!coords.empty()) {
    throw HullInfeasibleError("target lies on the boundary of the convex hull of achievable "
                              "statistics (" + msg.str() + "); the MLE does not exist",
                              std::move(coords), std::move(names));
  }
}

MpleResult mple(const TargetProblem& problem, double clip) {
  const BoundModel bound(problem.model, problem.covariates);
  const auto p = static_cast<Eigen::Index>(problem.model.size());
  MpleResult res;
  res.theta = Eigen::VectorXd::Zero(p);
  if (problem.reference_graphs.empty()) return res;
  const auto free = problem.constraint.free_dyads();
  const auto rows = static_cast<Eigen::Index>(free.size() * problem.reference_graphs.size());
  if (rows == 0) throw ConstraintError("constraint fixes every dyad");
  Eigen::MatrixXd x(rows, p);
  Eigen::VectorXd y(rows);
  Eigen::Index r = 0;
  Eigen::VectorXd buf(p);
  for (const auto& g : problem.reference_graphs) {
    for (const auto& d : free) {
      bound.change_statistics(g, d.i, d.j, std::span<double>(buf.data(), static_cast<std::size_t>(p)));
      x.row(r) = buf.transpose();
      y[r] = g.has_edge(d.i, d.j) ? 1.0 : 0.0;
      ++r;
    }
  }

  auto loglik = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd eta = x * th;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
    return ll;
  };
  Eigen::VectorXd theta = res.theta;
  double ll = loglik(theta);
  for (std::size_t iter = 0; iter < 100; ++iter) {
    res.iterations = iter + 1;
    const Eigen::VectorXd eta = x * theta;
    Eigen::VectorXd mu(rows), w(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      mu[i] = logistic(eta[i]);
      w[i] = mu[i] * (1 - mu[i]);
    }
    const Eigen::VectorXd grad = x.transpose() * (y - mu);
    const Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd step = ridge_solve(h, grad, &res.ridged);
    double a = 1.0;
    Eigen::VectorXd next = theta;
    double next_ll = ll;
    for (int back = 0; back < 40; ++back, a *= 0.5) {
      next = theta + a * step;
      next_ll = loglik(next);
      if (std::isfinite(next_ll) && next_ll >= ll - 1e-12 * std::abs(ll)) break;
    }
    const double change = (next - theta).cwiseAbs().maxCoeff();
    theta = next;
    ll = next_ll;
    if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > clip) break;
    if (change < 1e-10 * (1 + theta.cwiseAbs().maxCoeff())) break;
  }
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!std::isfinite(theta[k])) theta[k] = 0.0;
    if (std::abs(theta[k]) > clip) {
      theta[k] = std::copysign(clip, theta[k]);
      res.clipped = true;
    }
  }
  res.theta = theta;
  return res;
}

Eigen::VectorXd t_ratios(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target) {
  const Eigen::VectorXd mean = stats.colwise().mean();
  const Eigen::VectorXd sd = column_sd(stats);
  Eigen::VectorXd out(mean.size());
  for (Eigen::Index k = 0; k < mean.size(); ++k) {
    const double diff = mean[k] - target[k];
    if (sd[k] > 0)
      out[k] = diff / sd[k];
    else
      out[k] = std::abs(diff) <= 1e-12 * (1 + std::abs(target[k])) ? 0.0
                                                                    : std::copysign(INFINITY, diff);
  }
  return out;
}

double hotelling_pvalue(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target,
                        std::size_t chains) {
  const auto n = static_cast<double>(stats.rows());
  const auto p = static_cast<double>(stats.cols());
  if (n <= p + 1) throw UsageError("Hotelling test needs more than p + 1 draws");
  const Eigen::MatrixXd lr = batch_means_covariance(stats, chains);
  const Eigen::VectorXd diff = stats.colwise().mean().transpose() - target;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lr);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all()) return 0.0;
  const double t2 = n * diff.dot(ldlt.solve(diff));
  const double f = (n - p) / (p * (n - 1)) * t2;
  const boost::math::fisher_f dist(p, n - p);
  return boost::math::cdf(boost::math::complement(dist, f));
}

HullResult hull_check(const SampleBatch& batch, const StatVector& target, double tol) {
  return hull_check(batch.stats, target.values, tol);
}

Eigen::VectorXd importance_step(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target) {
  const Eigen::MatrixXd d = stats.rowwise() - target.transpose();
  const Eigen::Index p = d.cols();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(p);
  // Objective: -log sum_s exp(delta' d_s), concave in delta.
  auto objective = [&](const Eigen::VectorXd& dl) {
    const Eigen::VectorXd a = d * dl;
    const double m = a.maxCoeff();
    return -(m + std::log((a.array() - m).exp().sum()));
  };
  double value = objective(delta);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd a = d * delta;
    Eigen::VectorXd w = (a.array() - a.maxCoeff()).exp();
    w /= w.sum();
    const Eigen::VectorXd mean = d.transpose() * w;  // minus the gradient
    if (mean.cwiseAbs().maxCoeff() < 1e-10 * scale) break;
    const Eigen::MatrixXd centered = d.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered;
    const Eigen::VectorXd step = ridge_solve(cov, -mean, nullptr);
    double t = 1.0;
    Eigen::VectorXd next = delta;
    double next_value = value;
    for (int back = 0; back < 50; ++back, t *= 0.5) {
      next = delta + t * step;
      next_value = objective(next);
      if (std::isfinite(next_value) && next_value >= value - 1e-13 * std::abs(value)) break;
    }
    if ((next - delta).cwiseAbs().maxCoeff() < 1e-14) {
      delta = next;
      break;
    }
    delta = next;
    value = next_value;
  }
  if (!delta.allFinite()) throw NumericalError("importance-sampling step is not finite");
  return delta;
}

FitResult fit_geyer_thompson(const TargetProblem& problem, const EstimatorConfig& cfg) {
  const Prepared prep = prepare(problem);
  const std::size_t threads = cfg.threads ? cfg.threads : default_threads();
  const auto p = static_cast<Eigen::Index>(problem.model.size());

  FitResult res;
  res.labels = prep.labels;
  res.diagnostics.method = to_string(EstimationMethod::GeyerThompson);
  res.diagnostics.mc_draws = cfg.chain.n_draws;
  if (cfg.theta0) {
    if (cfg.theta0->size() != p) throw DimensionError("theta0 length does not match the model");
    res.theta_hat = *cfg.theta0;
  } else {
    const MpleResult m = mple(problem, cfg.mple_clip);
    res.theta_hat = m.theta;
    res.diagnostics.mple_clipped = m.clipped;
    if (m.clipped) res.diagnostics.warnings.push_back("pseudo-likelihood start was clipped");
  }

  std::optional<Graph> warm = default_start(problem, cfg);
  Eigen::VectorXd& theta = res.theta_hat;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    res.diagnostics.iterations = it;
    const SampleBatch batch =
        sample_ergm(prep.bound, theta, problem.constraint, iteration_chain(cfg, it, warm), threads);
    warm = batch.final_states.front();
    const Eigen::VectorXd mean = batch.mean();

    if (converged_at(batch.stats, prep.target, cfg, batch.chains)) {
      if (hull_check(batch.stats, prep.target).status == HullStatus::Interior)
        theta += importance_step(batch.stats, prep.target);
      res.converged = true;
      break;
    }
    expand_degenerate(batch.stats, prep.target, theta, res.diagnostics);
    const Eigen::VectorXd sd = column_sd(batch.stats);
    std::vector<Eigen::Index> live;
    for (Eigen::Index k = 0; k < p; ++k)
      if (sd[k] > 0.0) live.push_back(k);
    if (live.empty()) {
      res.diagnostics.step_lengths.push_back(0.0);
      continue;
    }
    const Eigen::MatrixXd stats = batch.stats(Eigen::all, live);
    const Eigen::VectorXd target = prep.target(live);
    const Eigen::VectorXd sub_mean = mean(live);

    // Largest gamma whose working target, overshot by 5%, stays interior.
    double gamma = 1.0;
    bool inside = false;
    while (gamma > 1.0 / 4096) {
      const Eigen::VectorXd probe = sub_mean + 1.05 * gamma * (target - sub_mean);
      if (hull_check(stats, probe).status == HullStatus::Interior) {
        inside = true;
        break;
      }
      gamma *= cfg.step_backoff;
    }
    res.diagnostics.step_lengths.push_back(inside ? gamma : 0.0);
    Eigen::VectorXd step;
    if (inside) {
      step = importance_step(stats, sub_mean + gamma * (target - sub_mean));
    } else {
      // Sample hull is flat: fall back to a ridge-regularized moment step.
      step = ridge_solve(row_covariance(stats), target - sub_mean, nullptr);
      const double big = step.cwiseAbs().maxCoeff();
      if (big > 1.0) step /= big;
      res.diagnostics.warnings.push_back("sample hull degenerate; took a regularized moment step");
    }
    theta(live) += step;
    if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > kThetaLimit) {
      res.diagnostics.warnings.push_back("coefficients diverged; the target may lie on the hull");
      res.converged = false;
      if (!theta.allFinite()) throw NumericalError("coefficients became non-finite");
      break;
    }
  }
  if (!res.converged) {
    res.diagnostics.warnings.push_back("no convergence within " +
                                       std::to_string(cfg.max_iterations) + " iterations");
  }
  finish(res, prep, problem, cfg, warm, threads);
  return res;
}

FitResult fit_stochastic_approximation(const TargetProblem& problem, const EstimatorConfig& cfg) {
  const Prepared prep = prepare(problem);
  const std::size_t threads = cfg.threads ? cfg.threads : default_threads();
  const auto p = static_cast<Eigen::Index>(problem.model.size());
  const auto pz = static_cast<std::size_t>(p);

  FitResult res;
  res.labels = prep.labels;
  res.diagnostics.method = to_string(EstimationMethod::StochasticApproximation);
  res.diagnostics.mc_draws = cfg.chain.n_draws;
  if (cfg.theta0) {
    if (cfg.theta0->size() != p) throw DimensionError("theta0 length does not match the model");
    res.theta_hat = *cfg.theta0;
  } else {
    const MpleResult m = mple(problem, cfg.mple_clip);
    res.theta_hat = m.theta;
    res.diagnostics.mple_clipped = m.clipped;
    if (m.clipped) res.diagnostics.warnings.push_back("pseudo-likelihood start was clipped");
  }
  Eigen::VectorXd& theta = res.theta_hat;

  std::optional<Graph> start = default_start(problem, cfg);
  Graph g0 = start ? *start : Graph(problem.constraint.order());
  if (!start) problem.constraint.impose(g0);
  MarkovChain chain(prep.bound, problem.constraint, std::move(g0), derive_seed(cfg.chain.seed, 1));
  chain.set_theta(theta);
  chain.run(cfg.chain.burn_in);
  const std::size_t thin = cfg.chain.thin;

  // Phase 1: scaling matrix at the start, with expansion steps while degenerate.
  const std::size_t n1 = cfg.sa_phase1_draws ? cfg.sa_phase1_draws : std::max<std::size_t>(7 + 3 * pz, 50);
  Eigen::MatrixXd dinv;
  for (std::size_t attempt = 0;; ++attempt) {
    Eigen::MatrixXd draws(static_cast<Eigen::Index>(n1), p);
    for (std::size_t k = 0; k < n1; ++k) {
      chain.run(thin);
      draws.row(static_cast<Eigen::Index>(k)) = chain.stats().transpose();
    }
    if (attempt + 1 < cfg.max_iterations &&
        expand_degenerate(draws, prep.target, theta, res.diagnostics)) {
      chain.set_theta(theta);
      chain.run(cfg.chain.burn_in);
      continue;
    }
    Eigen::MatrixXd d = row_covariance(draws);
    const double floor = std::max(1e-8 * d.trace() / static_cast<double>(p), 1e-10);
    for (Eigen::Index k = 0; k < p; ++k) d(k, k) = std::max(d(k, k), floor);
    Eigen::LLT<Eigen::MatrixXd> llt(d);
    if (llt.info() != Eigen::Success) d = Eigen::MatrixXd(d.diagonal().asDiagonal());
    dinv = spd_inverse(d, "phase-1 scaling matrix");
    break;
  }

  // Phase 2: Robbins-Monro with Polyak averaging per subphase; refinement
  // rounds repeat the last subphase with doubled length until phase-3 t-ratios
  // pass.
  auto subphase = [&](double gain, std::size_t steps) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
    for (std::size_t s = 0; s < steps; ++s) {
      chain.run(thin);
      Eigen::VectorXd step = gain * (dinv * (chain.stats() - prep.target));
      theta -= step;
      if (!theta.allFinite()) throw NumericalError("stochastic approximation diverged");
      chain.set_theta(theta);
      sum += theta;
    }
    theta = sum / static_cast<double>(steps);
    chain.set_theta(theta);
  };
  double gain = cfg.sa_initial_gain;
  std::size_t steps = 0;
  for (std::size_t k = 0; k < cfg.sa_subphases; ++k) {
    steps = static_cast<std::size_t>(std::round(std::pow(2.0, 4.0 * k / 3.0) * (7.0 + p))) + 200;
    steps = std::max(steps, cfg.sa_min_subphase_steps);
    subphase(gain, steps);
    res.diagnostics.step_lengths.push_back(gain);
    if (k + 1 < cfg.sa_subphases) gain *= 0.5;
  }

  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    res.diagnostics.iterations = it;
    const SampleBatch batch = sample_ergm(prep.bound, theta, problem.constraint,
                                          iteration_chain(cfg, it, chain.graph()), threads);
    if (converged_at(batch.stats, prep.target, cfg, batch.chains)) {
      res.converged = true;
      break;
    }
    if (it == cfg.max_iterations) break;
    steps *= 2;
    subphase(gain, steps);
    res.diagnostics.step_lengths.push_back(gain);
  }
  if (!res.converged) {
    res.diagnostics.warnings.push_back("no convergence within " +
                                       std::to_string(cfg.max_iterations) + " iterations");
  }
  finish(res, prep, problem, cfg, chain.graph(), threads);
  return res;
}

FitResult fit(const TargetProblem& problem, const EstimatorConfig& cfg) {
  return cfg.method == EstimationMethod::GeyerThompson ? fit_geyer_thompson(problem, cfg)
                                                       : fit_stochastic_approximation(problem, cfg);
}

}  // namespace ergmpool

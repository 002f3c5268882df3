#include "ergmpool/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "ergmpool/errors.hpp"
#include "ergmpool/util.hpp"

namespace ergmpool {

namespace {

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double triangle_count(const Graph& g) {
  double t = 0.0;
  for (const auto& e : g.edges()) t += static_cast<double>(g.common_neighbors(e.i, e.j));
  return t / 3.0;
}

double two_star_count(const Graph& g) {
  double s = 0.0;
  for (Vertex v = 0; v < g.order(); ++v) {
    const auto d = static_cast<double>(g.degree(v));
    s += d * (d - 1.0) / 2.0;
  }
  return s;
}

}  // namespace

Eigen::VectorXd degree_distribution(const Graph& g) {
  const std::size_t n = g.order();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(n, 1)));
  for (Vertex v = 0; v < n; ++v) out[static_cast<Eigen::Index>(g.degree(v))] += 1.0;
  return out;
}

Eigen::VectorXd esp_distribution(const Graph& g) {
  const std::size_t n = g.order();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n < 2 ? 1 : n - 1));
  for (const auto& e : g.edges())
    out[static_cast<Eigen::Index>(g.common_neighbors(e.i, e.j))] += 1.0;
  return out;
}

std::vector<int> bfs_distances(const Graph& g, Vertex source) {
  std::vector<int> dist(g.order(), -1);
  std::deque<Vertex> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const Vertex u = queue.front();
    queue.pop_front();
    for (Vertex w : g.neighbors(u)) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

Eigen::VectorXd geodesic_distribution(const Graph& g) {
  const std::size_t n = g.order();
  // Bins 1 .. n-1, then inf.
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(std::max<std::size_t>(n, 1)));
  for (Vertex i = 0; i < n; ++i) {
    const auto dist = bfs_distances(g, i);
    for (Vertex j = i + 1; j < n; ++j) {
      if (dist[j] < 0)
        out[out.size() - 1] += 1.0;
      else
        out[dist[j] - 1] += 1.0;
    }
  }
  return out;
}

Eigen::VectorXd triad_census(const Graph& g) {
  const auto n = static_cast<double>(g.order());
  const double t3 = triangle_count(g);
  const double t2 = two_star_count(g) - 3.0 * t3;
  const double t1 = static_cast<double>(g.edge_count()) * (n - 2.0) - 2.0 * t2 - 3.0 * t3;
  const double all = n * (n - 1.0) * (n - 2.0) / 6.0;
  Eigen::VectorXd out(4);
  out << all - t1 - t2 - t3, t1, t2, t3;
  return out;
}

std::vector<std::size_t> core_numbers(const Graph& g) {
  const std::size_t n = g.order();
  std::vector<std::size_t> deg(n), core(n, 0);
  std::vector<bool> removed(n, false);
  for (Vertex v = 0; v < n; ++v) deg[v] = g.degree(v);
  std::size_t k = 0;
  for (std::size_t step = 0; step < n; ++step) {
    Vertex best = 0;
    std::size_t best_deg = n + 1;
    for (Vertex v = 0; v < n; ++v) {
      if (!removed[v] && deg[v] < best_deg) {
        best = v;
        best_deg = deg[v];
      }
    }
    k = std::max(k, best_deg);
    core[best] = k;
    removed[best] = true;
    for (Vertex w : g.neighbors(best))
      if (!removed[w]) --deg[w];
  }
  return core;
}

GliRow graph_level_indices(const Graph& g) {
  const std::size_t n = g.order();
  GliRow row;
  const double s2 = two_star_count(g);
  row.transitivity = s2 > 0.0 ? 3.0 * triangle_count(g) / s2 : 0.0;

  std::vector<double> deg, core, ecc;
  for (Vertex v = 0; v < n; ++v) deg.push_back(static_cast<double>(g.degree(v)));
  for (std::size_t c : core_numbers(g)) core.push_back(static_cast<double>(c));
  std::size_t unreachable = 0;
  for (Vertex v = 0; v < n; ++v) {
    const auto dist = bfs_distances(g, v);
    double sum = 0.0;
    std::size_t reached = 0;
    for (Vertex w = 0; w < n; ++w) {
      if (w == v) continue;
      if (dist[w] < 0) {
        ++unreachable;
      } else {
        sum += dist[w];
        ++reached;
      }
    }
    if (reached > 0) ecc.push_back(sum / static_cast<double>(reached));
  }
  row.sd_degree = sample_sd(deg);
  row.sd_core = sample_sd(core);
  row.sd_eccentricity = sample_sd(ecc);
  row.unreachable_pairs = unreachable / 2;
  return row;
}

double quantile(std::vector<double>& v, double level) {
  if (v.empty()) throw UsageError("quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw UsageError("quantile level must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = level * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

std::vector<Graph> simulate_at(const std::vector<Eigen::VectorXd>& thetas, const ModelSpec& model,
                               const GraphSet& set, const PredictiveConfig& cfg) {
  if (set.size() == 0) throw UsageError("graph set is empty");
  const BoundModel bound(model, set.covariates());
  std::vector<Graph> out(thetas.size());
  parallel_for(thetas.size(), cfg.threads ? cfg.threads : default_threads(),
               [&](std::size_t k) {
                 MarkovChain chain(bound, set.constraint(), set[0], derive_seed(cfg.seed, k));
                 chain.set_theta(thetas[k]);
                 chain.run(cfg.burn_in);
                 out[k] = chain.graph();
               });
  return out;
}

GofBand make_band(const std::string& name, std::vector<std::string> bins,
                  const std::vector<Eigen::VectorXd>& pred, const std::vector<Eigen::VectorXd>& obs) {
  GofBand band;
  band.statistic = name;
  band.bins = std::move(bins);
  const auto nb = static_cast<Eigen::Index>(band.bins.size());
  band.quantiles.resize(nb, static_cast<Eigen::Index>(kBandLevels.size()));
  std::vector<double> column(pred.size());
  for (Eigen::Index b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < pred.size(); ++k) column[k] = pred[k][b];
    for (std::size_t l = 0; l < kBandLevels.size(); ++l)
      band.quantiles(b, static_cast<Eigen::Index>(l)) = quantile(column, kBandLevels[l]);
  }
  band.observed.resize(static_cast<Eigen::Index>(obs.size()), nb);
  for (std::size_t r = 0; r < obs.size(); ++r)
    band.observed.row(static_cast<Eigen::Index>(r)) = obs[r].transpose();
  band.observed_mean = band.observed.colwise().mean().transpose();
  return band;
}

}  // namespace

std::vector<Graph> predictive_graphs(const FitResult& fit, const ModelSpec& model,
                                     const GraphSet& set, const PredictiveConfig& cfg) {
  if (!fit.converged) throw UsageError("goodness of fit needs a converged fit");
  return simulate_at(std::vector<Eigen::VectorXd>(cfg.n_pred_draws, fit.theta_hat), model, set,
                     cfg);
}

std::vector<Graph> predictive_graphs(const PosteriorResult& post, const ModelSpec& model,
                                     const GraphSet& set, const PredictiveConfig& cfg) {
  if (!post.converged()) throw UsageError("goodness of fit needs a converged fit");
  const Eigen::MatrixXd draws =
      posterior_sample(post, cfg.n_pred_draws, derive_seed(cfg.seed, 0xB05, 1));
  std::vector<Eigen::VectorXd> thetas;
  for (Eigen::Index r = 0; r < draws.rows(); ++r) thetas.emplace_back(draws.row(r).transpose());
  return simulate_at(thetas, model, set, cfg);
}

GofReport gof_report(const std::vector<Graph>& predictive, const GraphSet& set) {
  if (predictive.empty()) throw UsageError("goodness of fit needs at least one predictive draw");
  if (set.size() == 0) throw UsageError("graph set is empty");
  const std::size_t n = set.order();
  using Stat = Eigen::VectorXd (*)(const Graph&);
  const std::array<Stat, 4> stats = {degree_distribution, esp_distribution, geodesic_distribution,
                                     triad_census};
  const std::array<std::string, 4> names = {"degree", "esp", "geodesic", "triad"};
  std::array<std::vector<std::string>, 4> bins;
  for (std::size_t k = 0; k < std::max<std::size_t>(n, 1); ++k) bins[0].push_back(std::to_string(k));
  for (std::size_t k = 0; k + 1 < std::max<std::size_t>(n, 2); ++k) bins[1].push_back(std::to_string(k));
  for (std::size_t k = 1; k < n; ++k) bins[2].push_back(std::to_string(k));
  bins[2].push_back("inf");
  bins[3] = {"0", "1", "2", "3"};

  GofReport report;
  report.n_pred_draws = predictive.size();
  for (std::size_t s = 0; s < 4; ++s) {
    std::vector<Eigen::VectorXd> pred, obs;
    for (const auto& g : predictive) pred.push_back(stats[s](g));
    for (const auto& g : set.graphs()) obs.push_back(stats[s](g));
    report.bands[s] = make_band(names[s], bins[s], pred, obs);
  }
  return report;
}

const GofBand& GofReport::band(const std::string& statistic) const {
  for (const auto& b : bands)
    if (b.statistic == statistic) return b;
  throw UsageError("unknown goodness-of-fit statistic '" + statistic + "'");
}

std::size_t GofReport::families_covered() const {
  std::size_t covered = 0;
  for (const auto& b : bands) {
    const Eigen::VectorXd lo = b.quantiles.col(0);
    const Eigen::VectorXd hi = b.quantiles.col(b.quantiles.cols() - 1);
    if ((b.observed_mean.array() >= lo.array()).all() && (b.observed_mean.array() <= hi.array()).all())
      ++covered;
  }
  return covered;
}

GliReport gli_report(const std::vector<Graph>& predictive, const GraphSet& set) {
  GliReport report;
  for (const auto& g : set.graphs()) report.observed.push_back(graph_level_indices(g));
  for (const auto& g : predictive) report.predictive.push_back(graph_level_indices(g));
  return report;
}

namespace {

void validate(const CoverageStudyConfig& cfg) {
  if (cfg.replicates == 0) throw UsageError("study needs at least one replicate");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw UsageError("nominal level must lie in (0, 1)");
  if (cfg.theta_star.size() != static_cast<Eigen::Index>(cfg.model.size()))
    throw DimensionError("theta* has length " + std::to_string(cfg.theta_star.size()) +
                         ", model has " + std::to_string(cfg.model.size()) + " terms");
  if (cfg.constraint.order() != cfg.covariates.order())
    throw DimensionError("constraint and covariates differ in order");
}

std::uint64_t fit_seed(const CoverageStudyConfig& cfg, std::size_t m, std::size_t r) {
  return derive_seed(derive_seed(cfg.seed, m, r), 1);
}

struct Replicate {
  std::optional<Eigen::VectorXd> theta;
  Eigen::VectorXd se;
  Eigen::VectorXd covered;
  std::string failure;
};

struct Summary {
  Eigen::VectorXd mean, bias, mean_se, sd, coverage;
  std::size_t fitted = 0;
  std::size_t failed = 0;
};

Summary summarize(const std::vector<Replicate>& reps, const Eigen::VectorXd& theta_star,
                  std::vector<std::string>& messages) {
  const Eigen::Index p = theta_star.size();
  Summary s;
  s.mean = s.mean_se = s.coverage = s.sd = Eigen::VectorXd::Zero(p);
  for (const auto& r : reps) {
    if (!r.theta) {
      ++s.failed;
      messages.push_back(r.failure);
      continue;
    }
    ++s.fitted;
    s.mean += *r.theta;
    s.mean_se += r.se;
    s.coverage += r.covered;
  }
  if (s.fitted == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = s.bias = s.mean_se = s.sd = s.coverage = Eigen::VectorXd::Constant(p, nan);
    return s;
  }
  const auto k = static_cast<double>(s.fitted);
  s.mean /= k;
  s.mean_se /= k;
  s.coverage /= k;
  s.bias = s.mean - theta_star;
  if (s.fitted > 1) {
    for (const auto& r : reps)
      if (r.theta) s.sd += (*r.theta - s.mean).cwiseAbs2();
    s.sd = (s.sd / (k - 1.0)).cwiseSqrt();
  }
  return s;
}

Replicate record(const FitResult& fit, const Eigen::VectorXd& theta_star, double level) {
  Replicate rep;
  const Eigen::MatrixXd ci = fit.intervals(level);
  rep.theta = fit.theta_hat;
  rep.se = fit.standard_errors();
  rep.covered.resize(theta_star.size());
  for (Eigen::Index k = 0; k < theta_star.size(); ++k)
    rep.covered[k] = ci(k, 0) <= theta_star[k] && theta_star[k] <= ci(k, 1) ? 1.0 : 0.0;
  return rep;
}

}  // namespace

GraphSet simulate_dataset(const CoverageStudyConfig& cfg, std::size_t m, std::size_t r) {
  const BoundModel bound(cfg.model, cfg.covariates);
  ChainConfig c = cfg.data_chain;
  c.n_draws = m;
  c.chains = 1;
  c.keep_graphs = true;
  c.seed = derive_seed(cfg.seed, m, r);
  auto batch = sample_ergm(bound, cfg.theta_star, cfg.constraint, c, 1);
  return GraphSet(std::move(batch.graphs), cfg.covariates, cfg.constraint);
}

CoverageTable run_coverage_study(const CoverageStudyConfig& cfg) {
  validate(cfg);
  if (cfg.m_grid.empty()) throw UsageError("coverage study needs a sample-size grid");
  const std::size_t k = cfg.replicates;
  std::vector<Replicate> reps(cfg.m_grid.size() * k);
  EstimatorConfig inner = cfg.estimator;
  inner.threads = 1;

  parallel_for(reps.size(), cfg.threads ? cfg.threads : default_threads(), [&](std::size_t cell) {
    const std::size_t m = cfg.m_grid[cell / k];
    const std::size_t r = cell % k;
    EstimatorConfig ec = inner;
    ec.chain.seed = fit_seed(cfg, m, r);
    try {
      const GraphSet data = simulate_dataset(cfg, m, r);
      const FitResult fit = pooled_mle(data, cfg.model, ec);
      if (!fit.converged) {
        reps[cell].failure = "m " + std::to_string(m) + ", replicate " + std::to_string(r) +
                             ": estimation did not converge";
        return;
      }
      reps[cell] = record(fit, cfg.theta_star, cfg.level);
    } catch (const EstimationError& e) {
      reps[cell].failure = "m " + std::to_string(m) + ", replicate " + std::to_string(r) + ": " +
                           e.what();
    }
  });

  CoverageTable table;
  table.labels = cfg.model.labels();
  for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
    const std::vector<Replicate> slice(reps.begin() + static_cast<std::ptrdiff_t>(mi * k),
                                       reps.begin() + static_cast<std::ptrdiff_t>((mi + 1) * k));
    const Summary s = summarize(slice, cfg.theta_star, table.messages);
    CoverageCell cell;
    cell.m = cfg.m_grid[mi];
    cell.mean_estimate = s.mean;
    cell.bias = s.bias;
    cell.mean_se = s.mean_se;
    cell.sd_estimate = s.sd;
    cell.coverage = s.coverage;
    cell.fitted = s.fitted;
    cell.failed = s.failed;
    table.cells.push_back(cell);
  }
  return table;
}

double n0_for_delta(double delta, std::size_t m) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw UsageError("relative prior weight must lie in [0, 1), got " + std::to_string(delta));
  return delta * static_cast<double>(m) / (1.0 - delta);
}

DeltaSweepTable run_delta_sweep(const DeltaSweepConfig& cfg) {
  const CoverageStudyConfig& study = cfg.study;
  validate(study);
  if (cfg.m == 0) throw UsageError("delta sweep needs m >= 1");
  if (cfg.delta_grid.empty()) throw UsageError("delta sweep needs a delta grid");
  check_prior(cfg.prior, study.model);
  std::vector<double> n0s;
  for (double d : cfg.delta_grid) n0s.push_back(n0_for_delta(d, cfg.m));

  const std::size_t k = study.replicates;
  const std::size_t threads = study.threads ? study.threads : default_threads();
  std::vector<std::optional<GraphSet>> data(k);
  std::vector<std::string> data_failure(k);
  parallel_for(k, threads, [&](std::size_t r) {
    try {
      data[r] = simulate_dataset(study, cfg.m, r);
    } catch (const EstimationError& e) {
      data_failure[r] = e.what();
    }
  });

  std::vector<Replicate> reps(n0s.size() * k);
  EstimatorConfig inner = study.estimator;
  inner.threads = 1;
  parallel_for(reps.size(), threads, [&](std::size_t cell) {
    const std::size_t di = cell / k;
    const std::size_t r = cell % k;
    const std::string where =
        "delta " + std::to_string(cfg.delta_grid[di]) + ", replicate " + std::to_string(r) + ": ";
    if (!data[r]) {
      reps[cell].failure = where + data_failure[r];
      return;
    }
    EstimatorConfig ec = inner;
    ec.chain.seed = fit_seed(study, cfg.m, r);
    PriorSpec prior = cfg.prior;
    prior.n0 = n0s[di];
    try {
      const PosteriorResult post = conjugate_map(*data[r], study.model, prior, ec);
      if (!post.converged()) {
        reps[cell].failure = where + "estimation did not converge";
        return;
      }
      reps[cell] = record(post.fit, study.theta_star, study.level);
    } catch (const EstimationError& e) {
      reps[cell].failure = where + e.what();
    }
  });

  DeltaSweepTable table;
  table.labels = study.model.labels();
  for (std::size_t di = 0; di < n0s.size(); ++di) {
    const std::vector<Replicate> slice(reps.begin() + static_cast<std::ptrdiff_t>(di * k),
                                       reps.begin() + static_cast<std::ptrdiff_t>((di + 1) * k));
    const Summary s = summarize(slice, study.theta_star, table.messages);
    DeltaRow row;
    row.delta = cfg.delta_grid[di];
    row.n0 = n0s[di];
    row.mean_map = s.mean;
    row.bias = s.bias;
    row.mean_se = s.mean_se;
    row.sd_estimate = s.sd;
    row.coverage = s.coverage;
    row.fitted = s.fitted;
    row.failed = s.failed;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace ergmpool

#include "ergmpool/sampler.hpp"

#include <cmath>

#include "ergmpool/errors.hpp"
#include "ergmpool/util.hpp"

namespace ergmpool {

ChainConfig ChainConfig::defaults(std::size_t n, std::size_t n_draws, std::uint64_t seed) {
  ChainConfig cfg;
  cfg.burn_in = 10000 * n;
  cfg.thin = 100 * n;
  cfg.n_draws = n_draws;
  cfg.seed = seed;
  return cfg;
}

MarkovChain::MarkovChain(const BoundModel& model, const SupportConstraint& constraint,
                         Graph start, std::uint64_t seed)
    : model_(&model), free_(constraint.free_dyads()), g_(std::move(start)), rng_(seed) {
  if (g_.order() != model.order() || constraint.order() != model.order()) {
    throw DimensionError("chain: graph, constraint and model orders differ");
  }
  if (free_.empty()) throw ConstraintError("constraint fixes every dyad; nothing to sample");
  if (!constraint.admits(g_)) throw ConstraintError("chain start graph violates the constraint");
  pick_ = std::uniform_int_distribution<std::size_t>(0, free_.size() - 1);
  stats_ = model.statistics(g_);
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.size()));
  delta_ = theta_;
}

void MarkovChain::set_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size()) {
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", model has " +
                         std::to_string(theta_.size()) + " terms");
  }
  if (!theta.allFinite()) throw UsageError("theta must be finite");
  theta_ = theta;
}

void MarkovChain::run(std::size_t steps) {
  std::span<double> out(delta_.data(), static_cast<std::size_t>(delta_.size()));
  for (std::size_t s = 0; s < steps; ++s) {
    const Dyad& d = free_[pick_(rng_)];
    model_->change_statistics(g_, d.i, d.j, out);
    const double sign = g_.has_edge(d.i, d.j) ? -1.0 : 1.0;
    const double log_ratio = std::clamp(sign * theta_.dot(delta_), -700.0, 700.0);
    ++proposed_;
    if (log_ratio >= 0.0 || std::log(unif_(rng_)) < log_ratio) {
      g_.toggle(d.i, d.j);
      stats_ += sign * delta_;
      ++accepted_;
    }
  }
}

namespace {

std::size_t draws_for_chain(const ChainConfig& cfg, std::size_t c) {
  return cfg.n_draws / cfg.chains + (c < cfg.n_draws % cfg.chains ? 1 : 0);
}

void validate(const ChainConfig& cfg) {
  if (cfg.n_draws == 0) throw UsageError("chain config: n_draws must be >= 1");
  if (cfg.thin == 0) throw UsageError("chain config: thin must be >= 1");
  if (cfg.chains == 0) throw UsageError("chain config: chains must be >= 1");
}

Graph start_graph(const ChainConfig& cfg, const BoundModel& model,
                  const SupportConstraint& constraint) {
  if (cfg.start) return *cfg.start;
  Graph g(model.order());
  constraint.impose(g);
  return g;
}

}  // namespace

void for_each_draw(const BoundModel& model, const Eigen::VectorXd& theta,
                   const SupportConstraint& constraint, const ChainConfig& cfg,
                   const std::function<void(std::size_t, std::size_t, const Graph&,
                                            const Eigen::VectorXd&)>& visit) {
  validate(cfg);
  for (std::size_t c = 0; c < cfg.chains; ++c) {
    MarkovChain chain(model, constraint, start_graph(cfg, model, constraint),
                      derive_seed(cfg.seed, c));
    chain.set_theta(theta);
    chain.run(cfg.burn_in);
    const std::size_t draws = draws_for_chain(cfg, c);
    for (std::size_t k = 0; k < draws; ++k) {
      chain.run(cfg.thin);
      visit(c, k, chain.graph(), chain.stats());
    }
  }
}

SampleBatch sample_ergm(const BoundModel& model, const Eigen::VectorXd& theta,
                        const SupportConstraint& constraint, const ChainConfig& cfg,
                        std::size_t threads) {
  validate(cfg);
  if (threads == 0) threads = default_threads();
  const auto p = static_cast<Eigen::Index>(model.size());

  struct ChainOut {
    Eigen::MatrixXd stats;
    std::vector<Graph> graphs;
    Graph last;
    std::size_t proposed = 0;
    std::size_t accepted = 0;
  };
  std::vector<ChainOut> outs(cfg.chains);
  parallel_for(cfg.chains, threads, [&](std::size_t c) {
    MarkovChain chain(model, constraint, start_graph(cfg, model, constraint),
                      derive_seed(cfg.seed, c));
    chain.set_theta(theta);
    chain.run(cfg.burn_in);
    const std::size_t draws = draws_for_chain(cfg, c);
    ChainOut& out = outs[c];
    out.stats.resize(static_cast<Eigen::Index>(draws), p);
    for (std::size_t k = 0; k < draws; ++k) {
      chain.run(cfg.thin);
      out.stats.row(static_cast<Eigen::Index>(k)) = chain.stats().transpose();
      if (cfg.keep_graphs) out.graphs.push_back(chain.graph());
    }
    out.last = chain.graph();
    out.proposed = chain.proposed();
    out.accepted = chain.accepted();
  });

  SampleBatch batch;
  batch.theta = theta;
  batch.chains = cfg.chains;
  batch.stats.resize(static_cast<Eigen::Index>(cfg.n_draws), p);
  Eigen::Index row = 0;
  std::size_t proposed = 0;
  std::size_t accepted = 0;
  for (auto& out : outs) {
    batch.stats.middleRows(row, out.stats.rows()) = out.stats;
    row += out.stats.rows();
    for (auto& g : out.graphs) batch.graphs.push_back(std::move(g));
    batch.final_states.push_back(std::move(out.last));
    proposed += out.proposed;
    accepted += out.accepted;
  }
  batch.acceptance_rate = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  return batch;
}

SampleBatch sample_ergm(const ModelSpec& model, const Eigen::VectorXd& theta,
                        const CovariateSet& cov, const SupportConstraint& constraint,
                        const ChainConfig& cfg, std::size_t threads) {
  const BoundModel bound(model, cov);
  return sample_ergm(bound, theta, constraint, cfg, threads);
}

Graph draw_bernoulli(const SupportConstraint& constraint, double p, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("edge probability must lie in [0, 1]");
  const std::size_t n = constraint.order();
  Graph g(n);
  std::bernoulli_distribution coin(p);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      const int s = constraint.state(i, j);
      if (s == 1 || (s == 0 && coin(rng))) g.set_edge(i, j, true);
    }
  }
  return g;
}

SampleBatch sample_bernoulli(const BoundModel& model, double p,
                             const SupportConstraint& constraint, std::size_t n_draws,
                             std::uint64_t seed, bool keep_graphs, std::size_t threads) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("edge probability must lie in [0, 1]");
  if (n_draws == 0) throw UsageError("n_draws must be >= 1");
  if (constraint.order() != model.order()) {
    throw DimensionError("constraint and model orders differ");
  }
  if (threads == 0) threads = default_threads();
  SampleBatch batch;
  batch.stats.resize(static_cast<Eigen::Index>(n_draws), static_cast<Eigen::Index>(model.size()));
  if (keep_graphs) batch.graphs.resize(n_draws);
  parallel_for(n_draws, threads, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    Graph g = draw_bernoulli(constraint, p, rng);
    batch.stats.row(static_cast<Eigen::Index>(k)) = model.statistics(g).transpose();
    if (keep_graphs) batch.graphs[k] = std::move(g);
  });
  batch.chains = n_draws;
  batch.acceptance_rate = 1.0;
  return batch;
}

Eigen::MatrixXd estimate_statistic_covariance(const SampleBatch& batch) {
  const auto p = static_cast<std::size_t>(batch.stats.cols());
  if (batch.size() < p + 1) {
    throw UsageError("covariance needs at least p + 1 = " + std::to_string(p + 1) +
                     " draws, batch has " + std::to_string(batch.size()));
  }
  return row_covariance(batch.stats);
}

Eigen::MatrixXd batch_means_covariance(const Eigen::MatrixXd& stats, std::size_t chains) {
  const auto total = static_cast<std::size_t>(stats.rows());
  if (chains == 0 || chains > total) chains = 1;
  const std::size_t per_chain = total / chains;
  const std::size_t b = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(per_chain)));
  const std::size_t per_batch_chain = per_chain / b;
  if (b == 1 || per_batch_chain * chains < 2) return row_covariance(stats);

  Eigen::MatrixXd means(static_cast<Eigen::Index>(per_batch_chain * chains), stats.cols());
  Eigen::Index r = 0;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < chains; ++c) {
    const std::size_t len = total / chains + (c < total % chains ? 1 : 0);
    for (std::size_t k = 0; k < per_batch_chain; ++k) {
      means.row(r++) = stats.middleRows(static_cast<Eigen::Index>(offset + k * b),
                                        static_cast<Eigen::Index>(b))
                           .colwise()
                           .mean();
    }
    offset += len;
  }
  return static_cast<double>(b) * row_covariance(means);
}

Eigen::VectorXd monte_carlo_se(const SampleBatch& batch) {
  if (batch.size() < 2) throw UsageError("standard errors need at least 2 draws");
  const Eigen::MatrixXd lr = batch_means_covariance(batch.stats, batch.chains);
  return (lr.diagonal() / static_cast<double>(batch.size())).cwiseMax(0.0).cwiseSqrt();
}

}  // namespace ergmpool

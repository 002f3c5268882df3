#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "ergmpool/terms.hpp"

namespace ergmpool {

struct ChainConfig {
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::size_t n_draws = 1;
  std::uint64_t seed = 1;
  // Initial state; the empty graph (with fixed dyads imposed) when unset.
  std::optional<Graph> start;
  // Independent chains with derived seeds; draws are split evenly and rows
  // are stored chain by chain.
  std::size_t chains = 1;
  bool keep_graphs = false;

  // burn_in = 1e4 * n, thin = 1e2 * n.
  static ChainConfig defaults(std::size_t n, std::size_t n_draws, std::uint64_t seed);
};

struct SampleBatch {
  Eigen::MatrixXd stats;  // n_draws x p
  std::vector<Graph> graphs;
  Eigen::VectorXd theta;
  std::size_t chains = 1;
  std::vector<Graph> final_states;  // last state of each chain
  double acceptance_rate = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(stats.rows()); }
  Eigen::VectorXd mean() const { return stats.colwise().mean(); }
};

// Metropolis-Hastings chain with uniform proposals over the free dyads.
// Statistics are maintained through change statistics.
class MarkovChain {
 public:
  MarkovChain(const BoundModel& model, const SupportConstraint& constraint, Graph start,
              std::uint64_t seed);

  void set_theta(const Eigen::VectorXd& theta);
  void run(std::size_t steps);

  const Graph& graph() const noexcept { return g_; }
  const Eigen::VectorXd& stats() const noexcept { return stats_; }
  std::size_t proposed() const noexcept { return proposed_; }
  std::size_t accepted() const noexcept { return accepted_; }

 private:
  const BoundModel* model_;
  std::vector<Dyad> free_;
  Graph g_;
  Eigen::VectorXd stats_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd delta_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<std::size_t> pick_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::size_t proposed_ = 0;
  std::size_t accepted_ = 0;
};

// Runs the configured chains and calls visit(chain, draw, graph, stats) for
// every retained state, chain by chain.
void for_each_draw(const BoundModel& model, const Eigen::VectorXd& theta,
                   const SupportConstraint& constraint, const ChainConfig& cfg,
                   const std::function<void(std::size_t, std::size_t, const Graph&,
                                            const Eigen::VectorXd&)>& visit);

SampleBatch sample_ergm(const BoundModel& model, const Eigen::VectorXd& theta,
                        const SupportConstraint& constraint, const ChainConfig& cfg,
                        std::size_t threads = 0);
SampleBatch sample_ergm(const ModelSpec& model, const Eigen::VectorXd& theta,
                        const CovariateSet& cov, const SupportConstraint& constraint,
                        const ChainConfig& cfg, std::size_t threads = 0);

// One exact draw: every free dyad present independently with probability p.
Graph draw_bernoulli(const SupportConstraint& constraint, double p, std::mt19937_64& rng);

SampleBatch sample_bernoulli(const BoundModel& model, double p,
                             const SupportConstraint& constraint, std::size_t n_draws,
                             std::uint64_t seed, bool keep_graphs = false,
                             std::size_t threads = 0);

// Sample covariance of the statistic rows (denominator n_draws - 1).
Eigen::MatrixXd estimate_statistic_covariance(const SampleBatch& batch);

// Long-run covariance of the statistic rows by batch means within chains:
// Var(sample mean) ~ result / n_draws.
Eigen::MatrixXd batch_means_covariance(const Eigen::MatrixXd& stats, std::size_t chains = 1);
// Autocorrelation-adjusted standard errors of the column means.
Eigen::VectorXd monte_carlo_se(const SampleBatch& batch);

}  // namespace ergmpool

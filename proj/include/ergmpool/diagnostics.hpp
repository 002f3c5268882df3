#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ergmpool/pooled.hpp"

namespace ergmpool {

// Per-graph distributions used for goodness of fit.
Eigen::VectorXd degree_distribution(const Graph& g);    // bins 0 .. n-1
Eigen::VectorXd esp_distribution(const Graph& g);       // edges with k shared partners, 0 .. n-2
Eigen::VectorXd geodesic_distribution(const Graph& g);  // pairs at distance 1 .. n-1, then inf
// Vertex triples with 0, 1, 2 and 3 edges.
Eigen::VectorXd triad_census(const Graph& g);

// BFS distances from `source`; -1 when unreachable.
std::vector<int> bfs_distances(const Graph& g, Vertex source);
std::vector<std::size_t> core_numbers(const Graph& g);

struct GliRow {
  double transitivity = 0.0;
  double sd_degree = 0.0;
  double sd_core = 0.0;
  double sd_eccentricity = 0.0;
  // Unreachable vertices are left out of each M-eccentricity mean.
  std::size_t unreachable_pairs = 0;
};

// Standard deviations use the n - 1 denominator.
GliRow graph_level_indices(const Graph& g);

inline constexpr std::array<double, 5> kBandLevels = {0.025, 0.25, 0.5, 0.75, 0.975};

struct GofBand {
  std::string statistic;            // degree, esp, geodesic, triad
  std::vector<std::string> bins;
  Eigen::MatrixXd quantiles;        // bins x kBandLevels
  Eigen::VectorXd observed_mean;    // over the graph set
  Eigen::MatrixXd observed;         // graphs x bins
};

struct GofReport {
  std::array<GofBand, 4> bands;
  std::size_t n_pred_draws = 0;

  const GofBand& band(const std::string& statistic) const;
  // Number of statistic families whose observed mean lies inside the central
  // 95% band in every bin.
  std::size_t families_covered() const;
};

struct PredictiveConfig {
  std::size_t n_pred_draws = 1000;
  // Each predictive graph is the end of its own chain of this many toggles,
  // started at the first graph of the set.
  std::size_t burn_in = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

// Graphs simulated at theta-hat.
std::vector<Graph> predictive_graphs(const FitResult& fit, const ModelSpec& model,
                                     const GraphSet& set, const PredictiveConfig& cfg);
// One graph per draw of theta from the Laplace approximation.
std::vector<Graph> predictive_graphs(const PosteriorResult& post, const ModelSpec& model,
                                     const GraphSet& set, const PredictiveConfig& cfg);

GofReport gof_report(const std::vector<Graph>& predictive, const GraphSet& set);

template <class Result>
GofReport gof(const Result& result, const ModelSpec& model, const GraphSet& set,
              const PredictiveConfig& cfg) {
  return gof_report(predictive_graphs(result, model, set, cfg), set);
}

struct GliReport {
  std::vector<GliRow> observed;
  std::vector<GliRow> predictive;
};

GliReport gli_report(const std::vector<Graph>& predictive, const GraphSet& set);

// Type-7 sample quantile of v, which is sorted in place.
double quantile(std::vector<double>& v, double level);

struct CoverageStudyConfig {
  ModelSpec model;
  CovariateSet covariates;
  SupportConstraint constraint;
  Eigen::VectorXd theta_star;
  std::vector<std::size_t> m_grid{1, 5, 20};
  std::size_t replicates = 200;
  double level = 0.95;
  EstimatorConfig estimator;
  // Burn-in and thinning used to simulate each data set.
  ChainConfig data_chain;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct CoverageCell {
  std::size_t m = 0;
  Eigen::VectorXd mean_estimate;
  Eigen::VectorXd bias;
  Eigen::VectorXd mean_se;      // mean reported standard error
  Eigen::VectorXd sd_estimate;  // spread of the estimates across replicates
  Eigen::VectorXd coverage;
  std::size_t fitted = 0;
  std::size_t failed = 0;
};

struct CoverageTable {
  std::vector<std::string> labels;
  std::vector<CoverageCell> cells;
  std::vector<std::string> messages;
};

// Data set r at sample size m; shared by the coverage study and the delta sweep.
GraphSet simulate_dataset(const CoverageStudyConfig& cfg, std::size_t m, std::size_t r);

CoverageTable run_coverage_study(const CoverageStudyConfig& cfg);

struct DeltaSweepConfig {
  CoverageStudyConfig study;  // m_grid is ignored
  std::size_t m = 1;
  PriorSpec prior;            // n0 is ignored
  std::vector<double> delta_grid;
};

struct DeltaRow {
  double delta = 0.0;
  double n0 = 0.0;
  Eigen::VectorXd mean_map;
  Eigen::VectorXd bias;
  Eigen::VectorXd mean_se;
  Eigen::VectorXd sd_estimate;
  Eigen::VectorXd coverage;  // of the credible intervals
  std::size_t fitted = 0;
  std::size_t failed = 0;
};

struct DeltaSweepTable {
  std::vector<std::string> labels;
  std::vector<DeltaRow> rows;
  std::vector<std::string> messages;
};

// n0 = delta m / (1 - delta); delta must lie in [0, 1).
double n0_for_delta(double delta, std::size_t m);

DeltaSweepTable run_delta_sweep(const DeltaSweepConfig& cfg);

}  // namespace ergmpool

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ergmpool/hull.hpp"
#include "ergmpool/sampler.hpp"
#include "ergmpool/terms.hpp"

namespace ergmpool {

// Fit theta so that E_theta g(Y) matches `target`: the single-graph MLE of a
// pseudo-graph whose statistics equal the target.
struct TargetProblem {
  ModelSpec model;
  StatVector target;
  CovariateSet covariates;
  SupportConstraint constraint;
  // Graphs used for the pseudo-likelihood start (all rows are stacked).
  std::vector<Graph> reference_graphs;
};

enum class EstimationMethod { GeyerThompson, StochasticApproximation };

std::string to_string(EstimationMethod m);

struct EstimatorConfig {
  EstimationMethod method = EstimationMethod::GeyerThompson;
  // Sample drawn per Geyer-Thompson iteration, and the phase-3 sample of
  // stochastic approximation.
  ChainConfig chain;
  std::size_t max_iterations = 30;
  double t_ratio_threshold = 0.1;
  // Hotelling T^2 p-value that must be exceeded as well, when set.
  std::optional<double> hotelling_pvalue;
  double step_backoff = 0.5;
  // Information at theta-hat is re-estimated from fisher_multiplier times
  // the chain draws.
  std::size_t fisher_multiplier = 4;
  double mple_clip = 10.0;
  std::optional<Eigen::VectorXd> theta0;

  std::size_t sa_phase1_draws = 0;  // 0: 7 + 3p
  std::size_t sa_subphases = 4;
  double sa_initial_gain = 0.1;
  std::size_t sa_min_subphase_steps = 0;

  std::size_t threads = 0;

  // Desk defaults for n vertices: burn-in 1e4 n, thinning 1e2 n, 2048 draws.
  static EstimatorConfig defaults(std::size_t n, std::uint64_t seed);
};

struct FitDiagnostics {
  std::string method;
  std::size_t iterations = 0;
  Eigen::VectorXd t_ratios;        // at theta-hat, from the information sample
  std::optional<double> hotelling_pvalue;
  std::size_t mc_draws = 0;        // estimation sample per iteration
  std::size_t fisher_draws = 0;
  Eigen::VectorXd simulated_mean;  // E_theta-hat g from the information sample
  std::vector<double> step_lengths;
  bool mple_clipped = false;
  std::vector<std::string> warnings;
};

struct FitResult {
  Eigen::VectorXd theta_hat;
  Eigen::MatrixXd fisher_info;  // single-graph scale
  double weight = 1.0;
  Eigen::MatrixXd covariance;   // fisher_info^-1 / weight
  bool converged = false;
  std::vector<std::string> labels;
  FitDiagnostics diagnostics;

  // Rescales the covariance to a new effective sample size.
  void set_weight(double w);
  Eigen::VectorXd standard_errors() const;
  // Central intervals at `level` from the Gaussian approximation.
  Eigen::MatrixXd intervals(double level = 0.95) const;
};

struct MpleResult {
  Eigen::VectorXd theta;
  bool clipped = false;
  bool ridged = false;
  std::size_t iterations = 0;
};

MpleResult mple(const TargetProblem& problem, double clip = 10.0);

FitResult fit_geyer_thompson(const TargetProblem& problem, const EstimatorConfig& cfg);
FitResult fit_stochastic_approximation(const TargetProblem& problem, const EstimatorConfig& cfg);
// Dispatches on cfg.method.
FitResult fit(const TargetProblem& problem, const EstimatorConfig& cfg);

HullResult hull_check(const SampleBatch& batch, const StatVector& target, double tol = 1e-9);

// Maximizer over theta of the importance-sampled log-likelihood ratio
// (theta - theta_s)' target - log mean_s exp((theta - theta_s)' g_s), returned as
// the increment theta - theta_s. Requires target interior to the sample hull.
Eigen::VectorXd importance_step(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target);

// Per coordinate (mean - target) / sd of the sampled statistic.
Eigen::VectorXd t_ratios(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target);
// Hotelling T^2 p-value for mean = target, with the batch-means covariance.
double hotelling_pvalue(const Eigen::MatrixXd& stats, const Eigen::VectorXd& target,
                        std::size_t chains = 1);

// Throws HullInfeasibleError when a coordinate of the target sits at or beyond
// an exactly known support bound.
void check_support_bounds(const BoundModel& model, const SupportConstraint& constraint,
                          const Eigen::VectorXd& target);

}  // namespace ergmpool

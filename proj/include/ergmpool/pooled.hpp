#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ergmpool/estimator.hpp"

namespace ergmpool {

// Conjugate prior: expected statistics tau_bar and pseudo-sample size n0.
// The normalizer H(tau_bar, n0) is never needed: the MAP is the MLE at the
// blended target, so it is not computed.
struct PriorSpec {
  StatVector tau_bar{Eigen::VectorXd(), StatLabel::Prior};
  double n0 = 0.01;
  // Fingerprint of the model tau_bar was built for; empty when unknown.
  std::string fingerprint;
  std::vector<std::string> labels;

  // Metadata of built priors.
  std::optional<double> edge_probability;
  Eigen::VectorXd tau_se;  // Monte Carlo standard errors of tau_bar
  std::vector<std::string> warnings;
};

// delta = n0 / (n0 + m).
double relative_weight(double n0, std::size_t m);
// delta * tau_bar + (1 - delta) * g_bar.
Eigen::VectorXd blended_target(const Eigen::VectorXd& tau_bar, const Eigen::VectorXd& g_bar,
                               double delta);

struct PosteriorResult {
  Eigen::VectorXd map;
  Eigen::MatrixXd q;            // (m + n0) * I(map)
  Eigen::MatrixXd laplace_cov;  // q^-1
  double delta = 0.0;
  double n0 = 0.0;
  std::size_t m = 0;
  Eigen::VectorXd target;
  Eigen::MatrixXd credible_intervals;  // p x 2, central 95%
  FitResult fit;                       // weight m + n0

  bool converged() const noexcept { return fit.converged; }
};

// Fit at the mean statistics of the set; covariance I^-1 / m.
FitResult pooled_mle(const GraphSet& set, const ModelSpec& model, const EstimatorConfig& cfg);

// MLE at the blended target delta tau_bar + (1 - delta) g_bar with the Laplace
// approximation N(map, ((m + n0) I)^-1). n0 = 0 reduces to pooled_mle.
PosteriorResult conjugate_map(const GraphSet& set, const ModelSpec& model,
                              const PriorSpec& prior, const EstimatorConfig& cfg);

// tau_bar = mean statistics of n_sims exact Bernoulli graphs with
// p = mean_degree / (n - 1), honoring the constraint.
PriorSpec build_bernoulli_prior(const ModelSpec& model, const CovariateSet& cov,
                                const SupportConstraint& constraint, double mean_degree,
                                double n0, std::size_t n_sims, std::uint64_t seed,
                                std::size_t threads = 0);

struct ProteinDegree {
  double mean_degree = 0.0;
  double folded_area = 0.0;    // A_f = 6.3 M^0.73
  double unfolded_area = 0.0;  // A_u = 1.48 M + 21
};

// Expected residue contact degree 12 (1 - A_f / A_u) for mass in kDa.
ProteinDegree protein_mean_degree(double mass_kda);

// Gaussian draws from the Laplace approximation, one per row.
Eigen::MatrixXd posterior_sample(const PosteriorResult& result, std::size_t n_draws,
                                 std::uint64_t seed);

enum class CvLoss {
  SquaredPerDraw,  // mean over draws of h^2
  SquaredMean,     // (mean over draws of h)^2
};

struct CvRow {
  double n0 = 0.0;
  double delta = 0.0;  // with m - 1 graphs in each fold
  double cv_error = 0.0;
  std::size_t failed_folds = 0;
  bool complete() const noexcept { return failed_folds == 0; }
};

struct CvTable {
  std::vector<CvRow> rows;
  std::optional<std::size_t> argmin;  // over complete rows
  std::vector<std::string> messages;  // one per failed fold
};

// Leave-one-out cross validation of n0: each fold fits on m - 1 graphs and
// scores sim_draws simulated graphs against the held-out graph by Hamming
// distance. Folds share seeds across the grid.
CvTable tune_delta_cv(const GraphSet& set, const ModelSpec& model, const StatVector& tau_bar,
                      const std::vector<double>& n0_grid, const EstimatorConfig& cfg,
                      std::size_t sim_draws, std::uint64_t seed,
                      CvLoss loss = CvLoss::SquaredPerDraw);

// Text prior file: "fingerprint", "n0", "labels" and "tau_bar" lines.
void write_prior(const PriorSpec& prior, const std::filesystem::path& file);
PriorSpec read_prior(const std::filesystem::path& file);
// Throws ModelError when the prior was built for a different model.
void check_prior(const PriorSpec& prior, const ModelSpec& model);

}  // namespace ergmpool

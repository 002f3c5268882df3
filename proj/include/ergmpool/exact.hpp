#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "ergmpool/hull.hpp"
#include "ergmpool/terms.hpp"

namespace ergmpool {

constexpr std::size_t kMaxEnumeratedDyads = 22;

// Statistics of every admissible graph, collapsed to distinct rows with
// multiplicities. Rows agree to ~1e-9 for real-valued terms.
struct EnumerationTable {
  ModelSpec model;
  std::size_t n = 0;
  std::size_t free_dyads = 0;
  Eigen::MatrixXd rows;     // distinct statistic vectors
  Eigen::VectorXd counts;   // graphs per row
  double total = 0.0;       // 2^free_dyads

  std::size_t size() const noexcept { return static_cast<std::size_t>(rows.rows()); }
};

struct ExactMoments {
  double psi = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Visits every admissible graph in Gray-code order of the free dyads (bit k
// of the code is the k-th free dyad in lexicographic order), passing the
// graph and its statistics maintained by change statistics.
void for_each_graph(const BoundModel& model, const SupportConstraint& constraint,
                    const std::function<void(const Graph&, const Eigen::VectorXd&)>& visit);

EnumerationTable enumerate(const ModelSpec& model, std::size_t n, const CovariateSet& cov,
                           const SupportConstraint& constraint, std::size_t threads = 0);

// log sum_y exp(theta' g(y)), max-shifted.
double exact_psi(const EnumerationTable& table, const Eigen::VectorXd& theta);
ExactMoments exact_moments(const EnumerationTable& table, const Eigen::VectorXd& theta);
// log P_theta(Y = y) for a graph with statistics g.
double exact_log_probability(const EnumerationTable& table, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& g);

HullResult exact_hull(const EnumerationTable& table, const Eigen::VectorXd& target);

struct ExactFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd fisher_info;  // Var_theta g at theta
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
};

// Newton maximizer of theta' target - psi(theta). Throws HullInfeasibleError
// unless the target is interior to the hull of the table rows.
ExactFit exact_mle(const EnumerationTable& table, const Eigen::VectorXd& target,
                   const std::optional<Eigen::VectorXd>& start = std::nullopt);

}  // namespace ergmpool

#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace ergmpool {

enum class HullStatus { Interior, Boundary, Exterior };

std::string to_string(HullStatus s);

struct HullResult {
  HullStatus status = HullStatus::Exterior;
  // K * max_lambda min_k lambda_k over representations target = sum lambda_k s_k
  // (K distinct rows). 1 at the centroid, 0 on a face, negative when infeasible.
  double margin = -1.0;
  // Per coordinate: min(target - row min, row max - target); negative outside
  // the componentwise range.
  Eigen::VectorXd coordinate_margins;
  // Rows span fewer than p dimensions; no point can then be interior.
  bool degenerate = false;
  std::size_t rank = 0;
  std::size_t distinct_rows = 0;

  // Coordinates whose componentwise margin is at or below tol.
  std::vector<std::size_t> offending(double tol = 0.0) const;
};

// Membership of target in the convex hull of the rows of `rows`, by a linear
// program over convex weights. Margins below tol are reported as boundary.
HullResult hull_check(const Eigen::MatrixXd& rows, const Eigen::VectorXd& target,
                      double tol = 1e-9);

// Maximize c'x subject to A x = b, x >= 0 (dense two-phase simplex, Bland's
// rule). Returns false when infeasible; unbounded problems throw NumericalError.
bool simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c, Eigen::VectorXd& x, double& value,
                      double eps = 1e-11);

}  // namespace ergmpool

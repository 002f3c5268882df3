#include "ergmpool/hull.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergmpool/errors.hpp"

namespace ergmpool {

std::string to_string(HullStatus s) {
  switch (s) {
    case HullStatus::Interior:
      return "interior";
    case HullStatus::Boundary:
      return "boundary";
    case HullStatus::Exterior:
      return "exterior";
  }
  return "?";
}

std::vector<std::size_t> HullResult::offending(double tol) const {
  std::vector<std::size_t> out;
  for (Eigen::Index k = 0; k < coordinate_margins.size(); ++k)
    if (coordinate_margins[k] <= tol) out.push_back(static_cast<std::size_t>(k));
  return out;
}

namespace {

// Tableau with the objective in the last row and the right-hand side in the
// last column. Objective entries are reduced costs c_B B^-1 A_j - c_j.
class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)) {}

  Eigen::MatrixXd& data() { return t_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  double value() const { return t_(rows(), cols()); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = c;
  }

  void set_objective(const Eigen::VectorXd& cost) {
    const Eigen::Index z = rows();
    t_.row(z).setZero();
    t_.row(z).head(cols()) = -cost.transpose();
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double cb = cost[basis_[static_cast<std::size_t>(i)]];
      if (cb != 0.0) t_.row(z) += cb * t_.row(i);
    }
  }

  // Bland's rule over entering columns [0, allowed).
  void optimize(Eigen::Index allowed, double eps) {
    const Eigen::Index z = rows();
    const std::size_t cap = 50000 + 100 * static_cast<std::size_t>(t_.cols());
    for (std::size_t iter = 0; iter < cap; ++iter) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(z, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      Eigen::Index leave = -1;
      double best = 0.0;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t_(i, enter);
        if (a <= eps) continue;
        const double ratio = t_(i, cols()) / a;
        if (leave < 0 || ratio < best - eps ||
            (ratio <= best + eps && basis_[static_cast<std::size_t>(i)] <
                                        basis_[static_cast<std::size_t>(leave)])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) throw NumericalError("linear program is unbounded");
      pivot(leave, enter);
    }
    throw NumericalError("simplex iteration limit reached");
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

bool simplex_maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c, Eigen::VectorXd& x, double& value, double eps) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw DimensionError("simplex: inconsistent dimensions");

  Tableau tab(m, n + m);
  auto& t = tab.data();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b[i] < 0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign * b[i];
  }
  tab.basis().resize(static_cast<std::size_t>(m));
  std::iota(tab.basis().begin(), tab.basis().end(), n);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  tab.set_objective(phase1);
  tab.optimize(n + m, eps);
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (tab.value() < -1e-9 * scale) return false;

  // Pivot remaining zero-level artificials out where possible; rows where no
  // original column is nonzero are redundant and stay inert.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) tab.pivot(i, col);
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
  phase2.head(n) = c;
  tab.set_objective(phase2);
  tab.optimize(n, eps);

  x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index col = tab.basis()[static_cast<std::size_t>(i)];
    if (col < n) x[col] = t(i, n + m);
  }
  value = c.dot(x);
  return true;
}

HullResult hull_check(const Eigen::MatrixXd& rows, const Eigen::VectorXd& target, double tol) {
  if (rows.rows() == 0) throw UsageError("hull check needs at least one row");
  if (rows.cols() != target.size()) {
    throw DimensionError("hull check: rows have " + std::to_string(rows.cols()) +
                         " columns, target has " + std::to_string(target.size()));
  }
  const Eigen::Index p = target.size();

  std::vector<std::vector<double>> uniq;
  uniq.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    std::vector<double> v(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) v[static_cast<std::size_t>(j)] = rows(r, j);
    uniq.push_back(std::move(v));
  }
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const auto k = static_cast<Eigen::Index>(uniq.size());

  HullResult res;
  res.distinct_rows = uniq.size();
  res.coordinate_margins = Eigen::VectorXd(p);
  const Eigen::VectorXd lo = rows.colwise().minCoeff();
  const Eigen::VectorXd hi = rows.colwise().maxCoeff();
  for (Eigen::Index j = 0; j < p; ++j)
    res.coordinate_margins[j] = std::min(target[j] - lo[j], hi[j] - target[j]);

  // Differences to the target, scaled per coordinate to unit range.
  Eigen::MatrixXd d(k, p);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& row = uniq[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < p; ++j) d(r, j) = row[static_cast<std::size_t>(j)] - target[j];
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    const double s = d.col(j).cwiseAbs().maxCoeff();
    if (s > 0) d.col(j) /= s;
  }

  if (k > 1) {
    const Eigen::MatrixXd centered = d.rowwise() - d.colwise().mean();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
    qr.setThreshold(1e-10);
    res.rank = static_cast<std::size_t>(qr.rank());
  }
  res.degenerate = res.rank < static_cast<std::size_t>(p);

  // lambda_r = t + mu_r with mu >= 0, t >= 0; maximize t.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 1, k + 1);
  a.topLeftCorner(p, k) = d.transpose();
  a.col(k).head(p) = d.colwise().sum().transpose();
  a.row(p).head(k).setOnes();
  a(p, k) = static_cast<double>(k);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p + 1);
  b[p] = 1.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k + 1);
  c[k] = 1.0;

  Eigen::VectorXd x;
  double t = 0.0;
  if (!simplex_maximize(a, b, c, x, t)) {
    res.status = HullStatus::Exterior;
    res.margin = -1.0;
    return res;
  }
  res.margin = static_cast<double>(k) * t;
  res.status = (res.margin > tol && !res.degenerate) ? HullStatus::Interior : HullStatus::Boundary;
  return res;
}

}  // namespace ergmpool

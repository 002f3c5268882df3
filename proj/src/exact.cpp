#include "ergmpool/exact.hpp"

#include <bit>
#include <cmath>
#include <map>

#include "ergmpool/errors.hpp"
#include "ergmpool/util.hpp"

namespace ergmpool {

namespace {

using Visit = std::function<void(const Graph&, const Eigen::VectorXd&)>;

std::vector<Dyad> checked_free_dyads(const SupportConstraint& constraint) {
  auto free = constraint.free_dyads();
  if (free.size() > kMaxEnumeratedDyads) {
    throw UsageError("enumeration needs at most " + std::to_string(kMaxEnumeratedDyads) +
                     " free dyads, constraint leaves " + std::to_string(free.size()));
  }
  return free;
}

// Gray codes [begin, end) starting from the graph of code begin.
void run_range(const BoundModel& model, const SupportConstraint& constraint,
               const std::vector<Dyad>& free, std::uint64_t begin, std::uint64_t end,
               const Visit& visit) {
  Graph g(model.order());
  constraint.impose(g);
  const std::uint64_t code = begin ^ (begin >> 1);
  for (std::size_t b = 0; b < free.size(); ++b)
    if ((code >> b) & 1U) g.toggle(free[b].i, free[b].j);
  Eigen::VectorXd stats = model.statistics(g);
  Eigen::VectorXd delta(static_cast<Eigen::Index>(model.size()));
  visit(g, stats);
  for (std::uint64_t k = begin + 1; k < end; ++k) {
    const Dyad& d = free[static_cast<std::size_t>(std::countr_zero(k))];
    model.change_statistics(g, d.i, d.j, std::span<double>(delta.data(), delta.size()));
    if (g.has_edge(d.i, d.j))
      stats -= delta;
    else
      stats += delta;
    g.toggle(d.i, d.j);
    visit(g, stats);
  }
}

struct RowKey {
  std::vector<long long> cells;
  friend auto operator<=>(const RowKey&, const RowKey&) = default;
};

RowKey key_of(const Eigen::VectorXd& v) {
  RowKey k;
  k.cells.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index j = 0; j < v.size(); ++j) k.cells.push_back(std::llround(v[j] * 1e7));
  return k;
}

struct Accumulator {
  std::map<RowKey, std::pair<Eigen::VectorXd, double>> rows;
  void add(const Eigen::VectorXd& v, double count = 1.0) {
    auto [it, fresh] = rows.try_emplace(key_of(v), v, 0.0);
    it->second.second += count;
  }
};

}  // namespace

void for_each_graph(const BoundModel& model, const SupportConstraint& constraint,
                    const Visit& visit) {
  const auto free = checked_free_dyads(constraint);
  run_range(model, constraint, free, 0, std::uint64_t{1} << free.size(), visit);
}

EnumerationTable enumerate(const ModelSpec& model, std::size_t n, const CovariateSet& cov,
                           const SupportConstraint& constraint, std::size_t threads) {
  if (constraint.order() != n || cov.order() != n) {
    throw DimensionError("enumeration: constraint/covariates do not have order " +
                         std::to_string(n));
  }
  const BoundModel bound(model, cov);
  const auto free = checked_free_dyads(constraint);
  const std::uint64_t total = std::uint64_t{1} << free.size();
  if (threads == 0) threads = default_threads();
  const std::uint64_t chunks = std::min<std::uint64_t>(total, threads > 1 ? 4 * threads : 1);

  std::vector<Accumulator> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t begin = total * c / chunks;
    const std::uint64_t end = total * (c + 1) / chunks;
    run_range(bound, constraint, free, begin, end,
              [&](const Graph&, const Eigen::VectorXd& s) { parts[c].add(s); });
  });
  Accumulator all;
  for (auto& part : parts)
    for (auto& [key, entry] : part.rows) all.add(entry.first, entry.second);

  EnumerationTable table;
  table.model = model;
  table.n = n;
  table.free_dyads = free.size();
  table.total = static_cast<double>(total);
  const auto k = static_cast<Eigen::Index>(all.rows.size());
  table.rows.resize(k, static_cast<Eigen::Index>(model.size()));
  table.counts.resize(k);
  Eigen::Index r = 0;
  for (auto& [key, entry] : all.rows) {
    table.rows.row(r) = entry.first.transpose();
    table.counts[r] = entry.second;
    ++r;
  }
  return table;
}

namespace {

// Unnormalized log weights log(count) + theta' g per distinct row, and their max.
Eigen::VectorXd log_weights(const EnumerationTable& table, const Eigen::VectorXd& theta,
                            double& shift) {
  if (theta.size() != table.rows.cols()) {
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", model has " +
                         std::to_string(table.rows.cols()) + " terms");
  }
  if (!theta.allFinite()) throw UsageError("theta must be finite");
  Eigen::VectorXd lw = table.rows * theta + table.counts.array().log().matrix();
  shift = lw.maxCoeff();
  return lw;
}

}  // namespace

double exact_psi(const EnumerationTable& table, const Eigen::VectorXd& theta) {
  double shift = 0.0;
  const Eigen::VectorXd lw = log_weights(table, theta, shift);
  return shift + std::log((lw.array() - shift).exp().sum());
}

ExactMoments exact_moments(const EnumerationTable& table, const Eigen::VectorXd& theta) {
  double shift = 0.0;
  const Eigen::VectorXd lw = log_weights(table, theta, shift);
  Eigen::VectorXd w = (lw.array() - shift).exp();
  const double z = w.sum();
  w /= z;
  ExactMoments out;
  out.psi = shift + std::log(z);
  out.mean = table.rows.transpose() * w;
  const Eigen::MatrixXd centered = table.rows.rowwise() - out.mean.transpose();
  out.covariance = centered.transpose() * w.asDiagonal() * centered;
  return out;
}

double exact_log_probability(const EnumerationTable& table, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& g) {
  return theta.dot(g) - exact_psi(table, theta);
}

HullResult exact_hull(const EnumerationTable& table, const Eigen::VectorXd& target) {
  return hull_check(table.rows, target, 1e-9);
}

ExactFit exact_mle(const EnumerationTable& table, const Eigen::VectorXd& target,
                   const std::optional<Eigen::VectorXd>& start) {
  const Eigen::Index p = table.rows.cols();
  if (target.size() != p) throw DimensionError("target length does not match the model");
  const HullResult hull = exact_hull(table, target);
  if (hull.status != HullStatus::Interior) {
    auto coords = hull.offending(1e-9);
    auto labels = table.model.labels();
    std::vector<std::string> names;
    std::string list;
    for (auto c : coords) {
      names.push_back(labels[c]);
      list += (list.empty() ? "" : ", ") + labels[c];
    }
    throw HullInfeasibleError("target is " + to_string(hull.status) +
                                  " to the hull of achievable statistics" +
                                  (list.empty() ? std::string() : " (at extreme: " + list + ")"),
                              std::move(coords), std::move(names));
  }

  ExactFit fit;
  fit.theta = start ? *start : Eigen::VectorXd::Zero(p);
  const double tol = 1e-10 * std::max(1.0, target.cwiseAbs().maxCoeff());
  auto objective = [&](const Eigen::VectorXd& th) { return th.dot(target) - exact_psi(table, th); };
  ExactMoments mom = exact_moments(table, fit.theta);
  double value = fit.theta.dot(target) - mom.psi;
  for (std::size_t iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd grad = target - mom.mean;
    fit.gradient_norm = grad.norm();
    fit.iterations = iter;
    if (fit.gradient_norm < tol) break;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(mom.covariance);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = grad;
    double a = 1.0;
    Eigen::VectorXd next;
    double next_value = 0.0;
    for (int back = 0; back < 60; ++back, a *= 0.5) {
      next = fit.theta + a * step;
      next_value = objective(next);
      if (next_value >= value - 1e-14 * std::abs(value)) break;
    }
    fit.theta = next;
    value = next_value;
    mom = exact_moments(table, fit.theta);
  }
  if (fit.gradient_norm >= tol) {
    throw NumericalError("exact MLE did not converge (gradient norm " +
                         std::to_string(fit.gradient_norm) + ")");
  }
  fit.fisher_info = mom.covariance;
  return fit;
}

}  // namespace ergmpool

#include "ergmpool/graph.hpp"

#include <algorithm>
#include <charconv>

#include "ergmpool/errors.hpp"

namespace ergmpool {

Graph::Graph(std::size_t n)
    : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0), adj_(n) {}

void Graph::check_pair(Vertex i, Vertex j) const {
  if (i >= n_ || j >= n_) {
    throw IndexError("vertex index out of range: {" + std::to_string(i) + "," +
                     std::to_string(j) + "} with n=" + std::to_string(n_));
  }
  if (i == j) throw IndexError("self-loop {" + std::to_string(i) + "," + std::to_string(i) + "}");
}

bool Graph::has_edge(Vertex i, Vertex j) const {
  return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
}

void Graph::set_edge(Vertex i, Vertex j, bool present) {
  check_pair(i, j);
  if (has_edge(i, j) != present) toggle(i, j);
}

void Graph::toggle(Vertex i, Vertex j) {
  const std::uint64_t mi = std::uint64_t{1} << (j % 64);
  const std::uint64_t mj = std::uint64_t{1} << (i % 64);
  bits_[i * words_ + j / 64] ^= mi;
  bits_[j * words_ + i / 64] ^= mj;
  if (has_edge(i, j)) {
    adj_[i].push_back(j);
    adj_[j].push_back(i);
    ++edges_;
  } else {
    auto drop = [](std::vector<Vertex>& list, Vertex v) {
      auto it = std::find(list.begin(), list.end(), v);
      *it = list.back();
      list.pop_back();
    };
    drop(adj_[i], j);
    drop(adj_[j], i);
    --edges_;
  }
}

std::vector<Dyad> Graph::edges() const {
  std::vector<Dyad> out;
  out.reserve(edges_);
  for (Vertex i = 0; i < n_; ++i) {
    for (std::size_t w = i / 64; w < words_; ++w) {
      std::uint64_t x = bits_[i * words_ + w];
      while (x != 0) {
        const Vertex j = w * 64 + std::countr_zero(x);
        x &= x - 1;
        if (j > i) out.emplace_back(i, j);
      }
    }
  }
  return out;
}

SupportConstraint::SupportConstraint(std::size_t n) : n_(n), state_(n * n, 0) {}

std::size_t SupportConstraint::index(Vertex i, Vertex j) const {
  if (i >= n_ || j >= n_ || i == j) {
    throw IndexError("invalid dyad {" + std::to_string(i) + "," + std::to_string(j) +
                     "} for n=" + std::to_string(n_));
  }
  return i * n_ + j;
}

void SupportConstraint::fix(Vertex i, Vertex j, int s) {
  const std::size_t k = index(i, j);
  if (state_[k] == s) return;
  if (state_[k] != 0) {
    throw ConstraintError("dyad {" + std::to_string(i) + "," + std::to_string(j) +
                          "} fixed both present and absent");
  }
  state_[k] = static_cast<std::int8_t>(s);
  state_[j * n_ + i] = static_cast<std::int8_t>(s);
  (s > 0 ? present_ : absent_).emplace_back(i, j);
}

void SupportConstraint::fix_present(Vertex i, Vertex j) { fix(i, j, 1); }
void SupportConstraint::fix_absent(Vertex i, Vertex j) { fix(i, j, -1); }

int SupportConstraint::state(Vertex i, Vertex j) const {
  if (state_.empty()) return 0;
  return state_[index(i, j)];
}

std::vector<Dyad> SupportConstraint::free_dyads() const {
  std::vector<Dyad> out;
  out.reserve(n_ * (n_ - 1) / 2);
  for (Vertex i = 0; i < n_; ++i)
    for (Vertex j = i + 1; j < n_; ++j)
      if (state_[i * n_ + j] == 0) out.emplace_back(i, j);
  return out;
}

std::size_t SupportConstraint::free_dyad_count() const {
  return n_ * (n_ - 1) / 2 - present_.size() - absent_.size();
}

bool SupportConstraint::admits(const Graph& g) const {
  if (g.order() != n_) return false;
  for (const auto& d : present_)
    if (!g.has_edge(d.i, d.j)) return false;
  for (const auto& d : absent_)
    if (g.has_edge(d.i, d.j)) return false;
  return true;
}

void SupportConstraint::impose(Graph& g) const {
  for (const auto& d : present_) g.set_edge(d.i, d.j, true);
  for (const auto& d : absent_) g.set_edge(d.i, d.j, false);
}

void CovariateSet::add_nodal(const std::string& name, std::vector<std::string> values) {
  if (values.size() != n_) {
    throw DimensionError("nodal covariate '" + name + "' has " + std::to_string(values.size()) +
                         " entries, expected n=" + std::to_string(n_));
  }
  NodalCovariate cov;
  std::vector<double> numeric;
  numeric.reserve(values.size());
  bool all_numeric = true;
  for (const auto& v : values) {
    double x = 0.0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc{} || ptr != end || v.empty()) {
      all_numeric = false;
      break;
    }
    numeric.push_back(x);
  }
  if (all_numeric) cov.numeric = std::move(numeric);
  cov.values = std::move(values);
  nodal_[name] = std::move(cov);
}

void CovariateSet::add_nodal(const std::string& name, const std::vector<double>& values) {
  std::vector<std::string> text;
  text.reserve(values.size());
  for (double v : values) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    text.emplace_back(buf, ptr);
  }
  add_nodal(name, std::move(text));
}

void CovariateSet::add_dyadic(const std::string& name, std::vector<double> matrix) {
  if (matrix.size() != n_ * n_) {
    throw DimensionError("dyadic covariate '" + name + "' has " + std::to_string(matrix.size()) +
                         " entries, expected n*n=" + std::to_string(n_ * n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    matrix[i * n_ + i] = 0.0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (matrix[i * n_ + j] != matrix[j * n_ + i]) {
        throw DimensionError("dyadic covariate '" + name + "' is not symmetric at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  dyadic_[name] = std::move(matrix);
}

const NodalCovariate& CovariateSet::nodal(const std::string& name) const {
  auto it = nodal_.find(name);
  if (it == nodal_.end()) throw ModelError("missing nodal covariate '" + name + "'");
  return it->second;
}

const std::vector<double>& CovariateSet::dyadic(const std::string& name) const {
  auto it = dyadic_.find(name);
  if (it == dyadic_.end()) throw ModelError("missing dyadic covariate '" + name + "'");
  return it->second;
}

GraphSet::GraphSet(std::vector<Graph> graphs, CovariateSet covariates,
                   SupportConstraint constraint)
    : graphs_(std::move(graphs)),
      covariates_(std::move(covariates)),
      constraint_(std::move(constraint)) {
  if (graphs_.empty()) throw UsageError("graph set is empty");
  const std::size_t n = graphs_.front().order();
  if (covariates_.order() == 0) covariates_ = CovariateSet(n);
  if (constraint_.order() == 0) constraint_ = SupportConstraint(n);
  if (covariates_.order() != n || constraint_.order() != n) {
    throw DimensionError("covariates/constraint order does not match graph order " +
                         std::to_string(n));
  }
  for (std::size_t k = 0; k < graphs_.size(); ++k) {
    if (graphs_[k].order() != n) {
      throw DimensionError("graph " + std::to_string(k) + " has order " +
                           std::to_string(graphs_[k].order()) + ", expected " + std::to_string(n));
    }
    if (!constraint_.admits(graphs_[k])) {
      throw ConstraintError("graph " + std::to_string(k) + " violates the support constraint");
    }
  }
}

GraphSet GraphSet::subset(std::span<const std::size_t> indices) const {
  std::vector<Graph> picked;
  picked.reserve(indices.size());
  for (std::size_t k : indices) picked.push_back(graphs_.at(k));
  return GraphSet(std::move(picked), covariates_, constraint_);
}

GraphSet GraphSet::without(std::size_t index) const {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < graphs_.size(); ++k)
    if (k != index) keep.push_back(k);
  return subset(keep);
}

void toggle_dyad(Graph& g, const SupportConstraint& constraint, Vertex i, Vertex j) {
  if (i >= g.order() || j >= g.order() || i == j) {
    throw IndexError("cannot toggle {" + std::to_string(i) + "," + std::to_string(j) +
                     "} on a graph of order " + std::to_string(g.order()));
  }
  if (constraint.order() != 0 && constraint.is_fixed(i, j)) {
    throw ConstraintError("dyad {" + std::to_string(i) + "," + std::to_string(j) +
                          "} is fixed by the support constraint");
  }
  g.toggle(i, j);
}

std::size_t hamming_distance(const Graph& a, const Graph& b) {
  if (a.order() != b.order()) {
    throw DimensionError("hamming distance between graphs of order " + std::to_string(a.order()) +
                         " and " + std::to_string(b.order()));
  }
  std::size_t twice = 0;
  for (Vertex v = 0; v < a.order(); ++v) {
    auto ra = a.row(v);
    auto rb = b.row(v);
    for (std::size_t w = 0; w < ra.size(); ++w) twice += std::popcount(ra[w] ^ rb[w]);
  }
  return twice / 2;
}

}  // namespace ergmpool

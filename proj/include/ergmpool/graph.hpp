#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ergmpool {

using Vertex = std::size_t;

// Unordered vertex pair, stored with i < j.
struct Dyad {
  Vertex i = 0;
  Vertex j = 0;

  Dyad() = default;
  Dyad(Vertex a, Vertex b) : i(a < b ? a : b), j(a < b ? b : a) {}

  friend bool operator==(const Dyad&, const Dyad&) = default;
  friend auto operator<=>(const Dyad&, const Dyad&) = default;
};

// Undirected binary graph on vertices 0..n-1. Dyad states live in a packed
// n x n bit matrix (O(1) queries, popcount intersections); adjacency lists
// give O(degree) neighbor scans. Both views are updated together.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);

  std::size_t order() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return edges_; }
  std::size_t dyad_count() const noexcept { return n_ * (n_ - 1) / 2; }

  bool has_edge(Vertex i, Vertex j) const;
  void set_edge(Vertex i, Vertex j, bool present);
  // Unchecked flip; constraint checks live in toggle_dyad().
  void toggle(Vertex i, Vertex j);

  std::size_t degree(Vertex v) const { return adj_[v].size(); }
  std::span<const Vertex> neighbors(Vertex v) const { return adj_[v]; }
  std::span<const std::uint64_t> row(Vertex v) const {
    return {bits_.data() + v * words_, words_};
  }

  std::size_t common_neighbors(Vertex i, Vertex j) const {
    const std::uint64_t* a = bits_.data() + i * words_;
    const std::uint64_t* b = bits_.data() + j * words_;
    std::size_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += std::popcount(a[w] & b[w]);
    return c;
  }

  template <class F>
  void for_each_common_neighbor(Vertex i, Vertex j, F&& f) const {
    const std::uint64_t* a = bits_.data() + i * words_;
    const std::uint64_t* b = bits_.data() + j * words_;
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t x = a[w] & b[w];
      while (x != 0) {
        f(static_cast<Vertex>(w * 64 + std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }

  // Edges in lexicographic (i, j) order, i < j.
  std::vector<Dyad> edges() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  void check_pair(Vertex i, Vertex j) const;

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t edges_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<Vertex>> adj_;
};

// Dyads forced present or absent in every admissible graph.
class SupportConstraint {
 public:
  SupportConstraint() = default;
  explicit SupportConstraint(std::size_t n);

  std::size_t order() const noexcept { return n_; }

  void fix_present(Vertex i, Vertex j);
  void fix_absent(Vertex i, Vertex j);

  // 0 = free, 1 = fixed present, -1 = fixed absent.
  int state(Vertex i, Vertex j) const;
  bool is_fixed(Vertex i, Vertex j) const { return state(i, j) != 0; }

  const std::vector<Dyad>& fixed_present() const noexcept { return present_; }
  const std::vector<Dyad>& fixed_absent() const noexcept { return absent_; }
  bool empty() const noexcept { return present_.empty() && absent_.empty(); }

  // Free dyads in lexicographic order.
  std::vector<Dyad> free_dyads() const;
  std::size_t free_dyad_count() const;

  bool admits(const Graph& g) const;
  // Sets every fixed dyad of g to its forced state.
  void impose(Graph& g) const;

 private:
  std::size_t index(Vertex i, Vertex j) const;
  void fix(Vertex i, Vertex j, int s);

  std::size_t n_ = 0;
  std::vector<std::int8_t> state_;
  std::vector<Dyad> present_;
  std::vector<Dyad> absent_;
};

struct NodalCovariate {
  std::vector<std::string> values;
  // Present when every entry parses as a number.
  std::optional<std::vector<double>> numeric;
};

// Covariates shared by every graph of a set: nodal vectors of length n and
// symmetric n x n dyadic matrices (row-major, diagonal ignored).
class CovariateSet {
 public:
  CovariateSet() = default;
  explicit CovariateSet(std::size_t n) : n_(n) {}

  std::size_t order() const noexcept { return n_; }

  void add_nodal(const std::string& name, std::vector<std::string> values);
  void add_nodal(const std::string& name, const std::vector<double>& values);
  void add_dyadic(const std::string& name, std::vector<double> matrix);

  bool has_nodal(const std::string& name) const { return nodal_.contains(name); }
  bool has_dyadic(const std::string& name) const { return dyadic_.contains(name); }
  const NodalCovariate& nodal(const std::string& name) const;
  const std::vector<double>& dyadic(const std::string& name) const;

  const std::map<std::string, NodalCovariate>& nodal_all() const noexcept { return nodal_; }
  const std::map<std::string, std::vector<double>>& dyadic_all() const noexcept {
    return dyadic_;
  }

 private:
  std::size_t n_ = 0;
  std::map<std::string, NodalCovariate> nodal_;
  std::map<std::string, std::vector<double>> dyadic_;
};

// m graphs on one vertex set, sharing covariates and constraint.
class GraphSet {
 public:
  GraphSet(std::vector<Graph> graphs, CovariateSet covariates, SupportConstraint constraint);

  std::size_t size() const noexcept { return graphs_.size(); }
  std::size_t order() const noexcept { return covariates_.order(); }
  const std::vector<Graph>& graphs() const noexcept { return graphs_; }
  const Graph& operator[](std::size_t k) const { return graphs_[k]; }
  const CovariateSet& covariates() const noexcept { return covariates_; }
  const SupportConstraint& constraint() const noexcept { return constraint_; }

  // Same covariates and constraint, a subset of the graphs.
  GraphSet subset(std::span<const std::size_t> indices) const;
  GraphSet without(std::size_t index) const;

 private:
  std::vector<Graph> graphs_;
  CovariateSet covariates_;
  SupportConstraint constraint_;
};

// Flips {i, j} in place; rejects fixed dyads and out-of-range vertices.
void toggle_dyad(Graph& g, const SupportConstraint& constraint, Vertex i, Vertex j);

std::size_t hamming_distance(const Graph& a, const Graph& b);

}  // namespace ergmpool

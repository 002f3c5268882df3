#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergmpool/graph.hpp"

namespace ergmpool {

enum class TermKind {
  Edges,
  Gwesp,
  Nodematch,
  Nodemix,
  Nodecov,
  Edgecov,
  TwoStars,
  Triangles,
  OpenTwoPaths,
};

struct TermSpec {
  TermKind kind = TermKind::Edges;
  double decay = 0.0;     // GWESP only
  std::string covariate;  // nodal or dyadic covariate name
  std::string level_a;    // nodemix level pair, stored with level_a <= level_b
  std::string level_b;

  static TermSpec of(TermKind kind) {
    TermSpec t;
    t.kind = kind;
    return t;
  }
  static TermSpec edges() { return {}; }
  static TermSpec gwesp(double decay);
  static TermSpec nodematch(std::string cov);
  static TermSpec nodemix(std::string cov, std::string a, std::string b);
  static TermSpec nodecov(std::string cov);
  static TermSpec edgecov(std::string cov);
  static TermSpec two_stars() { return of(TermKind::TwoStars); }
  static TermSpec triangles() { return of(TermKind::Triangles); }
  static TermSpec open_two_paths() { return of(TermKind::OpenTwoPaths); }

  // Coordinate name, e.g. "gwesp.0.25" or "nodemix.area.Frontal.Temporal".
  std::string label() const;
  // One line of the model-file grammar; parses back to an equal spec.
  std::string canonical() const;
  bool dyad_independent() const;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

// Ordered term list. Term order fixes the coordinate order of every
// statistic and coefficient vector.
class ModelSpec {
 public:
  ModelSpec() = default;
  explicit ModelSpec(std::vector<TermSpec> terms);

  // Model-file grammar, one term per line, '#' comments:
  //   edges | gwesp <decay> | nodematch <cov> | nodemix <cov> <level> <level>
  //   nodecov <cov> | edgecov <cov> | twostars | triangles | opentwopaths
  static ModelSpec parse(std::string_view text, const std::string& source = "<model>");
  static ModelSpec read(const std::filesystem::path& file);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<TermSpec>& terms() const noexcept { return terms_; }
  const TermSpec& operator[](std::size_t k) const { return terms_[k]; }
  std::vector<std::string> labels() const;
  std::string canonical() const;
  // 16 hex digits identifying the canonical term list.
  std::string fingerprint() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  std::vector<TermSpec> terms_;
};

enum class StatLabel { Observed, Mean, Prior, Target, Simulated };

std::string to_string(StatLabel label);

struct StatVector {
  Eigen::VectorXd values;
  StatLabel label = StatLabel::Observed;
};

// Achievable range of each coordinate under a support constraint, known
// exactly for terms whose change statistic never changes sign.
struct SupportBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<bool> known;
};

// A ModelSpec resolved against a CovariateSet: covariate lookups and GWESP
// weights are precomputed so statistics and change statistics run without
// allocation.
class BoundModel {
 public:
  BoundModel(ModelSpec spec, const CovariateSet& cov);

  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return spec_.size(); }
  std::size_t order() const noexcept { return n_; }

  Eigen::VectorXd statistics(const Graph& g) const;

  // out = g(y with {i,j}) - g(y without {i,j}); only local neighborhoods
  // are scanned.
  void change_statistics(const Graph& g, Vertex i, Vertex j, std::span<double> out) const;
  Eigen::VectorXd change_statistics(const Graph& g, Vertex i, Vertex j) const;

  SupportBounds support_bounds(const SupportConstraint& c) const;

  // Rejects terms that are constant on the support, and linear dependence
  // among the dyad-independent terms; either makes the information singular.
  void check_identifiable(const SupportConstraint& c) const;

 private:
  struct Term {
    TermKind kind = TermKind::Edges;
    std::vector<int> codes;      // categorical level per vertex
    int level_a = -1;
    int level_b = -1;
    std::vector<double> values;  // nodal (n) or dyadic (n*n) covariate
    std::vector<double> weight;  // GWESP: w(k) for k = 0..n
    std::vector<double> ratio;   // GWESP: r^k for k = 0..n
  };

  double gwesp_change(const Term& t, const Graph& g, Vertex i, Vertex j) const;
  double dyad_value(const Term& t, Vertex i, Vertex j) const;

  ModelSpec spec_;
  std::size_t n_ = 0;
  std::vector<Term> terms_;
};

StatVector statistics(const ModelSpec& model, const Graph& g, const CovariateSet& cov);
StatVector change_statistics(const ModelSpec& model, const Graph& g, const CovariateSet& cov,
                             Dyad dyad);
// Arithmetic mean of the per-graph statistic vectors.
StatVector statistics_mean(const ModelSpec& model, const GraphSet& set);
StatVector statistics_mean(const BoundModel& model, std::span<const Graph> graphs);

}  // namespace ergmpool

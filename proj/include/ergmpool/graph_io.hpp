#pragma once

#include <filesystem>
#include <optional>

#include "ergmpool/graph.hpp"

namespace ergmpool {

// Directory layout of a graph set:
//   *.edges          one edge list per graph, read in lexicographic file-name order
//   nodes.csv        optional nodal covariates (header row of names, n rows)
//   <name>.mat       optional dyadic covariates, whitespace-delimited n x n
//   constraints.txt  optional "+ i j" / "- i j" lines
//
// Edge lists start with a mandatory "n=<int>" header; every other non-comment
// line is "i<TAB>j" with 0-based vertex indices. '#' starts a comment.

Graph read_edge_list(const std::filesystem::path& file);
void write_edge_list(const Graph& g, const std::filesystem::path& file);

// Covariate and constraint files from `dir` for a vertex set of order n.
CovariateSet read_covariates(const std::filesystem::path& dir, std::size_t n);
SupportConstraint read_constraint(const std::filesystem::path& file, std::size_t n);

GraphSet read_graph_set(const std::filesystem::path& dir);
// Writes graphs as graph_000.edges, ... plus covariate and constraint files.
void write_graph_set(const GraphSet& set, const std::filesystem::path& dir);

void write_covariates(const CovariateSet& cov, const std::filesystem::path& dir);
void write_constraint(const SupportConstraint& c, const std::filesystem::path& file);

// Order declared by the first edge list in dir, if any.
std::optional<std::size_t> peek_order(const std::filesystem::path& dir);

}  // namespace ergmpool

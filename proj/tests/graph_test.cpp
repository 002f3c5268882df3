#include <gtest/gtest.h>

#include <fstream>

#include "ergmpool/errors.hpp"
#include "ergmpool/graph.hpp"
#include "ergmpool/graph_io.hpp"
#include "test_support.hpp"

namespace ergmpool {
namespace {

using testing::complete_graph;
using testing::random_graph;
using testing::scratch_dir;

void expect_views_agree(const Graph& g) {
  std::size_t edges = 0;
  for (Vertex i = 0; i < g.order(); ++i) {
    std::size_t deg = 0;
    for (Vertex j = 0; j < g.order(); ++j) {
      if (i == j) continue;
      deg += g.has_edge(i, j);
      EXPECT_EQ(g.has_edge(i, j), g.has_edge(j, i));
    }
    EXPECT_EQ(deg, g.degree(i));
    for (Vertex j : g.neighbors(i)) EXPECT_TRUE(g.has_edge(i, j));
    edges += deg;
  }
  EXPECT_EQ(edges / 2, g.edge_count());
}

TEST(Graph, SingleToggleOnEmptyGraph) {
  Graph g(4);
  SupportConstraint none(4);
  toggle_dyad(g, none, 0, 1);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.has_edge(1, 0));
}

TEST(Graph, ToggleIsAnInvolution) {
  std::mt19937_64 rng(7);
  SupportConstraint none(9);
  for (int rep = 0; rep < 50; ++rep) {
    Graph g = random_graph(9, 0.4, rng);
    const Graph before = g;
    std::uniform_int_distribution<Vertex> pick(0, 8);
    Vertex i = pick(rng), j = pick(rng);
    if (i == j) continue;
    toggle_dyad(g, none, i, j);
    EXPECT_NE(g, before);
    toggle_dyad(g, none, i, j);
    EXPECT_EQ(g, before);
    expect_views_agree(g);
  }
}

TEST(Graph, ViewsAgreeAfterRandomToggles) {
  std::mt19937_64 rng(11);
  Graph g(70);  // spans two bit-matrix words per row
  std::uniform_int_distribution<Vertex> pick(0, 69);
  for (int step = 0; step < 5000; ++step) {
    Vertex i = pick(rng), j = pick(rng);
    if (i != j) g.toggle(i, j);
  }
  expect_views_agree(g);
  for (Vertex i = 0; i < 70; i += 7) {
    for (Vertex j = i + 1; j < 70; j += 5) {
      std::size_t brute = 0;
      for (Vertex k = 0; k < 70; ++k) brute += g.has_edge(i, k) && g.has_edge(j, k);
      EXPECT_EQ(g.common_neighbors(i, j), brute);
    }
  }
}

TEST(Graph, FixedDyadCannotBeToggled) {
  Graph g = complete_graph(4);
  SupportConstraint c(4);
  c.fix_present(0, 1);
  EXPECT_THROW(toggle_dyad(g, c, 0, 1), ConstraintError);
  EXPECT_THROW(toggle_dyad(g, c, 1, 0), ConstraintError);
  EXPECT_NO_THROW(toggle_dyad(g, c, 2, 3));
}

TEST(Graph, OutOfRangeToggleIsAnIndexError) {
  Graph g(4);
  SupportConstraint c(4);
  EXPECT_THROW(toggle_dyad(g, c, 0, 4), IndexError);
  EXPECT_THROW(toggle_dyad(g, c, 2, 2), IndexError);
}

TEST(SupportConstraint, PresentAndAbsentAreDisjoint) {
  SupportConstraint c(5);
  c.fix_present(0, 1);
  EXPECT_THROW(c.fix_absent(1, 0), ConstraintError);
  c.fix_absent(2, 3);
  EXPECT_EQ(c.free_dyad_count(), 8u);
  EXPECT_EQ(c.free_dyads().size(), 8u);
  Graph g(5);
  EXPECT_FALSE(c.admits(g));
  c.impose(g);
  EXPECT_TRUE(c.admits(g));
}

TEST(Hamming, Examples) {
  Graph a(4);
  EXPECT_EQ(hamming_distance(a, a), 0u);
  EXPECT_EQ(hamming_distance(a, complete_graph(4)), 6u);
  EXPECT_THROW(hamming_distance(a, Graph(5)), DimensionError);
}

TEST(Hamming, MatchesDyadByDyadComparison) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Graph a = random_graph(6, 0.5, rng);
    Graph b = random_graph(6, 0.5, rng);
    std::size_t brute = 0;
    for (Vertex i = 0; i < 6; ++i)
      for (Vertex j = i + 1; j < 6; ++j) brute += a.has_edge(i, j) != b.has_edge(i, j);
    EXPECT_EQ(hamming_distance(a, b), brute);
  }
}

TEST(Hamming, MetricAxioms) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    std::size_t n = 2 + rep % 9;
    Graph a = random_graph(n, 0.3, rng), b = random_graph(n, 0.5, rng),
          c = random_graph(n, 0.7, rng);
    EXPECT_EQ(hamming_distance(a, b) == 0, a == b);
    EXPECT_EQ(hamming_distance(a, b), hamming_distance(b, a));
    EXPECT_LE(hamming_distance(a, c), hamming_distance(a, b) + hamming_distance(b, c));
  }
}

TEST(GraphIo, ReadsTenGraphsOnNinetyVertices) {
  auto dir = scratch_dir("io_ten");
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    write_edge_list(random_graph(90, 0.056, rng), dir / ("subject_" + std::to_string(k) + ".edges"));
  }
  GraphSet set = read_graph_set(dir);
  EXPECT_EQ(set.size(), 10u);
  EXPECT_EQ(set.order(), 90u);
}

TEST(GraphIo, EmptyEdgeListGivesEdgelessGraph) {
  auto dir = scratch_dir("io_empty");
  std::ofstream(dir / "g.edges") << "# nothing here\nn=5\n";
  GraphSet set = read_graph_set(dir);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].order(), 5u);
  EXPECT_EQ(set[0].edge_count(), 0u);
}

TEST(GraphIo, VertexIndexEqualToNIsRejected) {
  auto dir = scratch_dir("io_range");
  std::ofstream(dir / "g.edges") << "n=5\n0\t1\n2\t5\n";
  try {
    read_graph_set(dir);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(GraphIo, MissingHeaderIsAParseError) {
  auto dir = scratch_dir("io_header");
  std::ofstream(dir / "g.edges") << "0\t1\n";
  EXPECT_THROW(read_graph_set(dir), ParseError);
}

TEST(GraphIo, CovariateLengthMismatch) {
  auto dir = scratch_dir("io_cov");
  std::ofstream(dir / "g.edges") << "n=3\n0\t1\n";
  std::ofstream(dir / "nodes.csv") << "sex\nF\nM\n";
  EXPECT_THROW(read_graph_set(dir), DimensionError);
}

TEST(GraphIo, ConstraintViolationOnIngestion) {
  auto dir = scratch_dir("io_violation");
  std::ofstream(dir / "a.edges") << "n=4\n0\t1\n";
  std::ofstream(dir / "b.edges") << "n=4\n2\t3\n";
  std::ofstream(dir / "constraints.txt") << "+ 0 1\n";
  EXPECT_THROW(read_graph_set(dir), ConstraintError);
}

TEST(GraphIo, RoundTripPreservesEverything) {
  std::mt19937_64 rng(23);
  const std::size_t n = 12;
  std::vector<Graph> graphs;
  SupportConstraint c(n);
  c.fix_present(0, 1);
  c.fix_absent(2, 3);
  for (int k = 0; k < 4; ++k) {
    Graph g = random_graph(n, 0.3, rng);
    c.impose(g);
    graphs.push_back(g);
  }
  CovariateSet cov(n);
  std::vector<std::string> sex;
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t v = 0; v < n; ++v) sex.push_back(v % 3 ? "F" : "M");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) dist[i * n + j] = 0.25 * static_cast<double>(i + j) + 0.1;
  cov.add_nodal("sex", sex);
  cov.add_dyadic("dist", dist);
  GraphSet set(graphs, cov, c);

  auto dir = scratch_dir("io_roundtrip");
  write_graph_set(set, dir);
  GraphSet back = read_graph_set(dir);
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t k = 0; k < set.size(); ++k) EXPECT_EQ(back[k], set[k]);
  EXPECT_EQ(back.covariates().nodal("sex").values, sex);
  EXPECT_EQ(back.covariates().dyadic("dist"), cov.dyadic("dist"));
  EXPECT_EQ(back.constraint().fixed_present(), c.fixed_present());
  EXPECT_EQ(back.constraint().fixed_absent(), c.fixed_absent());
}

}  // namespace
}  // namespace ergmpool

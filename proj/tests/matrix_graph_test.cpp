#include <gtest/gtest.h>

#include <fstream>

#include "edgelab/errors.hpp"
#include "edgelab/graph.hpp"
#include "edgelab/matrix.hpp"
#include "edgelab/rng.hpp"
#include "support/oracles.hpp"

using namespace edgelab;

TEST(Matrix, MatmulMatchesHandComputed) {
    Matrix a(2, 3);
    Matrix b(3, 2);
    double v = 1;
    for (double& x : a.data()) x = v++;
    for (double& x : b.data()) x = v++;
    const Matrix c = matmul(a, b);
    EXPECT_DOUBLE_EQ(c(0, 0), 1 * 7 + 2 * 9 + 3 * 11);
    EXPECT_DOUBLE_EQ(c(1, 1), 4 * 8 + 5 * 10 + 6 * 12);
}

TEST(Matrix, TransposedProductsAgree) {
    Rng rng(3);
    Matrix a(4, 3), b(4, 5), c(5, 3);
    for (double& x : a.data()) x = standard_normal(rng);
    for (double& x : b.data()) x = standard_normal(rng);
    for (double& x : c.data()) x = standard_normal(rng);
    const Matrix tn = matmul_tn(a, b);
    const Matrix nt = matmul_nt(a, c);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < 4; ++k) s += a(k, i) * b(k, j);
            EXPECT_NEAR(tn(i, j), s, 1e-12);
        }
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * c(j, k);
            EXPECT_NEAR(nt(i, j), s, 1e-12);
        }
}

TEST(Matrix, AppendAndTruncate) {
    Matrix m;
    const double r1[] = {1, 2};
    m.append_row(r1);
    m.append_row(r1);
    EXPECT_EQ(m.rows(), 2u);
    EXPECT_EQ(m.cols(), 2u);
    const double bad[] = {1, 2, 3};
    EXPECT_THROW(m.append_row(bad), ArgumentError);
    m.truncate_rows(1);
    EXPECT_EQ(m.rows(), 1u);
}

TEST(Graph, FromEdgesCollapsesDuplicatesAndRejectsSelfLoops) {
    const std::vector<Edge> edges{{0, 1}, {1, 0}, {1, 2}};
    const Graph g = Graph::from_edges(Matrix(3, 2), edges);
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_TRUE(g.has_edge(1, 0));
    EXPECT_FALSE(g.has_edge(0, 2));
    const std::vector<Edge> loop{{1, 1}};
    EXPECT_ANY_THROW(Graph::from_edges(Matrix(3, 2), loop));
    const std::vector<Edge> dangling{{0, 7}};
    EXPECT_ANY_THROW(Graph::from_edges(Matrix(3, 2), dangling));
}

TEST(Graph, NeighborsSortedAndUnique) {
    const Graph g = oracle::random_graph(40, 0.2, 3, 2, 5);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto nb = g.neighbors(v);
        for (std::size_t i = 1; i < nb.size(); ++i) EXPECT_LT(nb[i - 1], nb[i]);
        for (NodeId u : nb) {
            EXPECT_NE(u, v);
            EXPECT_TRUE(g.has_edge(u, v));
        }
    }
}

TEST(Graph, SnapshotRestoreRoundTrip) {
    Graph g = oracle::random_graph(15, 0.3, 3, 2, 2);
    const Graph before = g;
    const Snapshot snap = g.snapshot();
    const std::vector<double> f{1, 2, 3};
    const NodeId a = g.add_node(f);
    g.add_edge(a, 0);
    g.set_features(3, f);
    EXPECT_FALSE(g == before);
    g.restore(snap);
    EXPECT_TRUE(g == before);
}

TEST(Graph, KHopMatchesFloydWarshall) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Graph g = oracle::random_graph(50, 0.06, 2, 2, seed);
        const auto d = oracle::floyd_warshall(g);
        for (NodeId v = 0; v < g.num_nodes(); v += 7) {
            const auto bfs = bfs_distances(g, v);
            for (NodeId u = 0; u < g.num_nodes(); ++u) EXPECT_EQ(bfs[u], d[v][u]);
            for (std::size_t k = 1; k <= 3; ++k) {
                std::vector<NodeId> expect;
                for (NodeId u = 0; u < g.num_nodes(); ++u)
                    if (d[v][u] == k) expect.push_back(u);
                EXPECT_EQ(k_hop_neighbors(g, v, k), expect);
            }
        }
    }
}

TEST(Graph, BfsRespectsMaxDepth) {
    const Graph g = oracle::path_graph(6, 1, 0);
    const auto d = bfs_distances(g, 0, 2);
    EXPECT_EQ(d[2], 2u);
    EXPECT_EQ(d[3], kUnreachable);
    EXPECT_EQ(ball(g, 2, 1), (std::vector<NodeId>{1, 2, 3}));
}

TEST(Graph, InducedSubgraphRelabelsMonotonically) {
    const Graph g = oracle::path_graph(6, 2, 1);
    const std::vector<NodeId> keep{1, 2, 4};
    const Graph s = induced_subgraph(g, keep);
    EXPECT_EQ(s.num_nodes(), 3u);
    EXPECT_TRUE(s.has_edge(0, 1));
    EXPECT_EQ(s.num_edges(), 1u);
    EXPECT_EQ(s.features(2)[1], g.features(4)[1]);
}

TEST(Graph, SaveLoadRoundTrip) {
    const auto dir = oracle::scratch_dir("graph_io");
    const Graph g = oracle::random_graph(20, 0.2, 3, 3, 9);
    save_graph(g, dir / "e.txt", dir / "f.csv", dir / "l.csv");
    const Graph h = load_graph(dir / "e.txt", dir / "f.csv", dir / "l.csv");
    EXPECT_TRUE(g == h);
}

TEST(Graph, LoadReportsLineOfMalformedEdge) {
    const auto dir = oracle::scratch_dir("graph_bad");
    {
        std::ofstream(dir / "f.csv") << "0,1.0\n1,0.5\n2,0\n";
        std::ofstream(dir / "e.txt") << "0 1\n1 x\n";
    }
    try {
        load_graph(dir / "e.txt", dir / "f.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Graph, LoadCountsDroppedSelfLoopsAndDuplicates) {
    const auto dir = oracle::scratch_dir("graph_stats");
    {
        std::ofstream(dir / "f.csv") << "0,1.0\n1,0.5\n2,0\n";
        std::ofstream(dir / "e.txt") << "0 1\n1 0\n2 2\n1 2\n";
    }
    LoadStats stats;
    const Graph g = load_graph(dir / "e.txt", dir / "f.csv", std::nullopt, &stats);
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_EQ(stats.self_loops_dropped, 1u);
    EXPECT_EQ(stats.duplicate_edges, 1u);
}

TEST(Graph, DanglingEdgeIsValidationError) {
    const auto dir = oracle::scratch_dir("graph_dangling");
    {
        std::ofstream(dir / "f.csv") << "0,1\n1,0\n";
        std::ofstream(dir / "e.txt") << "0 5\n";
    }
    EXPECT_THROW(load_graph(dir / "e.txt", dir / "f.csv"), ValidationError);
}

TEST(Sbm, DeterministicAndBlockStructured) {
    SbmParams p;
    p.seed = 4;
    const Graph a = generate_sbm(p);
    const Graph b = generate_sbm(p);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.num_nodes(), 400u);
    std::size_t in = 0, out = 0;
    for (const auto& [u, v] : a.edge_list()) (u / 100 == v / 100 ? in : out)++;
    const double expect_in = 4 * 100 * 99 / 2 * 0.1;
    const double expect_out = 6 * 100 * 100 * 0.005;
    EXPECT_NEAR(in, expect_in, 4 * std::sqrt(expect_in));
    EXPECT_NEAR(out, expect_out, 4 * std::sqrt(expect_out));
    for (NodeId v = 0; v < a.num_nodes(); ++v) EXPECT_EQ(a.label(v), static_cast<int>(v / 100));
}

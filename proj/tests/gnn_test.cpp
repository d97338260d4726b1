#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "edgelab/errors.hpp"
#include "edgelab/gnn.hpp"
#include "support/oracles.hpp"

using namespace edgelab;

namespace {

constexpr Arch kArchs[] = {Arch::GCN, Arch::GAT, Arch::GIN, Arch::SAGE};

void expect_close(const Matrix& got, const oracle::Dense& want, double tol) {
    ASSERT_EQ(got.rows(), want.size());
    for (std::size_t i = 0; i < got.rows(); ++i)
        for (std::size_t j = 0; j < got.cols(); ++j) EXPECT_NEAR(got(i, j), want[i][j], tol) << i << "," << j;
}

} // namespace

TEST(Gnn, ParseArch) {
    EXPECT_EQ(parse_arch("gcn"), Arch::GCN);
    EXPECT_EQ(parse_arch("GraphSAGE"), Arch::SAGE);
    EXPECT_EQ(parse_arch("GIN"), Arch::GIN);
    EXPECT_THROW(parse_arch("mlp"), ArgumentError);
}

TEST(Gnn, LogitsMatchDenseReference) {
    for (Arch arch : kArchs)
        for (std::size_t depth : {2u, 4u}) {
            const Graph g = oracle::random_graph(25, 0.15, 5, 3, 11 + depth);
            const GnnModel m = oracle::random_model(arch, 5, 6, 3, depth, 7);
            SCOPED_TRACE(std::string(to_string(arch)));
            expect_close(forward_logits(m, g), oracle::dense_logits(m, g), 1e-10);
            expect_close(forward(m, g), oracle::dense_posteriors(m, g), 1e-12);
        }
}

TEST(Gnn, GatWithoutSelfLoopsMatchesReference) {
    Graph g = oracle::random_graph(20, 0.15, 4, 3, 3);
    g.add_node(std::vector<double>{1, 0, 0, 1});  // isolated node
    GnnModel m = oracle::random_model(Arch::GAT, 4, 5, 3, 3, 2);
    m.gat_self_loops = false;
    expect_close(forward_logits(m, g), oracle::dense_logits(m, g), 1e-10);
}

TEST(Gnn, PosteriorRowsSumToOne) {
    for (Arch arch : kArchs) {
        const Graph g = oracle::random_graph(30, 0.1, 4, 4, 1);
        const Matrix p = forward(oracle::random_model(arch, 4, 8, 4, 4, 5), g);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            double s = 0;
            for (double x : p.row(i)) {
                EXPECT_GE(x, 0.0);
                s += x;
            }
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(Gnn, SubgraphPosteriorIsBitIdentical) {
    for (Arch arch : kArchs) {
        const Graph g = oracle::random_graph(60, 0.06, 4, 3, 21);
        const GnnModel m = oracle::random_model(arch, 4, 6, 3, 4, 9);
        const Matrix full = forward(m, g);
        for (NodeId v = 0; v < g.num_nodes(); v += 5) {
            const Posterior p = posterior(m, g, v);
            for (std::size_t j = 0; j < p.size(); ++j) EXPECT_EQ(p[j], full(v, j));
        }
    }
}

TEST(Gnn, ReceptiveFieldEndsAtDepth) {
    // Path 0..9, depth 4: node 0 sees nodes 0..4 only.
    for (Arch arch : kArchs) {
        Graph g = oracle::path_graph(10, 3, 4);
        const GnnModel m = oracle::random_model(arch, 3, 5, 2, 4, 8);
        const Posterior base = posterior(m, g, 0);
        g.set_features(5, std::vector<double>{9, -9, 9});
        EXPECT_EQ(posterior(m, g, 0), base) << to_string(arch);
        g.set_features(4, std::vector<double>{9, -9, 9});
        EXPECT_NE(posterior(m, g, 0), base) << to_string(arch);
    }
}

TEST(Gnn, PermutationEquivariance) {
    for (Arch arch : kArchs) {
        const Graph g = oracle::random_graph(30, 0.12, 4, 3, 31);
        const GnnModel m = oracle::random_model(arch, 4, 6, 3, 3, 6);
        std::vector<NodeId> perm(g.num_nodes());
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng(1);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix x(g.num_nodes(), 4);
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            std::copy(g.features(v).begin(), g.features(v).end(), x.row(perm[v]).begin());
        std::vector<Edge> edges;
        for (const auto& [u, v] : g.edge_list()) edges.emplace_back(perm[u], perm[v]);
        const Graph h = Graph::from_edges(std::move(x), edges);
        const Matrix a = forward(m, g);
        const Matrix b = forward(m, h);
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a(v, j), b(perm[v], j), 1e-12);
    }
}

TEST(Gnn, ModelFileRoundTripIsExact) {
    for (Arch arch : kArchs) {
        GnnModel m = oracle::random_model(arch, 4, 5, 3, 3, 12);
        m.gat_self_loops = false;
        std::stringstream ss;
        write_model(m, ss);
        const GnnModel r = read_model(ss);
        EXPECT_EQ(r.arch, m.arch);
        EXPECT_EQ(r.depth(), m.depth());
        if (arch == Arch::GAT) {
            EXPECT_EQ(r.gat_self_loops, m.gat_self_loops);
        }
        for (std::size_t l = 0; l < m.depth(); ++l)
            for (std::size_t k = 0; k < m.layers[l].tensors.size(); ++k)
                EXPECT_EQ(r.layers[l].tensors[k].value, m.layers[l].tensors[k].value);
    }
}

TEST(Gnn, MalformedModelFileIsParseError) {
    std::stringstream ss("gcn 2 4 5 3\ntensor 0 weight 4 5\n1 2 3\n");
    EXPECT_THROW(read_model(ss), ParseError);
}

TEST(Gnn, FeatureDimMismatchIsRejected) {
    const Graph g = oracle::random_graph(5, 0.5, 3, 2, 1);
    const GnnModel m = oracle::random_model(Arch::GCN, 4, 5, 2, 2, 1);
    EXPECT_THROW(forward(m, g), ArgumentError);
}

TEST(Gnn, DepthOutOfRangeIsRejected) {
    EXPECT_THROW(make_model(Arch::GCN, 3, 4, 2, 1), ArgumentError);
    EXPECT_THROW(make_model(Arch::GCN, 3, 4, 2, 7), ArgumentError);
}

TEST(Gnn, GlorotInitIsSeededAndScaled) {
    GnnModel a = make_model(Arch::GCN, 4, 8, 3);
    GnnModel b = make_model(Arch::GCN, 4, 8, 3);
    Rng r1(5), r2(5);
    init_glorot(a, r1, 0.5);
    init_glorot(b, r2, 0.5);
    EXPECT_EQ(a.layers[0].get("weight"), b.layers[0].get("weight"));
    const double limit = 0.5 * std::sqrt(6.0 / (4 + 8));
    for (double x : a.layers[0].get("weight").data()) EXPECT_LE(std::abs(x), limit);
}

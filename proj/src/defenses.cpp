#include "edgelab/defenses.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "edgelab/errors.hpp"
#include "edgelab/rng.hpp"

namespace edgelab {

namespace {

constexpr double kLapGraphCountShare = 0.01;

void check_epsilon(double epsilon, const char* who) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ArgumentError(std::string(who) + ": epsilon must be a positive finite number");
}

std::size_t cell_count(const Graph& g) {
    const std::size_t n = g.num_nodes();
    return n < 2 ? 0 : n * (n - 1) / 2;
}

} // namespace

std::string_view to_string(DefenseKind kind) {
    switch (kind) {
    case DefenseKind::None: return "none";
    case DefenseKind::EdgeRand: return "edgerand";
    case DefenseKind::LapGraph: return "lapgraph";
    }
    return "?";
}

DefenseKind parse_defense(std::string_view name) {
    std::string s(name);
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == "none") return DefenseKind::None;
    if (s == "edgerand") return DefenseKind::EdgeRand;
    if (s == "lapgraph") return DefenseKind::LapGraph;
    throw ArgumentError("unknown defense '" + std::string(name) + "' (valid: none, edgerand, lapgraph)");
}

double edge_rand_flip_probability(double epsilon) { return 1.0 / (1.0 + std::exp(epsilon)); }

Graph edge_rand(const Graph& g, double epsilon, std::uint64_t seed) {
    check_epsilon(epsilon, "edge_rand");
    const double p = edge_rand_flip_probability(epsilon);
    Rng rng(derive_seed(seed, 31));
    std::vector<Edge> edges;
    const std::size_t n = g.num_nodes();
    for (NodeId u = 0; u < n; ++u) {
        const auto nbrs = g.neighbors(u);
        auto it = std::upper_bound(nbrs.begin(), nbrs.end(), u);
        for (NodeId v = u + 1; v < n; ++v) {
            bool present = false;
            if (it != nbrs.end() && *it == v) {
                present = true;
                ++it;
            }
            if (uniform01(rng) < p) present = !present;
            if (present) edges.emplace_back(u, v);
        }
    }
    return with_edges(g, edges);
}

std::size_t lap_graph_edge_budget(const Graph& g, double epsilon, std::uint64_t seed) {
    check_epsilon(epsilon, "lap_graph");
    Rng rng(derive_seed(seed, 41));
    const double eps_count = kLapGraphCountShare * epsilon;
    const double noisy = static_cast<double>(g.num_edges()) + laplace(rng, 1.0 / eps_count);
    const double clamped = std::clamp(std::round(noisy), 0.0, static_cast<double>(cell_count(g)));
    return static_cast<std::size_t>(clamped);
}

Graph lap_graph(const Graph& g, double epsilon, std::uint64_t seed) {
    const std::size_t budget = lap_graph_edge_budget(g, epsilon, seed);
    const double eps_cells = (1.0 - kLapGraphCountShare) * epsilon;
    Rng rng(derive_seed(seed, 43));
    const std::size_t n = g.num_nodes();

    struct Cell {
        double score;
        NodeId u, v;
    };
    std::vector<Cell> cells;
    cells.reserve(cell_count(g));
    for (NodeId u = 0; u < n; ++u) {
        const auto nbrs = g.neighbors(u);
        auto it = std::upper_bound(nbrs.begin(), nbrs.end(), u);
        for (NodeId v = u + 1; v < n; ++v) {
            double a = 0.0;
            if (it != nbrs.end() && *it == v) {
                a = 1.0;
                ++it;
            }
            cells.push_back({a + laplace(rng, 1.0 / eps_cells), u, v});
        }
    }
    // Higher score first; cell order breaks ties.
    auto better = [](const Cell& x, const Cell& y) {
        if (x.score != y.score) return x.score > y.score;
        return std::tie(x.u, x.v) < std::tie(y.u, y.v);
    };
    if (budget < cells.size())
        std::nth_element(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(budget), cells.end(), better);
    std::vector<Edge> edges;
    edges.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) edges.emplace_back(cells[i].u, cells[i].v);
    return with_edges(g, edges);
}

Graph apply_defense(const Graph& g, const DefenseSpec& spec) {
    switch (spec.kind) {
    case DefenseKind::None: return g;
    case DefenseKind::EdgeRand: return edge_rand(g, spec.epsilon, spec.seed);
    case DefenseKind::LapGraph: return lap_graph(g, spec.epsilon, spec.seed);
    }
    throw ArgumentError("unknown defense kind");
}

} // namespace edgelab

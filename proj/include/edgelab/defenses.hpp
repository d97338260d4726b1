#pragma once

#include <cstdint>
#include <string_view>

#include "edgelab/graph.hpp"

namespace edgelab {

enum class DefenseKind { None, EdgeRand, LapGraph };

std::string_view to_string(DefenseKind kind);
DefenseKind parse_defense(std::string_view name);

struct DefenseSpec {
    DefenseKind kind = DefenseKind::None;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

/// Flip probability used by EdgeRand: 1 / (1 + e^epsilon).
double edge_rand_flip_probability(double epsilon);

/// Randomized response on every upper-triangular adjacency cell.
Graph edge_rand(const Graph& g, double epsilon, std::uint64_t seed);

/// Laplace noise on every cell, then keep the top-T cells where T is a noisy
/// edge count. 1% of the budget goes to the count, 99% to the cells.
Graph lap_graph(const Graph& g, double epsilon, std::uint64_t seed);

/// Noisy edge count used by lap_graph for the given parameters.
std::size_t lap_graph_edge_budget(const Graph& g, double epsilon, std::uint64_t seed);

Graph apply_defense(const Graph& g, const DefenseSpec& spec);

} // namespace edgelab

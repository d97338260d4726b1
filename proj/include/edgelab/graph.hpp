#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "edgelab/matrix.hpp"

namespace edgelab {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();
inline constexpr int kNoLabel = -1;

class Graph;

/// Captured graph state. Copyable and cheap to hold; restoring from it is a
/// full state copy.
class Snapshot {
public:
    std::size_t num_nodes() const;

private:
    friend class Graph;
    struct State;
    std::shared_ptr<const State> state_;
};

/// Sparse undirected graph with dense node features and optional labels.
///
/// Neighbor lists are kept sorted and duplicate-free; self-loops are never
/// stored. Node ids are dense, new nodes extend the id space.
class Graph {
public:
    explicit Graph(std::size_t feature_dim = 0);

    /// Builds a graph from an edge list. Reversed/duplicate pairs collapse,
    /// self-loops are rejected, ids must be < features.rows().
    static Graph from_edges(Matrix features, std::span<const Edge> edges,
                            std::vector<int> labels = {});

    std::size_t num_nodes() const noexcept { return adjacency_.size(); }
    std::size_t num_edges() const noexcept { return num_edges_; }
    std::size_t feature_dim() const noexcept { return feature_dim_; }
    /// One more than the largest label present (0 when unlabeled).
    std::size_t num_classes() const noexcept { return num_classes_; }

    std::span<const NodeId> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return neighbors(v).size(); }
    bool has_edge(NodeId u, NodeId v) const;

    std::span<const double> features(NodeId v) const;
    const Matrix& feature_matrix() const noexcept { return features_; }

    int label(NodeId v) const;
    const std::vector<int>& labels() const noexcept { return labels_; }
    bool has_labels() const noexcept { return num_classes_ > 0; }

    NodeId add_node(std::span<const double> features);
    /// Inserts the undirected edge {u, v}; no-op when already present.
    void add_edge(NodeId u, NodeId v);
    void set_features(NodeId v, std::span<const double> features);
    void set_label(NodeId v, int label);

    /// Sorted list of edges with u < v.
    std::vector<Edge> edge_list() const;

    Snapshot snapshot() const;
    void restore(const Snapshot& snap);

    bool operator==(const Graph& other) const;

private:
    void check_node(NodeId v, const char* what) const;

    std::size_t feature_dim_;
    std::size_t num_edges_ = 0;
    std::size_t num_classes_ = 0;
    std::vector<std::vector<NodeId>> adjacency_;
    Matrix features_;
    std::vector<int> labels_;
};

struct Snapshot::State {
    std::size_t feature_dim;
    std::size_t num_edges;
    std::size_t num_classes;
    std::vector<std::vector<NodeId>> adjacency;
    Matrix features;
    std::vector<int> labels;
};

/// Hop distances from `source`; kUnreachable for other components. Nodes
/// beyond `max_depth` are also reported kUnreachable.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source,
                                       std::size_t max_depth = kUnreachable);

/// Nodes at shortest-path distance exactly k from v, sorted ascending.
std::vector<NodeId> k_hop_neighbors(const Graph& g, NodeId v, std::size_t k);

/// Nodes within distance <= radius of v (including v), sorted ascending.
std::vector<NodeId> ball(const Graph& g, NodeId v, std::size_t radius);

/// Induced subgraph on `nodes` (sorted ascending). Ids are relabeled
/// monotonically, so neighbor order is preserved.
Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

/// Rebuilds `g` with a different edge set; features and labels are kept.
Graph with_edges(const Graph& g, std::span<const Edge> edges);

struct LoadStats {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicate_edges = 0;
};

/// Reads the edge list / feature CSV / optional label CSV formats.
Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& features_path,
                 const std::optional<std::filesystem::path>& labels_path = std::nullopt,
                 LoadStats* stats = nullptr);

void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::filesystem::path& features_path,
                const std::optional<std::filesystem::path>& labels_path = std::nullopt);

struct SbmParams {
    std::size_t blocks = 4;
    std::size_t nodes_per_block = 100;
    double p_in = 0.1;
    double p_out = 0.005;
    std::size_t feature_dim = 8;
    double feature_noise = 0.5;
    std::uint64_t seed = 0;
};

/// Stochastic block model. Node i belongs to block i / nodes_per_block; its
/// label is the block and its features are the one-hot block prototype plus
/// Gaussian noise.
Graph generate_sbm(const SbmParams& params);

} // namespace edgelab

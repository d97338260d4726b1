#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "edgelab/graph.hpp"
#include "edgelab/matrix.hpp"
#include "edgelab/rng.hpp"

namespace edgelab {

enum class Arch { GCN, GAT, GIN, SAGE };

std::string_view to_string(Arch arch);
/// Case-insensitive; throws ArgumentError listing the valid names.
Arch parse_arch(std::string_view name);

enum class Activation { ReLU, Identity };

using Posterior = std::vector<double>;

struct Tensor {
    std::string name;
    Matrix value;
};

/// Named parameter tensors of one layer. Names per architecture:
///   GCN  weight[in x out]
///   SAGE weight[2in x out]   (rows 0..in-1 act on self, the rest on the neighbor mean)
///   GAT  weight[in x out], att_self[1 x out], att_neigh[1 x out]
///   GIN  mlp_w1[in x out], mlp_b1[1 x out], mlp_w2[out x out], mlp_b2[1 x out], epsilon[1 x 1]
struct LayerWeights {
    std::vector<Tensor> tensors;

    Matrix& get(std::string_view name);
    const Matrix& get(std::string_view name) const;
};

struct GnnModel {
    Arch arch = Arch::GCN;
    std::size_t feature_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t num_classes = 0;
    /// GAT only: include the node itself in its attention neighborhood.
    bool gat_self_loops = true;
    std::vector<LayerWeights> layers;

    std::size_t depth() const noexcept { return layers.size(); }
    std::size_t in_width(std::size_t layer) const;
    std::size_t out_width(std::size_t layer) const;

    /// Throws ArgumentError on shape problems, NumericError on non-finite weights.
    void validate() const;
};

inline constexpr std::size_t kDefaultDepth = 4;

/// All-zero model with the right tensor shapes. depth must be in [2, 6].
GnnModel make_model(Arch arch, std::size_t feature_dim, std::size_t hidden_dim,
                    std::size_t num_classes, std::size_t depth = kDefaultDepth);

/// Glorot-uniform weights scaled by `scale`; biases and GIN epsilon start at 0.
void init_glorot(GnnModel& model, Rng& rng, double scale = 1.0);

// ---------------------------------------------------------------------------
// Single layers. H is [num_nodes x in]; the result is [num_nodes x out].

/// act(mean(h_u : u in N(v) + {v}) W)
Matrix gcn_layer(const Matrix& h, const Graph& g, const Matrix& weight,
                 Activation act = Activation::ReLU);

struct GatParams {
    const Matrix& weight;
    const Matrix& att_self;
    const Matrix& att_neigh;
};

/// act(sum_u alpha_vu h_u W) with single-head additive attention,
/// score(v,u) = LeakyReLU_0.2(att_self . W h_v + att_neigh . W h_u).
Matrix gat_layer(const Matrix& h, const Graph& g, const GatParams& params, bool self_loops = true,
                 Activation act = Activation::ReLU);

struct AttentionRow {
    std::vector<NodeId> nodes;  // attended nodes, ascending
    std::vector<double> alpha;  // sums to 1 unless `nodes` is empty
};
std::vector<AttentionRow> gat_attention(const Matrix& h, const Graph& g, const GatParams& params,
                                        bool self_loops = true);

struct GinParams {
    const Matrix& w1;
    const Matrix& b1;
    const Matrix& w2;
    const Matrix& b2;
};

/// act(MLP((1 + eps) h_v + sum_{u in N(v)} h_u)), MLP = affine, ReLU, affine.
Matrix gin_layer(const Matrix& h, const Graph& g, const GinParams& mlp, double epsilon,
                 Activation act = Activation::ReLU);

/// act(concat(h_v, mean(h_u : u in N(v))) W); isolated nodes use a zero mean.
Matrix sage_layer(const Matrix& h, const Graph& g, const Matrix& weight,
                  Activation act = Activation::ReLU);

// ---------------------------------------------------------------------------

void softmax_rows(Matrix& logits);

/// Final-layer outputs before softmax for every node.
Matrix forward_logits(const GnnModel& model, const Graph& g);

/// Softmax posteriors for every node.
Matrix forward(const GnnModel& model, const Graph& g);

/// Posterior of a single node, computed on its depth-hop induced subgraph.
/// Bit-identical to row v of forward(model, g).
Posterior posterior(const GnnModel& model, const Graph& g, NodeId v);

// ---------------------------------------------------------------------------
// Model file: a header line "arch depth feature_dim hidden_dim num_classes",
// optional "option <key> <value>" lines, then one block per tensor:
//   tensor <layer> <name> <rows> <cols>
//   <rows lines of cols space-separated values, %.17g>

void write_model(const GnnModel& model, std::ostream& out);
GnnModel read_model(std::istream& in);
void save_model(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_model(const std::filesystem::path& path);

} // namespace edgelab

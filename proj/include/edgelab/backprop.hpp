#pragma once

#include <vector>

#include "edgelab/gnn.hpp"

namespace edgelab {

/// Intermediates of one layer kept for the backward pass. Which members are
/// populated depends on the architecture.
struct LayerCache {
    Matrix input;      // H
    Matrix aggregate;  // GCN mean, SAGE concat, GIN weighted sum
    Matrix hidden_pre; // GIN first affine output
    Matrix hidden;     // GIN ReLU(hidden_pre)
    Matrix projected;  // GAT H W
    std::vector<double> score_self, score_neigh;  // GAT
    std::vector<std::size_t> att_offset;          // GAT, size n+1
    std::vector<NodeId> att_node;
    std::vector<double> att_pre;                  // GAT score before LeakyReLU
    std::vector<double> att_alpha;
    Matrix pre_activation;  // Z
};

struct ForwardTrace {
    std::vector<LayerCache> layers;
    Matrix logits;
};

ForwardTrace forward_trace(const GnnModel& model, const Graph& g);

/// Gradients w.r.t. every tensor, shaped like model.layers, given dL/dlogits.
std::vector<LayerWeights> backward(const GnnModel& model, const Graph& g, const ForwardTrace& trace,
                                   const Matrix& grad_logits);

} // namespace edgelab

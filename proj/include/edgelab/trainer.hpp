#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "edgelab/gnn.hpp"

namespace edgelab {

enum class Optimizer { SGD, Adam };

struct ModelConfig {
    Arch arch = Arch::GCN;
    std::size_t hidden_dim = 32;
    std::size_t depth = kDefaultDepth;
    bool gat_self_loops = true;
};

struct TrainConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::uint64_t seed = 0;
    std::vector<NodeId> train_mask;
    double weight_init_scale = 1.0;
    /// Stop before the first update whose starting parameters already reach
    /// this train accuracy, and return those parameters.
    std::optional<double> stop_at_accuracy;
};

struct EpochStats {
    std::size_t epoch;
    double loss;
    double train_acc;
};

struct TrainResult {
    GnnModel model;              // parameters at the lowest recorded loss
    std::vector<EpochStats> curve;
};

struct LossAndGrad {
    double loss;
    std::vector<LayerWeights> grad;
};

/// Mean cross-entropy of the softmax posteriors over `mask`, with gradients
/// for every parameter tensor.
LossAndGrad loss_and_grad(const GnnModel& model, const Graph& g, std::span<const NodeId> mask);

/// Loss only.
double loss(const GnnModel& model, const Graph& g, std::span<const NodeId> mask);

/// Fraction of `mask` whose argmax posterior equals the label.
double accuracy(const GnnModel& model, const Graph& g, std::span<const NodeId> mask);

/// Full-batch training. Epoch e records the loss of the parameters before the
/// e-th update; a final evaluation after the last update is recorded too.
TrainResult train(const ModelConfig& model_cfg, const Graph& g, const TrainConfig& cfg);

/// Writes "epoch,loss,train_acc".
void write_loss_curve(const std::vector<EpochStats>& curve, const std::filesystem::path& path);

/// Random split of labeled nodes; returns the first `fraction` share, sorted.
std::vector<NodeId> random_train_mask(const Graph& g, double fraction, std::uint64_t seed);

} // namespace edgelab

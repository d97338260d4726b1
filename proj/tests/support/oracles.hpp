#pragma once

// Reference implementations used only by the tests. Nothing here calls the
// library's layer, attack or metric code; graphs and models are only read.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgelab/attacks.hpp"
#include "edgelab/gnn.hpp"
#include "edgelab/graph.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Erdos-Renyi graph with standard-normal features and labels drawn uniformly
/// from [0, classes).
edgelab::Graph random_graph(std::size_t n, double p, std::size_t feature_dim, std::size_t classes,
                            std::uint64_t seed);

/// 0 - 1 - ... - (n-1)
edgelab::Graph path_graph(std::size_t n, std::size_t feature_dim, std::uint64_t seed);

/// Model with every tensor (biases and GIN epsilon included) drawn from
/// uniform(-scale, scale).
edgelab::GnnModel random_model(edgelab::Arch arch, std::size_t feature_dim, std::size_t hidden,
                               std::size_t classes, std::size_t depth, std::uint64_t seed,
                               double scale = 0.5);

/// Forward pass on a dense adjacency matrix, straight from the layer formulas.
Dense dense_logits(const edgelab::GnnModel& model, const edgelab::Graph& g);
Dense dense_posteriors(const edgelab::GnnModel& model, const edgelab::Graph& g);

/// All-pairs hop distances; SIZE_MAX for unreachable pairs.
std::vector<std::vector<std::size_t>> floyd_warshall(const edgelab::Graph& g);

/// AUC by counting every positive/negative pair, ties 1/2.
double brute_auc(const std::vector<double>& scores, const std::vector<bool>& truth);

double norm(const std::vector<double>& v);

/// Mean cross-entropy over `mask` from dense_posteriors.
double dense_loss(const edgelab::GnnModel& model, const edgelab::Graph& g,
                  const std::vector<edgelab::NodeId>& mask);

/// Largest relative error |a - n| / max(|a|, |n|, floor) between analytic
/// gradients `grad` and central differences of dense_loss with step h, over
/// every parameter entry. Steps that straddle a ReLU/LeakyReLU kink are
/// retried with h/100 (up to three times).
double max_gradient_error(const edgelab::GnnModel& model, const edgelab::Graph& g,
                          const std::vector<edgelab::NodeId>& mask,
                          const std::vector<edgelab::LayerWeights>& grad, double h = 1e-5,
                          double floor = 1e-7);

/// Replays the auxiliary-node constellation of an attack on a copy of `g`
/// and evaluates it with dense_posteriors. Same inputs as the session API.
double replay_lps(const edgelab::GnnModel& model, const edgelab::Graph& g, edgelab::NodeId t,
                  edgelab::NodeId c, const edgelab::AttackSpec& spec, const std::vector<double>& aux);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

} // namespace oracle

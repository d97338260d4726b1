#include "edgelab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "edgelab/backprop.hpp"
#include "edgelab/errors.hpp"
#include "edgelab/rng.hpp"

namespace edgelab {

namespace {

void check_mask(const Graph& g, std::span<const NodeId> mask, std::size_t num_classes) {
    if (mask.empty()) throw ArgumentError("train mask is empty");
    for (NodeId v : mask) {
        if (v >= g.num_nodes()) throw ArgumentError("train mask references a missing node");
        const int y = g.label(v);
        if (y < 0) throw ArgumentError("train mask node " + std::to_string(v) + " has no label");
        if (static_cast<std::size_t>(y) >= num_classes)
            throw ArgumentError("label " + std::to_string(y) + " exceeds model num_classes");
    }
}

// Mean cross-entropy; when `grad` is non-null it receives dL/dlogits.
double cross_entropy(const Matrix& logits, const Graph& g, std::span<const NodeId> mask,
                     Matrix* grad) {
    const double inv = 1.0 / static_cast<double>(mask.size());
    if (grad) *grad = Matrix(logits.rows(), logits.cols());
    double total = 0.0;
    for (NodeId v : mask) {
        const auto z = logits.row(v);
        const double mx = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double x : z) sum += std::exp(x - mx);
        const double lse = mx + std::log(sum);
        const auto y = static_cast<std::size_t>(g.label(v));
        total += lse - z[y];
        if (grad) {
            auto gr = grad->row(v);
            for (std::size_t j = 0; j < z.size(); ++j)
                gr[j] += (std::exp(z[j] - lse) - (j == y ? 1.0 : 0.0)) * inv;
        }
    }
    return total * inv;
}

double accuracy_of(const Matrix& logits, const Graph& g, std::span<const NodeId> mask) {
    std::size_t hits = 0;
    for (NodeId v : mask) {
        const auto z = logits.row(v);
        const auto pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
        if (pred == g.label(v)) ++hits;
    }
    return mask.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(mask.size());
}

} // namespace

LossAndGrad loss_and_grad(const GnnModel& model, const Graph& g, std::span<const NodeId> mask) {
    check_mask(g, mask, model.num_classes);
    const ForwardTrace trace = forward_trace(model, g);
    Matrix dlogits;
    const double l = cross_entropy(trace.logits, g, mask, &dlogits);
    return {l, backward(model, g, trace, dlogits)};
}

double loss(const GnnModel& model, const Graph& g, std::span<const NodeId> mask) {
    check_mask(g, mask, model.num_classes);
    return cross_entropy(forward_logits(model, g), g, mask, nullptr);
}

double accuracy(const GnnModel& model, const Graph& g, std::span<const NodeId> mask) {
    return accuracy_of(forward_logits(model, g), g, mask);
}

TrainResult train(const ModelConfig& mc, const Graph& g, const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0)) throw ArgumentError("train: learning_rate must be > 0");
    if (!g.has_labels()) throw ArgumentError("train: graph has no labels");
    if (cfg.stop_at_accuracy && !(*cfg.stop_at_accuracy > 0.0 && *cfg.stop_at_accuracy <= 1.0))
        throw ArgumentError("train: stop_at_accuracy must be in (0, 1]");
    GnnModel model = make_model(mc.arch, g.feature_dim(), mc.hidden_dim, g.num_classes(), mc.depth);
    model.gat_self_loops = mc.gat_self_loops;
    check_mask(g, cfg.train_mask, model.num_classes);

    Rng rng(derive_seed(cfg.seed, 17));
    init_glorot(model, rng, cfg.weight_init_scale);

    // Adam moments, laid out like the model.
    std::vector<LayerWeights> m1, m2;
    for (const auto& layer : model.layers) {
        LayerWeights a, b;
        for (const auto& t : layer.tensors) {
            a.tensors.push_back({t.name, Matrix(t.value.rows(), t.value.cols())});
            b.tensors.push_back({t.name, Matrix(t.value.rows(), t.value.cols())});
        }
        m1.push_back(std::move(a));
        m2.push_back(std::move(b));
    }

    TrainResult result{model, {}};
    double best = std::numeric_limits<double>::infinity();

    auto evaluate = [&](std::size_t epoch, bool with_grad) -> std::vector<LayerWeights> {
        ForwardTrace trace;
        try {
            trace = forward_trace(model, g);
        } catch (const NumericError& e) {
            throw TrainingError(std::string("training diverged: ") + e.what(), epoch);
        }
        Matrix dlogits;
        const double l = cross_entropy(trace.logits, g, cfg.train_mask, with_grad ? &dlogits : nullptr);
        if (!std::isfinite(l)) throw TrainingError("training diverged: non-finite loss", epoch);
        result.curve.push_back({epoch, l, accuracy_of(trace.logits, g, cfg.train_mask)});
        if (l < best) {
            best = l;
            result.model = model;
        }
        if (!with_grad) return {};
        return backward(model, g, trace, dlogits);
    };

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto grads = evaluate(epoch, true);
        if (cfg.stop_at_accuracy && result.curve.back().train_acc >= *cfg.stop_at_accuracy) {
            result.model = model;
            return result;
        }
        const double t = static_cast<double>(epoch + 1);
        for (std::size_t l = 0; l < model.depth(); ++l) {
            for (std::size_t k = 0; k < model.layers[l].tensors.size(); ++k) {
                auto& w = model.layers[l].tensors[k].value.data();
                const auto& gr = grads[l].tensors[k].value.data();
                if (cfg.optimizer == Optimizer::SGD) {
                    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * gr[i];
                    continue;
                }
                auto& a = m1[l].tensors[k].value.data();
                auto& b = m2[l].tensors[k].value.data();
                const double c1 = 1.0 - std::pow(cfg.beta1, t);
                const double c2 = 1.0 - std::pow(cfg.beta2, t);
                for (std::size_t i = 0; i < w.size(); ++i) {
                    a[i] = cfg.beta1 * a[i] + (1.0 - cfg.beta1) * gr[i];
                    b[i] = cfg.beta2 * b[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
                    w[i] -= cfg.learning_rate * (a[i] / c1) / (std::sqrt(b[i] / c2) + 1e-8);
                }
            }
        }
    }
    evaluate(cfg.epochs, false);
    return result;
}

void write_loss_curve(const std::vector<EpochStats>& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << "epoch,loss,train_acc\n";
    out.precision(10);
    for (const auto& s : curve) out << s.epoch << ',' << s.loss << ',' << s.train_acc << '\n';
}

std::vector<NodeId> random_train_mask(const Graph& g, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw ArgumentError("train fraction must be in (0, 1]");
    std::vector<NodeId> labeled;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (g.label(v) >= 0) labeled.push_back(v);
    Rng rng(derive_seed(seed, 23));
    std::shuffle(labeled.begin(), labeled.end(), rng);
    const auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(labeled.size())));
    labeled.resize(std::min(keep, labeled.size()));
    std::sort(labeled.begin(), labeled.end());
    return labeled;
}

} // namespace edgelab

#include "edgelab/gnn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "edgelab/backprop.hpp"
#include "edgelab/errors.hpp"

namespace edgelab {

namespace {

constexpr double kLeakySlope = 0.2;

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void apply_activation(Matrix& z, Activation act) {
    if (act == Activation::Identity) return;
    for (double& x : z.data()) x = x > 0.0 ? x : 0.0;
}

void activation_backward(Matrix& grad, const Matrix& pre, Activation act) {
    if (act == Activation::Identity) return;
    auto& gd = grad.data();
    const auto& pd = pre.data();
    for (std::size_t i = 0; i < gd.size(); ++i)
        if (!(pd[i] > 0.0)) gd[i] = 0.0;
}

void check_input(const Matrix& h, const Graph& g, std::size_t in_width, const char* who) {
    if (h.rows() != g.num_nodes())
        throw ArgumentError(std::string(who) + ": input has " + std::to_string(h.rows()) +
                            " rows for " + std::to_string(g.num_nodes()) + " nodes");
    if (h.cols() != in_width)
        throw ArgumentError(std::string(who) + ": input width " + std::to_string(h.cols()) +
                            " != weight rows " + std::to_string(in_width));
}

// --- GCN -------------------------------------------------------------------

Matrix gcn_forward(const Matrix& h, const Graph& g, const Matrix& w, Activation act,
                   LayerCache* cache) {
    check_input(h, g, w.rows(), "gcn_layer");
    const std::size_t n = g.num_nodes();
    Matrix mean(n, h.cols());
    for (NodeId v = 0; v < n; ++v) {
        auto m = mean.row(v);
        const auto hv = h.row(v);
        std::copy(hv.begin(), hv.end(), m.begin());
        const auto nbrs = g.neighbors(v);
        for (NodeId u : nbrs) {
            const auto hu = h.row(u);
            for (std::size_t j = 0; j < m.size(); ++j) m[j] += hu[j];
        }
        const double count = static_cast<double>(nbrs.size() + 1);
        for (double& x : m) x /= count;
    }
    Matrix z = matmul(mean, w);
    Matrix y = z;
    apply_activation(y, act);
    if (cache) {
        cache->aggregate = std::move(mean);
        cache->pre_activation = std::move(z);
    }
    return y;
}

Matrix gcn_backward(const Matrix& w, const Graph& g, const LayerCache& c, Matrix dz,
                    LayerWeights& grads) {
    grads.get("weight") = matmul_tn(c.aggregate, dz);
    const Matrix dmean = matmul_nt(dz, w);
    Matrix dh(c.input.rows(), c.input.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto nbrs = g.neighbors(v);
        const double inv = 1.0 / static_cast<double>(nbrs.size() + 1);
        const auto dm = dmean.row(v);
        auto dv = dh.row(v);
        for (std::size_t j = 0; j < dm.size(); ++j) dv[j] += dm[j] * inv;
        for (NodeId u : nbrs) {
            auto du = dh.row(u);
            for (std::size_t j = 0; j < dm.size(); ++j) du[j] += dm[j] * inv;
        }
    }
    return dh;
}

// --- SAGE ------------------------------------------------------------------

Matrix sage_forward(const Matrix& h, const Graph& g, const Matrix& w, Activation act,
                    LayerCache* cache) {
    if (w.rows() != 2 * h.cols())
        throw ArgumentError("sage_layer: weight must have 2 * input width rows");
    check_input(h, g, h.cols(), "sage_layer");
    const std::size_t n = g.num_nodes();
    const std::size_t d = h.cols();
    Matrix cat(n, 2 * d);
    for (NodeId v = 0; v < n; ++v) {
        auto row = cat.row(v);
        const auto hv = h.row(v);
        std::copy(hv.begin(), hv.end(), row.begin());
        const auto nbrs = g.neighbors(v);
        if (nbrs.empty()) continue;
        for (NodeId u : nbrs) {
            const auto hu = h.row(u);
            for (std::size_t j = 0; j < d; ++j) row[d + j] += hu[j];
        }
        const double count = static_cast<double>(nbrs.size());
        for (std::size_t j = 0; j < d; ++j) row[d + j] /= count;
    }
    Matrix z = matmul(cat, w);
    Matrix y = z;
    apply_activation(y, act);
    if (cache) {
        cache->aggregate = std::move(cat);
        cache->pre_activation = std::move(z);
    }
    return y;
}

Matrix sage_backward(const Matrix& w, const Graph& g, const LayerCache& c, Matrix dz,
                     LayerWeights& grads) {
    grads.get("weight") = matmul_tn(c.aggregate, dz);
    const Matrix dcat = matmul_nt(dz, w);
    const std::size_t d = c.input.cols();
    Matrix dh(c.input.rows(), d);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto dc = dcat.row(v);
        auto dv = dh.row(v);
        for (std::size_t j = 0; j < d; ++j) dv[j] += dc[j];
        const auto nbrs = g.neighbors(v);
        if (nbrs.empty()) continue;
        const double inv = 1.0 / static_cast<double>(nbrs.size());
        for (NodeId u : nbrs) {
            auto du = dh.row(u);
            for (std::size_t j = 0; j < d; ++j) du[j] += dc[d + j] * inv;
        }
    }
    return dh;
}

// --- GIN -------------------------------------------------------------------

Matrix gin_forward(const Matrix& h, const Graph& g, const GinParams& p, double eps,
                   Activation act, LayerCache* cache) {
    check_input(h, g, p.w1.rows(), "gin_layer");
    if (p.b1.cols() != p.w1.cols() || p.w2.rows() != p.w1.cols() || p.b2.cols() != p.w2.cols())
        throw ArgumentError("gin_layer: inconsistent MLP shapes");
    const std::size_t n = g.num_nodes();
    Matrix sum(n, h.cols());
    const double self_w = 1.0 + eps;
    for (NodeId v = 0; v < n; ++v) {
        auto s = sum.row(v);
        const auto hv = h.row(v);
        for (std::size_t j = 0; j < s.size(); ++j) s[j] = self_w * hv[j];
        for (NodeId u : g.neighbors(v)) {
            const auto hu = h.row(u);
            for (std::size_t j = 0; j < s.size(); ++j) s[j] += hu[j];
        }
    }
    Matrix a = matmul(sum, p.w1);
    for (std::size_t v = 0; v < n; ++v) {
        auto r = a.row(v);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += p.b1(0, j);
    }
    Matrix b = a;
    apply_activation(b, Activation::ReLU);
    Matrix z = matmul(b, p.w2);
    for (std::size_t v = 0; v < n; ++v) {
        auto r = z.row(v);
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += p.b2(0, j);
    }
    Matrix y = z;
    apply_activation(y, act);
    if (cache) {
        cache->aggregate = std::move(sum);
        cache->hidden_pre = std::move(a);
        cache->hidden = std::move(b);
        cache->pre_activation = std::move(z);
    }
    return y;
}

Matrix gin_backward(const LayerWeights& lw, const Graph& g, const LayerCache& c, Matrix dz,
                    LayerWeights& grads) {
    const Matrix& w1 = lw.get("mlp_w1");
    const Matrix& w2 = lw.get("mlp_w2");
    const double eps = lw.get("epsilon")(0, 0);
    grads.get("mlp_w2") = matmul_tn(c.hidden, dz);
    auto& db2 = grads.get("mlp_b2");
    db2 = Matrix(1, dz.cols());
    for (std::size_t v = 0; v < dz.rows(); ++v)
        for (std::size_t j = 0; j < dz.cols(); ++j) db2(0, j) += dz(v, j);
    Matrix da = matmul_nt(dz, w2);
    activation_backward(da, c.hidden_pre, Activation::ReLU);
    grads.get("mlp_w1") = matmul_tn(c.aggregate, da);
    auto& db1 = grads.get("mlp_b1");
    db1 = Matrix(1, da.cols());
    for (std::size_t v = 0; v < da.rows(); ++v)
        for (std::size_t j = 0; j < da.cols(); ++j) db1(0, j) += da(v, j);
    const Matrix ds = matmul_nt(da, w1);
    double deps = 0.0;
    Matrix dh(c.input.rows(), c.input.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto dsv = ds.row(v);
        deps += dot(dsv, c.input.row(v));
        auto dv = dh.row(v);
        for (std::size_t j = 0; j < dsv.size(); ++j) dv[j] += (1.0 + eps) * dsv[j];
        for (NodeId u : g.neighbors(v)) {
            auto du = dh.row(u);
            for (std::size_t j = 0; j < dsv.size(); ++j) du[j] += dsv[j];
        }
    }
    grads.get("epsilon")(0, 0) = deps;
    return dh;
}

// --- GAT -------------------------------------------------------------------

Matrix gat_forward(const Matrix& h, const Graph& g, const GatParams& p, bool self_loops,
                   Activation act, LayerCache* cache) {
    check_input(h, g, p.weight.rows(), "gat_layer");
    const std::size_t out = p.weight.cols();
    if (p.att_self.cols() != out || p.att_neigh.cols() != out)
        throw ArgumentError("gat_layer: attention vectors must match output width");
    const std::size_t n = g.num_nodes();
    Matrix proj = matmul(h, p.weight);
    std::vector<double> s_self(n), s_neigh(n);
    for (NodeId v = 0; v < n; ++v) {
        s_self[v] = dot(proj.row(v), p.att_self.row(0));
        s_neigh[v] = dot(proj.row(v), p.att_neigh.row(0));
    }
    std::vector<std::size_t> offset(n + 1, 0);
    std::vector<NodeId> nodes;
    std::vector<double> pre, alpha;
    Matrix z(n, out);
    std::vector<NodeId> attended;
    for (NodeId v = 0; v < n; ++v) {
        attended.clear();
        const auto nbrs = g.neighbors(v);
        bool inserted = !self_loops;
        for (NodeId u : nbrs) {
            if (!inserted && v < u) {
                attended.push_back(v);
                inserted = true;
            }
            attended.push_back(u);
        }
        if (!inserted) attended.push_back(v);

        const std::size_t base = nodes.size();
        double mx = -INFINITY;
        for (NodeId u : attended) {
            const double e = s_self[v] + s_neigh[u];
            pre.push_back(e);
            const double act_e = e > 0.0 ? e : kLeakySlope * e;
            alpha.push_back(act_e);
            nodes.push_back(u);
            mx = std::max(mx, act_e);
        }
        double total = 0.0;
        for (std::size_t k = base; k < alpha.size(); ++k) {
            alpha[k] = std::exp(alpha[k] - mx);
            total += alpha[k];
        }
        auto zr = z.row(v);
        for (std::size_t k = base; k < alpha.size(); ++k) {
            alpha[k] /= total;
            const auto gu = proj.row(nodes[k]);
            for (std::size_t j = 0; j < out; ++j) zr[j] += alpha[k] * gu[j];
        }
        offset[v + 1] = nodes.size();
    }
    Matrix y = z;
    apply_activation(y, act);
    if (cache) {
        cache->projected = std::move(proj);
        cache->score_self = std::move(s_self);
        cache->score_neigh = std::move(s_neigh);
        cache->att_offset = std::move(offset);
        cache->att_node = std::move(nodes);
        cache->att_pre = std::move(pre);
        cache->att_alpha = std::move(alpha);
        cache->pre_activation = std::move(z);
    }
    return y;
}

Matrix gat_backward(const LayerWeights& lw, const Graph& g, const LayerCache& c, Matrix dz,
                    LayerWeights& grads) {
    const Matrix& w = lw.get("weight");
    const Matrix& a_self = lw.get("att_self");
    const Matrix& a_neigh = lw.get("att_neigh");
    const std::size_t n = g.num_nodes();
    const std::size_t out = w.cols();
    Matrix dproj(n, out);
    std::vector<double> ds_self(n, 0.0), ds_neigh(n, 0.0);
    std::vector<double> dalpha;
    for (NodeId v = 0; v < n; ++v) {
        const std::size_t b = c.att_offset[v], e = c.att_offset[v + 1];
        const auto dzv = dz.row(v);
        dalpha.assign(e - b, 0.0);
        double weighted = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            const NodeId u = c.att_node[k];
            auto du = dproj.row(u);
            for (std::size_t j = 0; j < out; ++j) du[j] += c.att_alpha[k] * dzv[j];
            dalpha[k - b] = dot(dzv, c.projected.row(u));
            weighted += c.att_alpha[k] * dalpha[k - b];
        }
        for (std::size_t k = b; k < e; ++k) {
            const double de = c.att_alpha[k] * (dalpha[k - b] - weighted);
            const double dpre = de * (c.att_pre[k] > 0.0 ? 1.0 : kLeakySlope);
            ds_self[v] += dpre;
            ds_neigh[c.att_node[k]] += dpre;
        }
    }
    Matrix da_self(1, out), da_neigh(1, out);
    for (NodeId v = 0; v < n; ++v) {
        const auto gv = c.projected.row(v);
        auto dv = dproj.row(v);
        for (std::size_t j = 0; j < out; ++j) {
            da_self(0, j) += ds_self[v] * gv[j];
            da_neigh(0, j) += ds_neigh[v] * gv[j];
            dv[j] += ds_self[v] * a_self(0, j) + ds_neigh[v] * a_neigh(0, j);
        }
    }
    grads.get("att_self") = std::move(da_self);
    grads.get("att_neigh") = std::move(da_neigh);
    grads.get("weight") = matmul_tn(c.input, dproj);
    return matmul_nt(dproj, w);
}

// --- dispatch --------------------------------------------------------------

Matrix layer_forward(const GnnModel& m, std::size_t l, const Graph& g, const Matrix& h,
                     LayerCache* cache) {
    const auto& lw = m.layers[l];
    const Activation act = (l + 1 == m.depth()) ? Activation::Identity : Activation::ReLU;
    switch (m.arch) {
    case Arch::GCN:
        return gcn_forward(h, g, lw.get("weight"), act, cache);
    case Arch::SAGE:
        return sage_forward(h, g, lw.get("weight"), act, cache);
    case Arch::GAT:
        return gat_forward(h, g, {lw.get("weight"), lw.get("att_self"), lw.get("att_neigh")},
                           m.gat_self_loops, act, cache);
    case Arch::GIN:
        return gin_forward(h, g,
                           {lw.get("mlp_w1"), lw.get("mlp_b1"), lw.get("mlp_w2"), lw.get("mlp_b2")},
                           lw.get("epsilon")(0, 0), act, cache);
    }
    throw ArgumentError("unknown architecture");
}

void check_model_graph(const GnnModel& m, const Graph& g) {
    if (g.feature_dim() != m.feature_dim)
        throw ArgumentError("forward: graph feature_dim " + std::to_string(g.feature_dim()) +
                            " != model feature_dim " + std::to_string(m.feature_dim));
    if (m.layers.empty()) throw ArgumentError("forward: model has no layers");
}

void check_finite(const Matrix& x, std::size_t layer) {
    if (!x.all_finite())
        throw NumericError("forward: non-finite activation in layer " + std::to_string(layer));
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>
tensor_shapes(Arch arch, std::size_t in, std::size_t out) {
    switch (arch) {
    case Arch::GCN:
        return {{"weight", {in, out}}};
    case Arch::SAGE:
        return {{"weight", {2 * in, out}}};
    case Arch::GAT:
        return {{"weight", {in, out}}, {"att_self", {1, out}}, {"att_neigh", {1, out}}};
    case Arch::GIN:
        return {{"mlp_w1", {in, out}},
                {"mlp_b1", {1, out}},
                {"mlp_w2", {out, out}},
                {"mlp_b2", {1, out}},
                {"epsilon", {1, 1}}};
    }
    return {};
}

} // namespace

std::string_view to_string(Arch arch) {
    switch (arch) {
    case Arch::GCN: return "GCN";
    case Arch::GAT: return "GAT";
    case Arch::GIN: return "GIN";
    case Arch::SAGE: return "SAGE";
    }
    return "?";
}

Arch parse_arch(std::string_view name) {
    const auto s = lower(name);
    if (s == "gcn") return Arch::GCN;
    if (s == "gat") return Arch::GAT;
    if (s == "gin") return Arch::GIN;
    if (s == "sage" || s == "graphsage") return Arch::SAGE;
    throw ArgumentError("unknown architecture '" + std::string(name) +
                        "' (valid: GCN, GAT, GIN, SAGE)");
}

Matrix& LayerWeights::get(std::string_view name) {
    for (auto& t : tensors)
        if (t.name == name) return t.value;
    throw ArgumentError("layer has no tensor named " + std::string(name));
}

const Matrix& LayerWeights::get(std::string_view name) const {
    for (const auto& t : tensors)
        if (t.name == name) return t.value;
    throw ArgumentError("layer has no tensor named " + std::string(name));
}

std::size_t GnnModel::in_width(std::size_t layer) const { return layer == 0 ? feature_dim : hidden_dim; }

std::size_t GnnModel::out_width(std::size_t layer) const {
    return layer + 1 == depth() ? num_classes : hidden_dim;
}

void GnnModel::validate() const {
    if (layers.size() < 2 || layers.size() > 6) throw ArgumentError("model depth must be in [2, 6]");
    if (feature_dim == 0 || hidden_dim == 0 || num_classes == 0)
        throw ArgumentError("model dimensions must be positive");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto shapes = tensor_shapes(arch, in_width(l), out_width(l));
        if (layers[l].tensors.size() != shapes.size())
            throw ArgumentError("layer " + std::to_string(l) + " has the wrong tensor count");
        for (const auto& [name, shape] : shapes) {
            const Matrix& t = layers[l].get(name);
            if (t.rows() != shape.first || t.cols() != shape.second)
                throw ArgumentError("layer " + std::to_string(l) + " tensor " + name +
                                    " has the wrong shape");
            if (!t.all_finite())
                throw NumericError("layer " + std::to_string(l) + " tensor " + name +
                                   " has non-finite entries");
        }
    }
}

GnnModel make_model(Arch arch, std::size_t feature_dim, std::size_t hidden_dim,
                    std::size_t num_classes, std::size_t depth) {
    if (depth < 2 || depth > 6) throw ArgumentError("make_model: depth must be in [2, 6]");
    if (feature_dim == 0 || hidden_dim == 0 || num_classes == 0)
        throw ArgumentError("make_model: dimensions must be positive");
    GnnModel m;
    m.arch = arch;
    m.feature_dim = feature_dim;
    m.hidden_dim = hidden_dim;
    m.num_classes = num_classes;
    m.layers.resize(depth);
    for (std::size_t l = 0; l < depth; ++l)
        for (const auto& [name, shape] : tensor_shapes(arch, m.in_width(l), m.out_width(l)))
            m.layers[l].tensors.push_back({name, Matrix(shape.first, shape.second)});
    return m;
}

void init_glorot(GnnModel& model, Rng& rng, double scale) {
    for (auto& layer : model.layers) {
        for (auto& t : layer.tensors) {
            if (t.name == "mlp_b1" || t.name == "mlp_b2" || t.name == "epsilon") {
                t.value.fill(0.0);
                continue;
            }
            const double fan = static_cast<double>(t.value.rows() + t.value.cols());
            const double bound = scale * std::sqrt(6.0 / fan);
            for (double& x : t.value.data()) x = (2.0 * uniform01(rng) - 1.0) * bound;
        }
    }
}

Matrix gcn_layer(const Matrix& h, const Graph& g, const Matrix& weight, Activation act) {
    return gcn_forward(h, g, weight, act, nullptr);
}

Matrix gat_layer(const Matrix& h, const Graph& g, const GatParams& params, bool self_loops,
                 Activation act) {
    return gat_forward(h, g, params, self_loops, act, nullptr);
}

std::vector<AttentionRow> gat_attention(const Matrix& h, const Graph& g, const GatParams& params,
                                        bool self_loops) {
    LayerCache c;
    gat_forward(h, g, params, self_loops, Activation::Identity, &c);
    std::vector<AttentionRow> rows(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        for (std::size_t k = c.att_offset[v]; k < c.att_offset[v + 1]; ++k) {
            rows[v].nodes.push_back(c.att_node[k]);
            rows[v].alpha.push_back(c.att_alpha[k]);
        }
    }
    return rows;
}

Matrix gin_layer(const Matrix& h, const Graph& g, const GinParams& mlp, double epsilon,
                 Activation act) {
    return gin_forward(h, g, mlp, epsilon, act, nullptr);
}

Matrix sage_layer(const Matrix& h, const Graph& g, const Matrix& weight, Activation act) {
    return sage_forward(h, g, weight, act, nullptr);
}

void softmax_rows(Matrix& logits) {
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double total = 0.0;
        for (double& x : row) {
            x = std::exp(x - mx);
            total += x;
        }
        for (double& x : row) x /= total;
    }
}

Matrix forward_logits(const GnnModel& model, const Graph& g) {
    check_model_graph(model, g);
    Matrix h = g.feature_matrix();
    for (std::size_t l = 0; l < model.depth(); ++l) {
        h = layer_forward(model, l, g, h, nullptr);
        check_finite(h, l);
    }
    return h;
}

Matrix forward(const GnnModel& model, const Graph& g) {
    Matrix p = forward_logits(model, g);
    softmax_rows(p);
    return p;
}

Posterior posterior(const GnnModel& model, const Graph& g, NodeId v) {
    if (v >= g.num_nodes()) throw ArgumentError("posterior: invalid node id");
    const auto nodes = ball(g, v, model.depth());
    const Graph sub = induced_subgraph(g, nodes);
    const std::size_t local = static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), v) - nodes.begin());
    const Matrix p = forward(model, sub);
    const auto row = p.row(local);
    return {row.begin(), row.end()};
}

ForwardTrace forward_trace(const GnnModel& model, const Graph& g) {
    check_model_graph(model, g);
    ForwardTrace trace;
    trace.layers.resize(model.depth());
    Matrix h = g.feature_matrix();
    for (std::size_t l = 0; l < model.depth(); ++l) {
        trace.layers[l].input = h;
        h = layer_forward(model, l, g, h, &trace.layers[l]);
        check_finite(h, l);
    }
    trace.logits = std::move(h);
    return trace;
}

std::vector<LayerWeights> backward(const GnnModel& model, const Graph& g, const ForwardTrace& trace,
                                   const Matrix& grad_logits) {
    std::vector<LayerWeights> grads(model.depth());
    for (std::size_t l = 0; l < model.depth(); ++l)
        for (const auto& t : model.layers[l].tensors)
            grads[l].tensors.push_back({t.name, Matrix(t.value.rows(), t.value.cols())});

    Matrix dy = grad_logits;
    for (std::size_t l = model.depth(); l-- > 0;) {
        const auto& cache = trace.layers[l];
        const Activation act = (l + 1 == model.depth()) ? Activation::Identity : Activation::ReLU;
        Matrix dz = std::move(dy);
        activation_backward(dz, cache.pre_activation, act);
        const auto& lw = model.layers[l];
        switch (model.arch) {
        case Arch::GCN: dy = gcn_backward(lw.get("weight"), g, cache, std::move(dz), grads[l]); break;
        case Arch::SAGE: dy = sage_backward(lw.get("weight"), g, cache, std::move(dz), grads[l]); break;
        case Arch::GIN: dy = gin_backward(lw, g, cache, std::move(dz), grads[l]); break;
        case Arch::GAT: dy = gat_backward(lw, g, cache, std::move(dz), grads[l]); break;
        }
    }
    return grads;
}

} // namespace edgelab

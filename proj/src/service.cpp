#include "edgelab/service.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "edgelab/errors.hpp"

namespace edgelab {

Posterior mask_top_k(const Posterior& p, std::size_t k) {
    if (k == 0) throw ArgumentError("mask_top_k: k must be >= 1");
    if (k >= p.size()) return p;
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    Posterior out(p.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) out[order[i]] = p[order[i]];
    return out;
}

const std::set<NodeId>& AttackSession::owned_nodes() const { return service_->session_state(id_).owned; }
std::size_t AttackSession::query_count() const { return service_->session_state(id_).queries; }
std::size_t AttackSession::perturbation_count() const { return service_->session_state(id_).perturbations; }

VictimService::VictimService(Graph graph, ServiceConfig config)
    : graph_(apply_defense(graph, config.defense)), config_(std::move(config)) {
    if (config_.mask_top_k && *config_.mask_top_k == 0)
        throw ArgumentError("mask_top_k must be >= 1 when set");
}

VictimService::VictimService(Graph graph, std::shared_ptr<const GnnModel> model, ServiceConfig config)
    : VictimService(std::move(graph), std::move(config)) {
    set_model(std::move(model));
}

void VictimService::set_model(std::shared_ptr<const GnnModel> model) {
    if (!model) throw ArgumentError("service: null model");
    if (model->feature_dim != graph_.feature_dim())
        throw ArgumentError("service: model feature_dim does not match the graph");
    model_ = std::move(model);
    invalidate();
}

const GnnModel& VictimService::model() const {
    if (!model_) throw ArgumentError("service: no model loaded");
    return *model_;
}

AttackSession VictimService::open_session() {
    const std::size_t id = next_session_++;
    sessions_.emplace(id, SessionState{});
    return AttackSession(this, id);
}

VictimService::SessionState& VictimService::session_state(const AttackSession& s) {
    if (s.service_ != this) throw AccessDenied("session belongs to another service");
    auto it = sessions_.find(s.id_);
    if (it == sessions_.end()) throw AccessDenied("unknown session");
    return it->second;
}

const VictimService::SessionState& VictimService::session_state(std::size_t id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw AccessDenied("unknown session");
    return it->second;
}

void VictimService::require_owned(const AttackSession& s, NodeId v, const char* op) {
    if (!session_state(s).owned.contains(v))
        throw AccessDenied(std::string(op) + ": session " + std::to_string(s.id_) +
                           " does not own node " + std::to_string(v));
}

void VictimService::record(std::size_t session, const char* op, NodeId node, bool privileged) {
    ++seq_;
    if (config_.query_log) log_.push_back({seq_, session, op, node, privileged});
}

NodeId VictimService::adv_add_node(const AttackSession& s, std::span<const double> features) {
    auto& st = session_state(s);
    const NodeId v = graph_.add_node(features);
    st.owned.insert(v);
    ++st.perturbations;
    invalidate();
    record(s.id_, "add_node", v, false);
    return v;
}

void VictimService::adv_add_edge(const AttackSession& s, NodeId own, NodeId other) {
    require_owned(s, own, "adv_add_edge");
    graph_.add_edge(own, other);
    ++session_state(s).perturbations;
    invalidate();
    record(s.id_, "add_edge", own, false);
}

void VictimService::adv_set_features(const AttackSession& s, NodeId own, std::span<const double> features) {
    require_owned(s, own, "adv_set_features");
    graph_.set_features(own, features);
    ++session_state(s).perturbations;
    invalidate();
    record(s.id_, "set_features", own, false);
}

const Matrix& VictimService::posteriors() {
    if (!cache_valid_) {
        cache_ = forward(model(), graph_);
        cache_valid_ = true;
    }
    return cache_;
}

Posterior VictimService::serve(NodeId v) {
    const auto row = posteriors().row(v);
    Posterior p(row.begin(), row.end());
    if (config_.mask_top_k) p = mask_top_k(p, *config_.mask_top_k);
    return p;
}

Posterior VictimService::query(const AttackSession& s, NodeId own) {
    require_owned(s, own, "query");
    ++session_state(s).queries;
    record(s.id_, "query", own, false);
    return serve(own);
}

Posterior VictimService::privileged_query(NodeId v) {
    if (v >= graph_.num_nodes()) throw ArgumentError("privileged_query: invalid node id");
    record(0, "query", v, true);
    return serve(v);
}

std::vector<double> VictimService::privileged_features(NodeId v) {
    const auto f = graph_.features(v);
    record(0, "read_features", v, true);
    return {f.begin(), f.end()};
}

void VictimService::privileged_set_features(NodeId v, std::span<const double> features) {
    graph_.set_features(v, features);
    invalidate();
    record(0, "set_features", v, true);
}

void VictimService::restore(const Snapshot& snap) {
    graph_.restore(snap);
    const std::size_t n = graph_.num_nodes();
    for (auto& [id, st] : sessions_) st.owned.erase(st.owned.lower_bound(n), st.owned.end());
    invalidate();
}

void VictimService::write_query_log(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out << "seq,session,op,node,privileged\n";
    for (const auto& e : log_)
        out << e.seq << ',' << e.session << ',' << e.op << ',' << e.node << ',' << (e.privileged ? 1 : 0) << '\n';
}

} // namespace edgelab

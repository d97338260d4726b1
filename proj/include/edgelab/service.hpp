#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edgelab/defenses.hpp"
#include "edgelab/gnn.hpp"
#include "edgelab/graph.hpp"

namespace edgelab {

struct ServiceConfig {
    /// Serve only the k largest posterior entries (others zeroed, no renormalization).
    std::optional<std::size_t> mask_top_k;
    /// Applied once to the graph handed to the service, before anything is served.
    DefenseSpec defense;
    bool query_log = false;
};

/// Zeroes all but the k largest entries; ties go to the lower index.
Posterior mask_top_k(const Posterior& p, std::size_t k);

struct QueryLogEntry {
    std::size_t seq;
    std::size_t session;  // 0 for privileged calls
    std::string op;
    NodeId node;
    bool privileged;
};

class VictimService;

/// Adversary handle. Ownership bookkeeping lives inside the service.
class AttackSession {
public:
    std::size_t id() const noexcept { return id_; }
    const std::set<NodeId>& owned_nodes() const;
    std::size_t query_count() const;
    std::size_t perturbation_count() const;

private:
    friend class VictimService;
    AttackSession(const VictimService* service, std::size_t id) : service_(service), id_(id) {}
    const VictimService* service_;
    std::size_t id_;
};

/// Black-box inference facade. Sessions can only create nodes, attach edges
/// from their own nodes, rewrite their own features and read their own
/// posteriors. The privileged_* calls bypass ownership and exist for the
/// baseline attacks and the evaluation harness.
class VictimService {
public:
    VictimService(Graph graph, ServiceConfig config = {});
    VictimService(Graph graph, std::shared_ptr<const GnnModel> model, ServiceConfig config = {});
    // Sessions point back at their service.
    VictimService(const VictimService&) = delete;
    VictimService& operator=(const VictimService&) = delete;

    void set_model(std::shared_ptr<const GnnModel> model);
    const GnnModel& model() const;
    const ServiceConfig& config() const noexcept { return config_; }

    /// Provider-side view of the serving graph (harness, oracles, training).
    const Graph& serving_graph() const noexcept { return graph_; }

    AttackSession open_session();

    NodeId adv_add_node(const AttackSession& s, std::span<const double> features);
    void adv_add_edge(const AttackSession& s, NodeId own, NodeId other);
    void adv_set_features(const AttackSession& s, NodeId own, std::span<const double> features);
    Posterior query(const AttackSession& s, NodeId own);

    Posterior privileged_query(NodeId v);
    std::vector<double> privileged_features(NodeId v);
    void privileged_set_features(NodeId v, std::span<const double> features);

    Snapshot snapshot() const { return graph_.snapshot(); }
    /// Restores the serving graph; ownership of nodes that no longer exist is dropped.
    void restore(const Snapshot& snap);

    const std::vector<QueryLogEntry>& query_log() const noexcept { return log_; }
    /// CSV "seq,session,op,node,privileged".
    void write_query_log(const std::filesystem::path& path) const;

private:
    friend class AttackSession;
    struct SessionState {
        std::set<NodeId> owned;
        std::size_t queries = 0;
        std::size_t perturbations = 0;
    };

    SessionState& session_state(const AttackSession& s);
    const SessionState& session_state(std::size_t id) const;
    void require_owned(const AttackSession& s, NodeId v, const char* op);
    const Matrix& posteriors();
    Posterior serve(NodeId v);
    void record(std::size_t session, const char* op, NodeId node, bool privileged);
    void invalidate() { cache_valid_ = false; }

    Graph graph_;
    std::shared_ptr<const GnnModel> model_;
    ServiceConfig config_;
    std::map<std::size_t, SessionState> sessions_;
    std::size_t next_session_ = 1;
    std::vector<QueryLogEntry> log_;
    std::size_t seq_ = 0;
    Matrix cache_;
    bool cache_valid_ = false;
};

} // namespace edgelab

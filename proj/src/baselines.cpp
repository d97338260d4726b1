#include "edgelab/baselines.hpp"

#include <cmath>

#include "edgelab/errors.hpp"

namespace edgelab {

namespace {

void check_candidates(const VictimService& svc, NodeId t, std::span<const NodeId> candidates) {
    const std::size_t n = svc.serving_graph().num_nodes();
    if (t >= n) throw ArgumentError("baseline: target id out of range");
    for (NodeId c : candidates) {
        if (c >= n) throw ArgumentError("baseline: candidate id out of range");
        if (c == t) throw ArgumentError("baseline: candidate equals target");
    }
}

} // namespace

LpsTable lsa0_scores(VictimService& svc, NodeId t, std::span<const NodeId> candidates) {
    check_candidates(svc, t, candidates);
    LpsTable table;
    table.target = t;
    table.candidates.assign(candidates.begin(), candidates.end());
    const Posterior pt = svc.privileged_query(t);
    for (NodeId c : candidates)
        table.scores.push_back(1.0 - distance(DistanceMetric::Correlation, pt, svc.privileged_query(c)));
    return table;
}

LpsTable lta_scores(VictimService& svc, NodeId t, std::span<const NodeId> candidates, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("lta: alpha must lie in (0, 1)");
    check_candidates(svc, t, candidates);
    LpsTable table;
    table.target = t;
    table.candidates.assign(candidates.begin(), candidates.end());
    const Posterior before = svc.privileged_query(t);
    for (NodeId c : candidates) {
        const std::vector<double> original = svc.privileged_features(c);
        std::vector<double> perturbed = original;
        for (double& x : perturbed) x *= 1.0 - alpha;
        svc.privileged_set_features(c, perturbed);
        Posterior after;
        try {
            after = svc.privileged_query(t);
        } catch (...) {
            svc.privileged_set_features(c, original);
            throw;
        }
        svc.privileged_set_features(c, original);
        double s = 0;
        for (std::size_t i = 0; i < after.size(); ++i) s += (after[i] - before[i]) * (after[i] - before[i]);
        table.scores.push_back(std::sqrt(s) / alpha);
    }
    return table;
}

} // namespace edgelab

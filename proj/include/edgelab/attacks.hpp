#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgelab/distance.hpp"
#include "edgelab/graph.hpp"
#include "edgelab/service.hpp"

namespace edgelab {

/// SIM..INF3 go through an AttackSession; LSA and LTA are the privileged
/// baselines and share the thresholding pipeline.
enum class AttackMethod { SIM, SIM2, INF1, INF2, INF3, LSA, LTA };

std::string_view to_string(AttackMethod m);
AttackMethod parse_method(std::string_view name);
bool uses_metric(AttackMethod m);
bool is_baseline(AttackMethod m);

inline constexpr double kDefaultAlpha = 1e-4;

struct AttackSpec {
    AttackMethod method = AttackMethod::INF3;
    DistanceMetric metric = DistanceMetric::Correlation;
    double alpha = kDefaultAlpha;

    /// "INF3", "INF2-braycurtis", "SIM-correlation", ...
    std::string label() const;
    void validate() const;
};

/// Parses "METHOD" or "METHOD:metric" / "METHOD-metric".
AttackSpec parse_attack_spec(std::string_view text, double alpha = kDefaultAlpha);

struct LpsTable {
    NodeId target = 0;
    std::vector<NodeId> candidates;
    std::vector<double> scores;  // aligned with candidates
};

// Per-pair Link Possibility Scores. Each call mutates the serving graph through
// the session (auxiliary nodes and edges); callers isolate pairs with
// snapshot/restore. `aux` is the feature vector shared by every auxiliary node
// and must have nonzero norm.

double lps_sim(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
               std::span<const double> aux);
double lps_sim2(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux);
double lps_inf1(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux);
double lps_inf2(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux);
double lps_inf3(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux);

/// Scores every candidate, restoring the serving graph after each pair.
/// Baseline methods ignore `aux`.
LpsTable compute_lps_table(VictimService& svc, NodeId t, std::span<const NodeId> candidates,
                           const AttackSpec& spec, std::span<const double> aux);

/// Thresholding rule: predict connected iff score > the (d_hat+1)-th largest
/// score (-inf when it does not exist) and, when `exclude_zero`, score != 0.
std::vector<bool> threshold_predictions(std::span<const double> scores, std::size_t d_hat, bool exclude_zero);

/// SIM2 scores are <= 0 by construction, so zero is its best score, not a
/// "no signal" marker.
bool excludes_zero(AttackMethod m);

std::vector<bool> run_attack(VictimService& svc, NodeId t, std::span<const NodeId> candidates,
                             std::size_t d_hat, const AttackSpec& spec, std::span<const double> aux);

/// CSV rows "target,candidate,method,metric,lps" (header written when `header`).
void write_lps_dump(std::ostream& out, const LpsTable& table, const AttackSpec& spec, bool header);

} // namespace edgelab

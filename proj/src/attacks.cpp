#include "edgelab/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "edgelab/baselines.hpp"
#include "edgelab/errors.hpp"

namespace edgelab {

namespace {

constexpr AttackMethod kAllMethods[] = {AttackMethod::SIM,  AttackMethod::SIM2, AttackMethod::INF1,
                                        AttackMethod::INF2, AttackMethod::INF3, AttackMethod::LSA,
                                        AttackMethod::LTA};

void require_aux(std::span<const double> aux) {
    double s = 0;
    for (double x : aux) s += x * x;
    if (!(s > 0.0)) throw ArgumentError("auxiliary node features must have nonzero norm");
}

void require_pair(const VictimService& svc, NodeId t, NodeId c) {
    const std::size_t n = svc.serving_graph().num_nodes();
    if (t >= n || c >= n) throw ArgumentError("attack: target or candidate id out of range");
    if (t == c) throw ArgumentError("attack: candidate equals target");
}

std::vector<double> scaled(std::span<const double> f, double factor) {
    std::vector<double> out(f.begin(), f.end());
    for (double& x : out) x *= factor;
    return out;
}

std::vector<double> delta(const Posterior& after, const Posterior& before) {
    std::vector<double> d(after.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = after[i] - before[i];
    return d;
}

bool all_zero(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

// Shared INF2/INF3 constellation: a1 on t, a2 and the anchor on c, perturb a2.
struct InfluenceDeltas {
    std::vector<double> at_a1;
    std::vector<double> at_anchor;
};

InfluenceDeltas anchored_influence(VictimService& svc, const AttackSession& s, NodeId t, NodeId c,
                                   const AttackSpec& spec, std::span<const double> aux) {
    const NodeId a1 = svc.adv_add_node(s, aux);
    const NodeId a2 = svc.adv_add_node(s, aux);
    const NodeId anchor = svc.adv_add_node(s, aux);
    svc.adv_add_edge(s, a1, t);
    svc.adv_add_edge(s, a2, c);
    svc.adv_add_edge(s, anchor, c);
    const Posterior p1 = svc.query(s, a1);
    const Posterior pa = svc.query(s, anchor);
    svc.adv_set_features(s, a2, scaled(aux, 1.0 - spec.alpha));
    const Posterior q1 = svc.query(s, a1);
    const Posterior qa = svc.query(s, anchor);
    return {delta(q1, p1), delta(qa, pa)};
}

} // namespace

std::string_view to_string(AttackMethod m) {
    switch (m) {
    case AttackMethod::SIM: return "SIM";
    case AttackMethod::SIM2: return "SIM2";
    case AttackMethod::INF1: return "INF1";
    case AttackMethod::INF2: return "INF2";
    case AttackMethod::INF3: return "INF3";
    case AttackMethod::LSA: return "LSA";
    case AttackMethod::LTA: return "LTA";
    }
    return "?";
}

AttackMethod parse_method(std::string_view name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "LSA0" || s == "LSA-0") return AttackMethod::LSA;
    if (s == "LINKTELLER") return AttackMethod::LTA;
    for (AttackMethod m : kAllMethods)
        if (s == to_string(m)) return m;
    throw ArgumentError("unknown attack method '" + std::string(name) +
                        "' (valid: SIM, SIM2, INF1, INF2, INF3, LSA, LTA)");
}

bool uses_metric(AttackMethod m) {
    return m == AttackMethod::SIM || m == AttackMethod::SIM2 || m == AttackMethod::INF2;
}

bool is_baseline(AttackMethod m) { return m == AttackMethod::LSA || m == AttackMethod::LTA; }

bool excludes_zero(AttackMethod m) { return m != AttackMethod::SIM2; }

std::string AttackSpec::label() const {
    std::string out(to_string(method));
    if (uses_metric(method)) {
        out += '-';
        out += to_string(metric);
    }
    return out;
}

void AttackSpec::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("attack alpha must lie in (0, 1)");
}

AttackSpec parse_attack_spec(std::string_view text, double alpha) {
    AttackSpec spec;
    spec.alpha = alpha;
    const auto sep = text.find_first_of(":-");
    // "LSA-0" is a method name, not method + metric.
    const bool lsa_dash = sep != std::string_view::npos && text.substr(sep) == "-0";
    if (sep == std::string_view::npos || lsa_dash) {
        spec.method = parse_method(text);
    } else {
        spec.method = parse_method(text.substr(0, sep));
        if (!uses_metric(spec.method))
            throw ArgumentError("attack '" + std::string(to_string(spec.method)) + "' takes no distance metric");
        spec.metric = parse_metric(text.substr(sep + 1));
    }
    if (spec.method == AttackMethod::INF2 && sep == std::string_view::npos) spec.metric = DistanceMetric::BrayCurtis;
    spec.validate();
    return spec;
}

double lps_sim(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
               std::span<const double> aux) {
    require_pair(svc, t, c);
    require_aux(aux);
    const NodeId a1 = svc.adv_add_node(s, aux);
    const NodeId a2 = svc.adv_add_node(s, aux);
    svc.adv_add_edge(s, a1, t);
    svc.adv_add_edge(s, a2, c);
    const Posterior p1 = svc.query(s, a1);
    const Posterior p2 = svc.query(s, a2);
    return 1.0 - distance(spec.metric, p1, p2);
}

double lps_sim2(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux) {
    require_pair(svc, t, c);
    require_aux(aux);
    const NodeId a1 = svc.adv_add_node(s, aux);
    const NodeId a2 = svc.adv_add_node(s, aux);
    svc.adv_add_edge(s, a1, t);
    svc.adv_add_edge(s, a2, c);
    const double before = distance(spec.metric, svc.query(s, a1), svc.query(s, a2));
    svc.adv_add_edge(s, a1, c);
    const double after = distance(spec.metric, svc.query(s, a1), svc.query(s, a2));
    return -std::abs(after - before);
}

double lps_inf1(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux) {
    require_pair(svc, t, c);
    require_aux(aux);
    const NodeId a1 = svc.adv_add_node(s, aux);
    const NodeId a2 = svc.adv_add_node(s, aux);
    svc.adv_add_edge(s, a1, t);
    svc.adv_add_edge(s, a2, c);
    const Posterior before = svc.query(s, a2);
    svc.adv_set_features(s, a1, scaled(aux, 1.0 - spec.alpha));
    const Posterior after = svc.query(s, a2);
    return l2_norm(delta(after, before)) / spec.alpha;
}

double lps_inf2(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux) {
    require_pair(svc, t, c);
    require_aux(aux);
    const auto d = anchored_influence(svc, s, t, c, spec, aux);
    if (all_zero(d.at_a1) && all_zero(d.at_anchor)) return 0.0;
    return 1.0 - distance(spec.metric, d.at_a1, d.at_anchor);
}

double lps_inf3(VictimService& svc, const AttackSession& s, NodeId t, NodeId c, const AttackSpec& spec,
                std::span<const double> aux) {
    require_pair(svc, t, c);
    require_aux(aux);
    const auto d = anchored_influence(svc, s, t, c, spec, aux);
    const double den = l2_norm(d.at_anchor);
    if (den < 1e-12) return 0.0;
    return l2_norm(d.at_a1) / den;
}

LpsTable compute_lps_table(VictimService& svc, NodeId t, std::span<const NodeId> candidates,
                           const AttackSpec& spec, std::span<const double> aux) {
    spec.validate();
    if (spec.method == AttackMethod::LSA) return lsa0_scores(svc, t, candidates);
    if (spec.method == AttackMethod::LTA) return lta_scores(svc, t, candidates, spec.alpha);

    using Fn = double (*)(VictimService&, const AttackSession&, NodeId, NodeId, const AttackSpec&,
                          std::span<const double>);
    Fn fn = nullptr;
    switch (spec.method) {
    case AttackMethod::SIM: fn = lps_sim; break;
    case AttackMethod::SIM2: fn = lps_sim2; break;
    case AttackMethod::INF1: fn = lps_inf1; break;
    case AttackMethod::INF2: fn = lps_inf2; break;
    case AttackMethod::INF3: fn = lps_inf3; break;
    default: throw ArgumentError("unknown attack method");
    }

    LpsTable table;
    table.target = t;
    table.candidates.assign(candidates.begin(), candidates.end());
    table.scores.reserve(candidates.size());
    const Snapshot snap = svc.snapshot();
    const AttackSession session = svc.open_session();
    for (NodeId c : candidates) {
        double lps;
        try {
            lps = fn(svc, session, t, c, spec, aux);
        } catch (...) {
            svc.restore(snap);
            throw;
        }
        svc.restore(snap);
        if (!std::isfinite(lps))
            throw NumericError("non-finite LPS for candidate " + std::to_string(c));
        table.scores.push_back(lps);
    }
    return table;
}

std::vector<bool> threshold_predictions(std::span<const double> scores, std::size_t d_hat, bool exclude_zero) {
    double threshold = -std::numeric_limits<double>::infinity();
    if (d_hat < scores.size()) {
        std::vector<double> sorted(scores.begin(), scores.end());
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(d_hat), sorted.end(),
                         std::greater<>());
        threshold = sorted[d_hat];
    }
    std::vector<bool> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        out[i] = scores[i] > threshold && (!exclude_zero || scores[i] != 0.0);
    return out;
}

std::vector<bool> run_attack(VictimService& svc, NodeId t, std::span<const NodeId> candidates,
                             std::size_t d_hat, const AttackSpec& spec, std::span<const double> aux) {
    if (candidates.empty()) throw ArgumentError("run_attack: empty candidate list");
    const LpsTable table = compute_lps_table(svc, t, candidates, spec, aux);
    return threshold_predictions(table.scores, d_hat, excludes_zero(spec.method));
}

void write_lps_dump(std::ostream& out, const LpsTable& table, const AttackSpec& spec, bool header) {
    if (header) out << "target,candidate,method,metric,lps\n";
    const std::string metric = uses_metric(spec.method) ? std::string(to_string(spec.metric))
                               : spec.method == AttackMethod::LSA ? "correlation"
                                                                  : "l2";
    char buf[64];
    for (std::size_t i = 0; i < table.candidates.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", table.scores[i]);
        out << table.target << ',' << table.candidates[i] << ',' << to_string(spec.method) << ',' << metric << ','
            << buf << '\n';
    }
}

} // namespace edgelab

#include "edgelab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <thread>

#include "edgelab/errors.hpp"
#include "edgelab/rng.hpp"
#include "edgelab/service.hpp"

namespace edgelab {

namespace {

std::string lower(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != '-' && c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Re-raises the active library error with the pipeline stage prefixed,
// keeping the category the CLI maps to an exit code.
template <class F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
    const std::string p = std::string(stage) + ": ";
    try {
        return f();
    } catch (const ParseError& e) {
        throw ParseError(p + e.what(), 0);
    } catch (const ValidationError& e) {
        throw ValidationError(p + e.what());
    } catch (const NumericError& e) {
        throw NumericError(p + e.what());
    } catch (const AccessDenied& e) {
        throw AccessDenied(p + e.what());
    } catch (const ArgumentError& e) {
        throw ArgumentError(p + e.what());
    }
}

double mean(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::string format_double(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

} // namespace

std::string_view to_string(DegreeRange r) {
    switch (r) {
    case DegreeRange::Low: return "low";
    case DegreeRange::Unconstrained: return "unconstrained";
    case DegreeRange::High: return "high";
    }
    return "?";
}

std::string_view to_string(DHatMode m) {
    switch (m) {
    case DHatMode::Floor08: return "floor08";
    case DHatMode::Exact: return "exact";
    case DHatMode::Ceil12: return "ceil12";
    }
    return "?";
}

std::string_view to_string(AuxStrategy s) {
    switch (s) {
    case AuxStrategy::Random: return "random";
    case AuxStrategy::Duplication: return "duplication";
    case AuxStrategy::Mean: return "mean";
    case AuxStrategy::DatasetTypical: return "datasettypical";
    case AuxStrategy::Median: return "median";
    }
    return "?";
}

DegreeRange parse_degree_range(std::string_view name) {
    const std::string s = lower(name);
    for (auto r : {DegreeRange::Low, DegreeRange::Unconstrained, DegreeRange::High})
        if (s == to_string(r)) return r;
    throw ArgumentError("unknown degree range '" + std::string(name) + "' (valid: low, unconstrained, high)");
}

DHatMode parse_d_hat_mode(std::string_view name) {
    const std::string s = lower(name);
    for (auto m : {DHatMode::Floor08, DHatMode::Exact, DHatMode::Ceil12})
        if (s == to_string(m)) return m;
    throw ArgumentError("unknown d_hat mode '" + std::string(name) + "' (valid: floor08, exact, ceil12)");
}

AuxStrategy parse_aux_strategy(std::string_view name) {
    const std::string s = lower(name);
    for (auto a : {AuxStrategy::Random, AuxStrategy::Duplication, AuxStrategy::Mean, AuxStrategy::DatasetTypical,
                   AuxStrategy::Median})
        if (s == to_string(a)) return a;
    if (s == "typical") return AuxStrategy::DatasetTypical;
    throw ArgumentError("unknown aux strategy '" + std::string(name) +
                        "' (valid: random, duplication, mean, datasettypical, median)");
}

std::vector<NodeId> select_targets(const Graph& g, std::size_t n, DegreeRange range,
                                   const DegreeThresholds& th, std::uint64_t seed, std::string* warning) {
    if (th.low_max >= th.high_min) throw ArgumentError("degree thresholds need low_max < high_min");
    std::vector<NodeId> pool;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const std::size_t d = g.degree(v);
        bool ok = false;
        switch (range) {
        case DegreeRange::Unconstrained: ok = d > 3; break;
        case DegreeRange::Low: ok = d > 3 && d <= th.low_max; break;
        case DegreeRange::High: ok = d >= th.high_min; break;
        }
        if (ok) pool.push_back(v);
    }
    if (pool.size() <= n) {
        if (pool.size() < n && warning)
            *warning = "only " + std::to_string(pool.size()) + " nodes match degree range " +
                       std::string(to_string(range)) + " (" + std::to_string(n) + " requested)";
        return pool;
    }
    Rng rng(derive_seed(seed, 113));
    for (std::size_t i = 0; i < n; ++i) {
        const auto span = static_cast<double>(pool.size() - i);
        auto j = i + static_cast<std::size_t>(uniform01(rng) * span);
        j = std::min(j, pool.size() - 1);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<NodeId> CandidateSet::all() const {
    std::vector<NodeId> out;
    std::merge(positives.begin(), positives.end(), negatives.begin(), negatives.end(), std::back_inserter(out));
    return out;
}

std::vector<bool> CandidateSet::truth() const {
    std::vector<bool> out;
    for (NodeId v : all()) out.push_back(std::binary_search(positives.begin(), positives.end(), v));
    return out;
}

CandidateSet build_candidate_set(const Graph& g, NodeId t) {
    if (t >= g.num_nodes()) throw ArgumentError("build_candidate_set: invalid target");
    const auto n = g.neighbors(t);
    return {std::vector<NodeId>(n.begin(), n.end()), k_hop_neighbors(g, t, 2)};
}

std::size_t estimate_degree(std::size_t d, DHatMode mode) {
    switch (mode) {
    case DHatMode::Floor08: return (4 * d) / 5;
    case DHatMode::Exact: return d;
    case DHatMode::Ceil12: return (6 * d + 4) / 5;
    }
    throw ArgumentError("unknown d_hat mode");
}

std::vector<double> aux_features(AuxStrategy strategy, const Graph& g, NodeId t, std::uint64_t seed) {
    const std::size_t n = g.num_nodes(), dim = g.feature_dim();
    if (n == 0 || dim == 0) throw ArgumentError("aux_features: empty graph");
    std::vector<double> out(dim, 0.0);
    const Matrix& x = g.feature_matrix();
    auto column_mean = [&] {
        std::vector<double> m(dim, 0.0);
        for (NodeId v = 0; v < n; ++v)
            for (std::size_t j = 0; j < dim; ++j) m[j] += x(v, j);
        for (double& v : m) v /= static_cast<double>(n);
        return m;
    };
    switch (strategy) {
    case AuxStrategy::Random: {
        Rng rng(seed);
        for (double& v : out) v = standard_normal(rng);
        break;
    }
    case AuxStrategy::Duplication: {
        const auto f = g.features(t);
        out.assign(f.begin(), f.end());
        break;
    }
    case AuxStrategy::Mean: out = column_mean(); break;
    case AuxStrategy::DatasetTypical: {
        const auto m = column_mean();
        double best = std::numeric_limits<double>::infinity();
        NodeId arg = 0;
        for (NodeId v = 0; v < n; ++v) {
            double d = 0;
            for (std::size_t j = 0; j < dim; ++j) d += (x(v, j) - m[j]) * (x(v, j) - m[j]);
            if (d < best) {
                best = d;
                arg = v;
            }
        }
        const auto f = g.features(arg);
        out.assign(f.begin(), f.end());
        break;
    }
    case AuxStrategy::Median: {
        std::vector<double> col(n);
        for (std::size_t j = 0; j < dim; ++j) {
            for (NodeId v = 0; v < n; ++v) col[v] = x(v, j);
            std::sort(col.begin(), col.end());
            out[j] = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
        }
        break;
    }
    }
    if (!(l2_norm(out) > 0.0))
        throw ArgumentError("aux strategy '" + std::string(to_string(strategy)) + "' produced a zero feature vector");
    return out;
}

Metrics metrics(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
    if (predicted.size() != truth.size()) throw ArgumentError("metrics: length mismatch");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] && truth[i]) ++tp;
        else if (predicted[i]) ++fp;
        else if (truth[i]) ++fn;
    }
    Metrics m;
    if (tp + fp == 0) {
        m.precision = 1.0;
        m.degenerate = true;
    } else {
        m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    m.recall = tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.f1 = tp == 0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

double auc(std::span<const double> scores, const std::vector<bool>& truth) {
    if (scores.size() != truth.size()) throw ArgumentError("auc: length mismatch");
    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Sum of 1-based average ranks of the positives, kept doubled so every
    // intermediate value is an integer.
    double rank2_pos = 0;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg2 = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k)
            if (truth[order[k]]) {
                rank2_pos += avg2;
                ++pos;
            }
        i = j;
    }
    const std::size_t neg = scores.size() - pos;
    if (pos == 0 || neg == 0) throw ArgumentError("auc: needs at least one positive and one negative");
    const double p = static_cast<double>(pos);
    const double u2 = rank2_pos - p * (p + 1.0);
    return u2 / (2.0 * p * static_cast<double>(neg));
}

void ExperimentConfig::validate() const {
    if (num_targets == 0) throw ArgumentError("num_targets must be >= 1");
    if (thresholds.low_max >= thresholds.high_min) throw ArgumentError("degree thresholds need low_max < high_min");
    if (attacks.empty()) throw ArgumentError("no attacks configured");
    if (d_hat_modes.empty()) throw ArgumentError("no d_hat modes configured");
    if (jobs == 0) throw ArgumentError("jobs must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ArgumentError("train_fraction must be in (0, 1]");
    if (defense.kind != DefenseKind::None && !(defense.epsilon > 0.0))
        throw ArgumentError("defense epsilon must be > 0");
    if (mask_top_k && *mask_top_k == 0) throw ArgumentError("mask_top_k must be >= 1");
    if (graph.edges.has_value() != graph.features.has_value())
        throw ArgumentError("graph files need both edges and features");
    for (const auto& a : attacks) a.validate();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;

    const Graph original = in_stage("load", [&] {
        if (cfg.graph.from_files()) return load_graph(*cfg.graph.edges, *cfg.graph.features, cfg.graph.labels);
        SbmParams p = cfg.graph.sbm;
        p.seed = cfg.graph.sbm_seed.value_or(derive_seed(cfg.seed, 101));
        return generate_sbm(p);
    });

    DefenseSpec defense = cfg.defense;
    defense.seed = derive_seed(cfg.seed, 103);
    const Graph defended = in_stage("defense", [&] { return apply_defense(original, defense); });

    const std::vector<NodeId> mask = in_stage("train", [&] {
        if (!defended.has_labels()) throw ArgumentError("graph has no labels");
        return random_train_mask(defended, cfg.train_fraction, derive_seed(cfg.seed, 107));
    });
    const auto model = in_stage("train", [&] {
        if (cfg.model_path) {
            auto m = std::make_shared<const GnnModel>(load_model(*cfg.model_path));
            if (m->feature_dim != defended.feature_dim())
                throw ArgumentError("model feature_dim does not match the graph");
            return m;
        }
        TrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.learning_rate = cfg.learning_rate;
        tc.optimizer = cfg.optimizer;
        tc.seed = derive_seed(cfg.seed, 109);
        tc.train_mask = mask;
        tc.weight_init_scale = cfg.weight_init_scale;
        tc.stop_at_accuracy = cfg.stop_at_accuracy;
        return std::make_shared<const GnnModel>(train(cfg.model, defended, tc).model);
    });
    {
        const Matrix logits = forward_logits(*model, defended);
        std::size_t hit_train = 0, hit_test = 0, n_test = 0;
        for (NodeId v = 0; v < defended.num_nodes(); ++v) {
            if (defended.label(v) < 0) continue;
            const auto z = logits.row(v);
            const bool hit = std::max_element(z.begin(), z.end()) - z.begin() == defended.label(v);
            if (std::binary_search(mask.begin(), mask.end(), v)) {
                hit_train += hit;
            } else {
                hit_test += hit;
                ++n_test;
            }
        }
        report.train_accuracy = static_cast<double>(hit_train) / static_cast<double>(mask.size());
        report.test_accuracy = n_test ? static_cast<double>(hit_test) / static_cast<double>(n_test) : 0.0;
    }

    std::string warning;
    const std::vector<NodeId> targets = select_targets(original, cfg.num_targets, cfg.degree_range,
                                                       cfg.thresholds, cfg.seed, &warning);
    if (!warning.empty()) report.notes.push_back(warning);

    // Per-target work units. Slots are indexed by position in the ascending
    // target list, so the reduction order never depends on scheduling.
    std::vector<std::optional<TargetResult>> slots(targets.size());
    std::vector<std::exception_ptr> errors(targets.size());
    std::atomic<std::size_t> next{0};
    ServiceConfig scfg;
    scfg.mask_top_k = cfg.mask_top_k;
    const std::uint64_t aux_seed = derive_seed(cfg.seed, 127);

    auto worker = [&] {
        VictimService svc(defended, model, scfg);
        for (std::size_t i = next++; i < targets.size(); i = next++) {
            try {
                const NodeId t = targets[i];
                TargetResult r;
                r.target = t;
                r.degree = original.degree(t);
                r.candidates = build_candidate_set(original, t);
                if (r.candidates.negatives.empty()) continue;
                const auto cands = r.candidates.all();
                const auto truth = r.candidates.truth();
                const auto aux = aux_features(cfg.aux_strategy, original, t, derive_seed(aux_seed, t));
                for (const auto& spec : cfg.attacks) {
                    const auto start = std::chrono::steady_clock::now();
                    r.tables.push_back(compute_lps_table(svc, t, cands, spec, aux));
                    r.seconds.push_back(
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
                    const auto& scores = r.tables.back().scores;
                    r.aucs.push_back(auc(scores, truth));
                    auto& per_mode = r.metrics.emplace_back();
                    for (DHatMode mode : cfg.d_hat_modes) {
                        const auto pred = threshold_predictions(scores, estimate_degree(r.degree, mode),
                                                                excludes_zero(spec.method));
                        per_mode.push_back(metrics(pred, truth));
                    }
                }
                slots[i] = std::move(r);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::min(cfg.jobs, std::max<std::size_t>(targets.size(), 1));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < nthreads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) in_stage("attack", [&] { std::rethrow_exception(e); });

    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (slots[i]) report.targets.push_back(std::move(*slots[i]));
        else report.notes.push_back("target " + std::to_string(targets[i]) + " skipped: no 2-hop negatives");
    }
    if (report.targets.empty()) throw ValidationError("attack: no usable targets");

    for (std::size_t a = 0; a < cfg.attacks.size(); ++a) {
        for (std::size_t m = 0; m < cfg.d_hat_modes.size(); ++m) {
            ReportRow row;
            row.attack = cfg.attacks[a].label();
            row.arch = model->arch;
            row.defense = cfg.defense.kind;
            row.defense_eps = cfg.defense.kind == DefenseKind::None ? std::numeric_limits<double>::infinity()
                                                                     : cfg.defense.epsilon;
            row.d_hat_mode = cfg.d_hat_modes[m];
            row.degree_range = cfg.degree_range;
            std::vector<double> p, r, f, au, secs;
            for (const auto& tr : report.targets) {
                const Metrics& mt = tr.metrics[a][m];
                p.push_back(mt.precision);
                r.push_back(mt.recall);
                f.push_back(mt.f1);
                au.push_back(tr.aucs[a]);
                secs.push_back(tr.seconds[a]);
                row.degenerate_targets += mt.degenerate;
            }
            row.precision = mean(p);
            row.recall = mean(r);
            row.f1 = mean(f);
            row.auc = mean(au);
            row.wall_time = cfg.timing ? mean(secs) : 0.0;
            row.targets = report.targets.size();
            report.rows.push_back(row);
        }
    }

    if (cfg.lps_dump) {
        std::ofstream out(*cfg.lps_dump);
        if (!out) throw ArgumentError("cannot write " + cfg.lps_dump->string());
        bool header = true;
        for (const auto& tr : report.targets)
            for (std::size_t a = 0; a < cfg.attacks.size(); ++a) {
                write_lps_dump(out, tr.tables[a], cfg.attacks[a], header);
                header = false;
            }
    }
    return report;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
    out << "attack,arch,defense_eps,d_hat_mode,degree_range,precision,recall,f1,auc,wall_time,defense,targets,"
           "degenerate_targets\n";
    for (const auto& r : rows) {
        out << r.attack << ',' << to_string(r.arch) << ',' << format_double(r.defense_eps) << ','
            << to_string(r.d_hat_mode) << ',' << to_string(r.degree_range) << ',' << format_double(r.precision)
            << ',' << format_double(r.recall) << ',' << format_double(r.f1) << ',' << format_double(r.auc) << ','
            << format_double(r.wall_time) << ',' << to_string(r.defense) << ',' << r.targets << ','
            << r.degenerate_targets << '\n';
    }
}

void write_report_csv(const std::filesystem::path& path, std::span<const ReportRow> rows) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    write_report_csv(out, rows);
}

std::vector<ExperimentReport> run_sweep(const ExperimentConfig& cfg, std::span<const double> epsilons) {
    if (epsilons.empty()) throw ArgumentError("sweep: empty epsilon list");
    if (cfg.defense.kind == DefenseKind::None) throw ArgumentError("sweep: a defense kind is required");
    std::vector<ExperimentReport> out;
    for (double eps : epsilons) {
        ExperimentConfig c = cfg;
        if (std::isinf(eps) && eps > 0) {
            c.defense.kind = DefenseKind::None;
            c.defense.epsilon = 0;
        } else {
            c.defense.epsilon = eps;
        }
        out.push_back(run_experiment(c));
    }
    return out;
}

} // namespace edgelab

// edgelab: generate graphs, train victims, run edge-inference attacks and
// evaluation sweeps from the command line.

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgelab/attacks.hpp"
#include "edgelab/defenses.hpp"
#include "edgelab/errors.hpp"
#include "edgelab/gnn.hpp"
#include "edgelab/graph.hpp"
#include "edgelab/harness.hpp"
#include "edgelab/rng.hpp"
#include "edgelab/service.hpp"
#include "edgelab/trainer.hpp"

namespace fs = std::filesystem;
using namespace edgelab;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct GraphFiles {
    std::string edges;
    std::string features;
    std::string labels;

    void add(CLI::App* cmd, bool labels_required) {
        cmd->add_option("--edges", edges, "Edge list file")->required();
        cmd->add_option("--features", features, "Feature CSV")->required();
        auto* opt = cmd->add_option("--labels", labels, "Label CSV");
        if (labels_required) opt->required();
    }

    Graph load() const {
        LoadStats stats;
        Graph g = load_graph(edges, features,
                             labels.empty() ? std::nullopt : std::optional<fs::path>(labels), &stats);
        if (stats.self_loops_dropped || stats.duplicate_edges)
            std::cerr << "note: dropped " << stats.self_loops_dropped << " self-loops, collapsed "
                      << stats.duplicate_edges << " duplicate edges\n";
        return g;
    }
};

struct DefenseFlags {
    std::string kind = "none";
    double epsilon = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("--defense", kind, "none, edgerand or lapgraph");
        cmd->add_option("--epsilon", epsilon, "Privacy budget for the defense");
    }

    DefenseSpec spec(std::uint64_t seed) const {
        DefenseSpec d;
        d.kind = parse_defense(kind);
        d.epsilon = epsilon;
        d.seed = derive_seed(seed, 103);
        if (d.kind != DefenseKind::None && !(d.epsilon > 0)) throw ArgumentError("--epsilon must be > 0");
        return d;
    }
};

std::vector<double> parse_epsilons(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "none") {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        try {
            std::size_t used = 0;
            const double e = std::stod(item, &used);
            if (used != item.size() || !(e > 0)) throw std::invalid_argument(item);
            out.push_back(e);
        } catch (const std::exception&) {
            throw ArgumentError("--epsilons: bad value '" + item + "'");
        }
    }
    if (out.empty()) throw ArgumentError("--epsilons: empty list");
    return out;
}

std::string eps_tag(double e) {
    if (std::isinf(e)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", e);
    return buf;
}

void print_notes(const ExperimentReport& r) {
    std::fprintf(stderr, "model accuracy: train %.4f, held-out %.4f\n", r.train_accuracy, r.test_accuracy);
    for (const auto& n : r.notes) std::cerr << "note: " << n << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-inference attack lab for inductive GNNs"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Seed for every stochastic component")->capture_default_str();

    // generate
    auto* gen = app.add_subcommand("generate", "Write a stochastic-block-model graph");
    SbmParams sbm;
    std::string gen_edges, gen_features, gen_labels;
    gen->add_option("--blocks", sbm.blocks)->capture_default_str();
    gen->add_option("--nodes-per-block", sbm.nodes_per_block)->capture_default_str();
    gen->add_option("--p-in", sbm.p_in)->capture_default_str();
    gen->add_option("--p-out", sbm.p_out)->capture_default_str();
    gen->add_option("--feature-dim", sbm.feature_dim)->capture_default_str();
    gen->add_option("--feature-noise", sbm.feature_noise)->capture_default_str();
    gen->add_option("--edges", gen_edges, "Output edge list")->required();
    gen->add_option("--features", gen_features, "Output feature CSV")->required();
    gen->add_option("--labels", gen_labels, "Output label CSV")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train a victim model on a (possibly defended) graph");
    GraphFiles tr_graph;
    tr_graph.add(tr, true);
    DefenseFlags tr_def;
    tr_def.add(tr);
    std::string tr_arch = "gcn", tr_opt = "adam", tr_model, tr_curve;
    ModelConfig mc;
    TrainConfig tc;
    double train_fraction = 0.7;
    tr->add_option("--arch", tr_arch, "gcn, gat, gin or sage")->capture_default_str();
    tr->add_option("--hidden-dim", mc.hidden_dim)->capture_default_str();
    tr->add_option("--depth", mc.depth)->capture_default_str();
    tr->add_option("--gat-self-loops", mc.gat_self_loops)->capture_default_str();
    tr->add_option("--epochs", tc.epochs)->capture_default_str();
    tr->add_option("--learning-rate", tc.learning_rate)->capture_default_str();
    tr->add_option("--optimizer", tr_opt, "adam or sgd")->capture_default_str();
    tr->add_option("--weight-init-scale", tc.weight_init_scale)->capture_default_str();
    tr->add_option("--train-fraction", train_fraction)->capture_default_str();
    tr->add_option("--stop-at-accuracy", tc.stop_at_accuracy, "Stop once train accuracy reaches this value");
    tr->add_option("--model-out", tr_model, "Model file to write")->required();
    tr->add_option("--loss-csv", tr_curve, "Loss curve CSV to write");

    // attack
    auto* at = app.add_subcommand("attack", "Score every 1- and 2-hop candidate of one target");
    GraphFiles at_graph;
    at_graph.add(at, false);
    DefenseFlags at_def;
    at_def.add(at);
    std::string at_model, at_spec = "INF3", at_aux = "random", at_dump, at_log;
    std::size_t at_target = 0;
    std::optional<std::size_t> at_d_hat, at_mask;
    double at_alpha = kDefaultAlpha;
    at->add_option("--model", at_model, "Model file")->required();
    at->add_option("--attack", at_spec, "SIM[:metric], SIM2[:metric], INF1, INF2[:metric], INF3, LSA, LTA")
        ->capture_default_str();
    at->add_option("--target", at_target, "Target node id")->required();
    at->add_option("--d-hat", at_d_hat, "Estimated degree (default: true degree)");
    at->add_option("--alpha", at_alpha)->capture_default_str();
    at->add_option("--aux-strategy", at_aux, "random, duplication, mean, datasettypical, median")
        ->capture_default_str();
    at->add_option("--mask-top-k", at_mask, "Serve only the top-k posterior entries");
    at->add_option("--lps-dump", at_dump, "Write target,candidate,method,metric,lps CSV");
    at->add_option("--query-log", at_log, "Write the service query log CSV");

    // evaluate / sweep share the config overrides
    std::string cfg_path, out_path, out_dir, epsilons = "1,2,4,6,8,10";
    std::vector<std::string> overrides;
    std::optional<std::size_t> jobs;
    bool timing = false;
    auto* ev = app.add_subcommand("evaluate", "Run the evaluation protocol from a config file");
    auto* sw = app.add_subcommand("sweep", "Run the evaluation once per privacy budget");
    for (auto* cmd : {ev, sw}) {
        cmd->add_option("--config", cfg_path, "Config file (key = value lines)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--jobs", jobs, "Worker threads across targets");
        cmd->add_option("--set", overrides, "Override a config key: key=value (repeatable)");
        cmd->add_flag("--timing", timing, "Record per-target wall time in the report");
    }
    ev->add_option("--out", out_path, "Report CSV")->required();
    sw->add_option("--epsilons", epsilons, "Comma-separated budgets; 'inf' means undefended")->capture_default_str();
    sw->add_option("--out-dir", out_dir, "Directory for per-epsilon reports")->required();
    sw->add_option("--out", out_path, "Combined plot-ready CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    auto load_experiment = [&] {
        ExperimentConfig cfg = load_config(cfg_path);
        if (app.get_option("--seed")->count()) cfg.seed = seed;
        if (jobs) cfg.jobs = *jobs;
        if (timing) cfg.timing = true;
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
            apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        return cfg;
    };

    try {
        if (*gen) {
            sbm.seed = seed;
            save_graph(generate_sbm(sbm), gen_edges, gen_features, fs::path(gen_labels));
        } else if (*tr) {
            const Graph g = apply_defense(tr_graph.load(), tr_def.spec(seed));
            mc.arch = parse_arch(tr_arch);
            if (tr_opt == "adam") tc.optimizer = Optimizer::Adam;
            else if (tr_opt == "sgd") tc.optimizer = Optimizer::SGD;
            else throw ArgumentError("--optimizer: expected adam or sgd, got '" + tr_opt + "'");
            tc.seed = derive_seed(seed, 109);
            tc.train_mask = random_train_mask(g, train_fraction, derive_seed(seed, 107));
            const TrainResult res = train(mc, g, tc);
            save_model(res.model, tr_model);
            if (!tr_curve.empty()) write_loss_curve(res.curve, tr_curve);
            std::fprintf(stderr, "train accuracy %.4f, final loss %.6f\n", accuracy(res.model, g, tc.train_mask),
                         loss(res.model, g, tc.train_mask));
        } else if (*at) {
            const Graph original = at_graph.load();
            const AttackSpec spec = parse_attack_spec(at_spec, at_alpha);
            const AuxStrategy aux_strategy = parse_aux_strategy(at_aux);
            if (at_target >= original.num_nodes()) throw ArgumentError("--target: no such node");
            ServiceConfig scfg;
            scfg.defense = at_def.spec(seed);
            scfg.mask_top_k = at_mask;
            scfg.query_log = !at_log.empty();
            VictimService svc(original, std::make_shared<const GnnModel>(load_model(at_model)), scfg);

            const CandidateSet cs = build_candidate_set(original, at_target);
            const auto cands = cs.all();
            if (cands.empty()) throw ValidationError("target has no 1- or 2-hop candidates");
            const auto aux = aux_features(aux_strategy, original, at_target,
                                          derive_seed(derive_seed(seed, 127), at_target));
            const LpsTable table = compute_lps_table(svc, at_target, cands, spec, aux);
            const std::size_t d_hat = at_d_hat.value_or(original.degree(at_target));
            const auto pred = threshold_predictions(table.scores, d_hat, excludes_zero(spec.method));
            std::cout << "candidate,hops,lps,predicted\n";
            for (std::size_t i = 0; i < cands.size(); ++i) {
                const bool adjacent = std::binary_search(cs.positives.begin(), cs.positives.end(), cands[i]);
                std::printf("%zu,%d,%.17g,%d\n", cands[i], adjacent ? 1 : 2, table.scores[i], pred[i] ? 1 : 0);
            }
            if (!at_dump.empty()) {
                std::ofstream out(at_dump);
                if (!out) throw ArgumentError("cannot write " + at_dump);
                write_lps_dump(out, table, spec, true);
            }
            if (!at_log.empty()) svc.write_query_log(at_log);
        } else if (*ev) {
            const ExperimentReport r = run_experiment(load_experiment());
            write_report_csv(fs::path(out_path), r.rows);
            print_notes(r);
        } else if (*sw) {
            const ExperimentConfig cfg = load_experiment();
            const auto eps = parse_epsilons(epsilons);
            fs::create_directories(out_dir);
            std::vector<ReportRow> combined;
            const auto reports = run_sweep(cfg, eps);
            for (std::size_t i = 0; i < reports.size(); ++i) {
                write_report_csv(fs::path(out_dir) / ("report_eps_" + eps_tag(eps[i]) + ".csv"), reports[i].rows);
                combined.insert(combined.end(), reports[i].rows.begin(), reports[i].rows.end());
                std::cerr << "epsilon " << eps_tag(eps[i]) << ": ";
                print_notes(reports[i]);
            }
            write_report_csv(fs::path(out_path), combined);
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const AccessDenied& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const ValidationError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}

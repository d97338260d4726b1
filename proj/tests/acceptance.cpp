// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "edgelab/backprop.hpp"
#include "edgelab/defenses.hpp"
#include "edgelab/harness.hpp"
#include "edgelab/service.hpp"
#include "edgelab/trainer.hpp"
#include "support/oracles.hpp"

using namespace edgelab;

namespace {

constexpr Arch kArchs[] = {Arch::GCN, Arch::GAT, Arch::GIN, Arch::SAGE};

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// SBM 4 x 100, 4-layer model, 20 targets, d_hat = d.
ExperimentConfig desk_config(Arch arch) {
    ExperimentConfig c;
    c.graph.sbm.blocks = 4;
    c.graph.sbm.nodes_per_block = 100;
    c.graph.sbm.p_in = 0.1;
    c.graph.sbm.p_out = 0.005;
    c.graph.sbm.feature_dim = 8;
    c.graph.sbm.feature_noise = 1.0;
    c.model.arch = arch;
    c.model.hidden_dim = 32;
    c.model.depth = 4;
    c.epochs = 300;
    c.learning_rate = 0.01;
    c.stop_at_accuracy = 0.9;
    c.weight_init_scale = arch == Arch::GIN ? 0.3 : 1.0;
    c.num_targets = 20;
    c.attacks = {parse_attack_spec("INF3", kDefaultAlpha)};
    c.d_hat_modes = {DHatMode::Exact};
    c.seed = 1;
    return c;
}

std::size_t row_index(const ExperimentConfig& c, std::size_t attack, DHatMode mode) {
    for (std::size_t m = 0; m < c.d_hat_modes.size(); ++m)
        if (c.d_hat_modes[m] == mode) return attack * c.d_hat_modes.size() + m;
    throw std::logic_error("mode not configured");
}

// ---------------------------------------------------------------------------

Outcome receptive_field() {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    const std::vector<double> bump{7.0, -5.0, 3.0};
    for (Arch arch : kArchs) {
        const GnnModel m = oracle::random_model(arch, 3, 6, 3, 4, 17);
        // Far nodes on a sparse random graph leave the full forward row untouched.
        Graph g = oracle::random_graph(80, 0.03, 3, 3, 5);
        const auto dist = bfs_distances(g, 0);
        const Matrix base = forward(m, g);
        std::size_t far = 0;
        for (NodeId u = 0; u < g.num_nodes(); ++u) {
            if (dist[u] < 5) continue;
            ++far;
            Graph h = g;
            h.set_features(u, bump);
            const Matrix p = forward(m, h);
            for (std::size_t j = 0; j < 3; ++j)
                if (p(0, j) != base(0, j)) {
                    o.pass = false;
                    o.detail += std::string(to_string(arch)) + " changed by node at distance " +
                                std::to_string(dist[u]) + "; ";
                }
        }
        if (far == 0) o.pass = false, o.detail += "no far nodes in test graph; ";
        // Path graph: every node within distance 4 matters, distance 5 does not.
        const Graph path = oracle::path_graph(8, 3, 2);
        const Matrix pb = forward(m, path);
        for (NodeId u = 0; u < path.num_nodes(); ++u) {
            Graph h = path;
            h.set_features(u, bump);
            const Matrix p = forward(m, h);
            bool changed = false;
            for (std::size_t j = 0; j < 3; ++j) changed |= p(0, j) != pb(0, j);
            if (changed != (u <= 4)) {
                o.pass = false;
                o.detail += std::string(to_string(arch)) + " path node " + std::to_string(u) +
                            (changed ? " changed" : " did not change") + "; ";
            }
        }
    }
    const double secs = seconds_since(start);
    if (secs >= 10.0) o.pass = false;
    o.detail += fmt("4 archs, L=4, %.2f s", secs);
    return o;
}

Outcome gradients() {
    Outcome o;
    double worst = 0;
    for (Arch arch : kArchs)
        for (bool self_loops : {true, false}) {
            if (!self_loops && arch != Arch::GAT) continue;
            for (std::uint64_t seed = 1; seed <= 3; ++seed) {
                const Graph g = oracle::random_graph(10, 0.3, 3, 3, seed);
                GnnModel m = oracle::random_model(arch, 3, 4, 3, 4, seed + 50);
                m.gat_self_loops = self_loops;
                std::vector<NodeId> mask(g.num_nodes());
                for (NodeId v = 0; v < g.num_nodes(); ++v) mask[v] = v;
                const double err = oracle::max_gradient_error(m, g, mask, loss_and_grad(m, g, mask).grad);
                worst = std::max(worst, err);
                if (!(err < 1e-4)) {
                    o.pass = false;
                    o.detail += std::string(to_string(arch)) + fmt(" rel err %.3g; ", err);
                }
            }
        }
    o.detail += fmt("max relative error %.3g over GCN, GAT (+/- self loops), GIN, SAGE", worst);
    return o;
}

struct DeskRuns {
    ExperimentConfig gcn_cfg;
    ExperimentReport gcn;
    double gcn_seconds = 0;
    ExperimentConfig gin_cfg;
    ExperimentReport gin;
    double gin_seconds = 0;
};

DeskRuns run_desk() {
    DeskRuns d;
    d.gcn_cfg = desk_config(Arch::GCN);
    d.gcn_cfg.attacks = {parse_attack_spec("INF3", kDefaultAlpha), parse_attack_spec("INF2", kDefaultAlpha),
                         parse_attack_spec("INF1", kDefaultAlpha), parse_attack_spec("SIM", kDefaultAlpha)};
    d.gcn_cfg.d_hat_modes = {DHatMode::Floor08, DHatMode::Exact, DHatMode::Ceil12};
    auto t = std::chrono::steady_clock::now();
    d.gcn = run_experiment(d.gcn_cfg);
    d.gcn_seconds = seconds_since(t);
    d.gin_cfg = desk_config(Arch::GIN);
    t = std::chrono::steady_clock::now();
    d.gin = run_experiment(d.gin_cfg);
    d.gin_seconds = seconds_since(t);
    return d;
}

Outcome desk_inf3(const DeskRuns& d) {
    Outcome o;
    auto check = [&](const char* name, const ExperimentConfig& c, const ExperimentReport& r, double secs) {
        const ReportRow& row = r.rows[row_index(c, 0, DHatMode::Exact)];
        const bool ok = r.train_accuracy >= 0.9 && row.auc >= 0.90 && row.f1 >= 0.75 && secs <= 600;
        o.pass = o.pass && ok;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s train acc %.3f AUC %.4f F1 %.4f (%.0f s)%s; ", name, r.train_accuracy,
                      row.auc, row.f1, secs, ok ? "" : " [below bar]");
        o.detail += buf;
    };
    check("GCN", d.gcn_cfg, d.gcn, d.gcn_seconds);
    check("GIN", d.gin_cfg, d.gin, d.gin_seconds);
    o.detail += "bars: acc >= 0.9, AUC >= 0.90, F1 >= 0.75, <= 600 s";
    return o;
}

Outcome ordering(const DeskRuns& d) {
    const auto& c = d.gcn_cfg;
    auto f1 = [&](std::size_t a) { return d.gcn.rows[row_index(c, a, DHatMode::Exact)].f1; };
    const double inf3 = f1(0), inf2 = f1(1), inf1 = f1(2), sim = f1(3);
    Outcome o;
    o.pass = inf3 >= inf2 && inf2 >= inf1 && sim <= 0.6 && inf3 >= 0.75;
    char buf[200];
    std::snprintf(buf, sizeof buf, "GCN F1: INF3 %.4f, INF2-braycurtis %.4f, INF1 %.4f, SIM-correlation %.4f", inf3,
                  inf2, inf1, sim);
    o.detail = buf;
    return o;
}

Outcome degree_estimates(const DeskRuns& d) {
    const auto& c = d.gcn_cfg;
    const std::size_t lo = row_index(c, 0, DHatMode::Floor08) % c.d_hat_modes.size();
    const std::size_t ex = row_index(c, 0, DHatMode::Exact) % c.d_hat_modes.size();
    const std::size_t hi = row_index(c, 0, DHatMode::Ceil12) % c.d_hat_modes.size();
    Outcome o;
    std::size_t violations = 0;
    for (const auto& t : d.gcn.targets) {
        const auto& m = t.metrics[0];
        if (!(m[hi].recall >= m[ex].recall && m[ex].recall >= m[lo].recall)) ++violations;
    }
    const double ceil_recall = d.gcn.rows[row_index(c, 0, DHatMode::Ceil12)].recall;
    o.pass = violations == 0 && ceil_recall >= 0.95;
    char buf[200];
    std::snprintf(buf, sizeof buf, "INF3/GCN recall floor08 %.4f, exact %.4f, ceil12 %.4f; nesting violations %zu",
                  d.gcn.rows[row_index(c, 0, DHatMode::Floor08)].recall,
                  d.gcn.rows[row_index(c, 0, DHatMode::Exact)].recall, ceil_recall, violations);
    o.detail = buf;
    return o;
}

Outcome masking() {
    Outcome o;
    double unmasked = 0, masked = 0;
    const std::uint64_t seeds[] = {1, 2, 3};
    for (std::uint64_t seed : seeds) {
        ExperimentConfig c = desk_config(Arch::GCN);
        c.graph.sbm.blocks = 7;
        c.graph.sbm.nodes_per_block = 60;
        c.graph.sbm.p_in = 0.15;
        c.graph.sbm.feature_dim = 8;
        c.seed = seed;
        const double plain = run_experiment(c).rows[0].f1;
        c.mask_top_k = 2;
        const double top2 = run_experiment(c).rows[0].f1;
        unmasked += plain / 3;
        masked += top2 / 3;
        o.detail += fmt("seed %.0f: ", static_cast<double>(seed)) + fmt("%.4f", plain) + fmt(" vs %.4f; ", top2);
    }
    o.pass = std::abs(unmasked - masked) <= 0.05;
    char buf[160];
    std::snprintf(buf, sizeof buf, "7-class SBM INF3/GCN F1 unmasked %.4f, top-2 %.4f, gap %.4f (mean of 3 seeds)",
                  unmasked, masked, std::abs(unmasked - masked));
    o.detail += buf;
    return o;
}

Outcome defense_trend(const DeskRuns& d) {
    const double base = d.gcn.rows[row_index(d.gcn_cfg, 0, DHatMode::Exact)].f1;
    ExperimentConfig c = desk_config(Arch::GCN);
    c.defense.kind = DefenseKind::EdgeRand;
    c.defense.epsilon = 2;
    const double low = run_experiment(c).rows[0].f1;
    c.defense.epsilon = 10;
    const double high = run_experiment(c).rows[0].f1;
    Outcome o;
    o.pass = base - low >= 0.3 && std::abs(base - high) <= 0.15;
    char buf[200];
    std::snprintf(buf, sizeof buf, "INF3/GCN F1 undefended %.4f, EdgeRand eps=2 %.4f, eps=10 %.4f", base, low, high);
    o.detail = buf;
    return o;
}

Outcome oracle_equivalences() {
    Outcome o;
    // AUC vs brute-force pair counting.
    std::mt19937_64 rng(2024);
    std::size_t auc_mismatch = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        std::vector<double> s(n);
        std::vector<bool> t(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = trial % 2 ? static_cast<double>(rng() % 5) : std::uniform_real_distribution<double>()(rng);
            t[i] = rng() % 2;
        }
        // Both classes present: one forced positive, one forced negative.
        const std::size_t p = rng() % n;
        const std::size_t q = (p + 1 + rng() % (n - 1)) % n;
        t[p] = true;
        t[q] = false;
        if (auc(s, t) != oracle::brute_auc(s, t)) ++auc_mismatch;
    }
    // Session LPS vs transcript replay.
    std::size_t lps_checked = 0, lps_mismatch = 0;
    double worst = 0;
    const std::vector<AttackSpec> specs = {
        parse_attack_spec("SIM:correlation", 1e-4), parse_attack_spec("SIM:euclidean", 1e-4),
        parse_attack_spec("SIM2:cosine", 1e-4),     parse_attack_spec("INF1", 1e-4),
        parse_attack_spec("INF2", 1e-4),            parse_attack_spec("INF2:cosine", 1e-4),
        parse_attack_spec("INF3", 1e-4)};
    for (Arch arch : kArchs)
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const Graph g = oracle::random_graph(10, 0.3, 3, 3, seed * 7 + static_cast<int>(arch));
            const auto model = std::make_shared<const GnnModel>(oracle::random_model(arch, 3, 5, 3, 4, seed));
            VictimService svc(g, model);
            std::vector<double> aux(3);
            std::mt19937_64 arng(seed);
            std::normal_distribution<double> nd;
            for (double& x : aux) x = nd(arng);
            for (NodeId t = 0; t < g.num_nodes(); t += 3) {
                std::vector<NodeId> cands;
                for (NodeId v = 0; v < g.num_nodes(); ++v)
                    if (v != t) cands.push_back(v);
                for (const auto& spec : specs) {
                    const LpsTable table = compute_lps_table(svc, t, cands, spec, aux);
                    for (std::size_t i = 0; i < cands.size(); ++i) {
                        const double want = oracle::replay_lps(*model, g, t, cands[i], spec, aux);
                        const double err = std::abs(table.scores[i] - want) / std::max(1.0, std::abs(want));
                        worst = std::max(worst, err);
                        ++lps_checked;
                        if (err > 1e-6) ++lps_mismatch;
                    }
                }
            }
        }
    // k-hop classes vs Floyd-Warshall.
    std::size_t khop_mismatch = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = oracle::random_graph(50, 0.05, 2, 2, 900 + seed);
        const auto d = oracle::floyd_warshall(g);
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            for (std::size_t k = 1; k <= 4; ++k) {
                std::vector<NodeId> want;
                for (NodeId u = 0; u < g.num_nodes(); ++u)
                    if (d[v][u] == k) want.push_back(u);
                if (k_hop_neighbors(g, v, k) != want) ++khop_mismatch;
            }
    }
    o.pass = auc_mismatch == 0 && lps_mismatch == 0 && khop_mismatch == 0;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "AUC mismatches %zu/1000; LPS replay mismatches %zu/%zu (max rel diff %.2g); k-hop mismatches %zu",
                  auc_mismatch, lps_mismatch, lps_checked, worst, khop_mismatch);
    o.detail = buf;
    return o;
}

Outcome flip_rate() {
    Outcome o;
    const double cells = 200.0 * 199.0 / 2.0;
    double worst_z = 0;
    for (double eps : {1.0, 2.0, 4.0})
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Graph g = oracle::random_graph(200, 0.05, 2, 2, 300 + seed);
            const Graph h = edge_rand(g, eps, seed);
            std::size_t flips = 0;
            for (NodeId u = 0; u < 200; ++u)
                for (NodeId v = u + 1; v < 200; ++v) flips += g.has_edge(u, v) != h.has_edge(u, v);
            const double p = 1.0 / (1.0 + std::exp(eps));
            const double z = std::abs(static_cast<double>(flips) - cells * p) / std::sqrt(cells * p * (1 - p));
            worst_z = std::max(worst_z, z);
            if (z > 3.0) o.pass = false;
        }
    o.detail = fmt("15 runs, worst deviation %.2f binomial sd", worst_z);
    return o;
}

int run_cli(const std::string& args, const std::filesystem::path& log) {
    const std::string cmd = std::string("\"") + EDGELAB_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome o;
    const auto dir = oracle::scratch_dir("determinism");
    std::ofstream(dir / "run.cfg") << "sbm_blocks = 4\nsbm_nodes_per_block = 60\nsbm_p_in = 0.15\n"
                                      "sbm_feature_noise = 1.0\nhidden_dim = 16\nepochs = 100\n"
                                      "stop_at_accuracy = 0.9\nnum_targets = 12\n"
                                      "attacks = INF3, INF2, SIM2:cosine, LSA, LTA\n"
                                      "d_hat_modes = floor08, exact, ceil12\n";
    const auto q = [&](const char* name) { return "\"" + (dir / name).string() + "\""; };
    const std::string base = "--seed 7 evaluate --config " + q("run.cfg");
    const int a = run_cli(base + " --jobs 1 --out " + q("a.csv"), dir / "a.log");
    const int b = run_cli(base + " --jobs 1 --out " + q("b.csv"), dir / "b.log");
    const int c = run_cli(base + " --jobs 4 --out " + q("c.csv"), dir / "c.log");
    if (a || b || c) {
        o.pass = false;
        o.detail = "evaluate failed: " + slurp(dir / "a.log") + slurp(dir / "c.log");
        return o;
    }
    const std::string ra = slurp(dir / "a.csv"), rb = slurp(dir / "b.csv"), rc = slurp(dir / "c.csv");
    o.pass = !ra.empty() && ra == rb && ra == rc;
    o.detail = std::string("repeat run ") + (ra == rb ? "identical" : "DIFFERENT") + ", --jobs 1 vs 4 " +
               (ra == rc ? "identical" : "DIFFERENT") + " (" + std::to_string(ra.size()) + " bytes)";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    // Optional criterion ids on the command line restrict the run.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    auto selected = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
    int failures = 0;
    auto report = [&](int id, const std::function<Outcome()>& f) {
        if (!selected(id)) return;
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("criterion %d: %s - %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    };
    report(1, receptive_field);
    report(2, gradients);
    DeskRuns desk;
    bool desk_ok = true;
    std::string desk_error;
    try {
        if (selected(3) || selected(4) || selected(5) || selected(7)) desk = run_desk();
    } catch (const std::exception& e) {
        desk_ok = false;
        desk_error = e.what();
    }
    auto with_desk = [&](Outcome (*f)(const DeskRuns&)) {
        return [&, f]() -> Outcome {
            if (!desk_ok) return {false, "desk run failed: " + desk_error};
            return f(desk);
        };
    };
    report(3, with_desk(desk_inf3));
    report(4, with_desk(ordering));
    report(5, with_desk(degree_estimates));
    report(6, masking);
    report(7, with_desk(defense_trend));
    report(8, oracle_equivalences);
    report(9, flip_rate);
    report(10, determinism);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

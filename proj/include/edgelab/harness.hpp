#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgelab/attacks.hpp"
#include "edgelab/defenses.hpp"
#include "edgelab/graph.hpp"
#include "edgelab/trainer.hpp"

namespace edgelab {

enum class DegreeRange { Low, Unconstrained, High };
enum class DHatMode { Floor08, Exact, Ceil12 };
enum class AuxStrategy { Random, Duplication, Mean, DatasetTypical, Median };

std::string_view to_string(DegreeRange r);
std::string_view to_string(DHatMode m);
std::string_view to_string(AuxStrategy s);
DegreeRange parse_degree_range(std::string_view name);
DHatMode parse_d_hat_mode(std::string_view name);
AuxStrategy parse_aux_strategy(std::string_view name);

struct DegreeThresholds {
    std::size_t low_max = 5;
    std::size_t high_min = 10;
};

/// Uniform sample without replacement among nodes whose degree matches the
/// range (Unconstrained: > 3, Low: (3, low_max], High: >= high_min). Returned
/// ascending. Fewer than n qualifying nodes: all of them, and `warning` is set.
std::vector<NodeId> select_targets(const Graph& g, std::size_t n, DegreeRange range,
                                   const DegreeThresholds& thresholds, std::uint64_t seed,
                                   std::string* warning = nullptr);

struct CandidateSet {
    std::vector<NodeId> positives;  // N(t)
    std::vector<NodeId> negatives;  // distance exactly 2
    /// positives and negatives merged ascending, with matching truth flags.
    std::vector<NodeId> all() const;
    std::vector<bool> truth() const;
};

CandidateSet build_candidate_set(const Graph& g, NodeId t);

std::size_t estimate_degree(std::size_t d, DHatMode mode);

/// Feature vector given to every auxiliary node when attacking `t`. Random
/// draws standard normals from `seed`. Zero-norm results are rejected.
std::vector<double> aux_features(AuxStrategy strategy, const Graph& g, NodeId t, std::uint64_t seed);

struct Metrics {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    /// No positives predicted; precision was reported as 1.
    bool degenerate = false;
};

Metrics metrics(const std::vector<bool>& predicted, const std::vector<bool>& truth);

/// Mann-Whitney AUC with ties counted 1/2. Throws when either class is empty.
double auc(std::span<const double> scores, const std::vector<bool>& truth);

struct GraphSource {
    std::optional<std::filesystem::path> edges;
    std::optional<std::filesystem::path> features;
    std::optional<std::filesystem::path> labels;
    SbmParams sbm;
    /// SBM seed; derived from the experiment seed when absent.
    std::optional<std::uint64_t> sbm_seed;
    bool from_files() const { return edges.has_value(); }
};

struct ExperimentConfig {
    GraphSource graph;
    ModelConfig model;
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    Optimizer optimizer = Optimizer::Adam;
    double weight_init_scale = 1.0;
    double train_fraction = 0.7;
    std::optional<double> stop_at_accuracy;
    /// Serve this model instead of training one.
    std::optional<std::filesystem::path> model_path;

    DefenseSpec defense;
    std::vector<AttackSpec> attacks{AttackSpec{}};
    std::size_t num_targets = 100;
    DegreeRange degree_range = DegreeRange::Unconstrained;
    DegreeThresholds thresholds;
    std::vector<DHatMode> d_hat_modes{DHatMode::Exact};
    AuxStrategy aux_strategy = AuxStrategy::Random;
    std::optional<std::size_t> mask_top_k;

    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    /// Record wall-clock seconds per target in the report. Off by default so
    /// reports are byte-reproducible.
    bool timing = false;
    std::optional<std::filesystem::path> lps_dump;

    void validate() const;
};

struct ReportRow {
    std::string attack;
    Arch arch = Arch::GCN;
    DefenseKind defense = DefenseKind::None;
    double defense_eps = 0;
    DHatMode d_hat_mode = DHatMode::Exact;
    DegreeRange degree_range = DegreeRange::Unconstrained;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double auc = 0;
    double wall_time = 0;  // mean seconds per target, 0 unless timing is on
    std::size_t targets = 0;
    std::size_t degenerate_targets = 0;
};

/// Per-target results kept for audits and acceptance checks.
struct TargetResult {
    NodeId target = 0;
    std::size_t degree = 0;
    CandidateSet candidates;
    std::vector<LpsTable> tables;                         // one per attack
    std::vector<std::vector<Metrics>> metrics;            // [attack][d_hat mode]
    std::vector<double> aucs;                             // per attack
    std::vector<double> seconds;                          // per attack
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
    std::vector<TargetResult> targets;  // ascending target id
    double train_accuracy = 0;
    double test_accuracy = 0;           // labeled nodes outside the train mask
    std::vector<std::string> notes;
};

/// generate/load -> defend -> train -> serve -> select targets -> attack.
/// Candidates and ground truth come from the undefended graph.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Header "attack,arch,defense_eps,d_hat_mode,degree_range,precision,recall,
/// f1,auc,wall_time,defense,targets,degenerate_targets". defense_eps is "inf"
/// for an undefended run.
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
void write_report_csv(const std::filesystem::path& path, std::span<const ReportRow> rows);

/// One run per epsilon; an epsilon of +inf means undefended.
std::vector<ExperimentReport> run_sweep(const ExperimentConfig& cfg, std::span<const double> epsilons);

// Config file: one "key = value" per line, '#' starts a comment. Relative
// paths resolve against the config file's directory.

ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies one key; unknown keys and malformed values raise ArgumentError
/// naming the key.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                        const std::filesystem::path& base_dir = {});
std::vector<std::string> config_keys();

} // namespace edgelab

#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "edgelab/errors.hpp"
#include "edgelab/harness.hpp"

namespace edgelab {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = s.find(',');
        const auto item = trim(s.substr(0, pos));
        if (!item.empty()) out.push_back(item);
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
    throw ArgumentError("config key '" + std::string(key) + "': expected " + expected + ", got '" +
                        std::string(value) + "'");
}

std::size_t to_count(std::string_view key, std::string_view v) {
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    bad_value(key, v, "a boolean");
}

template <class Parse>
auto keyed(std::string_view key, Parse&& parse) {
    try {
        return parse();
    } catch (const ArgumentError& e) {
        throw ArgumentError("config key '" + std::string(key) + "': " + e.what());
    }
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view,
                                  const std::filesystem::path&)>;

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() || base.empty() ? p : base / p;
}

const std::map<std::string, Setter, std::less<>>& setters() {
    using C = ExperimentConfig;
    using P = std::filesystem::path;
    using SV = std::string_view;
    static const std::map<std::string, Setter, std::less<>> table = {
        {"edges", [](C& c, SV, SV v, const P& b) { c.graph.edges = resolve(b, v); }},
        {"features", [](C& c, SV, SV v, const P& b) { c.graph.features = resolve(b, v); }},
        {"labels", [](C& c, SV, SV v, const P& b) { c.graph.labels = resolve(b, v); }},
        {"sbm_blocks", [](C& c, SV k, SV v, const P&) { c.graph.sbm.blocks = to_count(k, v); }},
        {"sbm_nodes_per_block", [](C& c, SV k, SV v, const P&) { c.graph.sbm.nodes_per_block = to_count(k, v); }},
        {"sbm_p_in", [](C& c, SV k, SV v, const P&) { c.graph.sbm.p_in = to_double(k, v); }},
        {"sbm_p_out", [](C& c, SV k, SV v, const P&) { c.graph.sbm.p_out = to_double(k, v); }},
        {"sbm_feature_dim", [](C& c, SV k, SV v, const P&) { c.graph.sbm.feature_dim = to_count(k, v); }},
        {"sbm_feature_noise", [](C& c, SV k, SV v, const P&) { c.graph.sbm.feature_noise = to_double(k, v); }},
        {"sbm_seed", [](C& c, SV k, SV v, const P&) { c.graph.sbm_seed = to_u64(k, v); }},
        {"arch", [](C& c, SV k, SV v, const P&) { c.model.arch = keyed(k, [&] { return parse_arch(v); }); }},
        {"hidden_dim", [](C& c, SV k, SV v, const P&) { c.model.hidden_dim = to_count(k, v); }},
        {"depth", [](C& c, SV k, SV v, const P&) { c.model.depth = to_count(k, v); }},
        {"gat_self_loops", [](C& c, SV k, SV v, const P&) { c.model.gat_self_loops = to_bool(k, v); }},
        {"epochs", [](C& c, SV k, SV v, const P&) { c.epochs = to_count(k, v); }},
        {"learning_rate", [](C& c, SV k, SV v, const P&) { c.learning_rate = to_double(k, v); }},
        {"optimizer",
         [](C& c, SV k, SV v, const P&) {
             if (v == "adam") c.optimizer = Optimizer::Adam;
             else if (v == "sgd") c.optimizer = Optimizer::SGD;
             else bad_value(k, v, "adam or sgd");
         }},
        {"weight_init_scale", [](C& c, SV k, SV v, const P&) { c.weight_init_scale = to_double(k, v); }},
        {"train_fraction", [](C& c, SV k, SV v, const P&) { c.train_fraction = to_double(k, v); }},
        {"stop_at_accuracy",
         [](C& c, SV k, SV v, const P&) {
             if (v == "none") c.stop_at_accuracy.reset();
             else c.stop_at_accuracy = to_double(k, v);
         }},
        {"model", [](C& c, SV, SV v, const P& b) { c.model_path = resolve(b, v); }},
        {"defense",
         [](C& c, SV k, SV v, const P&) { c.defense.kind = keyed(k, [&] { return parse_defense(v); }); }},
        {"epsilon", [](C& c, SV k, SV v, const P&) { c.defense.epsilon = to_double(k, v); }},
        {"attacks",
         [](C& c, SV k, SV v, const P&) {
             std::vector<AttackSpec> specs;
             const double alpha = c.attacks.empty() ? kDefaultAlpha : c.attacks.front().alpha;
             for (SV item : split_list(v)) specs.push_back(keyed(k, [&] { return parse_attack_spec(item, alpha); }));
             if (specs.empty()) bad_value(k, v, "a comma-separated attack list");
             c.attacks = std::move(specs);
         }},
        {"alpha",
         [](C& c, SV k, SV v, const P&) {
             const double a = to_double(k, v);
             if (!(a > 0.0 && a < 1.0)) bad_value(k, v, "a value in (0, 1)");
             for (auto& s : c.attacks) s.alpha = a;
         }},
        {"num_targets", [](C& c, SV k, SV v, const P&) { c.num_targets = to_count(k, v); }},
        {"degree_range",
         [](C& c, SV k, SV v, const P&) { c.degree_range = keyed(k, [&] { return parse_degree_range(v); }); }},
        {"low_max", [](C& c, SV k, SV v, const P&) { c.thresholds.low_max = to_count(k, v); }},
        {"high_min", [](C& c, SV k, SV v, const P&) { c.thresholds.high_min = to_count(k, v); }},
        {"d_hat_modes",
         [](C& c, SV k, SV v, const P&) {
             std::vector<DHatMode> modes;
             for (SV item : split_list(v)) modes.push_back(keyed(k, [&] { return parse_d_hat_mode(item); }));
             if (modes.empty()) bad_value(k, v, "a comma-separated mode list");
             c.d_hat_modes = std::move(modes);
         }},
        {"aux_strategy",
         [](C& c, SV k, SV v, const P&) { c.aux_strategy = keyed(k, [&] { return parse_aux_strategy(v); }); }},
        {"mask_top_k",
         [](C& c, SV k, SV v, const P&) {
             if (v == "none" || v == "0") c.mask_top_k.reset();
             else c.mask_top_k = to_count(k, v);
         }},
        {"seed", [](C& c, SV k, SV v, const P&) { c.seed = to_u64(k, v); }},
        {"jobs", [](C& c, SV k, SV v, const P&) { c.jobs = to_count(k, v); }},
        {"timing", [](C& c, SV k, SV v, const P&) { c.timing = to_bool(k, v); }},
        {"lps_dump", [](C& c, SV, SV v, const P& b) { c.lps_dump = resolve(b, v); }},
    };
    return table;
}

} // namespace

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value,
                        const std::filesystem::path& base_dir) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ArgumentError("unknown config key '" + std::string(key) + "'");
    it->second(cfg, key, trim(value), base_dir);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : setters()) out.push_back(k);
    return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file " + path.string());
    ExperimentConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            apply_config_value(cfg, trim(s.substr(0, eq)), s.substr(eq + 1), path.parent_path());
        } catch (const ArgumentError& e) {
            throw ArgumentError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

} // namespace edgelab

#include "edgelab/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "edgelab/errors.hpp"
#include "edgelab/rng.hpp"

namespace edgelab {

std::size_t Snapshot::num_nodes() const { return state_ ? state_->adjacency.size() : 0; }

Graph::Graph(std::size_t feature_dim) : feature_dim_(feature_dim), features_(0, feature_dim) {}

Graph Graph::from_edges(Matrix features, std::span<const Edge> edges, std::vector<int> labels) {
    Graph g(features.cols());
    const std::size_t n = features.rows();
    if (!labels.empty() && labels.size() != n)
        throw ArgumentError("from_edges: label count does not match node count");
    g.adjacency_.assign(n, {});
    g.features_ = std::move(features);
    g.labels_ = labels.empty() ? std::vector<int>(n, kNoLabel) : std::move(labels);
    for (int l : g.labels_)
        if (l >= 0) g.num_classes_ = std::max(g.num_classes_, static_cast<std::size_t>(l) + 1);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw ValidationError("from_edges: edge references missing node");
        if (u == v) throw ArgumentError("from_edges: self-loop");
        g.adjacency_[u].push_back(v);
        g.adjacency_[v].push_back(u);
    }
    std::size_t half_edges = 0;
    for (auto& nbrs : g.adjacency_) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        half_edges += nbrs.size();
    }
    g.num_edges_ = half_edges / 2;
    return g;
}

void Graph::check_node(NodeId v, const char* what) const {
    if (v >= num_nodes())
        throw ArgumentError(std::string(what) + ": invalid node id " + std::to_string(v));
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
    check_node(v, "neighbors");
    return adjacency_[v];
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    check_node(u, "has_edge");
    check_node(v, "has_edge");
    const auto& nbrs = adjacency_[u];
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::span<const double> Graph::features(NodeId v) const {
    check_node(v, "features");
    return features_.row(v);
}

int Graph::label(NodeId v) const {
    check_node(v, "label");
    return labels_[v];
}

NodeId Graph::add_node(std::span<const double> features) {
    if (features.size() != feature_dim_)
        throw ArgumentError("add_node: feature length " + std::to_string(features.size()) +
                            " != feature_dim " + std::to_string(feature_dim_));
    if (features_.cols() != feature_dim_) features_ = Matrix(0, feature_dim_);
    features_.append_row(features);
    adjacency_.emplace_back();
    labels_.push_back(kNoLabel);
    return adjacency_.size() - 1;
}

void Graph::add_edge(NodeId u, NodeId v) {
    check_node(u, "add_edge");
    check_node(v, "add_edge");
    if (u == v) throw ArgumentError("add_edge: self-loops are not allowed");
    auto& nu = adjacency_[u];
    auto it = std::lower_bound(nu.begin(), nu.end(), v);
    if (it != nu.end() && *it == v) return;
    nu.insert(it, v);
    auto& nv = adjacency_[v];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    ++num_edges_;
}

void Graph::set_features(NodeId v, std::span<const double> features) {
    check_node(v, "set_features");
    if (features.size() != feature_dim_)
        throw ArgumentError("set_features: feature length " + std::to_string(features.size()) +
                            " != feature_dim " + std::to_string(feature_dim_));
    std::copy(features.begin(), features.end(), features_.row(v).begin());
}

void Graph::set_label(NodeId v, int label) {
    check_node(v, "set_label");
    if (label < kNoLabel) throw ArgumentError("set_label: negative label");
    labels_[v] = label;
    if (label >= 0) num_classes_ = std::max(num_classes_, static_cast<std::size_t>(label) + 1);
}

std::vector<Edge> Graph::edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < adjacency_.size(); ++u)
        for (NodeId v : adjacency_[u])
            if (u < v) out.emplace_back(u, v);
    return out;
}

Snapshot Graph::snapshot() const {
    Snapshot s;
    s.state_ = std::make_shared<const Snapshot::State>(Snapshot::State{
        feature_dim_, num_edges_, num_classes_, adjacency_, features_, labels_});
    return s;
}

void Graph::restore(const Snapshot& snap) {
    if (!snap.state_) throw ArgumentError("restore: empty snapshot");
    const auto& st = *snap.state_;
    feature_dim_ = st.feature_dim;
    num_edges_ = st.num_edges;
    num_classes_ = st.num_classes;
    adjacency_ = st.adjacency;
    features_ = st.features;
    labels_ = st.labels;
}

bool Graph::operator==(const Graph& o) const {
    return feature_dim_ == o.feature_dim_ && num_edges_ == o.num_edges_ &&
           num_classes_ == o.num_classes_ && adjacency_ == o.adjacency_ &&
           features_ == o.features_ && labels_ == o.labels_;
}

std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source, std::size_t max_depth) {
    std::vector<std::size_t> dist(g.num_nodes(), kUnreachable);
    if (source >= g.num_nodes()) throw ArgumentError("bfs: invalid source");
    std::deque<NodeId> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        if (dist[u] == max_depth) continue;
        for (NodeId w : g.neighbors(u)) {
            if (dist[w] != kUnreachable) continue;
            dist[w] = dist[u] + 1;
            queue.push_back(w);
        }
    }
    return dist;
}

std::vector<NodeId> k_hop_neighbors(const Graph& g, NodeId v, std::size_t k) {
    if (k == 0) throw ArgumentError("k_hop_neighbors: k must be >= 1");
    const auto dist = bfs_distances(g, v, k);
    std::vector<NodeId> out;
    for (NodeId u = 0; u < dist.size(); ++u)
        if (dist[u] == k) out.push_back(u);
    return out;
}

std::vector<NodeId> ball(const Graph& g, NodeId v, std::size_t radius) {
    const auto dist = bfs_distances(g, v, radius);
    std::vector<NodeId> out;
    for (NodeId u = 0; u < dist.size(); ++u)
        if (dist[u] != kUnreachable) out.push_back(u);
    return out;
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
    if (!std::is_sorted(nodes.begin(), nodes.end()))
        throw ArgumentError("induced_subgraph: node list must be sorted");
    Matrix feats(0, g.feature_dim());
    std::vector<int> labels;
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        feats.append_row(g.features(nodes[i]));
        labels.push_back(g.label(nodes[i]));
        for (NodeId w : g.neighbors(nodes[i])) {
            if (w <= nodes[i]) continue;
            auto it = std::lower_bound(nodes.begin(), nodes.end(), w);
            if (it != nodes.end() && *it == w)
                edges.emplace_back(i, static_cast<NodeId>(it - nodes.begin()));
        }
    }
    Graph sub = Graph::from_edges(std::move(feats), edges, std::move(labels));
    return sub;
}

Graph with_edges(const Graph& g, std::span<const Edge> edges) {
    return Graph::from_edges(g.feature_matrix(), edges, g.labels());
}

// ---------------------------------------------------------------------------
// File formats

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_index(std::string_view s, std::size_t& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ParseError("cannot open " + p.string(), 0);
    return in;
}

std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw ArgumentError("cannot write " + p.string());
    return out;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& features_path,
                 const std::optional<std::filesystem::path>& labels_path, LoadStats* stats) {
    // Features first: they fix the node count.
    std::vector<std::pair<std::size_t, std::vector<double>>> rows;
    {
        auto in = open_input(features_path);
        std::string line;
        std::size_t lineno = 0;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++lineno;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            const auto cells = split(body, ',');
            std::size_t id = 0;
            if (!parse_index(cells[0], id)) {
                if (rows.empty() && !header_seen) {  // header row
                    header_seen = true;
                    continue;
                }
                throw ParseError(features_path.string() + ": bad node id", lineno);
            }
            std::vector<double> values;
            for (std::size_t i = 1; i < cells.size(); ++i) {
                double x = 0;
                if (!parse_real(cells[i], x))
                    throw ParseError(features_path.string() + ": bad feature value", lineno);
                values.push_back(x);
            }
            if (!rows.empty() && values.size() != rows.front().second.size())
                throw ParseError(features_path.string() + ": ragged feature row", lineno);
            rows.emplace_back(id, std::move(values));
        }
    }
    const std::size_t n = rows.size();
    const std::size_t dim = n ? rows.front().second.size() : 0;
    Matrix feats(n, dim);
    std::vector<bool> seen(n, false);
    for (const auto& [id, values] : rows) {
        if (id >= n || seen[id])
            throw ValidationError(features_path.string() +
                                  ": node ids must be exactly 0..n-1, got " + std::to_string(id));
        seen[id] = true;
        std::copy(values.begin(), values.end(), feats.row(id).begin());
    }

    std::vector<int> labels(n, kNoLabel);
    if (labels_path) {
        auto in = open_input(*labels_path);
        std::string line;
        std::size_t lineno = 0;
        bool any = false;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++lineno;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            const auto cells = split(body, ',');
            std::size_t id = 0;
            int label = 0;
            if (cells.size() != 2 || !parse_index(cells[0], id) || !parse_int(cells[1], label)) {
                if (!any && !header_seen) {  // header row
                    header_seen = true;
                    continue;
                }
                throw ParseError(labels_path->string() + ": expected node_id,label", lineno);
            }
            any = true;
            if (id >= n) throw ValidationError(labels_path->string() + ": unknown node " + std::to_string(id));
            if (label < 0) throw ValidationError(labels_path->string() + ": negative label");
            labels[id] = label;
        }
    }

    std::vector<Edge> edges;
    LoadStats local;
    {
        auto in = open_input(edges_path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto body = trim(line);
            if (body.empty() || body.front() == '#') continue;
            std::istringstream tokens{std::string(body)};
            std::string a, b, extra;
            tokens >> a >> b;
            std::size_t u = 0, v = 0;
            if (!parse_index(a, u) || !parse_index(b, v) || (tokens >> extra))
                throw ParseError(edges_path.string() + ": expected two node ids", lineno);
            if (u >= n || v >= n)
                throw ValidationError(edges_path.string() + ": line " + std::to_string(lineno) +
                                      " references node " + std::to_string(std::max(u, v)) +
                                      " but only " + std::to_string(n) + " feature rows exist");
            if (u == v) {
                ++local.self_loops_dropped;
                continue;
            }
            edges.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    const std::size_t raw = edges.size();
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    local.duplicate_edges = raw - edges.size();
    if (stats) *stats = local;
    return Graph::from_edges(std::move(feats), edges, std::move(labels));
}

void save_graph(const Graph& g, const std::filesystem::path& edges_path,
                const std::filesystem::path& features_path,
                const std::optional<std::filesystem::path>& labels_path) {
    {
        auto out = open_output(edges_path);
        for (auto [u, v] : g.edge_list()) out << u << ' ' << v << '\n';
    }
    {
        auto out = open_output(features_path);
        out << "node_id";
        for (std::size_t j = 0; j < g.feature_dim(); ++j) out << ",f" << j;
        out << '\n';
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            out << v;
            for (double x : g.features(v)) out << ',' << format_real(x);
            out << '\n';
        }
    }
    if (labels_path) {
        auto out = open_output(*labels_path);
        out << "node_id,label\n";
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (g.label(v) >= 0) out << v << ',' << g.label(v) << '\n';
    }
}

Graph generate_sbm(const SbmParams& p) {
    if (p.blocks == 0 || p.nodes_per_block == 0)
        throw ArgumentError("generate_sbm: blocks and nodes_per_block must be positive");
    if (!(0.0 <= p.p_out && p.p_out < p.p_in && p.p_in <= 1.0))
        throw ArgumentError("generate_sbm: need 0 <= p_out < p_in <= 1");
    if (p.feature_dim < p.blocks)
        throw ArgumentError("generate_sbm: feature_dim must be >= blocks for one-hot prototypes");
    if (p.feature_noise < 0) throw ArgumentError("generate_sbm: feature_noise must be >= 0");

    const std::size_t n = p.blocks * p.nodes_per_block;
    Rng edge_rng(derive_seed(p.seed, 1));
    Rng feat_rng(derive_seed(p.seed, 2));

    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        const std::size_t bu = u / p.nodes_per_block;
        for (NodeId v = u + 1; v < n; ++v) {
            const double prob = (bu == v / p.nodes_per_block) ? p.p_in : p.p_out;
            if (uniform01(edge_rng) < prob) edges.emplace_back(u, v);
        }
    }
    Matrix feats(n, p.feature_dim);
    std::vector<int> labels(n);
    for (NodeId v = 0; v < n; ++v) {
        const std::size_t block = v / p.nodes_per_block;
        labels[v] = static_cast<int>(block);
        for (std::size_t j = 0; j < p.feature_dim; ++j)
            feats(v, j) = (j == block ? 1.0 : 0.0) + p.feature_noise * standard_normal(feat_rng);
    }
    return Graph::from_edges(std::move(feats), edges, std::move(labels));
}

} // namespace edgelab

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "edgelab/errors.hpp"
#include "edgelab/gnn.hpp"

namespace edgelab {

namespace {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        return true;
    }
    return false;
}

double parse_value(const std::string& tok, std::size_t lineno) {
    // strtod rather than stod: subnormals must round-trip instead of throwing.
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw ParseError("model: bad number '" + tok + "'", lineno);
    return v;
}

} // namespace

void write_model(const GnnModel& model, std::ostream& out) {
    model.validate();
    out << to_string(model.arch) << ' ' << model.depth() << ' ' << model.feature_dim << ' '
        << model.hidden_dim << ' ' << model.num_classes << '\n';
    if (model.arch == Arch::GAT) out << "option gat_self_loops " << (model.gat_self_loops ? 1 : 0) << '\n';
    for (std::size_t l = 0; l < model.depth(); ++l) {
        for (const auto& t : model.layers[l].tensors) {
            out << "tensor " << l << ' ' << t.name << ' ' << t.value.rows() << ' ' << t.value.cols()
                << '\n';
            for (std::size_t r = 0; r < t.value.rows(); ++r) {
                for (std::size_t c = 0; c < t.value.cols(); ++c)
                    out << (c ? " " : "") << format_real(t.value(r, c));
                out << '\n';
            }
        }
    }
}

GnnModel read_model(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!next_content_line(in, line, lineno)) throw ParseError("model: empty file", 0);
    std::istringstream header(line);
    std::string arch_name, extra;
    std::size_t depth = 0, feature_dim = 0, hidden_dim = 0, num_classes = 0;
    if (!(header >> arch_name >> depth >> feature_dim >> hidden_dim >> num_classes) || (header >> extra))
        throw ParseError("model: header must be 'arch depth feature_dim hidden_dim num_classes'", lineno);
    GnnModel model = make_model(parse_arch(arch_name), feature_dim, hidden_dim, num_classes, depth);

    std::size_t tensors_read = 0;
    while (next_content_line(in, line, lineno)) {
        std::istringstream ss(line);
        std::string kind;
        ss >> kind;
        if (kind == "option") {
            std::string key;
            int value = 0;
            if (!(ss >> key >> value)) throw ParseError("model: malformed option", lineno);
            if (key == "gat_self_loops") model.gat_self_loops = value != 0;
            else throw ParseError("model: unknown option " + key, lineno);
            continue;
        }
        if (kind != "tensor") throw ParseError("model: expected 'tensor' block, got '" + kind + "'", lineno);
        std::size_t layer = 0, rows = 0, cols = 0;
        std::string name;
        if (!(ss >> layer >> name >> rows >> cols)) throw ParseError("model: malformed tensor header", lineno);
        if (layer >= model.depth()) throw ParseError("model: layer index out of range", lineno);
        Matrix* target = nullptr;
        try {
            target = &model.layers[layer].get(name);
        } catch (const ArgumentError&) {
            throw ParseError("model: unexpected tensor " + name, lineno);
        }
        if (target->rows() != rows || target->cols() != cols)
            throw ParseError("model: tensor " + name + " has the wrong shape", lineno);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!next_content_line(in, line, lineno)) throw ParseError("model: truncated tensor " + name, lineno);
            std::istringstream values(line);
            std::string tok;
            std::size_t c = 0;
            while (values >> tok) {
                if (c == cols) throw ParseError("model: too many values in row", lineno);
                (*target)(r, c++) = parse_value(tok, lineno);
            }
            if (c != cols) throw ParseError("model: too few values in row", lineno);
        }
        ++tensors_read;
    }
    std::size_t expected = 0;
    for (const auto& l : model.layers) expected += l.tensors.size();
    if (tensors_read != expected)
        throw ParseError("model: expected " + std::to_string(expected) + " tensors, read " +
                             std::to_string(tensors_read), lineno);
    model.validate();
    return model;
}

void save_model(const GnnModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ArgumentError("cannot write " + path.string());
    write_model(model, out);
}

GnnModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    return read_model(in);
}

} // namespace edgelab

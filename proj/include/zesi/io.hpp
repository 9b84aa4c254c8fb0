#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "zesi/graph.hpp"
#include "zesi/prob.hpp"
#include "zesi/util.hpp"

namespace zesi {

using Json = nlohmann::json;

inline void require_object(const Json& j, const std::string& what) {
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
}

// Schema guard: every present key must be in the allowed list.
inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    require_object(j, what);
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ValidationError(what + ": unknown key \"" + item.key() + "\"");
    }
}

inline const Json& require_field(const Json& j, const char* key, const std::string& what) {
    require_object(j, what);
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(what + ": missing key \"" + key + "\"");
    return *it;
}

inline double parse_number(const Json& j, const std::string& what) {
    if (!j.is_number()) throw ValidationError(what + ": expected a number");
    return j.get<double>();
}

inline std::int64_t parse_integer(const Json& j, const std::string& what) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) throw ValidationError(what + ": expected an integer");
    return j.get<std::int64_t>();
}

inline std::vector<double> parse_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + ": expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(parse_number(v, what));
    return out;
}

inline std::vector<std::vector<double>> parse_matrix(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ValidationError(what + ": expected a nonempty array of rows");
    std::vector<std::vector<double>> out;
    out.reserve(j.size());
    for (const auto& row : j) out.push_back(parse_vector(row, what));
    for (const auto& row : out)
        if (row.size() != out[0].size()) throw ValidationError(what + ": ragged rows");
    return out;
}

// Graph input, either {"vertices": k, "edges": [[a,b],...]} or
// {"adjacency": 0/1 symmetric matrix with zero diagonal}.
inline Graph parse_graph(const Json& j) {
    require_object(j, "graph");
    if (j.contains("adjacency")) {
        reject_unknown_keys(j, {"adjacency"}, "graph");
        auto m = parse_matrix(j["adjacency"], "graph.adjacency");
        const int k = static_cast<int>(m.size());
        if (static_cast<int>(m[0].size()) != k) throw ValidationError("graph.adjacency: matrix must be square");
        Graph g(k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                double v = m[a][b];
                if (v != 0.0 && v != 1.0) throw ValidationError("graph.adjacency: entries must be 0 or 1");
                if (a == b && v != 0.0) throw ValidationError("graph.adjacency: diagonal must be zero");
                if (v != m[b][a]) throw ValidationError("graph.adjacency: matrix must be symmetric");
                if (a < b && v == 1.0) g.add_edge(a, b);
            }
        return g;
    }
    reject_unknown_keys(j, {"vertices", "edges"}, "graph");
    auto k64 = parse_integer(require_field(j, "vertices", "graph"), "graph.vertices");
    if (k64 < 1 || k64 > 4096) throw ValidationError("graph.vertices: must lie in [1, 4096]");
    Graph g(static_cast<int>(k64));
    const Json& edges = require_field(j, "edges", "graph");
    if (!edges.is_array()) throw ValidationError("graph.edges: expected an array of [a, b] pairs");
    for (const auto& e : edges) {
        if (!e.is_array() || e.size() != 2) throw ValidationError("graph.edges: expected [a, b] pairs");
        auto a = parse_integer(e[0], "graph.edges");
        auto b = parse_integer(e[1], "graph.edges");
        if (a < 0 || b < 0 || a >= k64 || b >= k64) throw ValidationError("graph.edges: endpoint out of range");
        if (a == b) throw ValidationError("graph.edges: self-loops are not allowed");
        g.add_edge(static_cast<int>(a), static_cast<int>(b));
    }
    return g;
}

inline Distribution parse_distribution(const Json& j, const std::string& what) {
    return Distribution(parse_vector(j, what));
}

// Joint source input {"x_alphabet": kx, "y_alphabet": ky, "pxy": kx rows of ky}.
inline JointDistribution parse_joint(const Json& j) {
    reject_unknown_keys(j, {"x_alphabet", "y_alphabet", "pxy"}, "joint");
    auto kx = parse_integer(require_field(j, "x_alphabet", "joint"), "joint.x_alphabet");
    auto ky = parse_integer(require_field(j, "y_alphabet", "joint"), "joint.y_alphabet");
    if (kx < 1 || ky < 1) throw ValidationError("joint: alphabets must be positive");
    auto m = parse_matrix(require_field(j, "pxy", "joint"), "joint.pxy");
    if (static_cast<std::int64_t>(m.size()) != kx || static_cast<std::int64_t>(m[0].size()) != ky)
        throw ValidationError("joint.pxy: shape must be x_alphabet rows of y_alphabet entries");
    return JointDistribution(static_cast<int>(kx), static_cast<int>(ky), m);
}

// Channel input {"rows": one probability row per input letter}.
inline Channel parse_channel(const Json& j) {
    reject_unknown_keys(j, {"rows"}, "channel");
    return Channel(parse_matrix(require_field(j, "rows", "channel"), "channel.rows"));
}

namespace detail {

inline void dump_canonical_rec(const Json& j, std::string& out, int indent, int depth) {
    auto pad = [&](int d) { out.append(static_cast<std::size_t>(d) * indent, ' '); };
    switch (j.type()) {
        case Json::value_t::number_float: {
            double v = j.get<double>();
            std::string s = fmt12(v);
            if (std::isfinite(v))
                out += s;
            else
                out += "\"" + s + "\"";
            break;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                break;
            }
            bool scalars = true;
            for (const auto& v : j) scalars = scalars && !v.is_structured();
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (!scalars) {
                    out += "\n";
                    pad(depth + 1);
                } else if (i) {
                    out += " ";
                }
                dump_canonical_rec(j[i], out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
            }
            if (!scalars) {
                out += "\n";
                pad(depth);
            }
            out += "]";
            break;
        }
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                break;
            }
            out += "{";
            std::size_t i = 0;
            for (const auto& item : j.items()) {
                out += "\n";
                pad(depth + 1);
                out += Json(item.key()).dump();
                out += ": ";
                dump_canonical_rec(item.value(), out, indent, depth + 1);
                if (++i < j.size()) out += ",";
            }
            out += "\n";
            pad(depth);
            out += "}";
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace detail

// Deterministic writer: floats at 12 significant digits, non-finite floats
// as quoted strings, object keys in nlohmann's sorted order, stable layout.
inline std::string dump_canonical(const Json& j, int indent = 2) {
    std::string out;
    detail::dump_canonical_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

inline Json json_matrix(const std::vector<std::vector<double>>& m) {
    Json rows = Json::array();
    for (const auto& r : m) {
        Json row = Json::array();
        for (double v : r) row.push_back(v);
        rows.push_back(row);
    }
    return rows;
}

inline Json json_vector(const std::vector<double>& v) {
    Json row = Json::array();
    for (double x : v) row.push_back(x);
    return row;
}

}  // namespace zesi

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zesi/prob.hpp"
#include "zesi/util.hpp"

namespace zesi {

// Vertices of product graphs are mixed-radix encoded integers; digit i of the
// encoding is coordinate i of the underlying tuple (most significant first).
using VertexLabel = std::int64_t;

inline std::vector<int> decode_label(VertexLabel label, int base, int length) {
    std::vector<int> digits(length);
    for (int i = length - 1; i >= 0; --i) {
        digits[i] = static_cast<int>(label % base);
        label /= base;
    }
    return digits;
}

inline VertexLabel encode_label(const std::vector<int>& digits, int base) {
    VertexLabel label = 0;
    for (int d : digits) label = label * base + d;
    return label;
}

// Simple undirected graph, no self loops, adjacency kept as per-vertex bitsets.
class Graph {
public:
    explicit Graph(int n) : n_(n), words_((n + 63) / 64), bits_(static_cast<std::size_t>(n) * words_, 0) {
        if (n <= 0) throw ValidationError("graph: vertex count must be positive");
    }

    int vertex_count() const { return n_; }

    void add_edge(int u, int v) {
        check_vertex(u);
        check_vertex(v);
        if (u == v) throw ValidationError("graph: self loop at vertex " + std::to_string(u));
        set_bit(u, v);
        set_bit(v, u);
    }

    bool adjacent(int u, int v) const {
        return (bits_[static_cast<std::size_t>(u) * words_ + v / 64] >> (v % 64)) & 1u;
    }

    bool adjacent_or_equal(int u, int v) const { return u == v || adjacent(u, v); }

    int degree(int v) const {
        int d = 0;
        for (int w = 0; w < words_; ++w) d += __builtin_popcountll(bits_[static_cast<std::size_t>(v) * words_ + w]);
        return d;
    }

    int max_degree() const {
        int m = 0;
        for (int v = 0; v < n_; ++v) m = std::max(m, degree(v));
        return m;
    }

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (int v = 0; v < n_; ++v) e += degree(v);
        return e / 2;
    }

    // Edges with u < v, lexicographic. Canonical order for serialization.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> es;
        for (int u = 0; u < n_; ++u)
            for (int v = u + 1; v < n_; ++v)
                if (adjacent(u, v)) es.emplace_back(u, v);
        return es;
    }

    const std::uint64_t* row(int v) const { return bits_.data() + static_cast<std::size_t>(v) * words_; }
    int words() const { return words_; }

private:
    void check_vertex(int v) const {
        if (v < 0 || v >= n_) throw ValidationError("graph: vertex " + std::to_string(v) + " out of range");
    }
    void set_bit(int u, int v) { bits_[static_cast<std::size_t>(u) * words_ + v / 64] |= 1ull << (v % 64); }

    int n_, words_;
    std::vector<std::uint64_t> bits_;
};

inline Graph complete_graph(int n) {
    Graph g(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) g.add_edge(u, v);
    return g;
}

inline Graph cycle_graph(int n) {
    Graph g(n);
    for (int v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
    return g;
}

inline Graph path_graph(int n) {
    Graph g(n);
    for (int v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
    return g;
}

// Distinct letters are connected exactly when some y gives both positive
// probability. Zero is tested exactly; any positive mass counts.
inline Graph characteristic_graph(const JointDistribution& p) {
    Graph g(p.x_alphabet());
    for (int a = 0; a < p.x_alphabet(); ++a)
        for (int b = a + 1; b < p.x_alphabet(); ++b)
            for (int y = 0; y < p.y_alphabet(); ++y)
                if (p.p(a, y) > 0.0 && p.p(b, y) > 0.0) {
                    g.add_edge(a, b);
                    break;
                }
    return g;
}

// Characteristic graph of a channel: letters sharing a positive output.
inline Graph characteristic_graph(const Channel& w) {
    Graph g(w.inputs());
    for (int a = 0; a < w.inputs(); ++a)
        for (int b = a + 1; b < w.inputs(); ++b)
            for (int y = 0; y < w.outputs(); ++y)
                if (w(a, y) > 0.0 && w(b, y) > 0.0) {
                    g.add_edge(a, b);
                    break;
                }
    return g;
}

// Strong product: (u, v) ~ (u', v') when each coordinate is equal or adjacent
// and the pair differs. Vertex (u, v) encodes as u * h.n + v.
inline Graph strong_product(const Graph& g, const Graph& h) {
    std::uint64_t total = checked_mul(g.vertex_count(), h.vertex_count(), "strong_product");
    Graph out(static_cast<int>(total));
    for (int u1 = 0; u1 < g.vertex_count(); ++u1)
        for (int v1 = 0; v1 < h.vertex_count(); ++v1)
            for (int u2 = u1; u2 < g.vertex_count(); ++u2) {
                if (!g.adjacent_or_equal(u1, u2)) continue;
                for (int v2 = (u2 == u1 ? v1 + 1 : 0); v2 < h.vertex_count(); ++v2)
                    if (h.adjacent_or_equal(v1, v2))
                        out.add_edge(u1 * h.vertex_count() + v1, u2 * h.vertex_count() + v2);
            }
    return out;
}

inline Graph strong_power(const Graph& g, int n, std::uint64_t vertex_cap = 1000000) {
    if (n < 1) throw ValidationError("strong_power: exponent must be at least 1");
    std::uint64_t count = 1;
    for (int i = 0; i < n; ++i) count = checked_mul(count, g.vertex_count(), "strong_power");
    if (count > vertex_cap)
        throw CapExceeded("strong_power: " + std::to_string(count) + " vertices exceeds cap " + std::to_string(vertex_cap));
    Graph out = g;
    for (int i = 1; i < n; ++i) out = strong_product(out, g);
    return out;
}

// Adjacency in g^n between mixed-radix labels, without materializing the
// power graph: every coordinate equal or adjacent, labels distinct.
inline bool power_adjacent(const Graph& g, VertexLabel a, VertexLabel b, int n) {
    if (a == b) return false;
    int base = g.vertex_count();
    for (int i = 0; i < n; ++i) {
        int da = static_cast<int>(a % base), db = static_cast<int>(b % base);
        if (da != db && !g.adjacent(da, db)) return false;
        a /= base;
        b /= base;
    }
    return true;
}

// Same test on explicit coordinate sequences.
inline bool sequences_adjacent(const Graph& g, const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    bool equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            equal = false;
            if (!g.adjacent(a[i], b[i])) return false;
        }
    }
    return !equal;
}

struct InducedSubgraph {
    Graph graph;
    std::vector<int> original;  // subgraph vertex i came from original[i]
};

inline InducedSubgraph induced_subgraph(const Graph& g, const std::vector<int>& vertices) {
    for (int v : vertices)
        if (v < 0 || v >= g.vertex_count())
            throw ValidationError("induced_subgraph: vertex " + std::to_string(v) + " out of range");
    InducedSubgraph out{Graph(static_cast<int>(vertices.size())), vertices};
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j)
            if (g.adjacent(vertices[i], vertices[j])) out.graph.add_edge(static_cast<int>(i), static_cast<int>(j));
    return out;
}

// Vertices in descending degree order, ties broken by index.
inline std::vector<int> degree_order(const Graph& g) {
    std::vector<int> order(g.vertex_count());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.degree(a) > g.degree(b); });
    return order;
}

struct ColoringBound {
    int colors;
    std::vector<int> coloring;
};

// Greedy proper coloring; default order is descending degree, ties by index.
// Uses at most max_degree + 1 colors.
inline ColoringBound greedy_coloring_bound(const Graph& g, std::vector<int> order = {}) {
    if (order.empty()) order = degree_order(g);
    std::vector<int> color(g.vertex_count(), -1);
    int used = 0;
    std::vector<char> taken;
    for (int v : order) {
        taken.assign(used + 1, 0);
        for (int u = 0; u < g.vertex_count(); ++u)
            if (color[u] >= 0 && g.adjacent(v, u)) taken[color[u]] = 1;
        int c = 0;
        while (taken[c]) ++c;
        color[v] = c;
        used = std::max(used, c + 1);
    }
    return {used, std::move(color)};
}

// Greedy clique grown from each vertex in degree order; a valid lower bound
// for the chromatic number.
inline std::vector<int> greedy_clique_bound(const Graph& g) {
    std::vector<int> best;
    for (int start : degree_order(g)) {
        std::vector<int> clique{start};
        for (int v : degree_order(g)) {
            if (v == start) continue;
            bool ok = true;
            for (int u : clique)
                if (!g.adjacent(u, v)) {
                    ok = false;
                    break;
                }
            if (ok) clique.push_back(v);
        }
        if (clique.size() > best.size()) best = std::move(clique);
    }
    return best;
}

struct ExactColoring {
    int colors;
    std::vector<int> coloring;
};

// Exact chromatic number by branch and bound: greedy upper bound, greedy
// clique lower bound, vertices branched in descending degree order.
inline ExactColoring exact_coloring(const Graph& g, int vertex_cap = 64) {
    const int n = g.vertex_count();
    if (n > vertex_cap)
        throw CapExceeded("chromatic_number: " + std::to_string(n) + " vertices exceeds cap " + std::to_string(vertex_cap));
    auto greedy = greedy_coloring_bound(g);
    int best = greedy.colors;
    std::vector<int> best_col = greedy.coloring;
    int lb = static_cast<int>(greedy_clique_bound(g).size());
    if (lb >= best) return {best, std::move(best_col)};

    auto order = degree_order(g);
    std::vector<int> color(n, -1);
    bool optimal = false;
    auto rec = [&](auto&& self, int idx, int used) -> void {
        if (optimal || used >= best) return;
        if (idx == n) {
            best = used;
            best_col = color;
            optimal = best <= lb;
            return;
        }
        int v = order[idx];
        // Existing colors plus at most one fresh color; a fresh color only
        // when it still beats the incumbent.
        int limit = std::min(used, best - 2);
        for (int c = 0; c <= limit; ++c) {
            bool ok = true;
            for (int u = 0; u < n; ++u)
                if (color[u] == c && g.adjacent(v, u)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            color[v] = c;
            self(self, idx + 1, std::max(used, c + 1));
            color[v] = -1;
            if (optimal) return;
        }
    };
    rec(rec, 0, 0);
    return {best, std::move(best_col)};
}

inline int chromatic_number(const Graph& g, int vertex_cap = 64) { return exact_coloring(g, vertex_cap).colors; }

// Exact maximum independent set by branch and bound with the candidate-count
// pruning rule.
inline std::vector<int> maximum_independent_set(const Graph& g, int vertex_cap = 64) {
    const int n = g.vertex_count();
    if (n > vertex_cap)
        throw CapExceeded("independence_number: " + std::to_string(n) + " vertices exceeds cap " + std::to_string(vertex_cap));
    const int words = (n + 63) / 64;
    std::vector<std::uint64_t> nbr(static_cast<std::size_t>(n) * words, 0);
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u)
            if (g.adjacent(v, u)) nbr[static_cast<std::size_t>(v) * words + u / 64] |= 1ull << (u % 64);

    std::vector<std::uint64_t> cand(words, 0);
    for (int v = 0; v < n; ++v) cand[v / 64] |= 1ull << (v % 64);

    std::vector<int> best, cur;
    auto popcount = [&](const std::vector<std::uint64_t>& s) {
        int c = 0;
        for (auto w : s) c += __builtin_popcountll(w);
        return c;
    };
    auto rec = [&](auto&& self, std::vector<std::uint64_t>& c) -> void {
        int remaining = popcount(c);
        if (cur.size() + remaining <= best.size()) return;
        if (remaining == 0) {
            best = cur;
            return;
        }
        int v = -1;
        for (int w = 0; w < words && v < 0; ++w)
            if (c[w]) v = w * 64 + __builtin_ctzll(c[w]);
        // Branch 1: v in the set.
        std::vector<std::uint64_t> in(words);
        for (int w = 0; w < words; ++w) in[w] = c[w] & ~nbr[static_cast<std::size_t>(v) * words + w];
        in[v / 64] &= ~(1ull << (v % 64));
        cur.push_back(v);
        self(self, in);
        cur.pop_back();
        // Branch 2: v excluded.
        std::vector<std::uint64_t> out = c;
        out[v / 64] &= ~(1ull << (v % 64));
        self(self, out);
    };
    rec(rec, cand);
    std::sort(best.begin(), best.end());
    return best;
}

inline int independence_number(const Graph& g, int vertex_cap = 64) {
    return static_cast<int>(maximum_independent_set(g, vertex_cap).size());
}

// All x-sequences with positive per-coordinate joint mass against y, in
// lexicographic order.
inline std::vector<std::vector<int>> confusable_set(const JointDistribution& p, const std::vector<int>& y,
                                                    std::uint64_t cap = 1000000) {
    std::vector<std::vector<int>> supports(y.size());
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= p.y_alphabet())
            throw ValidationError("confusable_set: y letter " + std::to_string(y[i]) + " out of range at position " +
                                  std::to_string(i));
        for (int x = 0; x < p.x_alphabet(); ++x)
            if (p.p(x, y[i]) > 0.0) supports[i].push_back(x);
        total = checked_mul(total, std::max<std::uint64_t>(1, supports[i].size()), "confusable_set");
        if (supports[i].empty()) return {};
        if (total > cap)
            throw CapExceeded("confusable_set: " + std::to_string(total) + " sequences exceeds cap " + std::to_string(cap));
    }
    std::vector<std::vector<int>> out;
    std::vector<int> cur(y.size(), 0);
    auto rec = [&](auto&& self, std::size_t pos) -> void {
        if (pos == y.size()) {
            std::vector<int> seq(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) seq[i] = supports[i][cur[i]];
            out.push_back(std::move(seq));
            return;
        }
        for (cur[pos] = 0; cur[pos] < static_cast<int>(supports[pos].size()); ++cur[pos]) self(self, pos + 1);
        cur[pos] = 0;
    };
    rec(rec, 0);
    return out;
}

}  // namespace zesi

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zesi/graph.hpp"
#include "zesi/prob.hpp"
#include "zesi/types.hpp"
#include "zesi/util.hpp"

namespace zesi {

struct SchemeMessage {
    std::uint64_t type_index;
    std::uint64_t index;
};

// Per-type codeword map. Colored types store one color per lexicographic
// class rank; binned types derive bins from the codebook seed on demand.
struct TypeRecord {
    EmpiricalType type{std::vector<int>{1}};
    std::uint64_t class_size = 0;
    bool colored = false;
    bool exact_gamma = false;
    bool rate_tested = false;
    int chromatic_bound = 0;
    std::vector<std::uint32_t> coloring;
};

struct SchemeCodebook {
    int n = 0;
    int x_alphabet = 0;
    double rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t bins = 1;
    Graph g_x{1};
    std::vector<std::vector<char>> support;
    std::vector<TypeRecord> types;
    std::map<std::vector<int>, std::uint64_t> type_index;

    std::uint64_t bin_of(std::uint64_t type_idx, std::uint64_t rank) const {
        return prf64(prf64(seed ^ 0xB117ULL, type_idx), rank) % bins;
    }
};

// Builds the per-type codebook: each type class whose chromatic bound (exact
// when the class fits the exact cap, greedy otherwise) satisfies
// log2(bound) < nR stores a proper coloring of the induced power-graph
// subgraph; every other class is seeded-binned into ceil(2^{nR}) bins.
// Classes above coloring_cap skip the rate test and are binned.
inline SchemeCodebook build_scheme(const JointDistribution& p_xy, int n, double r, std::uint64_t seed,
                                   int threads = 1, std::uint64_t sequence_cap = 1 << 20,
                                   std::uint64_t coloring_cap = 4096, int exact_cap = 64) {
    if (n < 1) throw ValidationError("build_scheme: blocklength must be positive");
    if (!(r >= 0.0)) throw ValidationError("build_scheme: rate must be nonnegative");
    if (n * r > 62.0) throw ValidationError("build_scheme: 2^(nR) exceeds the message index range");
    SchemeCodebook cb;
    cb.n = n;
    cb.x_alphabet = p_xy.x_alphabet();
    cb.rate = r;
    cb.seed = seed;
    cb.bins = static_cast<std::uint64_t>(std::ceil(std::exp2(n * r)));
    cb.g_x = characteristic_graph(p_xy);
    cb.support.assign(cb.x_alphabet, std::vector<char>(p_xy.y_alphabet(), 0));
    for (int x = 0; x < cb.x_alphabet; ++x)
        for (int y = 0; y < p_xy.y_alphabet(); ++y) cb.support[x][y] = p_xy.p(x, y) > 0.0;

    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) total = checked_mul(total, cb.x_alphabet, "build_scheme");
    if (total > sequence_cap)
        throw CapExceeded("build_scheme: " + std::to_string(total) + " sequences exceeds cap " +
                          std::to_string(sequence_cap));

    auto all = enumerate_types(n, cb.x_alphabet);
    cb.types.resize(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) cb.type_index.emplace(all[i].counts, i);

    const double nr = n * r;
    parallel_ranges(all.size(), threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
        for (std::uint64_t ti = lo; ti < hi; ++ti) {
            TypeRecord rec;
            rec.type = all[ti];
            rec.class_size = rec.type.class_size();
            if (rec.class_size <= coloring_cap) {
                std::vector<std::vector<int>> seqs;
                seqs.reserve(rec.class_size);
                for_each_in_type_class(rec.type, [&](const std::vector<int>& s) { seqs.push_back(s); });
                Graph sub(static_cast<int>(seqs.size()));
                for (std::size_t i = 0; i < seqs.size(); ++i)
                    for (std::size_t j = i + 1; j < seqs.size(); ++j) {
                        bool equal = true, adj = true;
                        for (int c = 0; c < n && adj; ++c) {
                            if (seqs[i][c] != seqs[j][c]) {
                                equal = false;
                                adj = cb.g_x.adjacent(seqs[i][c], seqs[j][c]);
                            }
                        }
                        if (adj && !equal) sub.add_edge(static_cast<int>(i), static_cast<int>(j));
                    }
                rec.rate_tested = true;
                std::vector<std::uint32_t> colors;
                if (rec.class_size <= static_cast<std::uint64_t>(exact_cap)) {
                    auto ec = exact_coloring(sub, exact_cap);
                    rec.exact_gamma = true;
                    rec.chromatic_bound = ec.colors;
                    colors.assign(ec.coloring.begin(), ec.coloring.end());
                } else {
                    auto gc = greedy_coloring_bound(sub);
                    rec.chromatic_bound = gc.colors;
                    colors.assign(gc.coloring.begin(), gc.coloring.end());
                }
                if (std::log2(static_cast<double>(rec.chromatic_bound)) < nr) {
                    rec.colored = true;
                    rec.coloring = std::move(colors);
                }
            }
            cb.types[ti] = std::move(rec);
        }
    });
    return cb;
}

inline SchemeMessage encode(const SchemeCodebook& cb, const std::vector<int>& x_seq) {
    if (static_cast<int>(x_seq.size()) != cb.n) throw ValidationError("encode: sequence length mismatch");
    auto q = empirical_type(x_seq, cb.x_alphabet);
    auto it = cb.type_index.find(q.counts);
    if (it == cb.type_index.end()) throw ValidationError("encode: sequence type missing from codebook");
    SchemeMessage msg;
    msg.type_index = it->second;
    std::uint64_t rank = rank_in_type_class(x_seq, cb.x_alphabet);
    const TypeRecord& rec = cb.types[msg.type_index];
    msg.index = rec.colored ? rec.coloring[rank] : cb.bin_of(msg.type_index, rank);
    return msg;
}

// Colored types recover the unique class member that is jointly possible
// with y and carries the sent color; binned types take the bin member of
// minimum empirical conditional entropy given y, first in lexicographic
// order on ties. An empty bin decodes to the lexicographically first class
// member.
inline std::vector<int> decode(const SchemeCodebook& cb, const SchemeMessage& msg, const std::vector<int>& y_seq) {
    if (static_cast<int>(y_seq.size()) != cb.n) throw ValidationError("decode: sequence length mismatch");
    if (msg.type_index >= cb.types.size()) throw ValidationError("decode: type index out of range");
    const TypeRecord& rec = cb.types[msg.type_index];
    const int ky = static_cast<int>(cb.support.empty() ? 0 : cb.support[0].size());
    for (int v : y_seq)
        if (v < 0 || v >= ky) throw ValidationError("decode: side-information letter out of range");

    if (rec.colored) {
        std::vector<int> found;
        std::uint64_t rank = 0;
        for_each_in_type_class(rec.type, [&](const std::vector<int>& s) {
            if (rec.coloring[rank] == msg.index) {
                bool possible = true;
                for (int i = 0; i < cb.n && possible; ++i) possible = cb.support[s[i]][y_seq[i]];
                if (possible) {
                    if (!found.empty()) throw SolverError("decode: colored type matched twice, codebook corrupt");
                    found = s;
                }
            }
            ++rank;
        });
        if (found.empty()) throw SolverError("decode: colored type has no matching sequence, codebook corrupt");
        return found;
    }

    std::vector<int> best, first;
    double best_h = kInf;
    std::uint64_t rank = 0;
    for_each_in_type_class(rec.type, [&](const std::vector<int>& s) {
        if (rank == 0) first = s;
        if (cb.bin_of(msg.type_index, rank) == msg.index) {
            double h = empirical_conditional_entropy(s, y_seq);
            if (h < best_h - 1e-15) {
                best_h = h;
                best = s;
            }
        }
        ++rank;
    });
    return best.empty() ? first : best;
}

// Decoder restricted to an explicit candidate set; exposes the bin rule for
// crafted-tie tests.
inline std::vector<int> decode_within_bin(const std::vector<std::vector<int>>& bin, const std::vector<int>& y_seq) {
    if (bin.empty()) throw ValidationError("decode_within_bin: empty candidate set");
    std::vector<int> best;
    double best_h = kInf;
    for (const auto& s : bin) {
        double h = empirical_conditional_entropy(s, y_seq);
        if (best.empty() || h < best_h - 1e-15) {
            best_h = h;
            best = s;
        }
    }
    return best;
}

struct SimulationReport {
    int n = 0;
    double rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    double error_rate = 0.0;
    double empirical_exponent = kInf;
    std::uint64_t m1_size = 0;
    std::uint64_t type_count = 0;
    std::uint64_t type_overhead_bound = 0;
    std::uint64_t colored_types = 0;
    std::uint64_t binned_types = 0;
    std::uint64_t exact_gamma_types = 0;
    std::uint64_t colored_trials = 0;
    std::uint64_t colored_errors = 0;
    std::vector<std::uint64_t> per_type_trials;
    std::vector<std::uint64_t> per_type_errors;
};

// Monte Carlo run of the scheme over i.i.d. source pairs. Trials are
// counter-indexed so reports are reproducible for a given seed at any
// thread count.
inline SimulationReport simulate(const JointDistribution& p_xy, int n, double r, std::uint64_t trials,
                                 std::uint64_t seed, int threads = 1, std::uint64_t coloring_cap = 4096) {
    SchemeCodebook cb = build_scheme(p_xy, n, r, seed, threads, 1 << 20, coloring_cap);
    SimulationReport rep;
    rep.n = n;
    rep.rate = r;
    rep.seed = seed;
    rep.trials = trials;
    rep.m1_size = cb.bins;
    rep.type_count = cb.types.size();
    rep.type_overhead_bound = 1;
    for (int i = 0; i < cb.x_alphabet; ++i)
        rep.type_overhead_bound = checked_mul(rep.type_overhead_bound, n + 1, "simulate");
    for (const auto& rec : cb.types) {
        if (rec.colored)
            ++rep.colored_types;
        else
            ++rep.binned_types;
        if (rec.exact_gamma) ++rep.exact_gamma_types;
    }
    rep.per_type_trials.assign(cb.types.size(), 0);
    rep.per_type_errors.assign(cb.types.size(), 0);

    const int kx = p_xy.x_alphabet(), ky = p_xy.y_alphabet();
    std::vector<double> cdf;
    cdf.reserve(static_cast<std::size_t>(kx) * ky);
    double acc = 0.0;
    for (int x = 0; x < kx; ++x)
        for (int y = 0; y < ky; ++y) cdf.push_back(acc += p_xy.p(x, y));
    const std::uint64_t sim_seed = prf64(seed ^ 0x5117ULL, 1);

    struct Tally {
        std::uint64_t errors = 0, colored_trials = 0, colored_errors = 0;
        std::vector<std::uint64_t> per_type_trials, per_type_errors;
    };
    std::vector<Tally> tallies(std::max(1, threads));
    for (auto& t : tallies) {
        t.per_type_trials.assign(cb.types.size(), 0);
        t.per_type_errors.assign(cb.types.size(), 0);
    }
    parallel_ranges(trials, threads, [&](std::uint64_t lo, std::uint64_t hi, int tid) {
        Tally& tal = tallies[tid];
        std::vector<int> xs(n), ys(n);
        for (std::uint64_t t = lo; t < hi; ++t) {
            for (int i = 0; i < n; ++i) {
                double u = prf_unit(sim_seed, t * n + i);
                std::size_t cell = std::lower_bound(cdf.begin(), cdf.end(), u * cdf.back()) - cdf.begin();
                cell = std::min(cell, cdf.size() - 1);
                xs[i] = static_cast<int>(cell) / ky;
                ys[i] = static_cast<int>(cell) % ky;
            }
            SchemeMessage msg = encode(cb, xs);
            std::vector<int> xhat = decode(cb, msg, ys);
            bool err = xhat != xs;
            ++tal.per_type_trials[msg.type_index];
            if (cb.types[msg.type_index].colored) {
                ++tal.colored_trials;
                if (err) ++tal.colored_errors;
            }
            if (err) {
                ++tal.errors;
                ++tal.per_type_errors[msg.type_index];
            }
        }
    });
    for (const auto& t : tallies) {
        rep.errors += t.errors;
        rep.colored_trials += t.colored_trials;
        rep.colored_errors += t.colored_errors;
        for (std::size_t i = 0; i < cb.types.size(); ++i) {
            rep.per_type_trials[i] += t.per_type_trials[i];
            rep.per_type_errors[i] += t.per_type_errors[i];
        }
    }
    rep.error_rate = trials ? static_cast<double>(rep.errors) / static_cast<double>(trials) : 0.0;
    rep.empirical_exponent = rep.errors ? -std::log2(rep.error_rate) / n : kInf;
    return rep;
}

namespace detail {

inline void check_oracle_args(const Graph& g, const EmpiricalType& q, int n) {
    if (q.alphabet() != g.vertex_count()) throw ValidationError("oracle: type alphabet must match the graph");
    if (q.n != n) throw ValidationError("oracle: type counts must sum to the blocklength");
}

}  // namespace detail

// Exact maximum degree of the power-graph subgraph induced by one type
// class, by scanning all sequence pairs.
inline std::uint64_t oracle_degree(const Graph& g, const EmpiricalType& q, int n, std::uint64_t cap = 100000) {
    detail::check_oracle_args(g, q, n);
    if (q.class_size() > cap)
        throw CapExceeded("oracle_degree: " + std::to_string(q.class_size()) + " sequences exceeds cap " +
                          std::to_string(cap));
    std::vector<std::vector<int>> seqs;
    for_each_in_type_class(q, [&](const std::vector<int>& s) { seqs.push_back(s); });
    std::vector<std::uint64_t> deg(seqs.size(), 0);
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t j = i + 1; j < seqs.size(); ++j) {
            bool equal = true, adj = true;
            for (int c = 0; c < n && adj; ++c)
                if (seqs[i][c] != seqs[j][c]) {
                    equal = false;
                    adj = g.adjacent(seqs[i][c], seqs[j][c]);
                }
            if (adj && !equal) {
                ++deg[i];
                ++deg[j];
            }
        }
    return seqs.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

// Exact chromatic number of the induced type-class subgraph.
inline int oracle_chromatic_typeclass(const Graph& g, const EmpiricalType& q, int n, int exact_cap = 64) {
    detail::check_oracle_args(g, q, n);
    if (q.class_size() > static_cast<std::uint64_t>(exact_cap))
        throw CapExceeded("oracle_chromatic_typeclass: " + std::to_string(q.class_size()) +
                          " sequences exceeds cap " + std::to_string(exact_cap));
    std::vector<std::vector<int>> seqs;
    for_each_in_type_class(q, [&](const std::vector<int>& s) { seqs.push_back(s); });
    Graph sub(static_cast<int>(seqs.size()));
    for (std::size_t i = 0; i < seqs.size(); ++i)
        for (std::size_t j = i + 1; j < seqs.size(); ++j) {
            bool equal = true, adj = true;
            for (int c = 0; c < n && adj; ++c)
                if (seqs[i][c] != seqs[j][c]) {
                    equal = false;
                    adj = g.adjacent(seqs[i][c], seqs[j][c]);
                }
            if (adj && !equal) sub.add_edge(static_cast<int>(i), static_cast<int>(j));
        }
    return exact_coloring(sub, exact_cap).colors;
}

struct FiniteNChromatic {
    double value_bits = 0.0;
    EmpiricalType argmax{std::vector<int>{1}};
};

// max over length-n types of (1/n) log2 of the induced-subgraph chromatic
// number; the finite-n quantity whose limit is the zero-error rate.
inline FiniteNChromatic witsenhausen_finite_n(const Graph& g, int n, int exact_cap = 64) {
    FiniteNChromatic out;
    bool first = true;
    for (const auto& q : enumerate_types(n, g.vertex_count())) {
        int gamma = oracle_chromatic_typeclass(g, q, n, exact_cap);
        double v = std::log2(static_cast<double>(gamma)) / n;
        if (first || v > out.value_bits + 1e-15) {
            out.value_bits = v;
            out.argmax = q;
            first = false;
        }
    }
    return out;
}

}  // namespace zesi

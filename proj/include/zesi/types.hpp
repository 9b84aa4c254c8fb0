#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "zesi/prob.hpp"
#include "zesi/util.hpp"

namespace zesi {

// Integer count vector with denominator n. Counts are exact; the induced
// distribution is counts / n.
struct EmpiricalType {
    std::vector<int> counts;
    int n;

    explicit EmpiricalType(std::vector<int> c) : counts(std::move(c)), n(0) {
        if (counts.empty()) throw ValidationError("empirical type: empty alphabet");
        for (std::size_t a = 0; a < counts.size(); ++a) {
            if (counts[a] < 0)
                throw ValidationError("empirical type: negative count at letter " + std::to_string(a));
            n += counts[a];
        }
        if (n <= 0) throw ValidationError("empirical type: denominator must be positive");
    }

    int alphabet() const { return static_cast<int>(counts.size()); }

    Distribution distribution() const {
        std::vector<double> p(counts.size());
        for (std::size_t a = 0; a < counts.size(); ++a) p[a] = static_cast<double>(counts[a]) / n;
        return Distribution(p);
    }

    std::uint64_t class_size() const { return multinomial(counts); }

    bool operator==(const EmpiricalType& o) const { return counts == o.counts; }
};

inline EmpiricalType empirical_type(const std::vector<int>& seq, int alphabet) {
    std::vector<int> counts(alphabet, 0);
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (seq[i] < 0 || seq[i] >= alphabet)
            throw ValidationError("empirical type: letter " + std::to_string(seq[i]) + " at position " +
                                  std::to_string(i) + " outside alphabet of size " + std::to_string(alphabet));
        ++counts[seq[i]];
    }
    return EmpiricalType(std::move(counts));
}

// All types of length-n sequences over k letters, ascending lexicographic
// count vectors. There are C(n+k-1, k-1) of them.
inline std::vector<EmpiricalType> enumerate_types(int n, int k, std::uint64_t cap = 10000000) {
    if (n <= 0 || k <= 0) throw ValidationError("enumerate_types: n and alphabet must be positive");
    std::uint64_t total = composition_count(n, k);
    if (total > cap)
        throw CapExceeded("enumerate_types: " + std::to_string(total) + " types exceeds cap " + std::to_string(cap));
    std::vector<EmpiricalType> out;
    out.reserve(total);
    for_each_composition(n, k, [&](const std::vector<int>& c) { out.emplace_back(c); });
    return out;
}

// Streams the sequences of a type class in lexicographic order. The first
// sequence is the sorted one; successors come from next_permutation, which
// yields each distinct multiset permutation exactly once.
class TypeClassStream {
public:
    explicit TypeClassStream(const EmpiricalType& q, std::uint64_t cap = 50000000) : done_(false) {
        if (q.class_size() > cap)
            throw CapExceeded("type_class: " + std::to_string(q.class_size()) + " sequences exceeds cap " +
                              std::to_string(cap));
        for (int a = 0; a < q.alphabet(); ++a) seq_.insert(seq_.end(), q.counts[a], a);
    }

    const std::vector<int>* next() {
        if (done_) return nullptr;
        current_ = seq_;
        done_ = !std::next_permutation(seq_.begin(), seq_.end());
        return &current_;
    }

private:
    std::vector<int> seq_, current_;
    bool done_;
};

template <typename Fn>
void for_each_in_type_class(const EmpiricalType& q, Fn&& fn, std::uint64_t cap = 50000000) {
    TypeClassStream stream(q, cap);
    while (const auto* seq = stream.next()) fn(*seq);
}

// Lexicographic rank of a sequence within its type class.
inline std::uint64_t rank_in_type_class(const std::vector<int>& seq, int alphabet) {
    std::vector<int> counts(alphabet, 0);
    for (int s : seq) ++counts[s];
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (int a = 0; a < seq[i]; ++a) {
            if (counts[a] == 0) continue;
            --counts[a];
            rank += multinomial(counts);
            ++counts[a];
        }
        --counts[seq[i]];
    }
    return rank;
}

inline std::vector<int> unrank_in_type_class(const EmpiricalType& q, std::uint64_t rank) {
    std::vector<int> counts = q.counts;
    std::vector<int> seq(q.n);
    for (int i = 0; i < q.n; ++i) {
        for (int a = 0; a < q.alphabet(); ++a) {
            if (counts[a] == 0) continue;
            --counts[a];
            std::uint64_t block = multinomial(counts);
            if (rank < block) {
                seq[i] = a;
                break;
            }
            rank -= block;
            ++counts[a];
        }
    }
    return seq;
}

// Conditional empirical entropy H(x|y) in bits, from the joint empirical
// distribution of the paired sequences.
inline double empirical_conditional_entropy(const std::vector<int>& x, const std::vector<int>& y) {
    if (x.size() != y.size())
        throw ValidationError("empirical entropy: sequence lengths " + std::to_string(x.size()) + " and " +
                              std::to_string(y.size()) + " differ");
    if (x.empty()) throw ValidationError("empirical entropy: empty sequences");
    int kx = 1 + *std::max_element(x.begin(), x.end());
    int ky = 1 + *std::max_element(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < 0 || y[i] < 0) throw ValidationError("empirical entropy: negative letter");
    std::vector<int> joint(static_cast<std::size_t>(kx) * ky, 0), ycount(ky, 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        ++joint[static_cast<std::size_t>(x[i]) * ky + y[i]];
        ++ycount[y[i]];
    }
    const double n = static_cast<double>(x.size());
    double h = 0.0;
    for (int b = 0; b < ky; ++b) {
        if (ycount[b] == 0) continue;
        for (int a = 0; a < kx; ++a) {
            int c = joint[static_cast<std::size_t>(a) * ky + b];
            if (c > 0) h -= (c / n) * std::log2(static_cast<double>(c) / ycount[b]);
        }
    }
    return std::max(0.0, h);
}

// Conditional types compatible with blocklength n at input type q: row a is a
// composition of q.counts[a] over the alphabet, so that q x V is a joint type.
// The visitor receives the integer count matrix.
template <typename Fn>
void for_each_conditional_type(const EmpiricalType& q, Fn&& fn, std::uint64_t cap = 10000000) {
    const int k = q.alphabet();
    std::uint64_t total = 1;
    for (int a = 0; a < k; ++a)
        if (q.counts[a] > 0) total = checked_mul(total, composition_count(q.counts[a], k), "conditional_types");
    if (total > cap)
        throw CapExceeded("conditional_types: " + std::to_string(total) + " channels exceeds cap " +
                          std::to_string(cap));
    std::vector<std::vector<int>> m(k, std::vector<int>(k, 0));
    auto rec = [&](auto&& self, int a) -> void {
        if (a == k) {
            fn(static_cast<const std::vector<std::vector<int>>&>(m));
            return;
        }
        if (q.counts[a] == 0) {
            std::fill(m[a].begin(), m[a].end(), 0);
            self(self, a + 1);
            return;
        }
        for_each_composition(q.counts[a], k, [&](const std::vector<int>& row) {
            m[a] = row;
            self(self, a + 1);
        });
    };
    rec(rec, 0);
}

// Rows normalized by their count; zero-count rows become point mass on self.
inline Channel channel_from_counts(const std::vector<std::vector<int>>& m, const std::vector<int>& row_totals) {
    const int k = static_cast<int>(m.size());
    std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a) {
        if (row_totals[a] == 0) {
            rows[a][a] = 1.0;
        } else {
            for (int b = 0; b < k; ++b) rows[a][b] = static_cast<double>(m[a][b]) / row_totals[a];
        }
    }
    return Channel(rows);
}

inline std::vector<Channel> conditional_types(const EmpiricalType& q, std::uint64_t cap = 10000000) {
    std::vector<Channel> out;
    for_each_conditional_type(
        q, [&](const std::vector<std::vector<int>>& m) { out.push_back(channel_from_counts(m, q.counts)); }, cap);
    return out;
}

// |S(x|y)|: sequences of the same type as x whose conditional empirical
// entropy given y does not exceed that of x.
inline std::uint64_t count_S(const std::vector<int>& x, const std::vector<int>& y, std::uint64_t cap = 50000000) {
    if (x.size() != y.size()) throw ValidationError("count_S: sequence lengths differ");
    int kx = 1 + *std::max_element(x.begin(), x.end());
    EmpiricalType q = empirical_type(x, kx);
    const double h0 = empirical_conditional_entropy(x, y);
    std::uint64_t count = 0;
    for_each_in_type_class(
        q,
        [&](const std::vector<int>& xt) {
            if (empirical_conditional_entropy(xt, y) <= h0 + 1e-12) ++count;
        },
        cap);
    return count;
}

}  // namespace zesi

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace zesi {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Input rejected by schema or value validation. CLI exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach its tolerance. CLI exit code 3.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A configured cap on problem size was exceeded. CLI exit code 4.
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= xlog2x(v);
    return h;
}

// Locale-independent formatting at 12 significant digits; infinities print as
// "inf"/"-inf" because JSON and CSV cells carry them as literals.
inline std::string fmt12(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based PRF: output depends only on (seed, counter).
inline std::uint64_t prf64(std::uint64_t seed, std::uint64_t counter) {
    return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) ^ splitmix64(counter));
}

inline double prf_unit(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(prf64(seed, counter) >> 11) * 0x1.0p-53;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw CapExceeded(std::string(what) + ": count overflows 64 bits");
    return r;
}

// C(n, k) exactly in 64 bits; throws CapExceeded on overflow.
// After step i the accumulator equals C(n-k+i, i), so every division is exact.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = checked_mul(r, n - k + i, "binomial");
        r /= i;
    }
    return r;
}

// Number of count vectors of length parts summing to total.
inline std::uint64_t composition_count(int total, int parts) {
    return binomial(static_cast<std::uint64_t>(total) + parts - 1, parts - 1);
}

// n! / prod(counts[i]!) exactly; throws CapExceeded on overflow.
inline std::uint64_t multinomial(const std::vector<int>& counts) {
    std::uint64_t r = 1;
    std::uint64_t n = 0;
    for (int c : counts) {
        for (int i = 1; i <= c; ++i) {
            ++n;
            // r *= n / i, exact at every step.
            r = checked_mul(r, n, "multinomial");
            r /= i;
        }
    }
    return r;
}

// Visits every count vector c >= 0 with sum(c) == total, length parts, in
// ascending lexicographic order. fn may inspect but must not keep the vector.
template <typename Fn>
void for_each_composition(int total, int parts, Fn&& fn) {
    std::vector<int> c(parts, 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == parts - 1) {
            c[pos] = left;
            fn(static_cast<const std::vector<int>&>(c));
            return;
        }
        for (int v = 0; v <= left; ++v) {
            c[pos] = v;
            self(self, pos + 1, left - v);
        }
        c[pos] = 0;
    };
    if (parts <= 0) throw ValidationError("composition: parts must be positive");
    rec(rec, 0, total);
}

// Composition at a given ascending-lexicographic index, without enumeration.
inline std::vector<int> unrank_composition(std::uint64_t idx, int total, int parts) {
    std::vector<int> c(parts, 0);
    int left = total;
    for (int pos = 0; pos + 1 < parts; ++pos) {
        for (int v = 0; v <= left; ++v) {
            std::uint64_t block = composition_count(left - v, parts - pos - 1);
            if (idx < block) {
                c[pos] = v;
                left -= v;
                break;
            }
            idx -= block;
        }
    }
    c[parts - 1] = left;
    return c;
}

struct NelderMeadOptions {
    int max_evals = 200;
    double init_step = 0.5;
};

// Derivative-free minimization in unconstrained coordinates. Every evaluated
// point is passed to visit before fn's value is used, so callers can harvest
// the trajectory.
inline std::vector<double> nelder_mead(std::vector<double> x0,
                                       const std::function<double(const std::vector<double>&)>& fn,
                                       const NelderMeadOptions& opt = {},
                                       const std::function<void(const std::vector<double>&)>& visit = nullptr) {
    const int d = static_cast<int>(x0.size());
    if (d == 0) return x0;
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        if (visit) visit(x);
        return fn(x);
    };
    std::vector<std::vector<double>> pts(d + 1, x0);
    std::vector<double> fv(d + 1);
    for (int i = 0; i < d; ++i) pts[i + 1][i] += opt.init_step;
    for (int i = 0; i <= d; ++i) fv[i] = eval(pts[i]);
    while (evals < opt.max_evals) {
        std::vector<int> ord(d + 1);
        for (int i = 0; i <= d; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        int best = ord[0], worst = ord[d], second = ord[d - 1];
        std::vector<double> centroid(d, 0.0);
        for (int i = 0; i <= d; ++i)
            if (i != worst)
                for (int j = 0; j < d; ++j) centroid[j] += pts[i][j] / d;
        auto affine = [&](double t) {
            std::vector<double> x(d);
            for (int j = 0; j < d; ++j) x[j] = centroid[j] + t * (centroid[j] - pts[worst][j]);
            return x;
        };
        auto xr = affine(1.0);
        double fr = eval(xr);
        if (fr < fv[best]) {
            auto xe = affine(2.0);
            double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fv[worst] = fe;
            } else {
                pts[worst] = xr;
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            auto xc = affine(fr < fv[worst] ? 0.5 : -0.5);
            double fc = eval(xc);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (int i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (int j = 0; j < d; ++j) pts[i][j] = 0.5 * (pts[i][j] + pts[best][j]);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= d; ++i)
        if (fv[i] < fv[best]) best = i;
    return pts[best];
}

// Runs fn(begin, end) over [0, n) split across up to `threads` workers.
// Workers receive disjoint contiguous ranges; results must be merged by the
// caller in a deterministic order.
template <typename Fn>
void parallel_ranges(std::uint64_t n, int threads, Fn&& fn) {
    threads = std::max(1, threads);
    if (threads == 1 || n < 2) {
        fn(std::uint64_t{0}, n, 0);
        return;
    }
    std::uint64_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        std::uint64_t b = std::min<std::uint64_t>(n, t * chunk);
        std::uint64_t e = std::min<std::uint64_t>(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e, t] { fn(b, e, t); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace zesi

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "zesi/exponents.hpp"
#include "zesi/kappa.hpp"
#include "zesi/prob.hpp"
#include "zesi/util.hpp"

namespace zesi {

namespace detail {

// Pieces of the Wyner-Ziv per-distribution objective shared by both branch
// rules. Zero-mass source letters get a uniform test-channel row.
struct EtaParts {
    double divergence;
    double mean_distortion;
    double i_xu, i_yu;
    std::vector<double> q_x;
    std::vector<std::vector<double>> q_u_given_x;
};

inline EtaParts eta_parts(const JointDistribution& p_xy, const Joint3& q_xyu,
                          const std::vector<std::vector<int>>& phi, const DistortionMeasure& d) {
    const int kx = p_xy.x_alphabet(), ky = p_xy.y_alphabet(), ku = q_xyu.u_alphabet();
    if (q_xyu.x_alphabet() != kx || q_xyu.y_alphabet() != ky)
        throw ValidationError("wz_eta: joint over X x Y x U does not match the source alphabets");
    if (static_cast<int>(phi.size()) != ky)
        throw ValidationError("wz_eta: reproduction table must have one row per side-information letter");
    if (d.x_alphabet() != kx) throw ValidationError("wz_eta: distortion rows must match the source alphabet");
    for (int y = 0; y < ky; ++y) {
        if (static_cast<int>(phi[y].size()) != ku)
            throw ValidationError("wz_eta: reproduction row " + std::to_string(y) + " must have one entry per U letter");
        for (int xh : phi[y])
            if (xh < 0 || xh >= d.xhat_alphabet())
                throw ValidationError("wz_eta: reproduction letter " + std::to_string(xh) + " out of range");
    }

    EtaParts parts;
    auto xu = q_xyu.xu_marginal();
    parts.q_x.assign(kx, 0.0);
    for (int x = 0; x < kx; ++x) parts.q_x[x] = std::accumulate(xu[x].begin(), xu[x].end(), 0.0);
    parts.q_u_given_x.assign(kx, std::vector<double>(ku, 1.0 / ku));
    for (int x = 0; x < kx; ++x)
        if (parts.q_x[x] > 0.0)
            for (int u = 0; u < ku; ++u) parts.q_u_given_x[x][u] = xu[x][u] / parts.q_x[x];

    parts.divergence = 0.0;
    parts.mean_distortion = 0.0;
    for (int x = 0; x < kx; ++x)
        for (int y = 0; y < ky; ++y)
            for (int u = 0; u < ku; ++u) {
                double q = q_xyu.p(x, y, u);
                if (q <= 0.0) continue;
                double ref = p_xy.p(x, y) * parts.q_u_given_x[x][u];
                if (ref == 0.0) {
                    parts.divergence = kInf;
                } else if (std::isfinite(parts.divergence)) {
                    parts.divergence += q * std::log2(q / ref);
                }
                parts.mean_distortion += q * d(x, phi[y][u]);
            }
    if (std::isfinite(parts.divergence)) parts.divergence = std::max(0.0, parts.divergence);
    parts.i_xu = mutual_information_pair(xu);
    parts.i_yu = mutual_information_pair(q_xyu.yu_marginal());
    return parts;
}

inline double eta_value(double r, const EtaParts& parts, double delta, bool rate_condition) {
    if (!std::isfinite(parts.divergence)) return kInf;
    if (parts.mean_distortion >= delta) return parts.divergence;
    if (!rate_condition) return kInf;
    return parts.divergence + std::max(0.0, r - parts.i_xu + parts.i_yu);
}

}  // namespace detail

// eta(R, P_XY, Q_XYU, phi): divergence alone when the reproduction misses the
// distortion target under Q; divergence plus the binning penalty
// [R - I(X;U) + I(Y;U)]^+ when the target is met and kappa2 >= R; +inf
// otherwise.
inline double wz_eta(double r, const JointDistribution& p_xy, const Joint3& q_xyu,
                     const std::vector<std::vector<int>>& phi, double delta, const DistortionMeasure& d,
                     double kappa_tol = 1e-9) {
    if (!(delta >= 0.0)) throw ValidationError("wz_eta: distortion level must be nonnegative");
    auto parts = detail::eta_parts(p_xy, q_xyu, phi, d);
    if (!std::isfinite(parts.divergence) || parts.mean_distortion >= delta)
        return detail::eta_value(r, parts, delta, true);
    double k2 = kappa2(p_xy, Distribution(parts.q_x), Channel(parts.q_u_given_x), kappa_tol);
    return detail::eta_value(r, parts, delta, k2 >= r);
}

// Prior-work variant switching to the third branch when I(X;U) < R instead
// of kappa2 < R; never exceeds wz_eta on the same input.
inline double wz_eta_D(double r, const JointDistribution& p_xy, const Joint3& q_xyu,
                       const std::vector<std::vector<int>>& phi, double delta, const DistortionMeasure& d) {
    if (!(delta >= 0.0)) throw ValidationError("wz_eta_D: distortion level must be nonnegative");
    auto parts = detail::eta_parts(p_xy, q_xyu, phi, d);
    return detail::eta_value(r, parts, delta, parts.i_xu >= r);
}

// Controls for the nested Wyner-Ziv program. All five levels run over joint
// types of X x Y x U with the given denominator; u_alphabet 0 picks |X| + 1.
struct WzGrid {
    int type_denominator = 8;
    int u_alphabet = 0;
    std::uint64_t max_phi = 4096;
    std::uint64_t max_tensors = 5000000;
    int threads = 1;
    double kappa_tol = 1e-9;
};

// inf over Q_X, sup over Q_{U|X}, inf over Q_Y, sup over reproduction maps,
// inf over joint types with the fixed Q_XU and Q_Y margins, of eta. Exact on
// the type lattice: every level enumerates exhaustively, so the result is a
// lattice-resolution-dependent estimate of the variational formula.
inline ExponentValue wz_exponent(double r, double delta, const JointDistribution& p_xy, const DistortionMeasure& d,
                                 const WzGrid& grid = {}) {
    if (!(r >= 0.0)) throw ValidationError("wz_exponent: rate must be nonnegative");
    if (!(delta >= 0.0)) throw ValidationError("wz_exponent: distortion level must be nonnegative");
    const int kx = p_xy.x_alphabet(), ky = p_xy.y_alphabet();
    const int ku = grid.u_alphabet > 0 ? grid.u_alphabet : kx + 1;
    const int kh = d.xhat_alphabet();
    const int n = grid.type_denominator;
    if (d.x_alphabet() != kx) throw ValidationError("wz_exponent: distortion rows must match the source alphabet");
    if (n < 1 || n > 255) throw ValidationError("wz_exponent: type denominator must lie in [1, 255]");

    const int slots = ky * ku;
    std::uint64_t nphi = 1;
    for (int i = 0; i < slots; ++i) {
        nphi = checked_mul(nphi, static_cast<std::uint64_t>(kh), "wz_exponent: reproduction maps");
        if (nphi > grid.max_phi)
            throw CapExceeded("wz_exponent: " + std::to_string(kh) + "^" + std::to_string(slots) +
                              " reproduction maps exceed cap " + std::to_string(grid.max_phi));
    }
    const int cells = kx * ky * ku;
    std::uint64_t n_tensors = composition_count(n, cells);
    if (n_tensors > grid.max_tensors)
        throw CapExceeded("wz_exponent: " + std::to_string(n_tensors) + " joint types exceed cap " +
                          std::to_string(grid.max_tensors));

    std::vector<std::vector<std::uint8_t>> phi_tab(nphi, std::vector<std::uint8_t>(slots));
    for (std::uint64_t p = 0; p < nphi; ++p) {
        std::uint64_t idx = p;
        for (int s = 0; s < slots; ++s) {
            phi_tab[p][s] = static_cast<std::uint8_t>(idx % kh);
            idx /= kh;
        }
    }

    // Joint types grouped by their (Q_XU, Q_Y) margins; the inner inf runs
    // within one group. part1 is the divergence up to the group-constant
    // H(U|X) term, +inf when the type leaves the support of P.
    struct Bucket {
        std::vector<int> c_xu, c_y;
        std::vector<std::uint8_t> cell_counts;
        std::vector<double> part1, h_yu;
    };
    std::vector<Bucket> buckets;
    std::map<std::vector<int>, std::size_t> bucket_index;

    const double inv_n = 1.0 / n;
    std::vector<double> log2p(static_cast<std::size_t>(kx) * ky, -kInf);
    for (int x = 0; x < kx; ++x)
        for (int y = 0; y < ky; ++y)
            if (p_xy.p(x, y) > 0.0) log2p[x * ky + y] = std::log2(p_xy.p(x, y));

    std::vector<int> key(kx * ku + ky);
    std::vector<double> yu(static_cast<std::size_t>(ky) * ku);
    for_each_composition(n, cells, [&](const std::vector<int>& m) {
        std::fill(key.begin(), key.end(), 0);
        std::fill(yu.begin(), yu.end(), 0.0);
        double part1 = 0.0;
        for (int x = 0; x < kx; ++x)
            for (int y = 0; y < ky; ++y)
                for (int u = 0; u < ku; ++u) {
                    int cnt = m[(x * ky + y) * ku + u];
                    if (cnt == 0) continue;
                    key[x * ku + u] += cnt;
                    key[kx * ku + y] += cnt;
                    yu[y * ku + u] += cnt * inv_n;
                    double q = cnt * inv_n;
                    part1 += q * (std::log2(q) - log2p[x * ky + y]);
                }
        double h_yu = 0.0;
        for (double v : yu) h_yu -= xlog2x(v);
        auto [it, inserted] = bucket_index.try_emplace(key, buckets.size());
        if (inserted) {
            buckets.emplace_back();
            buckets.back().c_xu.assign(key.begin(), key.begin() + kx * ku);
            buckets.back().c_y.assign(key.begin() + kx * ku, key.end());
        }
        Bucket& b = buckets[it->second];
        for (int i = 0; i < cells; ++i) b.cell_counts.push_back(static_cast<std::uint8_t>(m[i]));
        b.part1.push_back(std::isfinite(part1) ? part1 : kInf);
        b.h_yu.push_back(h_yu);
    });

    // Group-level constants; kappa2 depends only on Q_XU and is shared
    // across side-information margins.
    std::map<std::vector<int>, double> kappa2_by_xu;
    struct BucketConsts {
        double h_u_given_x, i_xu, h_y, h_u, k2;
    };
    std::vector<BucketConsts> consts(buckets.size());
    for (std::size_t bi = 0; bi < buckets.size(); ++bi) {
        const Bucket& b = buckets[bi];
        BucketConsts c;
        std::vector<std::vector<double>> xu(kx, std::vector<double>(ku, 0.0));
        std::vector<double> q_x(kx, 0.0), q_u(ku, 0.0), q_y(ky, 0.0);
        for (int x = 0; x < kx; ++x)
            for (int u = 0; u < ku; ++u) {
                xu[x][u] = b.c_xu[x * ku + u] * inv_n;
                q_x[x] += xu[x][u];
                q_u[u] += xu[x][u];
            }
        for (int y = 0; y < ky; ++y) q_y[y] = b.c_y[y] * inv_n;
        c.i_xu = mutual_information_pair(xu);
        c.h_y = entropy_bits(q_y);
        c.h_u = entropy_bits(q_u);
        c.h_u_given_x = 0.0;
        std::vector<std::vector<double>> v(kx, std::vector<double>(ku, 1.0 / ku));
        for (int x = 0; x < kx; ++x)
            if (q_x[x] > 0.0) {
                double h = 0.0;
                for (int u = 0; u < ku; ++u) {
                    v[x][u] = xu[x][u] / q_x[x];
                    h -= xlog2x(v[x][u]);
                }
                c.h_u_given_x += q_x[x] * h;
            }
        auto it = kappa2_by_xu.find(b.c_xu);
        if (it == kappa2_by_xu.end()) {
            double s = std::accumulate(q_x.begin(), q_x.end(), 0.0);
            for (double& t : q_x) t /= s;
            double k2 = kappa2(p_xy, Distribution(q_x), Channel(v), grid.kappa_tol);
            it = kappa2_by_xu.emplace(b.c_xu, k2).first;
        }
        c.k2 = it->second;
        consts[bi] = c;
    }

    // Per-bucket value: sup over reproduction maps of the inner inf.
    std::vector<double> bucket_value(buckets.size(), kInf);
    const double delta_raw = delta * n;
    parallel_ranges(buckets.size(), grid.threads, [&](std::uint64_t lo, std::uint64_t hi, int) {
        std::vector<double> g(nphi);
        std::vector<double> a(static_cast<std::size_t>(slots) * kh);
        for (std::uint64_t bi = lo; bi < hi; ++bi) {
            const Bucket& b = buckets[bi];
            const BucketConsts& c = consts[bi];
            const bool rate_ok = c.k2 >= r;
            const double b2_base = r - c.i_xu + c.h_y + c.h_u;
            std::fill(g.begin(), g.end(), kInf);
            const std::size_t count = b.part1.size();
            for (std::size_t t = 0; t < count; ++t) {
                if (!std::isfinite(b.part1[t])) continue;
                const std::uint8_t* cnt = b.cell_counts.data() + t * cells;
                double div = b.part1[t] + c.h_u_given_x;
                double b2 = std::max(0.0, b2_base - b.h_yu[t]);
                std::fill(a.begin(), a.end(), 0.0);
                for (int x = 0; x < kx; ++x)
                    for (int y = 0; y < ky; ++y)
                        for (int u = 0; u < ku; ++u) {
                            int cv = cnt[(x * ky + y) * ku + u];
                            if (cv == 0) continue;
                            for (int xh = 0; xh < kh; ++xh) a[(y * ku + u) * kh + xh] += cv * d(x, xh);
                        }
                for (std::uint64_t p = 0; p < nphi; ++p) {
                    double ed_raw = 0.0;
                    const std::uint8_t* tab = phi_tab[p].data();
                    for (int s = 0; s < slots; ++s) ed_raw += a[s * kh + tab[s]];
                    double v;
                    if (ed_raw >= delta_raw)
                        v = div;
                    else if (rate_ok)
                        v = div + b2;
                    else
                        continue;
                    if (v < g[p]) g[p] = v;
                }
            }
            bucket_value[bi] = *std::max_element(g.begin(), g.end());
        }
    });

    // Assembly: inf over Q_Y, sup over Q_XU extending each Q_X, inf over Q_X.
    std::map<std::vector<int>, double> over_y;
    for (std::size_t bi = 0; bi < buckets.size(); ++bi) {
        auto [it, inserted] = over_y.try_emplace(buckets[bi].c_xu, bucket_value[bi]);
        if (!inserted) it->second = std::min(it->second, bucket_value[bi]);
    }
    std::map<std::vector<int>, double> over_xu;
    for (const auto& [c_xu, val] : over_y) {
        std::vector<int> c_x(kx, 0);
        for (int x = 0; x < kx; ++x)
            for (int u = 0; u < ku; ++u) c_x[x] += c_xu[x * ku + u];
        auto [it, inserted] = over_xu.try_emplace(c_x, val);
        if (!inserted) it->second = std::max(it->second, val);
    }
    ExponentValue out;
    out.value = kInf;
    std::vector<int> best_cx;
    for (const auto& [c_x, val] : over_xu)
        if (val < out.value) {
            out.value = val;
            best_cx = c_x;
        }
    out.certificate = "type-lattice denominator " + std::to_string(n) + ", u-alphabet " + std::to_string(ku);
    if (!best_cx.empty() && std::isfinite(out.value)) {
        out.argmin_q.resize(kx);
        for (int x = 0; x < kx; ++x) out.argmin_q[x] = best_cx[x] * inv_n;
    } else {
        out.value = kInf;
        out.argmin_q.clear();
    }
    return out;
}

namespace detail {

// Rate and mean distortion of the slope-s point of one rate-distortion
// trade-off, by alternating minimization. Slope is in bits per unit
// distortion; a negative slope selects the minimal-information point among
// kernels restricted to each letter's distortion-minimizing reproductions.
struct RdPoint {
    double rate, distortion;
};

inline RdPoint rd_slope_point(const std::vector<double>& p, const std::vector<std::vector<double>>& d, double slope,
                              double tol = 1e-13, int max_iterations = 20000) {
    const int nx = static_cast<int>(p.size());
    const int kh = static_cast<int>(d[0].size());
    const double ln2 = std::log(2.0);
    std::vector<std::vector<char>> allowed(nx, std::vector<char>(kh, 1));
    if (slope < 0.0) {
        for (int i = 0; i < nx; ++i) {
            double mn = *std::min_element(d[i].begin(), d[i].end());
            for (int xh = 0; xh < kh; ++xh) allowed[i][xh] = d[i][xh] <= mn + 1e-12;
        }
    }
    std::vector<double> m(kh, 1.0 / kh), next(kh);
    std::vector<std::vector<double>> w(nx, std::vector<double>(kh, 0.0));
    for (int it = 0; it < max_iterations; ++it) {
        for (int i = 0; i < nx; ++i) {
            double mx = -kInf;
            for (int xh = 0; xh < kh; ++xh) {
                if (!allowed[i][xh] || m[xh] <= 0.0) {
                    w[i][xh] = -kInf;
                    continue;
                }
                w[i][xh] = std::log(m[xh]) - (slope > 0.0 ? slope * ln2 * d[i][xh] : 0.0);
                mx = std::max(mx, w[i][xh]);
            }
            double z = 0.0;
            for (int xh = 0; xh < kh; ++xh) z += w[i][xh] = std::isinf(w[i][xh]) ? 0.0 : std::exp(w[i][xh] - mx);
            for (int xh = 0; xh < kh; ++xh) w[i][xh] /= z;
        }
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < nx; ++i)
            for (int xh = 0; xh < kh; ++xh) next[xh] += p[i] * w[i][xh];
        double change = 0.0;
        for (int xh = 0; xh < kh; ++xh) change = std::max(change, std::abs(next[xh] - m[xh]));
        m.swap(next);
        if (change <= tol) break;
    }
    RdPoint pt{0.0, 0.0};
    for (int i = 0; i < nx; ++i)
        for (int xh = 0; xh < kh; ++xh) {
            if (w[i][xh] <= 0.0) continue;
            pt.rate += p[i] * w[i][xh] * std::log2(w[i][xh] / m[xh]);
            pt.distortion += p[i] * w[i][xh] * d[i][xh];
        }
    pt.rate = std::max(0.0, pt.rate);
    return pt;
}

}  // namespace detail

// Conditional rate-distortion function of X given Y = f(X) at distortion
// level delta, in bits. The trade-off separates per side-information letter
// at a common slope; the slope is bisected until the mean distortion meets
// delta within 1e-9.
inline double conditional_rate_distortion(const Distribution& q_x, const std::vector<int>& f,
                                          const DistortionMeasure& d, double delta) {
    const int kx = q_x.size();
    if (static_cast<int>(f.size()) != kx) throw ValidationError("conditional_rate_distortion: map size mismatch");
    if (d.x_alphabet() != kx) throw ValidationError("conditional_rate_distortion: distortion rows mismatch");
    if (!(delta >= 0.0)) throw ValidationError("conditional_rate_distortion: distortion level must be nonnegative");
    int ky = 0;
    for (int v : f) {
        if (v < 0) throw ValidationError("conditional_rate_distortion: negative side-information letter");
        ky = std::max(ky, v + 1);
    }

    struct Group {
        double weight;
        std::vector<double> p;
        std::vector<std::vector<double>> d;
    };
    std::vector<Group> groups;
    for (int y = 0; y < ky; ++y) {
        Group g;
        g.weight = 0.0;
        for (int x = 0; x < kx; ++x)
            if (f[x] == y && q_x[x] > 0.0) {
                g.weight += q_x[x];
                g.p.push_back(q_x[x]);
                g.d.push_back(d.table[x]);
            }
        if (g.p.empty()) continue;
        for (double& v : g.p) v /= g.weight;
        groups.push_back(std::move(g));
    }
    if (groups.empty()) throw ValidationError("conditional_rate_distortion: empty source");

    double d_min = 0.0, d_zero_rate = 0.0;
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.p.size(); ++i)
            d_min += g.weight * g.p[i] * *std::min_element(g.d[i].begin(), g.d[i].end());
        double best = kInf;
        for (int xh = 0; xh < d.xhat_alphabet(); ++xh) {
            double ed = 0.0;
            for (std::size_t i = 0; i < g.p.size(); ++i) ed += g.p[i] * g.d[i][xh];
            best = std::min(best, ed);
        }
        d_zero_rate += g.weight * best;
    }
    if (delta >= d_zero_rate - 1e-12) return 0.0;
    if (delta < d_min - 1e-12) return kInf;

    auto sweep = [&](double slope) {
        detail::RdPoint total{0.0, 0.0};
        for (const auto& g : groups) {
            auto pt = detail::rd_slope_point(g.p, g.d, slope);
            total.rate += g.weight * pt.rate;
            total.distortion += g.weight * pt.distortion;
        }
        return total;
    };
    if (delta <= d_min + 1e-12) return sweep(-1.0).rate;

    double lo = 0.0, hi = 1.0;
    auto hi_pt = sweep(hi);
    while (hi_pt.distortion > delta && hi < 1e7) {
        lo = hi;
        hi *= 4.0;
        hi_pt = sweep(hi);
    }
    if (hi_pt.distortion > delta) return sweep(-1.0).rate;
    detail::RdPoint pt = hi_pt;
    double rate_at_delta = hi_pt.rate;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        pt = sweep(mid);
        if (pt.distortion <= delta) {
            hi = mid;
            rate_at_delta = pt.rate;
            if (delta - pt.distortion <= 1e-9) break;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-13 * (1.0 + hi)) break;
    }
    return rate_at_delta;
}

// Deterministic-side-information Wyner-Ziv exponent: inf of D(Q_X || P_X)
// over priors whose conditional rate-distortion function at delta still
// exceeds the rate. Simplex grid over the support of P_X plus local
// refinement, as in the lossless exponents.
inline ExponentValue wz_deterministic_si(double r, double delta, const Distribution& p_x, const std::vector<int>& f,
                                         const DistortionMeasure& d, const ExponentGrid& grid = {}) {
    if (!(r >= 0.0)) throw ValidationError("wz_deterministic_si: rate must be nonnegative");
    const int kx = p_x.size();
    if (static_cast<int>(f.size()) != kx) throw ValidationError("wz_deterministic_si: map size mismatch");
    const double feas_eps = 1e-7;

    std::vector<int> sup;
    for (int x = 0; x < kx; ++x)
        if (p_x[x] > 0.0) sup.push_back(x);
    const int s = static_cast<int>(sup.size());

    struct Cand {
        std::vector<double> q;
        double div, rwz;
    };
    std::vector<Cand> pool;
    auto make = [&](const std::vector<double>& q) {
        Cand c;
        c.q = q;
        c.div = 0.0;
        std::vector<double> full(kx, 0.0);
        for (int i = 0; i < s; ++i) {
            full[sup[i]] = q[i];
            if (q[i] > 0.0) c.div += q[i] * std::log2(q[i] / p_x[sup[i]]);
        }
        c.div = std::max(0.0, c.div);
        double total = std::accumulate(full.begin(), full.end(), 0.0);
        for (double& v : full) v /= total;
        c.rwz = conditional_rate_distortion(Distribution(full), f, d, delta);
        return c;
    };

    int requested = grid.resolution > 0 ? grid.resolution : (kx <= 6 ? 24 : 12);
    const int res = detail::effective_resolution(requested, s, grid.max_points);
    const std::uint64_t n_grid = composition_count(res, s);
    pool.resize(n_grid + 1);
    parallel_ranges(n_grid, grid.threads, [&](std::uint64_t b, std::uint64_t e, int) {
        std::vector<double> q(s);
        for (std::uint64_t idx = b; idx < e; ++idx) {
            auto comp = unrank_composition(idx, res, s);
            for (int i = 0; i < s; ++i) q[i] = static_cast<double>(comp[i]) / res;
            pool[idx] = make(q);
        }
    });
    {
        std::vector<double> qp(s);
        for (int i = 0; i < s; ++i) qp[i] = p_x[sup[i]];
        double total = std::accumulate(qp.begin(), qp.end(), 0.0);
        for (double& v : qp) v /= total;
        pool[n_grid] = make(qp);
    }
    const std::size_t grid_end = pool.size();

    std::size_t seed = 0, best = grid_end;
    double best_val = kInf, best_con = -kInf;
    for (std::size_t i = 0; i < grid_end; ++i) {
        if (pool[i].rwz >= r - feas_eps && pool[i].div < best_val) {
            best_val = pool[i].div;
            best = i;
        }
        if (pool[i].rwz > best_con) {
            best_con = pool[i].rwz;
            seed = i;
        }
    }
    if (best < grid_end) seed = best;
    std::vector<double> z0(s);
    for (int i = 0; i < s; ++i) z0[i] = std::log(pool[seed].q[i] + 1e-12);
    NelderMeadOptions nm;
    nm.max_evals = grid.refine_evals;
    nelder_mead(
        z0,
        [&](const std::vector<double>& z) {
            Cand c = make(detail::softmax_point(z));
            double val = c.rwz >= r - feas_eps ? c.div : 1e4 + 10.0 * (r - c.rwz);
            pool.push_back(std::move(c));
            return val;
        },
        nm);

    ExponentValue out;
    std::size_t arg = pool.size();
    out.value = kInf;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (pool[i].rwz >= r - feas_eps && pool[i].div < out.value) {
            out.value = pool[i].div;
            arg = i;
        }
    if (arg == pool.size()) {
        out.certificate = "infeasible-empty";
    } else {
        out.certificate = "feasible";
        out.argmin_q.assign(kx, 0.0);
        for (int i = 0; i < s; ++i) out.argmin_q[sup[i]] = pool[arg].q[i];
    }
    return out;
}

// Lift of a test channel for deterministic side information: the auxiliary
// letter is extended to carry the side-information symbol, U~ = (U, f(X)),
// indexed u * ky + y. Distortion and I(X;U|Y) are preserved and Y becomes a
// function of U~.
struct DeterministicSiLift {
    Channel q_lifted;
    std::vector<std::vector<int>> phi_lifted;
    std::vector<int> nu;
};

inline DeterministicSiLift deterministic_si_lift(const Distribution& q_x, const std::vector<int>& f, const Channel& q_u_given_x,
                              const std::vector<std::vector<int>>& phi) {
    const int kx = q_x.size();
    const int ku = q_u_given_x.outputs();
    if (static_cast<int>(f.size()) != kx) throw ValidationError("deterministic_si_lift: map size mismatch");
    if (q_u_given_x.inputs() != kx) throw ValidationError("deterministic_si_lift: test channel input mismatch");
    const int ky = static_cast<int>(phi.size());
    for (int v : f)
        if (v < 0 || v >= ky) throw ValidationError("deterministic_si_lift: side-information letter out of range");
    for (const auto& row : phi)
        if (static_cast<int>(row.size()) != ku)
            throw ValidationError("deterministic_si_lift: reproduction table width must match the U alphabet");

    const int kut = ku * ky;
    std::vector<std::vector<double>> rows(kx, std::vector<double>(kut, 0.0));
    for (int x = 0; x < kx; ++x)
        for (int u = 0; u < ku; ++u) rows[x][u * ky + f[x]] = q_u_given_x(x, u);
    std::vector<std::vector<int>> phi_l(ky, std::vector<int>(kut));
    std::vector<int> nu(kut);
    for (int ut = 0; ut < kut; ++ut) {
        nu[ut] = ut % ky;
        for (int y = 0; y < ky; ++y) phi_l[y][ut] = phi[y][ut / ky];
    }
    return {Channel(std::move(rows)), std::move(phi_l), std::move(nu)};
}

}  // namespace zesi

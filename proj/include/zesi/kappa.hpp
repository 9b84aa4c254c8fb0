#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "zesi/graph.hpp"
#include "zesi/prob.hpp"
#include "zesi/types.hpp"
#include "zesi/util.hpp"

namespace zesi {

struct KappaSolution {
    double value_bits;
    Channel argmax_channel;
    double feasibility_residual;
    int iterations;
};

class KappaNonConvergence : public SolverError {
public:
    KappaNonConvergence(const std::string& msg, KappaSolution best) : SolverError(msg), best_iterate(std::move(best)) {}
    KappaSolution best_iterate;
};

namespace detail {

// Gaussian elimination with partial pivoting; a is n x n row-major, b the
// right-hand side, overwritten with the solution.
inline void solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        double d = a[col * n + col];
        if (d == 0.0) continue;
        for (int r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int col = n - 1; col >= 0; --col) {
        double d = a[col * n + col];
        if (d == 0.0) {
            b[col] = 0.0;
            continue;
        }
        double s = b[col];
        for (int c = col + 1; c < n; ++c) s -= a[col * n + c] * b[c];
        b[col] = s / d;
    }
}

// Row-normalizes the scaled plan into channel rows over the full alphabet and
// measures the fixed-point residual max_b |sum_a q_a V(b|a) - q_b|.
inline KappaSolution finish_kappa(const Graph& g, const Distribution& q, const std::vector<int>& sup,
                                  const std::vector<char>& mask, const std::vector<double>& u,
                                  const std::vector<double>& v, int iterations) {
    const int k = g.vertex_count();
    const int s = static_cast<int>(sup.size());
    std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a) rows[a][a] = 1.0;
    for (int i = 0; i < s; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < s; ++j)
            if (mask[i * s + j]) row_sum += u[i] * v[j];
        std::fill(rows[sup[i]].begin(), rows[sup[i]].end(), 0.0);
        for (int j = 0; j < s; ++j)
            if (mask[i * s + j]) rows[sup[i]][sup[j]] = u[i] * v[j] / row_sum;
    }
    Channel channel(rows);
    double residual = 0.0;
    for (int b = 0; b < k; ++b) {
        double col = 0.0;
        for (int a = 0; a < k; ++a) col += q[a] * channel(a, b);
        residual = std::max(residual, std::abs(col - q[b]));
    }
    return {conditional_entropy(channel, q), std::move(channel), residual, iterations};
}

}  // namespace detail

// Maximizes H(V|Q) over channels V with V(b|a) = 0 unless b = a or (a,b) is an
// edge, and QV = Q. Writing W(a,b) = Q(a)V(b|a), the program is max-entropy
// over the transportation polytope with margins (Q,Q) and the masked support,
// solved by diagonal scaling W = diag(u) M diag(v) with alternating margin
// fits. A strictly positive feasible plan always exists (mix the diagonal
// plan with two-letter exchange plans along each edge), so the scaling
// converges and the entropic dual gives a certified optimality gap.
inline KappaSolution kappa(const Graph& g, const Distribution& q, double tol = 1e-9, int max_iterations = 500000) {
    const int k = g.vertex_count();
    if (q.size() != k)
        throw ValidationError("kappa: distribution over " + std::to_string(q.size()) + " letters, graph has " +
                              std::to_string(k) + " vertices");
    if (tol <= 0.0) throw ValidationError("kappa: tolerance must be positive");

    std::vector<int> sup;
    for (int a = 0; a < k; ++a)
        if (q[a] > 0.0) sup.push_back(a);
    const int s = static_cast<int>(sup.size());

    std::vector<char> mask(static_cast<std::size_t>(s) * s, 0);
    bool any_edge = false;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) {
            mask[i * s + j] = (i == j) || g.adjacent(sup[i], sup[j]);
            any_edge = any_edge || (i != j && mask[i * s + j]);
        }
    std::vector<double> u(s, 1.0), v(s, 1.0);
    if (s <= 1 || !any_edge) return detail::finish_kappa(g, q, sup, mask, u, v, 0);

    std::vector<double> qs(s);
    for (int i = 0; i < s; ++i) qs[i] = q[sup[i]];

    const double ln2 = std::log(2.0);
    const double margin_tol = 1e-12;

    auto sweep = [&]() {
        for (int j = 0; j < s; ++j) {
            double t = 0.0;
            for (int i = 0; i < s; ++i)
                if (mask[i * s + j]) t += u[i];
            v[j] = qs[j] / t;
        }
        for (int i = 0; i < s; ++i) {
            double t = 0.0;
            for (int j = 0; j < s; ++j)
                if (mask[i * s + j]) t += v[j];
            u[i] = qs[i] / t;
        }
    };
    // Rows of W sum exactly to qs right after a sweep; only columns can be
    // off. The entropic dual bounds the optimum for any positive scaling, so
    // a small gap plus a small margin residual certifies the value.
    auto converged = [&]() {
        double residual = 0.0;
        for (int j = 0; j < s; ++j) {
            double col = 0.0;
            for (int i = 0; i < s; ++i)
                if (mask[i * s + j]) col += u[i] * v[j];
            residual = std::max(residual, std::abs(col - qs[j]));
        }
        if (residual > margin_tol) return false;
        double sum_w = 0.0, neg_ent = 0.0, dual_linear = 0.0;
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                if (mask[i * s + j]) {
                    double w = u[i] * v[j];
                    sum_w += w;
                    neg_ent += w * std::log(w);
                }
        for (int i = 0; i < s; ++i) dual_linear += qs[i] * (std::log(u[i]) + std::log(v[i]));
        double gap = (sum_w - dual_linear - 1.0) - (-neg_ent);
        return gap <= tol * ln2;
    };

    // Phase 1: alternating margin fits. Converges fast on well-conditioned
    // priors; its linear rate degrades as min(q) shrinks, hence phase 2.
    const int sinkhorn_iters = std::min(max_iterations, 512);
    for (int iter = 1; iter <= sinkhorn_iters; ++iter) {
        sweep();
        if (converged()) return detail::finish_kappa(g, q, sup, mask, u, v, iter);
    }

    // Phase 2: damped Newton on the dual in log scalings, polished by one
    // margin sweep per step (the sweep is an exact block minimization of the
    // dual, so the combination stays monotone).
    std::vector<double> phi(s), psi(s);
    for (int i = 0; i < s; ++i) {
        phi[i] = std::log(u[i]);
        psi[i] = std::log(v[i]);
    }
    const int n2 = 2 * s;
    std::vector<double> w(static_cast<std::size_t>(s) * s), grad(n2), hess(static_cast<std::size_t>(n2) * n2),
        step(n2);
    auto dual_value = [&](const std::vector<double>& f, const std::vector<double>& p) {
        double sum_w = 0.0, lin = 0.0;
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j)
                if (mask[i * s + j]) {
                    double e = f[i] + p[j];
                    if (e > 500.0) return kInf;
                    sum_w += std::exp(e);
                }
            lin += qs[i] * (f[i] + p[i]);
        }
        return sum_w - lin - 1.0;
    };
    for (int nit = 1; nit <= 400; ++nit) {
        std::vector<double> r(s, 0.0), c(s, 0.0);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j) {
                double wij = mask[i * s + j] ? std::exp(phi[i] + psi[j]) : 0.0;
                w[i * s + j] = wij;
                r[i] += wij;
                c[j] += wij;
            }
        for (int i = 0; i < s; ++i) {
            grad[i] = r[i] - qs[i];
            grad[s + i] = c[i] - qs[i];
        }
        std::fill(hess.begin(), hess.end(), 0.0);
        for (int i = 0; i < s; ++i) {
            hess[static_cast<std::size_t>(i) * n2 + i] = r[i] + 1e-13;
            hess[static_cast<std::size_t>(s + i) * n2 + (s + i)] = c[i] + 1e-13;
            for (int j = 0; j < s; ++j) {
                hess[static_cast<std::size_t>(i) * n2 + (s + j)] = w[i * s + j];
                hess[static_cast<std::size_t>(s + j) * n2 + i] = w[i * s + j];
            }
        }
        for (int i = 0; i < n2; ++i) step[i] = -grad[i];
        detail::solve_linear(hess, step, n2);
        double g0 = dual_value(phi, psi), slope = 0.0;
        for (int i = 0; i < n2; ++i) slope += grad[i] * step[i];
        if (slope < 0.0) {
            double t = 1.0;
            std::vector<double> phi2(s), psi2(s);
            for (int half = 0; half < 60; ++half, t *= 0.5) {
                for (int i = 0; i < s; ++i) {
                    phi2[i] = phi[i] + t * step[i];
                    psi2[i] = psi[i] + t * step[s + i];
                }
                if (dual_value(phi2, psi2) <= g0 + 0.25 * t * slope) {
                    phi.swap(phi2);
                    psi.swap(psi2);
                    break;
                }
            }
        }
        for (int i = 0; i < s; ++i) {
            u[i] = std::exp(phi[i]);
            v[i] = std::exp(psi[i]);
        }
        sweep();
        if (converged()) return detail::finish_kappa(g, q, sup, mask, u, v, sinkhorn_iters + nit);
        for (int i = 0; i < s; ++i) {
            phi[i] = std::log(u[i]);
            psi[i] = std::log(v[i]);
        }
    }
    KappaSolution best = detail::finish_kappa(g, q, sup, mask, u, v, max_iterations);
    throw KappaNonConvergence("kappa: no convergence after " + std::to_string(sinkhorn_iters) +
                                  " margin sweeps and 400 Newton steps; best value " + fmt12(best.value_bits) +
                                  " bits, residual " + fmt12(best.feasibility_residual),
                              best);
}

// Max of H(V|Q) over conditional types at blocklength n: every row a is a
// composition of count(a), entries only on self or edges, and column sums
// reproduce the counts (the exact-integer form of QV = Q).
inline double kappa_n(const Graph& g, const EmpiricalType& q, std::uint64_t cap = 10000000) {
    const int k = g.vertex_count();
    if (q.alphabet() != k)
        throw ValidationError("kappa_n: type over " + std::to_string(q.alphabet()) + " letters, graph has " +
                              std::to_string(k) + " vertices");
    double best = 0.0;
    std::vector<double> row(k);
    for_each_conditional_type(
        q,
        [&](const std::vector<std::vector<int>>& m) {
            for (int b = 0; b < k; ++b) {
                int col = 0;
                for (int a = 0; a < k; ++a) {
                    if (m[a][b] > 0 && a != b && !g.adjacent(a, b)) return;
                    col += m[a][b];
                }
                if (col != q.counts[b]) return;
            }
            double h = 0.0;
            for (int a = 0; a < k; ++a) {
                if (q.counts[a] == 0) continue;
                for (int b = 0; b < k; ++b) row[b] = static_cast<double>(m[a][b]) / q.counts[a];
                h += (static_cast<double>(q.counts[a]) / q.n) * entropy_bits(row);
            }
            best = std::max(best, h);
        },
        cap);
    return best;
}

struct SimplexSearchOptions {
    int grid_resolution = 16;
    int restarts = 32;
    int max_evals_per_restart = 4000;
    double min_step = 1e-6;
    double improve_tol = 1e-12;
    int threads = 1;
};

struct SimplexMaxResult {
    double value;
    std::vector<double> argmax;
    int restarts_used;
};

namespace detail {

inline void normalize_simplex(std::vector<double>& x) {
    double s = 0.0;
    for (double& e : x) {
        if (e < 0.0) e = 0.0;
        s += e;
    }
    for (double& e : x) e /= s;
}

// First-improvement coordinate pair-transfer descent with a shrinking step
// ladder. Each accepted move shifts `step` mass between two letters.
template <typename Fn>
std::pair<double, std::vector<double>> pattern_search_simplex(std::vector<double> x, Fn&& f,
                                                              const SimplexSearchOptions& opt) {
    const int k = static_cast<int>(x.size());
    normalize_simplex(x);
    double fx = f(x);
    int evals = 1;
    for (double step = 0.25; step >= opt.min_step; step *= 0.4) {
        bool improved = true;
        while (improved && evals < opt.max_evals_per_restart) {
            improved = false;
            for (int i = 0; i < k && evals < opt.max_evals_per_restart; ++i) {
                if (x[i] < step) continue;
                for (int j = 0; j < k && evals < opt.max_evals_per_restart; ++j) {
                    if (j == i) continue;
                    std::vector<double> y = x;
                    y[i] -= step;
                    y[j] += step;
                    normalize_simplex(y);
                    double fy = f(y);
                    ++evals;
                    if (fy > fx + opt.improve_tol) {
                        x = std::move(y);
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
    }
    return {fx, std::move(x)};
}

}  // namespace detail

// Multi-start local maximization of f over the probability simplex. The
// result is a lower bound on the true maximum; the reduction over restarts is
// deterministic regardless of thread count (best value, then lexicographically
// smallest argmax).
template <typename Fn>
SimplexMaxResult maximize_over_simplex(int k, Fn&& f, const SimplexSearchOptions& opt,
                                       const std::vector<std::vector<double>>& seeds) {
    if (seeds.empty()) throw ValidationError("maximize_over_simplex: no seeds");
    for (const auto& s : seeds)
        if (static_cast<int>(s.size()) != k) throw ValidationError("maximize_over_simplex: seed dimension mismatch");
    std::vector<std::pair<double, std::vector<double>>> results(seeds.size());
    parallel_ranges(seeds.size(), opt.threads, [&](std::uint64_t begin, std::uint64_t end, int) {
        for (std::uint64_t i = begin; i < end; ++i)
            results[i] = detail::pattern_search_simplex(seeds[i], f, opt);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].first > results[best].first + 1e-15 ||
            (std::abs(results[i].first - results[best].first) <= 1e-15 && results[i].second < results[best].second))
            best = i;
    }
    return {results[best].first, results[best].second, static_cast<int>(results.size())};
}

// Seed family for maximizations over priors on a graph's vertices: uniform,
// one spike per vertex, the exact maximum-independent-set indicator (within
// cap), a greedy-clique indicator, a stride sample of the simplex grid, and
// any caller-supplied extras.
inline std::vector<std::vector<double>> prior_seeds(const Graph& g, const SimplexSearchOptions& opt,
                                                    const std::vector<std::vector<double>>& extra = {},
                                                    int exact_cap = 64) {
    const int k = g.vertex_count();
    std::vector<std::vector<double>> seeds;
    seeds.emplace_back(k, 1.0 / k);
    if (k > 1) {
        for (int v = 0; v < k; ++v) {
            std::vector<double> s(k, 0.5 / (k - 1));
            s[v] = 0.5;
            seeds.push_back(std::move(s));
        }
    }
    auto indicator = [&](const std::vector<int>& set) {
        std::vector<double> s(k, 0.0);
        for (int v : set) s[v] = 1.0 / set.size();
        return s;
    };
    if (k <= exact_cap) seeds.push_back(indicator(maximum_independent_set(g, exact_cap)));
    seeds.push_back(indicator(greedy_clique_bound(g)));
    std::uint64_t grid_total = composition_count(opt.grid_resolution, k);
    int want = std::max(0, opt.restarts - static_cast<int>(seeds.size()));
    for (int t = 0; t < want; ++t) {
        std::uint64_t idx = (want == 1) ? grid_total / 2 : (grid_total - 1) / (want - 1) * t;
        auto comp = unrank_composition(idx, opt.grid_resolution, k);
        std::vector<double> s(k);
        for (int a = 0; a < k; ++a) s[a] = static_cast<double>(comp[a]) / opt.grid_resolution;
        seeds.push_back(std::move(s));
    }
    seeds.insert(seeds.end(), extra.begin(), extra.end());
    return seeds;
}

struct WitsenhausenBound {
    double kappa_max;
    std::vector<double> argmax_q;
    double log2_gamma;
    bool gamma_exact;
    double bound;
    int restarts_used;
};

// Multi-start estimate of max_Q kappa(G,Q), a lower bound on the true
// maximum. When the exact chromatic number fits the cap, min with log2(gamma)
// since both bound the zero-error rate from above.
inline WitsenhausenBound witsenhausen_bound(const Graph& g, const SimplexSearchOptions& opt = {},
                                            const std::vector<std::vector<double>>& extra_seeds = {},
                                            double kappa_tol = 1e-9, int gamma_cap = 64) {
    auto f = [&](const std::vector<double>& q) { return kappa(g, Distribution(q), kappa_tol).value_bits; };
    auto r = maximize_over_simplex(g.vertex_count(), f, opt, prior_seeds(g, opt, extra_seeds));
    WitsenhausenBound out{r.value, r.argmax, 0.0, false, r.value, r.restarts_used};
    if (g.vertex_count() <= gamma_cap) {
        out.log2_gamma = std::log2(static_cast<double>(chromatic_number(g, gamma_cap)));
        out.gamma_exact = true;
        out.bound = std::min(out.kappa_max, out.log2_gamma);
    }
    return out;
}

struct ZeroErrorBound {
    double lb_bits;
    std::vector<double> argmax_prior;
    int restarts_used;
};

// Multi-start estimate of max_P [H(P) - kappa(G,P)], the capacity lower
// bound. The maximum equals log2 of the independence number; seeding with the
// independent-set indicator makes the estimate exact up to solver tolerance.
inline ZeroErrorBound zec_lower_bound_graph(const Graph& g, const SimplexSearchOptions& opt = {},
                                            double kappa_tol = 1e-9) {
    auto f = [&](const std::vector<double>& p) {
        return entropy_bits(p) - kappa(g, Distribution(p), kappa_tol).value_bits;
    };
    auto r = maximize_over_simplex(g.vertex_count(), f, opt, prior_seeds(g, opt));
    return {r.value, r.argmax, r.restarts_used};
}

inline ZeroErrorBound zero_error_capacity_lb(const Channel& w, const SimplexSearchOptions& opt = {},
                                             double kappa_tol = 1e-9) {
    return zec_lower_bound_graph(characteristic_graph(w), opt, kappa_tol);
}

// [kappa(G_U, Q_U) - H(Q_{U|X} | Q_X)]^+ where G_U is the characteristic
// graph of the U-against-Y joint induced by the fixed source and the test
// channel, and Q_U is the U-marginal induced by q_x and the test channel.
inline double kappa2(const JointDistribution& p_xy, const Distribution& q_x, const Channel& q_u_given_x,
                     double tol = 1e-9) {
    const int kx = p_xy.x_alphabet(), ky = p_xy.y_alphabet();
    if (q_x.size() != kx)
        throw ValidationError("kappa2: prior over " + std::to_string(q_x.size()) + " letters, source has " +
                              std::to_string(kx));
    if (q_u_given_x.inputs() != kx)
        throw ValidationError("kappa2: test channel has " + std::to_string(q_u_given_x.inputs()) +
                              " inputs, source has " + std::to_string(kx));
    const int ku = q_u_given_x.outputs();

    std::vector<std::vector<double>> quy(ku, std::vector<double>(ky, 0.0));
    for (int x = 0; x < kx; ++x)
        for (int y = 0; y < ky; ++y)
            for (int u = 0; u < ku; ++u) quy[u][y] += p_xy.p(x, y) * q_u_given_x(x, u);
    Graph g_u = characteristic_graph(JointDistribution(ku, ky, quy));

    std::vector<double> qu(ku, 0.0);
    for (int x = 0; x < kx; ++x)
        for (int u = 0; u < ku; ++u) qu[u] += q_x[x] * q_u_given_x(x, u);
    detail::normalize_simplex(qu);

    double value = kappa(g_u, Distribution(qu), tol).value_bits - conditional_entropy(q_u_given_x, q_x);
    return std::max(0.0, value);
}

}  // namespace zesi

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zesi/util.hpp"

namespace zesi {

inline constexpr double kMassTol = 1e-12;

namespace detail {
inline void check_mass(double sum, const char* what) {
    if (std::abs(sum - 1.0) > kMassTol)
        throw ValidationError(std::string(what) + ": total mass " + fmt12(sum) + " deviates from 1 beyond " + fmt12(kMassTol));
}
inline void check_entry(double v, const char* what, const std::string& where) {
    if (!(v >= 0.0) || std::isnan(v))
        throw ValidationError(std::string(what) + ": negative or invalid entry " + fmt12(v) + " at " + where);
}
}  // namespace detail

// Probability vector. Entries are nonnegative and sum to 1 within kMassTol.
class Distribution {
public:
    explicit Distribution(std::vector<double> p) : p_(std::move(p)) {
        if (p_.empty()) throw ValidationError("distribution: empty support");
        double s = 0.0;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            detail::check_entry(p_[i], "distribution", "index " + std::to_string(i));
            s += p_[i];
        }
        detail::check_mass(s, "distribution");
    }

    static Distribution uniform(int k) { return Distribution(std::vector<double>(k, 1.0 / k)); }

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[i]; }
    const std::vector<double>& probs() const { return p_; }

private:
    std::vector<double> p_;
};

// Joint distribution over X x Y stored row-major (x rows).
class JointDistribution {
public:
    JointDistribution(int kx, int ky, std::vector<std::vector<double>> pxy)
        : kx_(kx), ky_(ky), p_(std::move(pxy)) {
        if (kx_ <= 0 || ky_ <= 0) throw ValidationError("joint: alphabet sizes must be positive");
        if (static_cast<int>(p_.size()) != kx_)
            throw ValidationError("joint: expected " + std::to_string(kx_) + " rows, got " + std::to_string(p_.size()));
        double s = 0.0;
        for (int x = 0; x < kx_; ++x) {
            if (static_cast<int>(p_[x].size()) != ky_)
                throw ValidationError("joint: row " + std::to_string(x) + " has " + std::to_string(p_[x].size()) +
                                      " entries, expected " + std::to_string(ky_));
            for (int y = 0; y < ky_; ++y) {
                detail::check_entry(p_[x][y], "joint", "row " + std::to_string(x) + ", column " + std::to_string(y));
                s += p_[x][y];
            }
        }
        detail::check_mass(s, "joint");
    }

    int x_alphabet() const { return kx_; }
    int y_alphabet() const { return ky_; }
    double p(int x, int y) const { return p_[x][y]; }
    const std::vector<std::vector<double>>& rows() const { return p_; }

    std::vector<double> x_marginal() const {
        std::vector<double> m(kx_, 0.0);
        for (int x = 0; x < kx_; ++x)
            for (int y = 0; y < ky_; ++y) m[x] += p_[x][y];
        return m;
    }
    std::vector<double> y_marginal() const {
        std::vector<double> m(ky_, 0.0);
        for (int x = 0; x < kx_; ++x)
            for (int y = 0; y < ky_; ++y) m[y] += p_[x][y];
        return m;
    }

private:
    int kx_, ky_;
    std::vector<std::vector<double>> p_;
};

// Joint distribution over X x Y x U.
class Joint3 {
public:
    Joint3(int kx, int ky, int ku, std::vector<double> flat)
        : kx_(kx), ky_(ky), ku_(ku), p_(std::move(flat)) {
        if (static_cast<int>(p_.size()) != kx_ * ky_ * ku_)
            throw ValidationError("joint3: expected " + std::to_string(kx_ * ky_ * ku_) + " entries, got " +
                                  std::to_string(p_.size()));
        double s = 0.0;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            detail::check_entry(p_[i], "joint3", "flat index " + std::to_string(i));
            s += p_[i];
        }
        detail::check_mass(s, "joint3");
    }

    int x_alphabet() const { return kx_; }
    int y_alphabet() const { return ky_; }
    int u_alphabet() const { return ku_; }
    double p(int x, int y, int u) const { return p_[(x * ky_ + y) * ku_ + u]; }

    std::vector<double> x_marginal() const { return marginal(0); }
    std::vector<double> y_marginal() const { return marginal(1); }
    std::vector<double> u_marginal() const { return marginal(2); }

    std::vector<std::vector<double>> xu_marginal() const {
        std::vector<std::vector<double>> m(kx_, std::vector<double>(ku_, 0.0));
        for (int x = 0; x < kx_; ++x)
            for (int y = 0; y < ky_; ++y)
                for (int u = 0; u < ku_; ++u) m[x][u] += p(x, y, u);
        return m;
    }
    std::vector<std::vector<double>> yu_marginal() const {
        std::vector<std::vector<double>> m(ky_, std::vector<double>(ku_, 0.0));
        for (int x = 0; x < kx_; ++x)
            for (int y = 0; y < ky_; ++y)
                for (int u = 0; u < ku_; ++u) m[y][u] += p(x, y, u);
        return m;
    }

private:
    std::vector<double> marginal(int axis) const {
        int k = axis == 0 ? kx_ : axis == 1 ? ky_ : ku_;
        std::vector<double> m(k, 0.0);
        for (int x = 0; x < kx_; ++x)
            for (int y = 0; y < ky_; ++y)
                for (int u = 0; u < ku_; ++u) m[axis == 0 ? x : axis == 1 ? y : u] += p(x, y, u);
        return m;
    }

    int kx_, ky_, ku_;
    std::vector<double> p_;
};

// Conditional rows out_given_in[i][j] = P(j | i); every row is stochastic.
class Channel {
public:
    Channel(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
        if (rows_.empty()) throw ValidationError("channel: no rows");
        cols_ = static_cast<int>(rows_[0].size());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (static_cast<int>(rows_[i].size()) != cols_)
                throw ValidationError("channel: row " + std::to_string(i) + " has inconsistent width");
            double s = 0.0;
            for (int j = 0; j < cols_; ++j) {
                detail::check_entry(rows_[i][j], "channel", "row " + std::to_string(i) + ", column " + std::to_string(j));
                s += rows_[i][j];
            }
            if (std::abs(s - 1.0) > kMassTol)
                throw ValidationError("channel: row " + std::to_string(i) + " sums to " + fmt12(s));
        }
    }

    static Channel identity(int k) {
        std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
        for (int i = 0; i < k; ++i) m[i][i] = 1.0;
        return Channel(std::move(m));
    }

    int inputs() const { return static_cast<int>(rows_.size()); }
    int outputs() const { return cols_; }
    double operator()(int in, int out) const { return rows_[in][out]; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    std::vector<std::vector<double>> rows_;
    int cols_ = 0;
};

inline double entropy(const Distribution& p) { return entropy_bits(p.probs()); }

inline double entropy(const JointDistribution& j) {
    double h = 0.0;
    for (const auto& row : j.rows())
        for (double v : row) h -= xlog2x(v);
    return h;
}

// H(out | in) under input distribution q: sum_i q(i) H(row_i).
inline double conditional_entropy(const Channel& v, const Distribution& q) {
    if (v.inputs() != q.size()) throw ValidationError("conditional_entropy: channel/prior size mismatch");
    double h = 0.0;
    for (int i = 0; i < v.inputs(); ++i) {
        if (q[i] <= 0.0) continue;
        h += q[i] * entropy_bits(v.rows()[i]);
    }
    return h;
}

// H(X | Y) of a joint.
inline double conditional_entropy_x_given_y(const JointDistribution& j) {
    return entropy(j) - entropy_bits(j.y_marginal());
}

// D(q || p) in bits; +inf as soon as q puts mass where p has exactly none.
inline double kl_divergence(const std::vector<double>& q, const std::vector<double>& p) {
    if (q.size() != p.size()) throw ValidationError("kl_divergence: size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i] <= 0.0) continue;
        if (p[i] == 0.0) return kInf;
        d += q[i] * std::log2(q[i] / p[i]);
    }
    return std::max(0.0, d);
}

inline double kl_divergence(const Distribution& q, const Distribution& p) {
    return kl_divergence(q.probs(), p.probs());
}

inline double kl_divergence(const JointDistribution& q, const JointDistribution& p) {
    if (q.x_alphabet() != p.x_alphabet() || q.y_alphabet() != p.y_alphabet())
        throw ValidationError("kl_divergence: joint shape mismatch");
    double d = 0.0;
    for (int x = 0; x < q.x_alphabet(); ++x)
        for (int y = 0; y < q.y_alphabet(); ++y) {
            double qv = q.p(x, y);
            if (qv <= 0.0) continue;
            if (p.p(x, y) == 0.0) return kInf;
            d += qv * std::log2(qv / p.p(x, y));
        }
    return std::max(0.0, d);
}

inline double mutual_information(const JointDistribution& j) {
    double mi = entropy_bits(j.x_marginal()) + entropy_bits(j.y_marginal()) - entropy(j);
    return std::max(0.0, mi);
}

inline double mutual_information_pair(const std::vector<std::vector<double>>& joint) {
    int a = static_cast<int>(joint.size());
    int b = a ? static_cast<int>(joint[0].size()) : 0;
    std::vector<double> ma(a, 0.0), mb(b, 0.0);
    double h = 0.0;
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) {
            ma[i] += joint[i][j];
            mb[j] += joint[i][j];
            h -= xlog2x(joint[i][j]);
        }
    return std::max(0.0, entropy_bits(ma) + entropy_bits(mb) - h);
}

// Rows P(y|x) for letters with positive x-marginal; zero-mass letters get a
// point mass on y = 0 by convention.
inline Channel y_given_x(const JointDistribution& j) {
    auto mx = j.x_marginal();
    std::vector<std::vector<double>> rows(j.x_alphabet(), std::vector<double>(j.y_alphabet(), 0.0));
    for (int x = 0; x < j.x_alphabet(); ++x) {
        if (mx[x] > 0.0)
            for (int y = 0; y < j.y_alphabet(); ++y) rows[x][y] = j.p(x, y) / mx[x];
        else
            rows[x][0] = 1.0;
    }
    return Channel(std::move(rows));
}

}  // namespace zesi

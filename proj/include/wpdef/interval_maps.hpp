#pragma once

// Bijections A: (a, b) → ℝ, B = A⁻¹ and the companion B₁, plus the
// chain-rule factorization ∂F/∂x = ∂P/∂y · M used to transport rank
// statements from F to P.

#include <wpdef/errors.hpp>
#include <wpdef/lattice.hpp>
#include <wpdef/weierstrass.hpp>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace wpdef {

struct IntervalBijection {
    double a;
    double b;
    double m;
    double r;

    IntervalBijection(double lo, double hi) : a(lo), b(hi), m(0.5 * (lo + hi)), r(0.5 * (hi - lo)) {
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
            throw std::invalid_argument("interval bijection needs finite a < b");
    }
};

namespace detail {

inline void check_domain(const IntervalBijection& ib, double t) {
    if (!(t > ib.a && t < ib.b)) throw DomainError("argument outside the open interval");
}

/// s = B(u) − m and r − |s|, both without cancellation.
struct BOffset {
    double s;
    double r_minus_abs_s;
};

inline BOffset b_offset(const IntervalBijection& ib, double u) {
    const double r = ib.r;
    const double k = 2.0 * std::abs(u) * r;
    const double h = std::hypot(1.0, k);
    const double abs_s = k * r / (1.0 + h);
    // r − |s| = r(1 + h − k)/(1 + h) and h − k = 1/(h + k).
    const double gap = r * (1.0 + 1.0 / (h + k)) / (1.0 + h);
    return {std::copysign(abs_s, u), gap};
}

}  // namespace detail

/// A(t) = (t − m)/(r² − (t − m)²), with r² − (t − m)² = (b − t)(t − a).
inline double A_eval(const IntervalBijection& ib, double t) {
    detail::check_domain(ib, t);
    return (t - ib.m) / ((ib.b - t) * (t - ib.a));
}

/// A′(t) = (r² + (t − m)²)/(r² − (t − m)²)².
inline double A_prime_eval(const IntervalBijection& ib, double t) {
    detail::check_domain(ib, t);
    const double s = t - ib.m;
    const double d = (ib.b - t) * (t - ib.a);
    return (ib.r * ib.r + s * s) / (d * d);
}

/// B(u) = m + s with u·s² + s − u·r² = 0, s ∈ (−r, r), in the form
/// s = 2u·r²/(1 + √(1 + 4u²r²)). The result is kept strictly inside (a, b)
/// even when m + s rounds to an endpoint.
inline double B_eval(const IntervalBijection& ib, double u) {
    const double t = ib.m + detail::b_offset(ib, u).s;
    if (t >= ib.b) return std::nextafter(ib.b, ib.a);
    if (t <= ib.a) return std::nextafter(ib.a, ib.b);
    return t;
}

/// B′(u) = (r² − s²)²/(r² + s²) with s = B(u) − m taken before rounding.
inline double B_prime_eval(const IntervalBijection& ib, double u) {
    const auto [s, gap] = detail::b_offset(ib, u);
    const double diff = gap * (ib.r + std::abs(s));  // r² − s²
    return diff * diff / (ib.r * ib.r + s * s);
}

/// B₁(u) = 1/(r² + s²).
inline double B1_eval(const IntervalBijection& ib, double u) {
    const double s = detail::b_offset(ib, u).s;
    return 1.0 / (ib.r * ib.r + s * s);
}

/// A system F_i(x₁..x_{n+1}) = P_i(y₁..y_{2n+2}) with y = (x, ℘(B(x₁)), …,
/// ℘(B(x_{n+1}))), reduced to the data the chain rule needs.
struct ChainRuleInstance {
    int n;
    /// ∂P_i/∂y_j for j = 2..2n+2 (n × (2n+1)).
    Eigen::MatrixXd P_partials;
    /// B′(x_j)·℘′(B(x_j)) for j = 2..n+1.
    std::vector<double> diag_values;
};

/// Identity n×n, one zero row, then diag(diag_values).
inline Eigen::MatrixXd build_M(const ChainRuleInstance& inst) {
    const int n = inst.n;
    if (n < 1 || int(inst.diag_values.size()) != n || inst.P_partials.rows() != n ||
        inst.P_partials.cols() != 2 * n + 1)
        throw std::invalid_argument("chain rule instance has inconsistent dimensions");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n + 1, n);
    for (int j = 0; j < n; ++j) {
        m(j, j) = 1.0;
        m(n + 1 + j, j) = inst.diag_values[j];
    }
    return m;
}

inline constexpr double kRankThreshold = 1e-9;
inline constexpr double kNonsingularThreshold = 1e-9;

struct ChainRuleReport {
    double residual;
    int rank_P;
    bool F_nonsingular;
    bool passed;
};

/// Numerical rank: singular values above kRankThreshold·σ_max.
inline int numerical_rank(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0;
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    return int((sv.array() > kRankThreshold * sv(0)).count());
}

/// |det F| relative to the product of its row norms (Hadamard bound).
inline bool is_nonsingular(const Eigen::MatrixXd& f) {
    double norms = 1.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i) norms *= f.row(i).norm();
    if (norms == 0.0) return false;
    return std::abs(f.determinant()) / norms > kNonsingularThreshold;
}

/// residual = max|F − P·M|; passes when residual ≤ tol and a nonsingular F
/// comes with rank P = n.
inline ChainRuleReport chain_rule_check(const ChainRuleInstance& inst, const Eigen::MatrixXd& F_partials,
                                        double tol) {
    const Eigen::MatrixXd m = build_M(inst);
    if (F_partials.rows() != inst.n || F_partials.cols() != inst.n)
        throw std::invalid_argument("F partials must be n x n");
    const double residual = (F_partials - inst.P_partials * m).cwiseAbs().maxCoeff();
    const int rank = numerical_rank(inst.P_partials);
    const bool nonsingular = is_nonsingular(F_partials);
    return {residual, rank, nonsingular, residual <= tol && (!nonsingular || rank == inst.n)};
}

struct FiniteDifferenceInstance {
    ChainRuleInstance instance;
    /// ∂F_i/∂x_j for j = 2..n+1 by finite differences.
    Eigen::MatrixXd F_partials;
};

namespace detail {

/// Central difference with one Richardson step (h and h/2).
inline double derivative(const std::function<double(double)>& f, double x, double h) {
    auto central = [&](double step) { return (f(x + step) - f(x - step)) / (2.0 * step); };
    const double d1 = central(h), d2 = central(h / 2);
    return (4.0 * d2 - d1) / 3.0;
}

/// Polynomial systems P_1..P_n in y_1..y_{2n+2} used for the canned
/// instances (0-based y indices).
inline double canned_P(int n, int i, const std::vector<double>& y) {
    const auto x = [&](int k) { return y[k - 1]; };          // x_k = y_k
    const auto w = [&](int k) { return y[n + 1 + k - 1]; };  // ℘(B(x_k)) = y_{n+1+k}
    switch (n) {
        case 1:
            return w(2) - w(1) - 0.5;
        case 2:
            if (i == 0) return w(2) * x(3) - x(2) * w(1) + x(1);
            return w(3) + x(2) * x(2) - w(1) * x(3);
        case 3:
            if (i == 0) return w(2) * w(3) - x(4) * w(1) + x(2);
            if (i == 1) return x(3) * w(4) + w(2) - x(1) * x(4);
            return w(4) * w(2) - x(3) * x(2) + w(3) * x(1);
        default:
            throw std::invalid_argument("canned chain rule systems exist for n = 1, 2, 3");
    }
}

}  // namespace detail

/// Builds ∂P/∂y and ∂F/∂x by finite differences for a canned polynomial
/// system of size n ∈ {1, 2, 3} at x = (x₁..x_{n+1}); diag_values come
/// from the closed-form B′ and ℘′. Requires a lattice that is real on the
/// real axis so ℘∘B is real.
inline FiniteDifferenceInstance chain_rule_instance(int n, const Lattice& lat, const IntervalBijection& ib,
                                                    const std::vector<double>& x) {
    if (n < 1 || n > 3) throw std::invalid_argument("canned chain rule systems exist for n = 1, 2, 3");
    if (int(x.size()) != n + 1) throw std::invalid_argument("chain rule point needs n + 1 coordinates");
    const auto wp = weierstrass_for(lat);
    auto wpb = [&](double u) { return wp->p(B_eval(ib, u)).value.real(); };

    std::vector<double> y(2 * n + 2);
    for (int k = 0; k <= n; ++k) {
        y[k] = x[k];
        y[n + 1 + k] = wpb(x[k]);
    }
    FiniteDifferenceInstance out{{n, Eigen::MatrixXd(n, 2 * n + 1), std::vector<double>(n)},
                                 Eigen::MatrixXd(n, n)};
    for (int j = 0; j < n; ++j) {
        const double xj = x[j + 1];
        out.instance.diag_values[j] = B_prime_eval(ib, xj) * wp->p_prime(B_eval(ib, xj)).value.real();
    }
    constexpr double h = 1e-3;
    for (int i = 0; i < n; ++i) {
        for (int j = 1; j < 2 * n + 2; ++j) {
            const auto p_of = [&](double v) {
                std::vector<double> yy = y;
                yy[j] = v;
                return detail::canned_P(n, i, yy);
            };
            out.instance.P_partials(i, j - 1) = detail::derivative(p_of, y[j], h);
        }
        for (int j = 1; j <= n; ++j) {
            const auto f_of = [&](double v) {
                std::vector<double> yy = y;
                yy[j] = v;
                yy[n + 1 + j] = wpb(v);
                return detail::canned_P(n, i, yy);
            };
            out.F_partials(i, j - 1) = detail::derivative(f_of, x[j], h);
        }
    }
    return out;
}

}  // namespace wpdef

#pragma once

// Dense complex polynomials in X, bivariate polynomials in (X, Y) reduced
// modulo a Weierstrass cubic, rational maps, and an all-roots solver.

#include <wpdef/errors.hpp>
#include <wpdef/lattice.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wpdef {

/// Degree cap for every polynomial the library builds (n ≤ 12 multiplication
/// maps need X-degree 144).
inline constexpr int kMaxPolynomialDegree = 160;

/// Polynomial in X with complex coefficients, ascending powers. Trailing
/// exact zeros are stripped so degree() is the true degree; the zero
/// polynomial has degree −1.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<complex> coeffs) : c_(std::move(coeffs)) { trim(); }
    Polynomial(std::initializer_list<complex> coeffs) : c_(coeffs) { trim(); }

    static Polynomial constant(complex v) { return Polynomial{v}; }
    static Polynomial monomial(complex v, int degree) {
        std::vector<complex> c(degree + 1, 0.0);
        c[degree] = v;
        return Polynomial(std::move(c));
    }

    int degree() const { return int(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    std::span<const complex> coefficients() const& { return c_; }
    std::span<const complex> coefficients() const&& = delete;
    complex coefficient(int k) const { return k >= 0 && k < int(c_.size()) ? c_[k] : complex(0.0); }
    complex leading() const { return c_.empty() ? complex(0.0) : c_.back(); }

    complex operator()(complex x) const {
        complex acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    /// Σ|c_k||x|^k, the natural scale for judging |p(x)|.
    double magnitude_at(double abs_x) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * abs_x + std::abs(*it);
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<complex> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
        return Polynomial(std::move(d));
    }

    /// Drops trailing coefficients below rel_tol·max|c|.
    Polynomial pruned(double rel_tol) const {
        double mx = 0.0;
        for (complex v : c_) mx = std::max(mx, std::abs(v));
        std::vector<complex> c = c_;
        while (!c.empty() && std::abs(c.back()) <= rel_tol * mx) c.pop_back();
        return Polynomial(std::move(c));
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
        trim();
        return *this;
    }
    Polynomial& operator*=(complex s) {
        for (complex& v : c_) v *= s;
        trim();
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, complex s) { return a *= s; }
    friend Polynomial operator*(complex s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return {};
        if (a.degree() + b.degree() > kMaxPolynomialDegree)
            throw std::length_error("polynomial degree cap exceeded");
        std::vector<complex> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
        if (degree() > kMaxPolynomialDegree) throw std::length_error("polynomial degree cap exceeded");
    }

    std::vector<complex> c_;
};

/// 4X³ − g₂X − g₃ as a polynomial.
inline Polynomial weierstrass_cubic(const Invariants& inv) { return Polynomial{-inv.g3, -inv.g2, 0.0, 4.0}; }

/// p(T + c) as a polynomial in T (Horner composition).
inline Polynomial taylor_shift(const Polynomial& p, complex c) {
    if (c == 0.0) return p;
    const Polynomial t{c, 1.0};
    Polynomial acc;
    const auto co = p.coefficients();
    for (auto it = co.rbegin(); it != co.rend(); ++it) acc = acc * t + Polynomial{*it};
    return acc;
}

namespace detail {

/// Parlett–Reinsch diagonal similarity (powers of two) equalizing row and
/// column norms; the eigen-solver does not balance on its own.
inline void balance(Eigen::MatrixXcd& a) {
    const Eigen::Index n = a.rows();
    auto mag = [](complex v) { return std::abs(v.real()) + std::abs(v.imag()); };
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += mag(a(j, i));
                r += mag(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / 2.0;
            while (c < g) {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while (c > g) {
                f /= 2.0;
                c /= 4.0;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

}  // namespace detail

/// All roots of p, counted with multiplicity, sorted by (Re, Im).
///
/// Eigenvalues of the balanced companion matrix of the monic polynomial,
/// refined together by Aberth–Ehrlich iteration on the original
/// coefficients; each root keeps its iterate with the smallest backward
/// error. Throws RootFindingFailure when the eigen-solver fails or a root
/// keeps a backward error above 1e-8.
inline std::vector<complex> roots(const Polynomial& p) {
    const int d = p.degree();
    if (d < 0) throw RootFindingFailure("roots of the zero polynomial are undefined");
    if (d == 0) return {};

    const complex lead = p.leading();
    std::vector<complex> result;
    result.reserve(d);
    if (d == 1) {
        result.push_back(-p.coefficient(0) / lead);
    } else {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
        for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
        for (int k = 0; k < d; ++k) comp(k, d - 1) = -p.coefficient(k) / lead;
        detail::balance(comp);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, /*computeEigenvectors=*/false);
        if (solver.info() != Eigen::Success) throw RootFindingFailure("companion eigenvalue iteration failed");
        for (int i = 0; i < d; ++i) result.push_back(solver.eigenvalues()(i));
    }

    // Aberth–Ehrlich refinement of all roots at once. For |x| > 1 the values
    // p, p′ and the magnitude bound are all divided by x^d (Horner in 1/x),
    // which leaves their ratios unchanged and avoids overflow.
    struct Scaled {
        complex f;
        complex df;
        double mag;
    };
    auto eval = [&](complex x) {
        Scaled r{0.0, 0.0, 0.0};
        if (std::abs(x) <= 1.0) {
            for (int k = d; k >= 0; --k) {
                r.df = r.df * x + r.f;
                r.f = r.f * x + p.coefficient(k);
                r.mag = r.mag * std::abs(x) + std::abs(p.coefficient(k));
            }
            return r;
        }
        const complex w = 1.0 / x;
        for (int k = 0; k <= d; ++k) {
            r.f = r.f * w + p.coefficient(k);
            r.df = r.df * w + double(k) * p.coefficient(k);
            r.mag = r.mag * std::abs(w) + std::abs(p.coefficient(k));
        }
        r.df *= w;
        return r;
    };
    auto backward_error = [&](complex x) {
        const Scaled v = eval(x);
        return std::abs(v.f) / v.mag;
    };
    std::vector<complex> best = result;
    std::vector<double> best_error(d);
    for (int i = 0; i < d; ++i) best_error[i] = backward_error(result[i]);
    std::vector<bool> settled(d, false);
    for (int it = 0; it < 200; ++it) {
        bool moved = false;
        for (int i = 0; i < d; ++i) {
            if (settled[i]) continue;
            const complex x = result[i];
            const Scaled v = eval(x);
            if (std::abs(v.f) <= 4 * 2.220446049250313e-16 * v.mag) {
                settled[i] = true;
                continue;
            }
            const complex ratio = v.f / v.df;
            complex repulsion = 0.0;
            for (int j = 0; j < d; ++j)
                if (j != i && result[j] != x) repulsion += 1.0 / (x - result[j]);
            const complex step = ratio / (1.0 - ratio * repulsion);
            if (!is_finite(step)) continue;
            result[i] = x - step;
            const double e = backward_error(result[i]);
            if (e < best_error[i]) best_error[i] = e, best[i] = result[i];
            if (std::abs(step) > 1e-15 * std::abs(x)) moved = true; else settled[i] = true;
        }
        if (!moved) break;
    }
    result = best;
    for (double e : best_error)
        if (!(e < 1e-8)) throw RootFindingFailure("root did not converge to a small residual");
    std::sort(result.begin(), result.end(), [](complex a, complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return result;
}

/// Σ_j Y^j·P_j(X).
class BivariatePolynomial {
public:
    BivariatePolynomial() = default;
    explicit BivariatePolynomial(std::vector<Polynomial> by_y) : p_(std::move(by_y)) { trim(); }
    BivariatePolynomial(const Polynomial& x_only) : p_{x_only} { trim(); }  // NOLINT: implicit lift

    int y_degree() const { return int(p_.size()) - 1; }
    int x_degree() const {
        int d = -1;
        for (const auto& q : p_) d = std::max(d, q.degree());
        return d;
    }
    bool is_zero() const { return p_.empty(); }
    const Polynomial& y_coefficient(int j) const {
        static const Polynomial zero;
        return j >= 0 && j < int(p_.size()) ? p_[j] : zero;
    }
    std::span<const Polynomial> y_coefficients() const& { return p_; }
    std::span<const Polynomial> y_coefficients() const&& = delete;

    complex operator()(complex x, complex y) const {
        complex acc = 0.0;
        for (auto it = p_.rbegin(); it != p_.rend(); ++it) acc = acc * y + (*it)(x);
        return acc;
    }

    /// Rewrites Y² as cubic(X) until the Y-degree is at most 1.
    BivariatePolynomial reduced(const Polynomial& cubic) const {
        std::vector<Polynomial> r = p_;
        for (int j = int(r.size()) - 1; j >= 2; --j) {
            r[j - 2] += r[j] * cubic;
            r[j] = Polynomial();
        }
        return BivariatePolynomial(std::move(r));
    }

    friend bool operator==(const BivariatePolynomial&, const BivariatePolynomial&) = default;

private:
    void trim() {
        while (!p_.empty() && p_.back().is_zero()) p_.pop_back();
    }

    std::vector<Polynomial> p_;
};

/// num(T, Y) / den(T, Y) with T = X − center, on the curve Y² = 4X³ − g₂X − g₃.
/// A nonzero center keeps coefficients small where values cluster.
class RationalMap {
public:
    RationalMap(BivariatePolynomial num, BivariatePolynomial den, complex center = 0.0)
        : num_(std::move(num)), den_(std::move(den)), center_(center) {
        if (den_.is_zero()) throw std::invalid_argument("rational map denominator is identically zero");
    }

    const BivariatePolynomial& numerator() const { return num_; }
    const BivariatePolynomial& denominator() const { return den_; }
    complex center() const { return center_; }

    complex operator()(complex x, complex y) const { return num_(x - center_, y) / den_(x - center_, y); }

    RationalMap reduced(const Invariants& inv) const {
        const Polynomial cubic = taylor_shift(weierstrass_cubic(inv), center_);
        return RationalMap(num_.reduced(cubic), den_.reduced(cubic), center_);
    }

    friend bool operator==(const RationalMap&, const RationalMap&) = default;

private:
    BivariatePolynomial num_;
    BivariatePolynomial den_;
    complex center_;
};

/// num(T) / den(T) with T = X − center.
struct RationalFunction {
    Polynomial num;
    Polynomial den;
    complex center = 0.0;

    complex operator()(complex x) const { return num(x - center) / den(x - center); }
};

}  // namespace wpdef

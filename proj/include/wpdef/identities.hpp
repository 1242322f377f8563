#pragma once

// Addition and duplication formulas, the differential equation, and the
// multiplication-by-n maps built from division polynomials.

#include <wpdef/errors.hpp>
#include <wpdef/lattice.hpp>
#include <wpdef/polynomial.hpp>
#include <wpdef/weierstrass.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace wpdef {

inline constexpr double kDegenerateAdditionTol = 1e-12;
inline constexpr double kHalfPeriodTol = 1e-12;

/// ℘(z+w) = ¼((℘′z − ℘′w)/(℘z − ℘w))² − ℘z − ℘w.
inline complex addition_formula(complex pz, complex pw, complex ppz, complex ppw) {
    const complex d = pz - pw;
    if (std::abs(d) < kDegenerateAdditionTol * (1.0 + std::abs(pz) + std::abs(pw)))
        throw DegenerateAddition("addition formula with p(z) == p(w)");
    const complex q = (ppz - ppw) / d;
    return 0.25 * q * q - pz - pw;
}

/// ℘(2z) = ¼(℘″z/℘′z)² − 2℘z.
inline complex duplication(complex pz, complex ppz, complex ppz2) {
    if (std::abs(ppz) <= kHalfPeriodTol) throw HalfPeriodSingularity("duplication at a zero of p'");
    const complex q = ppz2 / ppz;
    return 0.25 * q * q - 2.0 * pz;
}

/// |℘′² − (4℘³ − g₂℘ − g₃)| / (1 + |℘|³) with the cubic taken from `inv`.
inline double diffeq_residual(complex z, const Lattice& lat, const Invariants& inv) {
    const auto pair = weierstrass_for(lat)->p_and_prime(z);
    const complex p = pair.p.value, dp = pair.dp.value;
    return std::abs(dp * dp - inv.cubic(p)) / (1.0 + std::pow(std::abs(p), 3));
}

inline double diffeq_residual(complex z, const Lattice& lat) {
    return diffeq_residual(z, lat, weierstrass_for(lat)->invariants());
}

/// Expansion point for the division polynomials. When two roots of the cubic
/// nearly coincide (elongated lattices), the torsion values of ℘ cluster
/// between them and monomials in X cancel catastrophically there, so the
/// midpoint of that pair is used; otherwise 0.
inline complex division_center(const Invariants& inv) {
    const std::vector<complex> e = roots(weierstrass_cubic(inv));
    double lo = INFINITY, hi = 0.0;
    complex mid = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double d = std::abs(e[i] - e[j]);
            hi = std::max(hi, d);
            if (d < lo) lo = d, mid = 0.5 * (e[i] + e[j]);
        }
    return lo < 0.25 * hi ? mid : complex(0.0);
}

/// ψ₁..ψ_N for Y² = 4X³ − g₂X − g₃, stored as ψ_n = Y^{e_n}·f_n(X) with
/// e_n = 1 for even n and 0 for odd n. The f_n are polynomials in
/// T = X − center.
class DivisionPolynomialSet {
public:
    DivisionPolynomialSet(const Invariants& inv, int count, complex center = 0.0) : inv_(inv), center_(center) {
        if (count < 4) count = 4;
        const complex g2 = inv.g2, g3 = inv.g3;
        const Polynomial cubic = taylor_shift(weierstrass_cubic(inv), center);
        const Polynomial cubic2 = cubic * cubic;
        f_.reserve(count + 1);
        f_.push_back({});  // ψ₀ = 0
        f_.push_back(Polynomial{1.0});
        f_.push_back(Polynomial{1.0});
        f_.push_back(taylor_shift(Polynomial{-g2 * g2 / 16.0, -3.0 * g3, -1.5 * g2, 0.0, 3.0}, center));
        f_.push_back(taylor_shift(2.0 * Polynomial{-0.5 * g3 * g3 + g2 * g2 * g2 / 64.0, -0.25 * g2 * g3,
                                                   -5.0 / 16.0 * g2 * g2, -5.0 * g3, -1.25 * g2, 0.0, 1.0},
                                  center));
        for (int n = 5; n <= count; ++n) {
            const int m = n / 2;
            if (n % 2 == 1) {
                // ψ_{2m+1} = ψ_{m+2}ψ_m³ − ψ_{m−1}ψ_{m+1}³; the even-index factor carries Y⁴.
                Polynomial a = f_[m + 2] * f_[m] * f_[m] * f_[m];
                Polynomial b = f_[m - 1] * f_[m + 1] * f_[m + 1] * f_[m + 1];
                if (m % 2 == 0)
                    a = a * cubic2;
                else
                    b = b * cubic2;
                f_.push_back(a - b);
            } else {
                // ψ_{2m} = ψ_m(ψ_{m+2}ψ_{m−1}² − ψ_{m−2}ψ_{m+1}²)/ψ₂; the Y powers cancel to one.
                const Polynomial a = f_[m + 2] * f_[m - 1] * f_[m - 1];
                const Polynomial b = f_[m - 2] * f_[m + 1] * f_[m + 1];
                f_.push_back(f_[m] * (a - b));
            }
        }
    }

    const Invariants& invariants() const { return inv_; }
    complex center() const { return center_; }
    int count() const { return int(f_.size()) - 1; }
    bool has_y(int n) const { return n % 2 == 0; }
    /// X-part f_n of ψ_n, in T = X − center.
    const Polynomial& x_part(int n) const { return f_.at(n); }

    complex operator()(int n, complex x, complex y) const {
        const complex v = f_.at(n)(x - center_);
        return has_y(n) ? y * v : v;
    }

private:
    Invariants inv_;
    complex center_;
    std::vector<Polynomial> f_;
};

/// X-only rational function F_n with ℘(nz) = F_n(℘(z)):
/// F_n = X − ψ_{n−1}ψ_{n+1}/ψ_n² with Y² replaced by the cubic, expanded
/// about division_center(inv).
inline RationalFunction multiplication_function(int n, const Invariants& inv) {
    if (n < 2 || n > 12) throw std::invalid_argument("multiplication_by_n: n must be in [2, 12]");
    const complex c = division_center(inv);
    const DivisionPolynomialSet psi(inv, n + 1, c);
    const Polynomial cubic = taylor_shift(weierstrass_cubic(inv), c);
    Polynomial cross = psi.x_part(n - 1) * psi.x_part(n + 1);
    Polynomial den = psi.x_part(n) * psi.x_part(n);
    if (n % 2 == 1)
        cross = cross * cubic;
    else
        den = den * cubic;
    const Polynomial x = Polynomial{c, 1.0};
    return {x * den - cross, den, c};
}

/// ℘(nz) as a rational map in (℘(z), ℘′(z)); Y-free after reduction.
/// Coefficients grow like g^{n²}, so evaluation loses digits beyond n ≈ 8.
inline RationalMap multiplication_by_n(int n, const Invariants& inv) {
    RationalFunction f = multiplication_function(n, inv);
    return RationalMap(BivariatePolynomial(std::move(f.num)), BivariatePolynomial(std::move(f.den)), f.center);
}

/// All n² roots X of num(X) − target·den(X) for the multiplication-by-n map:
/// the candidate values of ℘(z/n) given target = ℘(z).
inline std::vector<complex> division_values(int n, complex target, const Invariants& inv) {
    if (n < 2 || n > 6) throw std::invalid_argument("division_values: n must be in [2, 6]");
    const RationalFunction f = multiplication_function(n, inv);
    std::vector<complex> r = roots(f.num - target * f.den);
    for (complex& v : r) v += f.center;
    return r;
}

}  // namespace wpdef

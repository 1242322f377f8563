#pragma once

// Lattices Ω = ω₁ℤ + ω₂ℤ ⊂ ℂ: basis reduction, real-form classification,
// Eisenstein invariants and complex-multiplication detection.

#include <wpdef/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wpdef {

using complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool is_finite(complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Real coordinates of a point in a lattice basis: z = x·ω₁ + y·ω₂.
struct Coordinates {
    double x;
    double y;
};

class Lattice;
Lattice reduce_generators(complex omega1, complex omega2);

/// A lattice with a reduced, positively oriented basis.
///
/// The only way to obtain one is reduce_generators(), so every instance
/// satisfies Im τ > 0, |Re τ| ≤ 1/2 and |τ| ≥ 1 (up to 1e-12 slack), and
/// ω₁ is a shortest nonzero vector.
class Lattice {
public:
    complex omega1() const { return omega1_; }
    complex omega2() const { return omega2_; }
    complex tau() const { return tau_; }

    /// Length of the shortest nonzero lattice vector.
    double shortest_vector() const { return std::abs(omega1_); }

    /// Covolume |Im(ω̄₁ω₂)|.
    double area() const { return (std::conj(omega1_) * omega2_).imag(); }

    Coordinates coordinates(complex z) const {
        // [Re ω₁ Re ω₂; Im ω₁ Im ω₂] (x, y)ᵀ = (Re z, Im z)ᵀ
        const double a = omega1_.real(), b = omega2_.real();
        const double c = omega1_.imag(), d = omega2_.imag();
        const double det = a * d - b * c;
        return {(d * z.real() - b * z.imag()) / det, (a * z.imag() - c * z.real()) / det};
    }

    complex point(double m, double n) const { return m * omega1_ + n * omega2_; }

    /// Nearest lattice point to z (rounding in the reduced basis, then
    /// scanning the 3×3 neighbour block).
    complex nearest_point(complex z) const {
        const Coordinates c = coordinates(z);
        const double m0 = std::round(c.x), n0 = std::round(c.y);
        complex best = point(m0, n0);
        double best_d = std::abs(z - best);
        for (int dm = -1; dm <= 1; ++dm) {
            for (int dn = -1; dn <= 1; ++dn) {
                const complex w = point(m0 + dm, n0 + dn);
                const double d = std::abs(z - w);
                if (d < best_d) {
                    best_d = d;
                    best = w;
                }
            }
        }
        return best;
    }

    /// True if z has integer coordinates within tol.
    bool contains(complex z, double tol = 1e-9) const {
        const Coordinates c = coordinates(z);
        return std::abs(c.x - std::round(c.x)) <= tol && std::abs(c.y - std::round(c.y)) <= tol;
    }

    friend bool operator==(const Lattice&, const Lattice&) = default;

private:
    Lattice(complex w1, complex w2) : omega1_(w1), omega2_(w2), tau_(w2 / w1) {}

    complex omega1_;
    complex omega2_;
    complex tau_;

    friend Lattice reduce_generators(complex, complex);
};

/// Gauss reduction: τ ↦ τ − n and τ ↦ −1/τ until τ lies in the
/// fundamental domain. Throws DegenerateLattice when ω₁, ω₂ are
/// ℝ-dependent, zero or non-finite.
inline Lattice reduce_generators(complex omega1, complex omega2) {
    constexpr double kDegenerate = 1e-12;
    constexpr double kSlack = 1e-12;
    constexpr int kMaxIterations = 10000;

    if (!is_finite(omega1) || !is_finite(omega2) || omega1 == 0.0 || omega2 == 0.0)
        throw DegenerateLattice("lattice generators must be finite and nonzero");
    complex tau = omega2 / omega1;
    if (!is_finite(tau) || std::abs(tau.imag()) < kDegenerate * std::max(1.0, std::abs(tau)))
        throw DegenerateLattice("lattice generators are linearly dependent over R");
    if (tau.imag() < 0) omega2 = -omega2;

    complex w1 = omega1, w2 = omega2;
    for (int it = 0;; ++it) {
        if (it == kMaxIterations) throw DegenerateLattice("basis reduction did not converge");
        tau = w2 / w1;
        if (std::abs(tau.real()) > 0.5 + kSlack) {
            const double n = std::floor(tau.real() + 0.5);
            w2 -= n * w1;
            continue;
        }
        if (std::norm(tau) < 1.0 - kSlack) {
            const complex t = w1;
            w1 = w2;
            w2 = -t;
            continue;
        }
        break;
    }
    return Lattice(w1, w2);
}

// ---------------------------------------------------------------------------
// Real lattices

enum class LatticeClass { Rectangular, Rhombic, NonReal };

inline const char* to_string(LatticeClass c) {
    switch (c) {
        case LatticeClass::Rectangular: return "Rectangular";
        case LatticeClass::Rhombic: return "Rhombic";
        case LatticeClass::NonReal: return "NonReal";
    }
    return "?";
}

/// Integer matrix of complex conjugation in the basis (ω₁, ω₂), if
/// conjugation maps the lattice into itself within tol.
/// Column j holds the coordinates of conj(ω_j).
inline std::optional<std::array<std::array<long, 2>, 2>> conjugation_matrix(const Lattice& lat,
                                                                           double tol = 1e-9) {
    const Coordinates c1 = lat.coordinates(std::conj(lat.omega1()));
    const Coordinates c2 = lat.coordinates(std::conj(lat.omega2()));
    for (double v : {c1.x, c1.y, c2.x, c2.y})
        if (std::abs(v - std::round(v)) > tol) return std::nullopt;
    return std::array<std::array<long, 2>, 2>{
        {{std::lround(c1.x), std::lround(c2.x)}, {std::lround(c1.y), std::lround(c2.y)}}};
}

inline bool is_closed_under_conjugation(const Lattice& lat, double tol = 1e-9) {
    return conjugation_matrix(lat, tol).has_value();
}

/// Rectangular iff the conjugation involution is ≡ I (mod 2) in some (hence
/// every) basis: diag(1,−1) is, the swap matrix of a rhombic basis is not,
/// and GL₂(ℤ)-conjugation preserves the residue.
inline LatticeClass classify_real(const Lattice& lat, double tol = 1e-9) {
    const auto c = conjugation_matrix(lat, tol);
    if (!c) return LatticeClass::NonReal;
    const auto& m = *c;
    const bool identity_mod2 = (m[0][1] % 2 == 0) && (m[1][0] % 2 == 0);
    return identity_mod2 ? LatticeClass::Rectangular : LatticeClass::Rhombic;
}

struct RealFormBasis {
    LatticeClass kind;
    complex omega1;
    complex omega2;
};

/// Explicit generators realizing the real form: ω₁ real and ω₂ imaginary
/// (rectangular) or ω₂ = conj(ω₁) (rhombic). Searches unimodular changes
/// of the reduced basis with entries bounded by `bound`.
inline std::optional<RealFormBasis> real_form_basis(const Lattice& lat, int bound = 4,
                                                    double tol = 1e-9) {
    const complex w1 = lat.omega1(), w2 = lat.omega2();
    std::optional<RealFormBasis> rhombic;
    for (int p = -bound; p <= bound; ++p)
        for (int q = -bound; q <= bound; ++q)
            for (int r = -bound; r <= bound; ++r)
                for (int s = -bound; s <= bound; ++s) {
                    const int det = p * s - q * r;
                    if (det != 1 && det != -1) continue;
                    const complex e1 = double(p) * w1 + double(q) * w2;
                    const complex e2 = double(r) * w1 + double(s) * w2;
                    const double scale = std::max(std::abs(e1), std::abs(e2));
                    if (std::abs(e1.imag()) <= tol * scale && std::abs(e2.real()) <= tol * scale &&
                        e1.real() > 0 && e2.imag() > 0)
                        return RealFormBasis{LatticeClass::Rectangular, e1, e2};
                    if (!rhombic && std::abs(e1 - std::conj(e2)) <= tol * scale && e1.imag() > 0 &&
                        e1.real() > 0)
                        rhombic = RealFormBasis{LatticeClass::Rhombic, e1, e2};
                }
    return rhombic;
}

// ---------------------------------------------------------------------------
// Invariants

/// g₂, g₃ of the cubic (℘′)² = 4℘³ − g₂℘ − g₃.
struct Invariants {
    complex g2;
    complex g3;

    complex discriminant() const { return g2 * g2 * g2 - 27.0 * g3 * g3; }
    /// 4X³ − g₂X − g₃
    complex cubic(complex x) const { return (4.0 * x * x - g2) * x - g3; }
};

struct EisensteinResult {
    Invariants invariants;
    double g2_error;
    double g3_error;
};

namespace detail {

// Σ_{k>R} k^{-p}, p ≥ 3.
inline double zeta_tail(int p, long radius) {
    constexpr long kEulerMaclaurinStart = 20;
    double head = 0.0;
    long n = radius + 1;
    for (; n < kEulerMaclaurinStart; ++n) head += std::pow(double(n), -p);
    const double N = double(n);
    const double pp = p;
    return head + std::pow(N, 1 - pp) / (pp - 1) + 0.5 * std::pow(N, -pp) +
           pp / 12.0 * std::pow(N, -pp - 1) -
           pp * (pp + 1) * (pp + 2) / 720.0 * std::pow(N, -pp - 3) +
           pp * (pp + 1) * (pp + 2) * (pp + 3) * (pp + 4) / 30240.0 * std::pow(N, -pp - 5);
}

// Shell sums s(k) = Σ_{max(|m|,|n|)=k} (m + nτ)^{-w} for k = 1..R, plus
// Σ|m + nτ|^{-w} over the whole box.
struct ShellSums {
    std::vector<complex> g4;  // index k, g4[0] = 0
    std::vector<complex> g6;
    double abs4 = 0.0;
    double abs6 = 0.0;
};

inline ShellSums eisenstein_shells(complex tau, long radius) {
    ShellSums out;
    out.g4.assign(radius + 1, 0.0);
    out.g6.assign(radius + 1, 0.0);
    auto add = [&](long k, double m, double n) {
        const complex w = m + n * tau;
        const complex inv2 = 1.0 / (w * w);
        const complex inv4 = inv2 * inv2;
        const complex inv6 = inv4 * inv2;
        out.g4[k] += inv4;
        out.g6[k] += inv6;
        out.abs4 += std::abs(inv4);
        out.abs6 += std::abs(inv6);
    };
    for (long k = 1; k <= radius; ++k) {
        for (long j = -k; j <= k; ++j) {
            add(k, double(j), double(k));
            add(k, double(j), double(-k));
        }
        for (long j = -k + 1; j <= k - 1; ++j) {
            add(k, double(k), double(j));
            add(k, double(-k), double(j));
        }
    }
    return out;
}

// Box sum up to `radius` plus the fitted asymptotic shell tail. Shells obey
// s(k) = k^{1-w}(A + B k^{-2} + C k^{-4} + ...); the coefficients are fitted
// over shells [radius/2, radius].
inline complex tail_corrected_sum(const std::vector<complex>& shells, int weight, long radius) {
    complex box = 0.0;
    for (long k = 1; k <= radius; ++k) box += shells[k];
    const long lo = std::max<long>(1, radius / 2);
    const long rows = radius - lo + 1;
    Eigen::MatrixXcd a(rows, 3);
    Eigen::VectorXcd rhs(rows);
    for (long k = lo; k <= radius; ++k) {
        const double kk = double(k);
        a(k - lo, 0) = 1.0;
        a(k - lo, 1) = 1.0 / (kk * kk);
        a(k - lo, 2) = 1.0 / (kk * kk * kk * kk);
        rhs(k - lo) = shells[k] * std::pow(kk, weight - 1);
    }
    const Eigen::VectorXcd coef = a.colPivHouseholderQr().solve(rhs);
    return box + coef(0) * zeta_tail(weight - 1, radius) + coef(1) * zeta_tail(weight + 1, radius) +
           coef(2) * zeta_tail(weight + 3, radius);
}

}  // namespace detail

/// g₂ = 60·Σ'ω⁻⁴ and g₃ = 140·Σ'ω⁻⁶ from the box of lattice points with
/// max coordinate ≤ radius, plus a fitted asymptotic correction for the
/// shells outside the box. Errors are |G(R) − G(R/2)| plus a roundoff floor.
inline EisensteinResult eisenstein_invariants(const Lattice& lat, int radius = 64) {
    if (radius < 10) throw std::invalid_argument("eisenstein_invariants: radius must be >= 10");
    const detail::ShellSums sh = detail::eisenstein_shells(lat.tau(), radius);
    const long half = radius / 2;
    const complex g4 = detail::tail_corrected_sum(sh.g4, 4, radius);
    const complex g6 = detail::tail_corrected_sum(sh.g6, 6, radius);
    const complex g4_half = detail::tail_corrected_sum(sh.g4, 4, half);
    const complex g6_half = detail::tail_corrected_sum(sh.g6, 6, half);
    constexpr double eps = 2.220446049250313e-16;

    const complex w1 = lat.omega1();
    const complex s4 = 1.0 / (w1 * w1 * w1 * w1);
    const complex s6 = s4 / (w1 * w1);
    const double e4 = std::abs(g4 - g4_half) + 8 * eps * sh.abs4;
    const double e6 = std::abs(g6 - g6_half) + 8 * eps * sh.abs6;
    return {{60.0 * g4 * s4, 140.0 * g6 * s6}, 60.0 * e4 * std::abs(s4), 140.0 * e6 * std::abs(s6)};
}

// ---------------------------------------------------------------------------
// Complex multiplication

struct MinimalPolynomial {
    long a;
    long b;
    long c;

    long discriminant() const { return b * b - 4 * a * c; }
};

/// Non-integer α with αΩ ⊆ Ω together with the primitive integer quadratic
/// aτ² + bτ + c = 0 it comes from (α = aτ, N(α) = ac).
struct CMWitness {
    complex alpha;
    MinimalPolynomial min_poly;
    long norm;
    double containment_residual;
};

/// Search for aτ² + bτ + c ≈ 0 with a ∈ [1,B], |b|,|c| ≤ B. For each (a,b)
/// the only candidate c is the integer nearest −Re(aτ² + bτ). Smallest a wins,
/// then smallest |b|, so the returned triple is primitive.
inline std::optional<CMWitness> detect_cm(const Lattice& lat, long coeff_bound = 50,
                                          double tol = 1e-9) {
    const complex tau = lat.tau();
    const complex tau2 = tau * tau;
    const double abs_tau = std::abs(tau);
    for (long a = 1; a <= coeff_bound; ++a) {
        for (long bb = 0; bb <= coeff_bound; ++bb) {
            for (long b : {bb, -bb}) {
                if (bb == 0 && b != 0) continue;
                const complex partial = double(a) * tau2 + double(b) * tau;
                const double cr = std::round(-partial.real());
                if (std::abs(cr) > double(coeff_bound)) continue;
                const long c = long(cr);
                const double scale = a * abs_tau * abs_tau + std::abs(double(b)) * abs_tau + std::abs(double(c));
                if (std::abs(partial + double(c)) >= tol * scale) continue;
                if (b * b - 4 * a * c >= 0) continue;
                if (std::gcd(std::gcd(a, std::abs(b)), std::abs(c)) != 1) continue;

                const complex alpha = double(a) * tau;
                double residual = 0.0;
                for (complex w : {lat.omega1(), lat.omega2()}) {
                    const Coordinates co = lat.coordinates(alpha * w);
                    residual = std::max({residual, std::abs(co.x - std::round(co.x)),
                                         std::abs(co.y - std::round(co.y))});
                }
                if (residual >= tol * std::max(1.0, double(std::abs(b) + std::abs(c) + a))) continue;
                return CMWitness{alpha, {a, b, c}, a * c, residual};
            }
        }
    }
    return std::nullopt;
}

}  // namespace wpdef

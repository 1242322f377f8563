#pragma once

// Weierstrass ℘, ℘′, ℘″: Laurent series at a reduced argument plus repeated
// duplication, and a slow direct-summation reference.

#include <wpdef/errors.hpp>
#include <wpdef/lattice.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wpdef {

inline constexpr double kEpsilon = 2.220446049250313e-16;
inline constexpr double kDefaultEvalTol = 1e-12;
inline constexpr int kLaurentTerms = 40;
inline constexpr int kDefaultEisensteinRadius = 64;

struct EvalResult {
    complex value;
    double err_estimate;
};

/// ℘(z) = 1/z² + Σ_{k≥2} c_k z^{2k−2}; coeffs[k−2] holds c_k.
struct LaurentCoefficients {
    Invariants invariants;
    std::vector<complex> coeffs;

    complex c(int k) const { return coeffs.at(k - 2); }
    int last_index() const { return int(coeffs.size()) + 1; }
};

/// c₂ = g₂/20, c₃ = g₃/28, c_k = 3/((2k+1)(k−3))·Σ_{m=2}^{k−2} c_m c_{k−m}.
inline LaurentCoefficients laurent_coefficients(const Invariants& inv, int count) {
    if (count < 2) throw std::invalid_argument("laurent_coefficients: count must be >= 2");
    std::vector<complex> c;
    c.reserve(count);
    c.push_back(inv.g2 / 20.0);
    if (count >= 3) c.push_back(inv.g3 / 28.0);
    for (int k = 4; k <= count; ++k) {
        complex s = 0.0;
        for (int m = 2; m <= k - 2; ++m) s += c[m - 2] * c[k - m - 2];
        c.push_back(3.0 / double((2 * k + 1) * (k - 3)) * s);
    }
    return {inv, std::move(c)};
}

inline double pole_distance(complex z, const Lattice& lat) { return std::abs(z - lat.nearest_point(z)); }

namespace detail {

inline void check_pole(complex z, const Lattice& lat) {
    if (pole_distance(z, lat) <= 1e-12 * lat.shortest_vector())
        throw PoleError("evaluation point lies on a lattice point");
}

}  // namespace detail

/// Reference value of ℘ from the defining lattice sum over max coordinate
/// ≤ radius, with one Richardson step over the shell partial sums at R and
/// R/2 (the tail decays like (R+½)^{-2}). err_estimate is the change from
/// the coarser extrapolation (R/2, R/4) plus a roundoff floor.
inline EvalResult wp_direct_sum(complex z, const Lattice& lat, int radius) {
    if (radius < 4) throw std::invalid_argument("wp_direct_sum: radius must be >= 4");
    detail::check_pole(z, lat);

    const double zr = z.real(), zi = z.imag();
    const double w1r = lat.omega1().real(), w1i = lat.omega1().imag();
    const double w2r = lat.omega2().real(), w2i = lat.omega2().imag();
    double abs_sum = 0.0;
    auto term = [&](double m, double n, double& sr, double& si) {
        const double or_ = m * w1r + n * w2r, oi = m * w1i + n * w2i;
        const double ar = zr - or_, ai = zi - oi;
        const double a2 = ar * ar + ai * ai;
        const double ia4 = 1.0 / (a2 * a2);
        const double o2 = or_ * or_ + oi * oi;
        const double io4 = 1.0 / (o2 * o2);
        // 1/w² = conj(w)²/|w|⁴
        const double tr = (ar * ar - ai * ai) * ia4 - (or_ * or_ - oi * oi) * io4;
        const double ti = (-2.0 * ar * ai) * ia4 + (2.0 * or_ * oi) * io4;
        sr += tr;
        si += ti;
        abs_sum += std::abs(tr) + std::abs(ti);
    };

    const long r1 = radius, r2 = radius / 2, r3 = radius / 4;
    complex total = 1.0 / (z * z);
    complex s2 = 0.0, s3 = 0.0;
    for (long k = 1; k <= r1; ++k) {
        double sr = 0.0, si = 0.0;
        for (long j = -k; j <= k; ++j) {
            term(double(j), double(k), sr, si);
            term(double(j), double(-k), sr, si);
        }
        for (long j = -k + 1; j <= k - 1; ++j) {
            term(double(k), double(j), sr, si);
            term(double(-k), double(j), sr, si);
        }
        total += complex(sr, si);
        if (k == r3) s3 = total;
        if (k == r2) s2 = total;
    }
    auto richardson = [](complex s_hi, long r_hi, complex s_lo, long r_lo) {
        const double b_hi = (r_hi + 0.5) * (r_hi + 0.5), b_lo = (r_lo + 0.5) * (r_lo + 0.5);
        return (b_hi * s_hi - b_lo * s_lo) / (b_hi - b_lo);
    };
    const complex fine = richardson(total, r1, s2, r2);
    const complex coarse = richardson(s2, r2, s3, r3);
    const double roundoff = 8 * kEpsilon * (abs_sum + std::abs(1.0 / (z * z)));
    return {fine, std::abs(fine - coarse) + roundoff};
}

/// ℘ and its derivatives for one lattice.
///
/// Internally works on the normalized lattice Λ = Ω/ω₁ (shortest vector 1):
/// ℘_Ω(z) = ω₁⁻²℘_Λ(z/ω₁), ℘′_Ω(z) = ω₁⁻³℘′_Λ(z/ω₁). Immutable after
/// construction and safe to share between threads.
class Weierstrass {
public:
    explicit Weierstrass(const Lattice& lat, int eisenstein_radius = kDefaultEisensteinRadius)
        : lattice_(lat), unit_(reduce_generators(1.0, lat.tau())) {
        const EisensteinResult e = eisenstein_invariants(unit_, eisenstein_radius);
        init(e.invariants);
    }

    /// Uses the given invariants of Ω instead of computing them.
    Weierstrass(const Lattice& lat, const Invariants& inv)
        : lattice_(lat), unit_(reduce_generators(1.0, lat.tau())) {
        const complex w1 = lat.omega1();
        const complex w2 = w1 * w1;
        init({inv.g2 * w2 * w2, inv.g3 * w2 * w2 * w2});
    }

    const Lattice& lattice() const { return lattice_; }
    const Invariants& invariants() const { return invariants_; }

    struct Pair {
        EvalResult p;
        EvalResult dp;
    };

    /// ℘(z) and ℘′(z) propagated jointly through the duplication steps.
    Pair p_and_prime(complex z, double tol = kDefaultEvalTol) const {
        const complex w1 = lattice_.omega1();
        complex u = z / w1;
        u -= unit_.nearest_point(u);
        if (std::abs(u) <= 1e-12) throw PoleError("evaluation point lies on a lattice point");

        int halvings = 0;
        while (std::abs(u) / std::ldexp(1.0, halvings) >= kReductionRadius) ++halvings;

        UnitPair r;
        try {
            r = duplicate_from(u, halvings, tol);
        } catch (const HalfPeriodSingularity&) {
            r = duplicate_from(u, halvings + 1, tol);
        }
        const complex s2 = 1.0 / (w1 * w1);
        const complex s3 = s2 / w1;
        return {{r.p * s2, r.p_rel_err * std::abs(r.p * s2)}, {r.dp * s3, r.dp_rel_err * std::abs(r.dp * s3)}};
    }

    EvalResult p(complex z, double tol = kDefaultEvalTol) const { return p_and_prime(z, tol).p; }
    EvalResult p_prime(complex z, double tol = kDefaultEvalTol) const { return p_and_prime(z, tol).dp; }

    /// ℘″ = 6℘² − g₂/2.
    EvalResult p_second(complex z, double tol = kDefaultEvalTol) const {
        const EvalResult v = p(z, tol);
        const complex value = 6.0 * v.value * v.value - invariants_.g2 / 2.0;
        const double err = 12.0 * std::abs(v.value) * v.err_estimate + 4 * kEpsilon * std::abs(value);
        return {value, err};
    }

private:
    static constexpr double kReductionRadius = 0.4;  // in units of the shortest vector
    static constexpr double kHalfPeriodThreshold = 1e-12;

    struct UnitPair {
        complex p;
        complex dp;
        double p_rel_err;
        double dp_rel_err;
    };

    void init(const Invariants& unit_inv) {
        unit_invariants_ = unit_inv;
        coeffs_ = laurent_coefficients(unit_inv, kLaurentTerms).coeffs;
        const complex w1 = lattice_.omega1();
        const complex w2 = 1.0 / (w1 * w1);
        invariants_ = {unit_inv.g2 * w2 * w2, unit_inv.g3 * w2 * w2 * w2};
    }

    UnitPair duplicate_from(complex u0, int halvings, double tol) const {
        const complex u = u0 / std::ldexp(1.0, halvings);
        const complex u2 = u * u;
        const complex inv2 = 1.0 / u2;
        complex p = inv2;
        complex dp = -2.0 * inv2 / u;
        double mag = std::abs(inv2);
        double dmag = std::abs(dp);
        complex power = 1.0;  // u^{2k−4}
        const double cutoff = 1e-3 * tol * std::abs(inv2);
        // Symmetric lattices have whole residue classes of vanishing c_k
        // (odd k when g₃ = 0, k ≢ 0 mod 3 when g₂ = 0), so convergence is
        // judged on a window of three consecutive terms.
        std::array<double, 3> recent{};
        for (int k = 2; k <= kLaurentTerms; ++k) {
            const complex pw_next = power * u2;  // u^{2k−2}
            const complex t = coeffs_[k - 2] * pw_next;
            const complex dt = double(2 * k - 2) * coeffs_[k - 2] * power * u;  // u^{2k−3}
            p += t;
            dp += dt;
            mag += std::abs(t);
            dmag += std::abs(dt);
            power = pw_next;
            recent[k % 3] = std::max(std::abs(t), std::abs(dt) * std::abs(u));
            if (k >= 6 && std::max({recent[0], recent[1], recent[2]}) < cutoff) break;
        }
        double p_err = 4 * kEpsilon * mag / std::abs(p);
        double dp_err = 4 * kEpsilon * dmag / std::abs(dp);

        const complex g2 = unit_invariants_.g2;
        for (int i = 0; i < halvings; ++i) {
            if (std::abs(dp) < kHalfPeriodThreshold)
                throw HalfPeriodSingularity("duplication step hit a zero of the derivative");
            const complex p2 = 6.0 * p * p - g2 / 2.0;
            const complex m = p2 / dp;
            const complex m2 = m * m;
            const complex np = m2 / 4.0 - 2.0 * p;
            const complex ndp = m * (3.0 * p - m2 / 4.0) - dp;
            const double m_err = 2 * p_err * 12.0 * std::abs(p * p) / std::max(std::abs(p2), 1e-300) + dp_err;
            p_err = (std::abs(m2) / 2.0 * m_err + 2.0 * std::abs(p) * p_err) / std::abs(np) + 2 * kEpsilon;
            dp_err = (std::abs(m) * (3.0 * std::abs(p) + 0.75 * std::abs(m2)) * (m_err + p_err) +
                      std::abs(dp) * dp_err) /
                         std::abs(ndp) +
                     2 * kEpsilon;
            p = np;
            dp = ndp;
        }
        return {p, dp, p_err, dp_err};
    }

    Lattice lattice_;
    Lattice unit_;
    Invariants invariants_{};
    Invariants unit_invariants_{};
    std::vector<complex> coeffs_;
};

/// Shared evaluator for a lattice. Concurrent readers are allowed; building
/// the same entry twice is harmless.
inline std::shared_ptr<const Weierstrass> weierstrass_for(const Lattice& lat) {
    using Key = std::array<std::uint64_t, 4>;
    static std::shared_mutex mutex;
    static std::map<Key, std::shared_ptr<const Weierstrass>> cache;

    const Key key{std::bit_cast<std::uint64_t>(lat.omega1().real()), std::bit_cast<std::uint64_t>(lat.omega1().imag()),
                  std::bit_cast<std::uint64_t>(lat.omega2().real()), std::bit_cast<std::uint64_t>(lat.omega2().imag())};
    {
        std::shared_lock lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto built = std::make_shared<const Weierstrass>(lat);
    std::unique_lock lock(mutex);
    return cache.try_emplace(key, std::move(built)).first->second;
}

inline EvalResult wp_eval(complex z, const Lattice& lat, double tol = kDefaultEvalTol) {
    return weierstrass_for(lat)->p(z, tol);
}

inline EvalResult wp_prime_eval(complex z, const Lattice& lat, double tol = kDefaultEvalTol) {
    return weierstrass_for(lat)->p_prime(z, tol);
}

inline EvalResult wp_second_eval(complex z, const Lattice& lat, double tol = kDefaultEvalTol) {
    return weierstrass_for(lat)->p_second(z, tol);
}

}  // namespace wpdef

#pragma once

// Reference values computed by routes that share no code with the library:
// q-series for the invariants, Jacobi theta functions for p, and plain
// lattice sums and finite differences.

#include <wpdef/lattice.hpp>

#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

using complex = std::complex<double>;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double sigma(int k, int n) {
    double s = 0;
    for (int d = 1; d <= n; ++d)
        if (n % d == 0) s += std::pow(double(d), k);
    return s;
}

/// g2 and g3 of Z·w1 + Z·w2 from the Eisenstein q-expansions in q² = e^{2πiτ}.
struct Invariants {
    complex g2;
    complex g3;
};

inline Invariants q_series_invariants(complex w1, complex w2) {
    complex tau = w2 / w1;
    if (tau.imag() < 0) tau = -tau;
    const complex q2 = std::exp(complex(0, 2 * kPi) * tau);
    complex e4 = 1.0, e6 = 1.0, qn = 1.0;
    for (int n = 1; n < 200; ++n) {
        qn *= q2;
        if (std::abs(qn) < 1e-30) break;
        e4 += 240.0 * sigma(3, n) * qn;
        e6 -= 504.0 * sigma(5, n) * qn;
    }
    const double pi4 = std::pow(kPi, 4), pi6 = std::pow(kPi, 6);
    const complex w4 = std::pow(w1, 4), w6 = std::pow(w1, 6);
    return {60.0 * pi4 / 45.0 * e4 / w4, 140.0 * 2.0 * pi6 / 945.0 * e6 / w6};
}

struct Thetas {
    complex t1, t2, t3, t4;
};

/// Jacobi theta functions at v with nome q, summed until terms vanish.
inline Thetas thetas(complex v, complex q) {
    Thetas t{0.0, 0.0, 1.0, 1.0};
    for (int n = 0; n < 200; ++n) {
        const double h = n + 0.5;
        const complex qh = std::pow(q, h * h);
        const double sign = (n % 2) ? -1.0 : 1.0;
        t.t1 += 2.0 * sign * qh * std::sin((2.0 * n + 1) * v);
        t.t2 += 2.0 * qh * std::cos((2.0 * n + 1) * v);
        if (n >= 1) {
            const complex qn = std::pow(q, double(n) * n);
            t.t3 += 2.0 * qn * std::cos(2.0 * n * v);
            t.t4 += 2.0 * sign * qn * std::cos(2.0 * n * v);
        }
        if (std::abs(qh) < 1e-40) break;
    }
    return t;
}

/// p(z) = (π/w1)²·[θ₂²θ₃²·θ₄(v)²/θ₁(v)² − (θ₂⁴ + θ₃⁴)/3], v = πz/w1, q = e^{iπτ}.
inline complex wp_theta(complex z, complex w1, complex w2) {
    complex tau = w2 / w1;
    if (tau.imag() < 0) tau = -tau;
    const complex q = std::exp(complex(0, kPi) * tau);
    const complex v = kPi * z / w1;
    const Thetas at_v = thetas(v, q), at_0 = thetas(0.0, q);
    const complex t2 = at_0.t2, t3 = at_0.t3;
    const complex ratio = at_v.t4 / at_v.t1;
    const complex scale = (kPi / w1) * (kPi / w1);
    return scale * (t2 * t2 * t3 * t3 * ratio * ratio - (std::pow(t2, 4) + std::pow(t3, 4)) / 3.0);
}

/// Plain symmetric lattice sum over |m|, |n| ≤ radius with no tail correction.
inline complex wp_naive_sum(complex z, complex w1, complex w2, int radius) {
    complex s = 1.0 / (z * z);
    for (int m = -radius; m <= radius; ++m)
        for (int n = -radius; n <= radius; ++n) {
            if (m == 0 && n == 0) continue;
            const complex w = double(m) * w1 + double(n) * w2;
            s += 1.0 / ((z - w) * (z - w)) - 1.0 / (w * w);
        }
    return s;
}

/// Richardson-extrapolated central difference of a complex-analytic f.
inline complex derivative(const std::function<complex(complex)>& f, complex z, double h) {
    const auto d = [&](double s) { return (f(z + s) - f(z - s)) / (2 * s); };
    return (4.0 * d(h / 2) - d(h)) / 3.0;
}

inline complex second_derivative(const std::function<complex(complex)>& f, complex z, double h) {
    const complex f0 = f(z);
    const auto d = [&](double s) { return (f(z + s) - 2.0 * f0 + f(z - s)) / (s * s); };
    return (4.0 * d(h / 2) - d(h)) / 3.0;
}

inline double rel(complex got, complex want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace oracle

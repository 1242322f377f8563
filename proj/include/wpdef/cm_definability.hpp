#pragma once

// Rational maps R, S with ℘(αz) = R(℘(z)), ℘′(αz) = ℘′(z)·S(℘(z)) for a
// multiplier α with αΩ ⊆ Ω, and evaluation of ℘ on x + αy from values of
// ℘, ℘′ at real arguments only.

#include <wpdef/errors.hpp>
#include <wpdef/identities.hpp>
#include <wpdef/lattice.hpp>
#include <wpdef/polynomial.hpp>
#include <wpdef/weierstrass.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpdef {

struct CMRationalPair {
    complex alpha;
    RationalFunction R;
    /// S(X, Y) = Y·S_factor(X).
    RationalFunction S_factor;
    long norm;
    /// Held-out residual of the accepted fit.
    double residual;

    complex S(complex x, complex y) const { return y * S_factor(x); }
};

namespace detail {

inline constexpr double kCoefficientPrune = 1e-10;

/// p(c + s·T) expressed back in X, i.e. p((X − c)/s) expanded by Horner.
inline Polynomial unshift(std::span<const complex> coeffs, complex c, double s) {
    const Polynomial t{-c / s, 1.0 / s};
    Polynomial acc;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + Polynomial{*it};
    return acc;
}

/// Homogeneous least-squares fit of P/Q ≈ w with deg P ≤ dn, deg Q ≤ dd.
/// Columns use the centred variable t = (x − c)/s and w/ws so the Vandermonde
/// blocks stay well conditioned; the right singular vector of the smallest
/// singular value gives (P, Q).
inline RationalFunction fit_rational(const std::vector<complex>& x, const std::vector<complex>& w, int dn,
                                     int dd) {
    complex lo = x.front(), hi = x.front();
    for (complex v : x) {
        lo = {std::min(lo.real(), v.real()), std::min(lo.imag(), v.imag())};
        hi = {std::max(hi.real(), v.real()), std::max(hi.imag(), v.imag())};
    }
    const complex c = 0.5 * (lo + hi);
    double s = 0.0, ws = 0.0;
    for (complex v : x) s = std::max(s, std::abs(v - c));
    for (complex v : w) ws = std::max(ws, std::abs(v));
    if (s == 0.0) s = 1.0;
    if (ws == 0.0) ws = 1.0;

    const Eigen::Index rows = Eigen::Index(x.size());
    const Eigen::Index cols = dn + dd + 2;
    Eigen::MatrixXcd a(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j) {
        const complex t = (x[j] - c) / s;
        const complex wj = w[j] / ws;
        complex tk = 1.0;
        for (int k = 0; k <= std::max(dn, dd); ++k) {
            if (k <= dn) a(j, k) = tk;
            if (k <= dd) a(j, dn + 1 + k) = -wj * tk;
            tk *= t;
        }
        a.row(j) /= a.row(j).norm();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXcd v = svd.matrixV().col(cols - 1);

    double vmax = 0.0;
    for (Eigen::Index k = 0; k < cols; ++k) vmax = std::max(vmax, std::abs(v(k)));
    auto keep = [&](Eigen::Index k) { return std::abs(v(k)) <= kCoefficientPrune * vmax ? complex(0.0) : v(k); };
    std::vector<complex> num(dn + 1), den(dd + 1);
    for (int k = 0; k <= dn; ++k) num[k] = ws * keep(k);
    for (int k = 0; k <= dd; ++k) den[k] = keep(dn + 1 + k);
    Polynomial p = unshift(num, c, s), q = unshift(den, c, s);
    if (q.is_zero()) return {p, Polynomial{1.0}};  // rejected by validation
    const complex lead = q.leading();
    return {p * (1.0 / lead), q * (1.0 / lead)};
}

/// Points spread over the period cell by an additive recurrence.
inline std::vector<complex> cell_points(const Lattice& lat, int count, double offset) {
    constexpr double g = 1.32471795724474602596;  // plastic number
    constexpr double a1 = 1.0 / g, a2 = 1.0 / (g * g);
    std::vector<complex> pts;
    pts.reserve(count);
    for (int k = 1; k <= count; ++k) {
        const double u = std::fmod(offset + k * a1, 1.0);
        const double v = std::fmod(offset + k * a2, 1.0);
        pts.push_back(lat.point(u, v));
    }
    return pts;
}

struct FitData {
    std::vector<complex> x;   // ℘(z)
    std::vector<complex> w;   // ℘(αz)
    std::vector<complex> dr;  // ℘′(αz)/℘′(z)
};

inline bool sample_ok(const Weierstrass& wp, complex z, complex alpha, double min_pole_distance, FitData& out) {
    const Lattice& lat = wp.lattice();
    const double lambda = lat.shortest_vector();
    if (pole_distance(z, lat) < min_pole_distance * lambda ||
        pole_distance(alpha * z, lat) < min_pole_distance * lambda)
        return false;
    const auto base = wp.p_and_prime(z);
    const auto image = wp.p_and_prime(alpha * z);
    const double scale = 1.0 + std::pow(std::abs(base.p.value), 1.5);
    if (std::abs(base.dp.value) < 1e-3 * scale) return false;
    out.x.push_back(base.p.value);
    out.w.push_back(image.p.value);
    out.dr.push_back(image.dp.value / base.dp.value);
    return true;
}

/// Fit samples spread over the period cell (a different stretch of the same
/// recurrence than the held-out points). Candidates too close to a pole of
/// ℘(z) or ℘(αz), or to a zero of ℘′(z), are skipped; SingularSample when the
/// candidate budget runs out first.
inline FitData fit_samples(const Weierstrass& wp, complex alpha, int count) {
    FitData d;
    for (complex z : cell_points(wp.lattice(), 8 * count, 0.25)) {
        if (int(d.x.size()) == count) break;
        sample_ok(wp, z, alpha, 0.05, d);
    }
    if (int(d.x.size()) < count) throw SingularSample("too many fit samples hit a pole or a zero of p'");
    return d;
}

inline double relative_gap(complex got, complex want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

/// Max relative residual of R and S over points spread across the cell.
inline double held_out_residual(const Weierstrass& wp, complex alpha, const RationalFunction& r,
                                const RationalFunction& s_factor, int count) {
    const Lattice& lat = wp.lattice();
    const double lambda = lat.shortest_vector();
    double worst = 0.0;
    int used = 0;
    for (complex z : cell_points(lat, 4 * count, 0.5)) {
        if (used == count) break;
        if (pole_distance(z, lat) < 0.05 * lambda || pole_distance(alpha * z, lat) < 0.05 * lambda) continue;
        const auto base = wp.p_and_prime(z);
        const auto image = wp.p_and_prime(alpha * z);
        const double e = std::max(relative_gap(r(base.p.value), image.p.value),
                                  relative_gap(base.dp.value * s_factor(base.p.value), image.dp.value));
        worst = std::max(worst, std::isfinite(e) ? e : std::numeric_limits<double>::infinity());
        ++used;
    }
    return worst;
}

}  // namespace detail

/// Fits R with deg num ≤ D, deg den ≤ D−1 and S_factor = R′/α with both
/// degrees ≤ 2D−2, for D = degree, 2·degree, 4·degree in turn. `samples` fit
/// points (raised to 4D+4 when needed) are spread over the period cell; the fit is
/// accepted when the residual on 2·samples points spread over the whole
/// period cell is below tol. Otherwise throws FitFailure with the best
/// residual seen.
inline CMRationalPair construct_R_S(const Lattice& lat, complex alpha, long degree, int samples, double tol) {
    if (degree < 1) throw std::invalid_argument("construct_R_S: degree must be >= 1");
    if (!(tol > 0)) throw std::invalid_argument("construct_R_S: tol must be positive");
    const auto wp = weierstrass_for(lat);
    double best = std::numeric_limits<double>::infinity();
    for (long d : {degree, 2 * degree, 4 * degree}) {
        const int n = std::max<int>(samples, int(4 * d + 4));
        const detail::FitData data = detail::fit_samples(*wp, alpha, n);
        const int dn = int(d), dd = int(d) - 1, ds = int(2 * d - 2);
        const RationalFunction r = detail::fit_rational(data.x, data.w, dn, dd);
        const RationalFunction sf = detail::fit_rational(data.x, data.dr, ds, ds);
        const double residual = detail::held_out_residual(*wp, alpha, r, sf, 2 * n);
        if (residual < tol) return {alpha, r, sf, degree, residual};
        best = std::min(best, residual);
    }
    std::ostringstream msg;
    msg.precision(3);
    msg << "no rational R, S within degree " << 4 * degree << " (held-out residual " << best << ")";
    throw FitFailure(msg.str(), best);
}

inline CMRationalPair construct_R_S(const Lattice& lat, const CMWitness& witness, int samples, double tol) {
    return construct_R_S(lat, witness.alpha, witness.norm, samples, tol);
}

struct DiscDefinition {
    Lattice lattice;
    CMRationalPair pair;
    double a;
    double b;
};

namespace detail {

/// Smallest pole distance over a dense sampling of the segment [p, q],
/// reported as 0 when a pole could sit between samples.
inline double segment_pole_distance(const Lattice& lat, complex p, complex q) {
    constexpr int kSteps = 1024;
    const double step = std::abs(q - p) / kSteps;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kSteps; ++i) best = std::min(best, pole_distance(p + (q - p) * (double(i) / kSteps), lat));
    return best <= step ? 0.0 : best;
}

}  // namespace detail

/// Checks that neither [a, b] nor α·[a, b] meets a lattice point.
inline DiscDefinition make_disc_definition(const Lattice& lat, CMRationalPair pair, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("disc definition needs a < b");
    if (detail::segment_pole_distance(lat, a, b) == 0.0) throw PoleError("interval meets a lattice point");
    if (detail::segment_pole_distance(lat, pair.alpha * a, pair.alpha * b) == 0.0)
        throw PoleError("alpha times the interval meets a lattice point");
    return {lat, std::move(pair), a, b};
}

/// ℘(x + αy) = ¼((℘′x − S(℘y, ℘′y))/(℘x − R(℘y)))² − ℘x − R(℘y), using
/// ℘ and ℘′ at the real arguments x and y only.
inline complex disc_eval(const DiscDefinition& dd, double x, double y) {
    if (!(x > dd.a && x < dd.b) || !(y > dd.a && y < dd.b))
        throw DomainError("disc_eval: arguments must lie in the interval");
    const auto wp = weierstrass_for(dd.lattice);
    const auto px = wp->p_and_prime(x);
    const auto py = wp->p_and_prime(y);
    const complex r = dd.pair.R(py.p.value);
    const complex s = dd.pair.S(py.p.value, py.dp.value);
    const complex den = px.p.value - r;
    if (std::abs(den) < 1e-10 * (1.0 + std::abs(px.p.value) + std::abs(r)))
        throw DegenerateAddition("x - alpha*y lies on the lattice");
    const complex q = (px.dp.value - s) / den;
    return 0.25 * q * q - px.p.value - r;
}

struct DiscPointFailure {
    double x;
    double y;
    double error;
};

struct DiscReport {
    double max_abs_error = 0.0;
    int points_checked = 0;
    int points_skipped = 0;
    std::vector<DiscPointFailure> failures;

    bool passed() const { return failures.empty() && points_checked > 0; }
};

/// Compares disc_eval against wp_eval(x + αy) on the cell-centred
/// grid_n × grid_n grid over the interval square.
inline DiscReport verify_disc_definition(const DiscDefinition& dd, int grid_n, double tol) {
    if (grid_n < 4) throw std::invalid_argument("verify_disc_definition: grid_n must be >= 4");
    const double h = (dd.b - dd.a) / grid_n;
    DiscReport report;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const double x = dd.a + (i + 0.5) * h;
            const double y = dd.a + (j + 0.5) * h;
            complex got;
            try {
                got = disc_eval(dd, x, y);
            } catch (const DegenerateAddition&) {
                ++report.points_skipped;
                continue;
            } catch (const PoleError&) {
                ++report.points_skipped;
                continue;
            }
            const complex want = wp_eval(x + dd.pair.alpha * y, dd.lattice).value;
            const double err = std::abs(got - want);
            ++report.points_checked;
            report.max_abs_error = std::max(report.max_abs_error, err);
            if (!(err <= tol)) report.failures.push_back({x, y, err});
        }
    }
    return report;
}

}  // namespace wpdef

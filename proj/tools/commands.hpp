#pragma once

// Subcommands of the wpdef tool. Each returns the report text and the exit
// code instead of printing, so the test suite can drive them in-process.

#include <wpdef/io.hpp>
#include <wpdef/wpdef.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wpdef::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,
    kExitDegenerateLattice = 2,
    kExitPole = 3,
    kExitNoCM = 4,
    kExitUsage = 64,
};

inline constexpr std::string_view kMachineMarker = "--- machine-readable ---";

struct RunConfig {
    std::string tau;
    std::vector<std::string> gen;
    std::string lattice_file;
    std::optional<double> tol;
    int radius = 400;
    int grid = 20;
    int samples = 50;
    std::uint64_t seed = 1;
    bool oracle = false;
    long coeff_bound = 50;
    bool inject_error = false;
    std::string out;
    std::string z;
    std::vector<double> interval;
};

struct CommandResult {
    std::string report;
    int exit_code;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline std::string strip(std::string_view s) {
    std::string out;
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '*') out.push_back(c);
    for (std::size_t p; (p = out.find("π")) != std::string::npos;) out.replace(p, std::string("π").size(), "pi");
    return out;
}

inline double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw std::invalid_argument("not a real number: '" + s + "'");
    return v;
}

/// Angle from "iπ/3", "2iπ/3", "-ipi", "i0.5".
inline double parse_angle(const std::string& s) {
    const std::size_t ipos = s.find('i');
    if (ipos == std::string::npos) throw std::invalid_argument("exponent must contain i: '" + s + "'");
    std::string coef = s.substr(0, ipos);
    std::string rest = s.substr(ipos + 1);
    double scale = 1.0;
    if (coef == "-") {
        scale = -1.0;
    } else if (!coef.empty() && coef != "+") {
        scale = parse_real(coef);
    }
    double den = 1.0;
    if (const std::size_t slash = rest.find('/'); slash != std::string::npos) {
        den = parse_real(rest.substr(slash + 1));
        rest = rest.substr(0, slash);
    }
    double num = 1.0;
    if (rest.size() >= 2 && rest.compare(rest.size() - 2, 2, "pi") == 0) {
        const std::string pre = rest.substr(0, rest.size() - 2);
        num = kPi * (pre.empty() ? 1.0 : parse_real(pre));
    } else if (!rest.empty()) {
        num = parse_real(rest);
    }
    return scale * num / den;
}

}  // namespace detail

/// Accepts a, bi, a+bi, a-bi, i, -i, e^{iπ/3}, e^{i*pi/3}, e^{2iπ/3}, exp(iπ/3).
inline complex parse_complex(std::string_view text) {
    const std::string s = detail::strip(text);
    if (s.empty()) throw std::invalid_argument("empty complex number");
    for (const auto& [open, close] : {std::pair{"e^{", "}"}, std::pair{"e^(", ")"}, std::pair{"exp(", ")"}}) {
        const std::string o = open, c = close;
        if (s.size() > o.size() + c.size() && s.compare(0, o.size(), o) == 0 &&
            s.compare(s.size() - c.size(), c.size(), c) == 0)
            return std::polar(1.0, detail::parse_angle(s.substr(o.size(), s.size() - o.size() - c.size())));
    }
    if (s.back() != 'i') return detail::parse_real(s);

    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string re = split == std::string::npos ? "" : body.substr(0, split);
    const std::string im = split == std::string::npos ? body : body.substr(split);
    double imag = 0.0;
    if (im.empty() || im == "+")
        imag = 1.0;
    else if (im == "-")
        imag = -1.0;
    else
        imag = detail::parse_real(im);
    return {re.empty() ? 0.0 : detail::parse_real(re), imag};
}

inline Lattice lattice_from_config(const RunConfig& cfg) {
    const int given = int(!cfg.tau.empty()) + int(!cfg.gen.empty()) + int(!cfg.lattice_file.empty());
    if (given > 1) throw std::invalid_argument("give only one of --tau, --gen, --lattice-file");
    if (!cfg.gen.empty()) {
        if (cfg.gen.size() != 2) throw std::invalid_argument("--gen needs two generators");
        return reduce_generators(parse_complex(cfg.gen[0]), parse_complex(cfg.gen[1]));
    }
    if (!cfg.lattice_file.empty()) {
        std::ifstream in(cfg.lattice_file);
        if (!in) throw std::invalid_argument("cannot open lattice file " + cfg.lattice_file);
        return lattice_from_json(json::parse(in));
    }
    return reduce_generators(1.0, parse_complex(cfg.tau.empty() ? "i" : cfg.tau));
}

// ---------------------------------------------------------------------------
// Report assembly

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

inline std::string fmt(complex z) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.15g%+.15gi", z.real(), z.imag());
    return buf;
}

inline std::string fmt_sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

class Report {
public:
    explicit Report(std::string command) : command_(std::move(command)) { data_["command"] = command_; }

    void line(const std::string& key, const std::string& value) {
        std::string k = key;
        if (k.size() < 22) k.resize(22, ' ');
        text_ += k + value + "\n";
    }
    void note(const std::string& text) { text_ += text + "\n"; }
    json& data() { return data_; }

    std::string str() const {
        return "wpdef " + command_ + "\n" + text_ + std::string(kMachineMarker) + "\n" + data_.dump(2) + "\n";
    }

private:
    std::string command_;
    std::string text_;
    json data_ = json::object();
};

/// Parses the machine-readable block of a report.
inline json machine_block(const std::string& report) {
    const std::size_t p = report.find(kMachineMarker);
    if (p == std::string::npos) throw std::invalid_argument("report has no machine-readable block");
    return json::parse(report.substr(p + kMachineMarker.size()));
}

/// mt19937_64 with a fixed mapping to [0, 1), identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

/// Uniform point of the centred period cell at least `min_distance`·λ from Ω.
inline complex random_point(Rng& rng, const Lattice& lat, double min_distance = 0.05) {
    for (;;) {
        const complex z = lat.point(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
        if (pole_distance(z, lat) > min_distance * lat.shortest_vector()) return z;
    }
}

/// |got − want| / max(1, |want|).
inline double mixed_error(complex got, complex want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

/// Smallest positive real lattice vector of a real lattice.
inline std::optional<double> real_period(const Lattice& lat) {
    const auto basis = real_form_basis(lat);
    if (!basis) return std::nullopt;
    if (basis->kind == LatticeClass::Rectangular) return std::abs(basis->omega1.real());
    return 2.0 * std::abs(basis->omega1.real());
}

// ---------------------------------------------------------------------------
// lattice

inline CommandResult cmd_lattice(const RunConfig& cfg) {
    const Lattice lat = lattice_from_config(cfg);
    Report rep("lattice");
    const LatticeClass cls = classify_real(lat);
    const EisensteinResult inv = eisenstein_invariants(lat);
    const auto cm = detect_cm(lat, cfg.coeff_bound);

    rep.line("omega1", fmt(lat.omega1()));
    rep.line("omega2", fmt(lat.omega2()));
    rep.line("tau", fmt(lat.tau()));
    rep.line("class", to_string(cls));
    rep.line("g2", fmt(inv.invariants.g2) + "  (err " + fmt_sci(inv.g2_error) + ")");
    rep.line("g3", fmt(inv.invariants.g3) + "  (err " + fmt_sci(inv.g3_error) + ")");
    rep.line("discriminant", fmt(inv.invariants.discriminant()));

    json& d = rep.data();
    d["lattice"] = lattice_to_json(lat);
    d["tau"] = complex_to_json(lat.tau());
    d["classification"] = to_string(cls);
    if (const auto basis = real_form_basis(lat)) {
        rep.line("real basis", fmt(basis->omega1) + ", " + fmt(basis->omega2));
        d["real_basis"] = {{"omega1", complex_to_json(basis->omega1)}, {"omega2", complex_to_json(basis->omega2)}};
    } else {
        d["real_basis"] = nullptr;
    }
    d["invariants"] = invariants_to_json(inv.invariants);
    d["invariants"]["g2_error"] = inv.g2_error;
    d["invariants"]["g3_error"] = inv.g3_error;
    d["invariants"]["discriminant"] = complex_to_json(inv.invariants.discriminant());
    if (cm) {
        const auto& mp = cm->min_poly;
        rep.line("CM", "alpha = " + fmt(cm->alpha) + ", norm " + std::to_string(cm->norm) + ", " +
                           std::to_string(mp.a) + "t^2 + " + std::to_string(mp.b) + "t + " + std::to_string(mp.c) +
                           " = 0");
        d["cm"] = {{"found", true},
                   {"alpha", complex_to_json(cm->alpha)},
                   {"min_poly", {{"a", mp.a}, {"b", mp.b}, {"c", mp.c}}},
                   {"norm", cm->norm},
                   {"coeff_bound", cfg.coeff_bound}};
    } else {
        rep.line("CM", "none with coefficients up to " + std::to_string(cfg.coeff_bound));
        d["cm"] = {{"found", false}, {"coeff_bound", cfg.coeff_bound}};
    }
    return {rep.str(), kExitOk};
}

// ---------------------------------------------------------------------------
// eval

inline CommandResult cmd_eval(const RunConfig& cfg) {
    const Lattice lat = lattice_from_config(cfg);
    if (cfg.z.empty()) throw std::invalid_argument("eval needs --z");
    const complex z = parse_complex(cfg.z);
    const auto wp = weierstrass_for(lat);
    const auto pair = wp->p_and_prime(z);
    const EvalResult second = wp->p_second(z);
    const double residual = diffeq_residual(z, lat);

    Report rep("eval");
    rep.line("z", fmt(z));
    rep.line("p", fmt(pair.p.value) + "  (err " + fmt_sci(pair.p.err_estimate) + ")");
    rep.line("p'", fmt(pair.dp.value) + "  (err " + fmt_sci(pair.dp.err_estimate) + ")");
    rep.line("p''", fmt(second.value) + "  (err " + fmt_sci(second.err_estimate) + ")");
    rep.line("ODE residual", fmt_sci(residual));
    json& d = rep.data();
    d["lattice"] = lattice_to_json(lat);
    d["z"] = complex_to_json(z);
    d["p"] = complex_to_json(pair.p.value);
    d["p_err"] = pair.p.err_estimate;
    d["p_prime"] = complex_to_json(pair.dp.value);
    d["p_prime_err"] = pair.dp.err_estimate;
    d["p_second"] = complex_to_json(second.value);
    d["p_second_err"] = second.err_estimate;
    d["diffeq_residual"] = residual;

    int code = kExitOk;
    if (cfg.oracle) {
        const double tol = cfg.tol.value_or(1e-9);
        const EvalResult ref = wp_direct_sum(z, lat, cfg.radius);
        const double diff = mixed_error(pair.p.value, ref.value);
        const bool ok = diff < tol;
        rep.line("direct sum", fmt(ref.value) + "  (radius " + std::to_string(cfg.radius) + ", err " +
                                   fmt_sci(ref.err_estimate) + ")");
        rep.line("oracle check", fmt_sci(diff) + (ok ? " PASS" : " FAIL") + " (tol " + fmt_sci(tol) + ")");
        d["oracle"] = {{"radius", cfg.radius},
                       {"value", complex_to_json(ref.value)},
                       {"err_estimate", ref.err_estimate},
                       {"difference", diff},
                       {"tolerance", tol},
                       {"passed", ok}};
        if (!ok) code = kExitFailed;
    }
    return {rep.str(), code};
}

// ---------------------------------------------------------------------------
// verify

struct SuiteResult {
    std::string name;
    std::string status;  // pass, fail, skipped
    double max_residual = 0.0;
    double tolerance = 0.0;
    int points = 0;
    std::string note;
};

namespace detail {

class Suite {
public:
    Suite(std::string name, double tol) { r_.name = std::move(name), r_.tolerance = tol; }

    void record(double residual) {
        ++r_.points;
        if (!(residual <= r_.max_residual)) r_.max_residual = std::isnan(residual) ? INFINITY : residual;
    }
    void fail(const std::string& why) {
        if (!failed_) r_.note = r_.note.empty() ? why : r_.note + "; " + why;
        failed_ = true;
    }
    void note(const std::string& text) { r_.note = text; }

    SuiteResult finish() {
        r_.status = (failed_ || !(r_.max_residual <= r_.tolerance)) ? "fail" : "pass";
        return r_;
    }
    static SuiteResult skipped(std::string name, std::string why) {
        SuiteResult r;
        r.name = std::move(name);
        r.status = "skipped";
        r.note = std::move(why);
        return r;
    }

private:
    SuiteResult r_;
    bool failed_ = false;
};

/// Random P (n × (2n+1)); every third trial gets a dependent last row, so
/// both branches of the implication are exercised.
inline std::pair<int, int> rank_implication_trials(Rng& rng, int trials) {
    int violations = 0, nonsingular = 0;
    for (int t = 0; t < trials; ++t) {
        const int n = 1 + t % 3;
        ChainRuleInstance inst{n, Eigen::MatrixXd(n, 2 * n + 1), std::vector<double>(n)};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < 2 * n + 1; ++j) inst.P_partials(i, j) = rng.uniform(-1.0, 1.0);
        for (double& v : inst.diag_values) v = rng.uniform(-2.0, 2.0);
        if (n > 1 && t % 3 == 2) inst.P_partials.row(n - 1) = 0.5 * inst.P_partials.row(0);
        const Eigen::MatrixXd f = inst.P_partials * build_M(inst);
        const ChainRuleReport r = chain_rule_check(inst, f, 1e-12);
        nonsingular += r.F_nonsingular;
        if (r.F_nonsingular && r.rank_P != n) ++violations;
    }
    return {violations, nonsingular};
}

}  // namespace detail

inline std::vector<SuiteResult> run_suites(const Lattice& lat, const RunConfig& cfg) {
    using detail::Suite;
    const auto wp = weierstrass_for(lat);
    Invariants inv = wp->invariants();
    Invariants ode_inv = inv;
    if (cfg.inject_error) ode_inv.g2 += 1e-3 * (1.0 + std::abs(inv.g2));
    const double lambda = lat.shortest_vector();
    const int n_pts = std::max(cfg.samples, 1);
    Rng rng(cfg.seed);
    std::vector<SuiteResult> out;

    {
        Suite s("oracle", 1e-8);
        s.note("direct sum radius " + std::to_string(cfg.radius));
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            s.record(mixed_error(wp->p(z).value, wp_direct_sum(z, lat, cfg.radius).value));
        }
        out.push_back(s.finish());
    }
    {
        Suite s("parity", 1e-10);
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            const auto a = wp->p_and_prime(z), b = wp->p_and_prime(-z);
            s.record(std::max(mixed_error(b.p.value, a.p.value), mixed_error(b.dp.value, -a.dp.value)));
        }
        out.push_back(s.finish());
    }
    {
        Suite s("periodicity", 1e-10);
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            const complex p = wp->p(z).value;
            s.record(std::max(mixed_error(wp->p(z + lat.omega1()).value, p),
                              mixed_error(wp->p(z + lat.omega2()).value, p)));
        }
        out.push_back(s.finish());
    }
    {
        Suite s("addition", 1e-8);
        int degenerate_missed = 0;
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat), w = random_point(rng, lat);
            if (pole_distance(z + w, lat) < 0.05 * lambda) continue;
            const auto a = wp->p_and_prime(z), b = wp->p_and_prime(w);
            s.record(mixed_error(addition_formula(a.p.value, b.p.value, a.dp.value, b.dp.value), wp->p(z + w).value));
            // z + (ω₁ − z) ∈ Ω: ℘ agrees at both points, the formula must refuse.
            const auto c = wp->p_and_prime(lat.omega1() - z);
            try {
                addition_formula(a.p.value, c.p.value, a.dp.value, c.dp.value);
                ++degenerate_missed;
            } catch (const DegenerateAddition&) {
            }
        }
        if (degenerate_missed) s.fail(std::to_string(degenerate_missed) + " degenerate pairs not rejected");
        out.push_back(s.finish());
    }
    {
        Suite s("duplication", 1e-8);
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            if (pole_distance(2.0 * z, lat) < 0.05 * lambda) continue;
            const auto a = wp->p_and_prime(z);
            const complex p2 = 6.0 * a.p.value * a.p.value - inv.g2 / 2.0;
            s.record(mixed_error(duplication(a.p.value, a.dp.value, p2), wp->p(2.0 * z).value));
        }
        out.push_back(s.finish());
    }
    {
        Suite s("diffeq", 1e-9);
        if (cfg.inject_error) s.note("g2 deliberately corrupted");
        for (int k = 0; k < n_pts; ++k) s.record(diffeq_residual(random_point(rng, lat), lat, ode_inv));
        out.push_back(s.finish());
    }
    {
        Suite s("second_derivative", 1e-4);
        const double h = 1e-3 * lambda;
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat, 0.1);
            const complex p0 = wp->p(z).value;
            auto second = [&](double step) {
                return (wp->p(z + step).value - 2.0 * p0 + wp->p(z - step).value) / (step * step);
            };
            const complex fd = (4.0 * second(h / 2) - second(h)) / 3.0;
            s.record(mixed_error(fd, wp->p_second(z).value));
        }
        out.push_back(s.finish());
    }
    if (const auto cm = detect_cm(lat, cfg.coeff_bound); cm && cm->norm == 1) {
        Suite s("unit_symmetry", 1e-9);
        const complex a = cm->alpha;
        s.note("alpha = " + fmt(a));
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            s.record(mixed_error(wp->p(a * z).value, wp->p(z).value / (a * a)));
        }
        // α⁴ = 1 forces g₃ = 0; α⁶ = 1 with α² ≠ 1 forces g₂ = 0.
        const double scale = std::max({1.0, std::abs(inv.g2), std::pow(std::abs(inv.g3), 2.0 / 3.0)});
        if (std::abs(a * a + 1.0) < 1e-9) s.record(std::abs(inv.g3) / std::pow(scale, 1.5));
        if (std::abs(a * a * a * a + a * a + 1.0) < 1e-9) s.record(std::abs(inv.g2) / scale);
        out.push_back(s.finish());
    } else {
        out.push_back(Suite::skipped("unit_symmetry", "no unit CM multiplier"));
    }
    if (classify_real(lat) != LatticeClass::NonReal) {
        Suite s("real_invariants", 1e-9);
        const double scale = std::max({1.0, std::abs(inv.g2), std::pow(std::abs(inv.g3), 2.0 / 3.0)});
        s.record(std::abs(inv.g2.imag()) / scale);
        s.record(std::abs(inv.g3.imag()) / std::pow(scale, 1.5));
        for (int k = 0; k < n_pts; ++k) {
            const double x = rng.uniform(0.05, 0.45) * lambda;
            const complex p = wp->p(x).value;
            s.record(std::abs(p.imag()) / std::max(1.0, std::abs(p)));
        }
        out.push_back(s.finish());
    } else {
        out.push_back(Suite::skipped("real_invariants", "lattice is not closed under conjugation"));
    }
    {
        Suite s("multiplication", 1e-7);
        s.note("n in {2, 3, 5}");
        for (int n : {2, 3, 5}) {
            const RationalMap map = multiplication_by_n(n, inv);
            for (int k = 0; k < n_pts; ++k) {
                const complex z = random_point(rng, lat);
                if (pole_distance(double(n) * z, lat) < 0.05 * lambda) continue;
                const auto a = wp->p_and_prime(z);
                s.record(mixed_error(map(a.p.value, a.dp.value), wp->p(double(n) * z).value));
            }
        }
        out.push_back(s.finish());
    }
    {
        Suite s("division", 1e-7);
        s.note("n = 2; each root maps back to the target within 1e-6");
        const RationalFunction f = multiplication_function(2, inv);
        for (int k = 0; k < n_pts; ++k) {
            const complex z = random_point(rng, lat);
            if (pole_distance(2.0 * z, lat) < 0.05 * lambda) continue;
            const complex target = wp->p(2.0 * z).value, want = wp->p(z).value;
            const std::vector<complex> fiber = division_values(2, target, inv);
            double best = INFINITY;
            for (complex r : fiber) {
                best = std::min(best, mixed_error(r, want));
                if (mixed_error(f(r), target) > 1e-6) s.fail("a fiber root does not map back to the target");
            }
            s.record(best);
        }
        out.push_back(s.finish());
    }
    {
        Suite s("bijections", 1e-8);
        const IntervalBijection ib(0.125 * lambda, 0.375 * lambda);
        s.note("interval (lambda/8, 3lambda/8), |u| <= 1e4, round trips within 1e-12 + 4 eps cond");
        for (int k = 0; k < n_pts; ++k) {
            const double u = std::copysign(std::pow(10.0, rng.uniform(-3.0, 4.0)), rng.uniform(-1.0, 1.0));
            const double t = B_eval(ib, u);
            const auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
            // B∘A and the B′ = (r² − s²)²·B₁ identity are held to 1e-12. A∘B and
            // B′·A′∘B = 1 are held to 1e-12 plus the error that rounding t = B(u)
            // alone causes (4·eps times the condition number of A or A′ at t), which
            // dominates near u = 0 and for large |u|. The identity uses the rounded
            // s = B(u) − m, whose relative error grows like u·ulp(b), so it is only
            // checked where that stays below 1e-13.
            const double s_off = t - ib.m;
            const double cond_a = std::abs(t * A_prime_eval(ib, t) / u);
            const double cond_da = std::abs(t) * (2 / (ib.b - t) + 2 / (t - ib.a));
            const double exact =
                std::max({rel(A_eval(ib, t), u) / (1.0 + 4e12 * kEpsilon * cond_a), rel(B_eval(ib, A_eval(ib, t)), t),
                          rel(B_prime_eval(ib, u) * A_prime_eval(ib, t), 1.0) / (1.0 + 4e12 * kEpsilon * cond_da)});
            const double identity =
                std::abs(u) > 1e3 ? 0.0
                                  : rel(B_prime_eval(ib, u), std::pow(ib.r * ib.r - s_off * s_off, 2) * B1_eval(ib, u));
            if (exact > 1e-12 || identity > 1e-12) s.fail("round trip or B'/B1 identity beyond 1e-12");
            if (!(A_prime_eval(ib, t) > 0) || !(B_prime_eval(ib, u) > 0)) s.fail("non-positive derivative");
            const double tt = ib.a + ib.r * rng.uniform(0.1, 1.9);
            // Richardson-extrapolated central differences.
            const auto fd = [](auto&& f, double x, double h) {
                const double d1 = (f(x + h) - f(x - h)) / (2 * h);
                const double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
                return (4 * d2 - d1) / 3;
            };
            const double fd_a = fd([&](double v) { return A_eval(ib, v); }, tt, 1e-4 * ib.r);
            const double uu = rng.uniform(-50.0, 50.0);
            const double fd_b = fd([&](double v) { return B_eval(ib, v); }, uu, 1e-3 * (1 + std::abs(uu)));
            s.record(std::max(rel(fd_a, A_prime_eval(ib, tt)), rel(fd_b, B_prime_eval(ib, uu))));
        }
        out.push_back(s.finish());
    }
    if (const auto rho = real_period(lat)) {
        Suite s("chain_rule", 1e-6);
        const IntervalBijection ib(*rho / 8, 3 * *rho / 8);
        for (int n = 1; n <= 3; ++n) {
            std::vector<double> x(n + 1);
            for (double& v : x) v = rng.uniform(-3.0, 3.0);
            const FiniteDifferenceInstance fd = chain_rule_instance(n, lat, ib, x);
            const ChainRuleReport r = chain_rule_check(fd.instance, fd.F_partials, 1e-6);
            s.record(r.residual);
            if (!r.passed) s.fail("chain rule check failed for n = " + std::to_string(n));
        }
        const auto [violations, nonsingular] = detail::rank_implication_trials(rng, 10 * n_pts);
        s.note(std::to_string(10 * n_pts) + " rank trials, " + std::to_string(nonsingular) + " nonsingular");
        if (violations) s.fail(std::to_string(violations) + " rank implication violations");
        out.push_back(s.finish());
    } else {
        out.push_back(Suite::skipped("chain_rule", "needs a real lattice"));
    }
    return out;
}

inline CommandResult cmd_verify(const RunConfig& cfg) {
    const Lattice lat = lattice_from_config(cfg);
    const std::vector<SuiteResult> suites = run_suites(lat, cfg);
    Report rep("verify");
    rep.line("lattice", fmt(lat.omega1()) + ", " + fmt(lat.omega2()));
    rep.line("seed", std::to_string(cfg.seed));
    bool ok = true;
    json arr = json::array();
    for (const SuiteResult& s : suites) {
        ok = ok && s.status != "fail";
        std::string desc = s.status;
        if (s.status != "skipped")
            desc += "  max " + fmt_sci(s.max_residual) + " (tol " + fmt_sci(s.tolerance) + ", " +
                    std::to_string(s.points) + " checks)";
        if (!s.note.empty()) desc += "  " + s.note;
        rep.line(s.name, desc);
        arr.push_back({{"name", s.name},
                       {"status", s.status},
                       {"max_residual", s.max_residual},
                       {"tolerance", s.tolerance},
                       {"points", s.points},
                       {"note", s.note}});
    }
    rep.line("result", ok ? "all suites passed" : "FAILED");
    json& d = rep.data();
    d["lattice"] = lattice_to_json(lat);
    d["seed"] = cfg.seed;
    d["samples"] = cfg.samples;
    d["suites"] = std::move(arr);
    d["passed"] = ok;
    return {rep.str(), ok ? kExitOk : kExitFailed};
}

// ---------------------------------------------------------------------------
// macintyre

inline CommandResult cmd_macintyre(const RunConfig& cfg) {
    const Lattice lat = lattice_from_config(cfg);
    Report rep("macintyre");
    json& d = rep.data();
    d["lattice"] = lattice_to_json(lat);
    rep.line("lattice", fmt(lat.omega1()) + ", " + fmt(lat.omega2()));

    const auto cm = detect_cm(lat, cfg.coeff_bound);
    if (!cm) {
        const std::string msg = "no complex multiplication with coefficients up to " +
                                std::to_string(cfg.coeff_bound) +
                                ": without CM, p on a disc is not definable from p on a real interval, "
                                "so there is no R, S to construct";
        rep.line("CM", "none");
        rep.note(msg);
        d["cm"] = {{"found", false}, {"coeff_bound", cfg.coeff_bound}};
        d["message"] = msg;
        return {rep.str(), kExitNoCM};
    }
    rep.line("alpha", fmt(cm->alpha) + "  (norm " + std::to_string(cm->norm) + ")");
    d["cm"] = {{"found", true},
               {"alpha", complex_to_json(cm->alpha)},
               {"min_poly", {{"a", cm->min_poly.a}, {"b", cm->min_poly.b}, {"c", cm->min_poly.c}}},
               {"norm", cm->norm}};

    const double lambda = lat.shortest_vector();
    const double a = cfg.interval.empty() ? lambda / 8 : cfg.interval.at(0);
    const double b = cfg.interval.empty() ? 3 * lambda / 8 : cfg.interval.at(1);
    const double tol = cfg.tol.value_or(1e-8);
    d["interval"] = {a, b};
    d["grid"] = cfg.grid;
    d["tolerance"] = tol;
    rep.line("interval", "(" + fmt(a) + ", " + fmt(b) + ")");

    CMRationalPair pair;
    try {
        pair = construct_R_S(lat, *cm, cfg.samples, 1e-8);
    } catch (const FitFailure& e) {
        rep.line("fit", std::string("FAILED: ") + e.what());
        d["fit"] = {{"passed", false}, {"held_out_residual", e.residual()}};
        d["passed"] = false;
        return {rep.str(), kExitFailed};
    }
    auto poly_text = [](const Polynomial& p) {
        std::string s;
        for (int k = 0; k <= p.degree(); ++k) s += (k ? ", " : "") + fmt(p.coefficient(k));
        return "[" + s + "]";
    };
    rep.line("R numerator", poly_text(pair.R.num));
    rep.line("R denominator", poly_text(pair.R.den));
    rep.line("S numerator", poly_text(pair.S_factor.num));
    rep.line("S denominator", poly_text(pair.S_factor.den));
    rep.line("held-out residual", fmt_sci(pair.residual));
    d["pair"] = cm_pair_to_json(pair);

    const DiscDefinition dd = make_disc_definition(lat, pair, a, b);
    const DiscReport disc = verify_disc_definition(dd, cfg.grid, tol);
    const bool ok = disc.passed();
    rep.line("grid", std::to_string(cfg.grid) + " x " + std::to_string(cfg.grid) + ", " +
                         std::to_string(disc.points_checked) + " checked, " + std::to_string(disc.points_skipped) +
                         " skipped");
    rep.line("max grid error", fmt_sci(disc.max_abs_error) + (ok ? " PASS" : " FAIL") + " (tol " + fmt_sci(tol) + ")");
    d["disc"] = disc_report_to_json(disc);
    d["passed"] = ok;
    return {rep.str(), ok ? kExitOk : kExitFailed};
}

// ---------------------------------------------------------------------------
// Entry point

/// Parses argv, runs the chosen subcommand, writes --out if given, and maps
/// library errors to exit codes.
inline CommandResult run(int argc, const char* const* argv) {
    CLI::App app{"Weierstrass p: evaluation, identity checks, CM detection and disc definitions", "wpdef"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--tau", cfg.tau, "lattice Z + tau Z (a+bi, i, e^{i*pi/3}); default i");
        sub->add_option("--gen", cfg.gen, "two generators omega1 omega2")->expected(2);
        sub->add_option("--lattice-file", cfg.lattice_file, "JSON {omega1: [re, im], omega2: [re, im]}");
        sub->add_option("--tol", cfg.tol, "tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--radius", cfg.radius, "direct-sum truncation radius")->check(CLI::Range(4, 100000));
        sub->add_option("--coeff-bound", cfg.coeff_bound, "CM search coefficient bound")->check(CLI::Range(1, 100000));
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out, "also write the report to this file");
    };
    CLI::App* lattice = app.add_subcommand("lattice", "reduced basis, classification, invariants, CM");
    add_common(lattice);
    CLI::App* eval = app.add_subcommand("eval", "p, p', p'' at a point");
    add_common(eval);
    eval->add_option("--z", cfg.z, "evaluation point")->required();
    eval->add_flag("--oracle", cfg.oracle, "cross-check against the direct lattice sum");
    CLI::App* verify = app.add_subcommand("verify", "run every identity suite");
    add_common(verify);
    verify->add_option("--samples", cfg.samples, "random points per suite")->check(CLI::Range(1, 100000));
    verify->add_flag("--inject-error", cfg.inject_error, "corrupt g2 in the differential-equation suite");
    CLI::App* mac = app.add_subcommand("macintyre", "fit R, S for a CM multiplier and check the disc formula");
    add_common(mac);
    mac->add_option("--interval", cfg.interval, "real interval a b")->expected(2);
    mac->add_option("--grid", cfg.grid, "grid points per side")->check(CLI::Range(4, 10000));
    mac->add_option("--samples", cfg.samples, "fit samples (raised to 4N+4)")->check(CLI::Range(0, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        const int code = app.exit(e, out, err);
        return {out.str() + err.str(), code == 0 ? kExitOk : kExitUsage};
    }

    CommandResult result{"", kExitOk};
    try {
        if (*lattice)
            result = cmd_lattice(cfg);
        else if (*eval)
            result = cmd_eval(cfg);
        else if (*verify)
            result = cmd_verify(cfg);
        else
            result = cmd_macintyre(cfg);
    } catch (const DegenerateLattice& e) {
        return {std::string("error: degenerate lattice: ") + e.what() + "\n", kExitDegenerateLattice};
    } catch (const PoleError& e) {
        return {std::string("error: pole: ") + e.what() + "\n", kExitPole};
    } catch (const Error& e) {
        return {std::string("error: ") + e.what() + "\n", kExitFailed};
    } catch (const std::invalid_argument& e) {
        return {std::string("error: ") + e.what() + "\n", kExitUsage};
    } catch (const json::exception& e) {
        return {std::string("error: bad lattice file: ") + e.what() + "\n", kExitUsage};
    }
    if (!cfg.out.empty()) {
        std::ofstream f(cfg.out, std::ios::binary);
        f << result.report;
        if (!f) return {result.report + "error: cannot write " + cfg.out + "\n", kExitFailed};
    }
    return result;
}

}  // namespace wpdef::cli

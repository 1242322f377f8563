#pragma once

// JSON records for lattices, polynomials, rational maps and reports.
// Doubles are written in shortest round-trip form, so reading a record
// back reproduces every coefficient bit for bit.

#include <wpdef/cm_definability.hpp>
#include <wpdef/interval_maps.hpp>
#include <wpdef/lattice.hpp>
#include <wpdef/polynomial.hpp>

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace wpdef {

using json = nlohmann::ordered_json;

inline json complex_to_json(complex z) { return json::array({z.real(), z.imag()}); }

inline complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("complex value must be [re, im]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json lattice_to_json(const Lattice& lat) {
    return {{"omega1", complex_to_json(lat.omega1())}, {"omega2", complex_to_json(lat.omega2())}};
}

/// Reads {omega1: [re, im], omega2: [re, im]} and reduces the generators.
inline Lattice lattice_from_json(const json& j) {
    return reduce_generators(complex_from_json(j.at("omega1")), complex_from_json(j.at("omega2")));
}

inline json invariants_to_json(const Invariants& inv) {
    return {{"g2", complex_to_json(inv.g2)}, {"g3", complex_to_json(inv.g3)}};
}

inline json polynomial_to_json(const Polynomial& p) {
    json coeffs = json::array();
    for (complex c : p.coefficients()) coeffs.push_back(complex_to_json(c));
    return {{"degree", p.degree()}, {"coefficients", std::move(coeffs)}};
}

inline Polynomial polynomial_from_json(const json& j) {
    std::vector<complex> c;
    for (const auto& v : j.at("coefficients")) c.push_back(complex_from_json(v));
    Polynomial p(std::move(c));
    if (p.degree() != j.at("degree").get<int>()) throw std::invalid_argument("polynomial degree mismatch");
    return p;
}

inline json bivariate_to_json(const BivariatePolynomial& p) {
    json by_y = json::array();
    for (const Polynomial& q : p.y_coefficients()) by_y.push_back(polynomial_to_json(q));
    return {{"y_degree", p.y_degree()}, {"x_degree", p.x_degree()}, {"by_y_power", std::move(by_y)}};
}

inline BivariatePolynomial bivariate_from_json(const json& j) {
    std::vector<Polynomial> by_y;
    for (const auto& q : j.at("by_y_power")) by_y.push_back(polynomial_from_json(q));
    BivariatePolynomial p(std::move(by_y));
    if (p.y_degree() != j.at("y_degree").get<int>()) throw std::invalid_argument("bivariate degree mismatch");
    return p;
}

inline json rational_map_to_json(const RationalMap& m) {
    return {{"center", complex_to_json(m.center())},
            {"numerator", bivariate_to_json(m.numerator())},
            {"denominator", bivariate_to_json(m.denominator())}};
}

/// A missing "center" means 0 (maps written in plain X).
inline RationalMap rational_map_from_json(const json& j) {
    return RationalMap(bivariate_from_json(j.at("numerator")), bivariate_from_json(j.at("denominator")),
                       j.contains("center") ? complex_from_json(j.at("center")) : complex(0.0));
}

inline json rational_function_to_json(const RationalFunction& f) {
    return {{"center", complex_to_json(f.center)},
            {"numerator", polynomial_to_json(f.num)},
            {"denominator", polynomial_to_json(f.den)}};
}

inline RationalFunction rational_function_from_json(const json& j) {
    return {polynomial_from_json(j.at("numerator")), polynomial_from_json(j.at("denominator")),
            j.contains("center") ? complex_from_json(j.at("center")) : complex(0.0)};
}

inline json cm_pair_to_json(const CMRationalPair& p) {
    return {{"alpha", complex_to_json(p.alpha)},
            {"norm", p.norm},
            {"R", rational_function_to_json(p.R)},
            {"S_factor", rational_function_to_json(p.S_factor)},
            {"held_out_residual", p.residual}};
}

inline CMRationalPair cm_pair_from_json(const json& j) {
    return {complex_from_json(j.at("alpha")), rational_function_from_json(j.at("R")),
            rational_function_from_json(j.at("S_factor")), j.at("norm").get<long>(),
            j.at("held_out_residual").get<double>()};
}

inline json disc_report_to_json(const DiscReport& r) {
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"x", f.x}, {"y", f.y}, {"error", f.error}});
    return {{"max_abs_error", r.max_abs_error},
            {"points_checked", r.points_checked},
            {"points_skipped", r.points_skipped},
            {"failures", std::move(failures)}};
}

inline json chain_rule_report_to_json(const ChainRuleReport& r) {
    return {{"residual", r.residual}, {"rank_P", r.rank_P}, {"F_nonsingular", r.F_nonsingular}, {"passed", r.passed}};
}

}  // namespace wpdef

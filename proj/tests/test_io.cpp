#include <wpdef/io.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wpdef;

namespace {

/// Serialise to text and parse back, as a file round trip would.
json through_text(const json& j) { return json::parse(j.dump()); }

Polynomial awkward_polynomial(std::uint64_t seed, int degree) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<complex> c(degree + 1);
    for (complex& v : c) v = complex(n(rng), n(rng)) * std::pow(10.0, 20.0 * n(rng));
    c[1] = complex(0.1 + 0.2, -1.0 / 3.0);
    c[degree] = complex(5e-324, -1.7976931348623157e308);
    return Polynomial(std::move(c));
}

}  // namespace

TEST(Io, ComplexAndLattice) {
    const complex z(0.1, -1.0 / 7.0);
    EXPECT_EQ(complex_from_json(through_text(complex_to_json(z))), z);
    EXPECT_THROW(complex_from_json(json::array({1.0})), std::invalid_argument);
    const Lattice lat = reduce_generators(complex(0.3, 0.1), complex(-0.2, 1.7));
    const Lattice back = lattice_from_json(through_text(lattice_to_json(lat)));
    EXPECT_EQ(back.omega1(), lat.omega1());
    EXPECT_EQ(back.omega2(), lat.omega2());
}

TEST(Io, PolynomialBitExact) {
    const Polynomial p = awkward_polynomial(3, 9);
    EXPECT_EQ(polynomial_from_json(through_text(polynomial_to_json(p))), p);
    EXPECT_EQ(polynomial_from_json(through_text(polynomial_to_json(Polynomial()))), Polynomial());
    json bad = polynomial_to_json(p);
    bad["degree"] = 3;
    EXPECT_THROW(polynomial_from_json(bad), std::invalid_argument);
}

TEST(Io, BivariateBitExact) {
    const BivariatePolynomial b({awkward_polynomial(1, 4), Polynomial(), awkward_polynomial(2, 2)});
    const json j = through_text(bivariate_to_json(b));
    EXPECT_EQ(j.at("y_degree"), 2);
    EXPECT_EQ(j.at("x_degree"), 4);
    EXPECT_EQ(bivariate_from_json(j), b);
}

TEST(Io, MultiplicationMapWithCenter) {
    const Lattice lat = reduce_generators(1.0, complex(0.0, 2.0));
    const Invariants inv = eisenstein_invariants(lat).invariants;
    const RationalMap m = multiplication_by_n(5, inv);
    ASSERT_NE(m.center(), complex(0.0));
    const RationalMap back = rational_map_from_json(through_text(rational_map_to_json(m)));
    EXPECT_EQ(back, m);
    EXPECT_EQ(back(0.3, 0.2), m(0.3, 0.2));
}

TEST(Io, MissingCenterReadsAsZero) {
    const RationalMap m(BivariatePolynomial(Polynomial{1.0, 2.0}), BivariatePolynomial(Polynomial{3.0}), 0.7);
    json j = rational_map_to_json(m);
    j.erase("center");
    EXPECT_EQ(rational_map_from_json(j).center(), complex(0.0));
    json f = rational_function_to_json({Polynomial{1.0}, Polynomial{2.0}, complex(0.5)});
    f.erase("center");
    EXPECT_EQ(rational_function_from_json(f).center, complex(0.0));
}

TEST(Io, CMPairBitExact) {
    const Lattice lat = reduce_generators(1.0, complex(0.0, 1.0));
    const CMRationalPair pair = construct_R_S(lat, complex(0.0, 1.0), 1, 50, 1e-8);
    const CMRationalPair back = cm_pair_from_json(through_text(cm_pair_to_json(pair)));
    EXPECT_EQ(back.alpha, pair.alpha);
    EXPECT_EQ(back.norm, pair.norm);
    EXPECT_EQ(back.residual, pair.residual);
    EXPECT_EQ(back.R.num, pair.R.num);
    EXPECT_EQ(back.R.den, pair.R.den);
    EXPECT_EQ(back.S_factor.num, pair.S_factor.num);
    EXPECT_EQ(back.S_factor.den, pair.S_factor.den);
}

TEST(Io, Reports) {
    const DiscReport r{1.5e-9, 396, 4, {{0.2, 0.3, 2e-8}}};
    const json j = disc_report_to_json(r);
    EXPECT_EQ(j.at("points_checked"), 396);
    EXPECT_EQ(j.at("failures").size(), 1u);
    EXPECT_EQ(j.at("failures")[0].at("error"), 2e-8);
    const json c = chain_rule_report_to_json({1e-9, 2, true, true});
    EXPECT_EQ(c.at("rank_P"), 2);
    EXPECT_EQ(c.at("passed"), true);
}

#include <wpdef/cm_definability.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace wpdef;

namespace {

const complex kI(0.0, 1.0);
const complex kHex = std::polar(1.0, kPi / 3);

/// Largest deviation of f from x ↦ c·x over a few sample abscissae.
double distance_to_linear(const RationalFunction& f, complex c) {
    double worst = 0.0;
    for (complex x : {complex(0.3, 0.1), complex(-2.0, 1.0), complex(5.0, -4.0), complex(0.01, 0.0)})
        worst = std::max(worst, std::abs(f(x) - c * x) / std::abs(x));
    return worst;
}

double distance_to_constant(const RationalFunction& f, complex c) {
    double worst = 0.0;
    for (complex x : {complex(0.3, 0.1), complex(-2.0, 1.0), complex(5.0, -4.0)})
        worst = std::max(worst, std::abs(f(x) - c));
    return worst;
}

DiscDefinition square_definition() {
    const Lattice lat = reduce_generators(1.0, kI);
    const auto cm = detect_cm(lat);
    return make_disc_definition(lat, construct_R_S(lat, *cm, 50, 1e-8), 0.125, 0.375);
}

}  // namespace

TEST(ConstructRS, SquareLatticeUnit) {
    const Lattice lat = reduce_generators(1.0, kI);
    const CMRationalPair pair = construct_R_S(lat, kI, 1, 50, 1e-8);
    EXPECT_LT(distance_to_linear(pair.R, -1.0), 1e-10);
    EXPECT_LT(distance_to_constant(pair.S_factor, kI), 1e-10);
    EXPECT_LT(pair.residual, 1e-8);
}

TEST(ConstructRS, HexagonalLatticeUnit) {
    const Lattice lat = reduce_generators(1.0, kHex);
    const auto cm = detect_cm(lat);
    ASSERT_TRUE(cm);
    const CMRationalPair pair = construct_R_S(lat, *cm, 50, 1e-8);
    // αΩ = Ω, so ℘(αz) = α⁻²℘(z) and ℘′(αz) = α⁻³℘′(z).
    EXPECT_LT(distance_to_linear(pair.R, 1.0 / (cm->alpha * cm->alpha)), 1e-10);
    EXPECT_LT(distance_to_constant(pair.S_factor, 1.0 / std::pow(cm->alpha, 3)), 1e-10);
}

TEST(ConstructRS, IntegerMultiplierMatchesMultiplicationMap) {
    const Lattice lat = reduce_generators(1.0, kI);
    const CMRationalPair pair = construct_R_S(lat, 2.0, 4, 50, 1e-6);
    const RationalFunction f2 = multiplication_function(2, weierstrass_for(lat)->invariants());
    for (complex x : {complex(0.7, 0.2), complex(-1.5, 2.0), complex(3.0, 0.5)})
        EXPECT_LT(oracle::rel(pair.R(x), f2(x)), 1e-7) << x;
}

TEST(ConstructRS, NonUnitMultiplier) {
    // ℤ + i√2ℤ has α = i√2 of norm 2.
    const Lattice lat = reduce_generators(1.0, complex(0.0, std::sqrt(2.0)));
    const auto cm = detect_cm(lat);
    ASSERT_TRUE(cm);
    EXPECT_EQ(cm->norm, 2);
    const CMRationalPair pair = construct_R_S(lat, *cm, 50, 1e-8);
    const auto wp = weierstrass_for(lat);
    for (complex z : {complex(0.13, 0.21), complex(-0.3, 0.4)}) {
        const auto base = wp->p_and_prime(z);
        EXPECT_LT(oracle::rel(pair.R(base.p.value), wp->p(cm->alpha * z).value), 1e-8);
        EXPECT_LT(oracle::rel(pair.S(base.p.value, base.dp.value), wp->p_prime(cm->alpha * z).value), 1e-8);
    }
}

TEST(ConstructRS, NonCMFails) {
    const complex tau(0.31, 1.27);
    const Lattice lat = reduce_generators(1.0, tau);
    for (complex alpha : {tau, kI * tau, 1.0 + tau}) {
        try {
            construct_R_S(lat, alpha, 1, 50, 1e-8);
            ADD_FAILURE() << "fit accepted for " << alpha;
        } catch (const FitFailure& e) {
            EXPECT_GT(e.residual(), 1e-3) << alpha;
        }
    }
}

TEST(ConstructRS, RejectsBadArguments) {
    const Lattice lat = reduce_generators(1.0, kI);
    EXPECT_THROW(construct_R_S(lat, kI, 0, 50, 1e-8), std::invalid_argument);
    EXPECT_THROW(construct_R_S(lat, kI, 1, 50, 0.0), std::invalid_argument);
}

TEST(ConstructRS, DegreeIsMinimal) {
    // For the unit α = i the fit lands on a degree-1 numerator and constant
    // denominator, with nothing left for larger D.
    const Lattice lat = reduce_generators(1.0, kI);
    const CMRationalPair pair = construct_R_S(lat, kI, 1, 50, 1e-8);
    EXPECT_LE(pair.R.num.degree(), 1);
    EXPECT_LE(pair.R.den.degree(), 0);
}

TEST(DiscDefinition, EvaluatesSquareLattice) {
    const DiscDefinition dd = square_definition();
    const complex want = wp_eval(complex(0.2, 0.3), dd.lattice).value;
    EXPECT_LT(oracle::rel(disc_eval(dd, 0.2, 0.3), want), 1e-8);
    EXPECT_LT(oracle::rel(disc_eval(dd, 0.2, 0.3), oracle::wp_theta(complex(0.2, 0.3), 1.0, kI)), 1e-8);
}

TEST(DiscDefinition, DiagonalPoint) {
    const DiscDefinition dd = square_definition();
    EXPECT_LT(oracle::rel(disc_eval(dd, 0.25, 0.25), wp_eval(complex(0.25, 0.25), dd.lattice).value), 1e-8);
}

TEST(DiscDefinition, DomainChecks) {
    const DiscDefinition dd = square_definition();
    EXPECT_THROW(disc_eval(dd, 0.1, 0.2), DomainError);
    EXPECT_THROW(disc_eval(dd, 0.2, 0.375), DomainError);
    EXPECT_THROW(make_disc_definition(dd.lattice, dd.pair, 0.3, 0.2), std::invalid_argument);
    EXPECT_THROW(make_disc_definition(dd.lattice, dd.pair, 0.5, 1.5), PoleError);
}

TEST(DiscDefinition, GridPassesAndIsDeterministic) {
    const DiscDefinition dd = square_definition();
    const DiscReport coarse = verify_disc_definition(dd, 4, 1e-8);
    const DiscReport fine = verify_disc_definition(dd, 20, 1e-8);
    EXPECT_TRUE(coarse.passed());
    EXPECT_TRUE(fine.passed());
    EXPECT_EQ(fine.points_checked + fine.points_skipped, 400);
    const DiscReport again = verify_disc_definition(dd, 20, 1e-8);
    EXPECT_EQ(again.max_abs_error, fine.max_abs_error);
    EXPECT_THROW(verify_disc_definition(dd, 3, 1e-8), std::invalid_argument);
}

TEST(DiscDefinition, HexagonalGrid) {
    const Lattice lat = reduce_generators(1.0, kHex);
    const auto cm = detect_cm(lat);
    ASSERT_TRUE(cm);
    const DiscDefinition dd = make_disc_definition(lat, construct_R_S(lat, *cm, 50, 1e-8), 0.125, 0.375);
    const DiscReport r = verify_disc_definition(dd, 20, 1e-8);
    EXPECT_TRUE(r.passed()) << r.max_abs_error;
}

TEST(DiscDefinition, DiagonalIsSkippedForRealUnit) {
    // α = −1 would make x + αy = 0 at x = y; the degenerate addition is skipped.
    const Lattice lat = reduce_generators(1.0, kI);
    const CMRationalPair pair{-1.0, {Polynomial{0.0, 1.0}, Polynomial{1.0}}, {Polynomial{-1.0}, Polynomial{1.0}}, 1, 0.0};
    const DiscDefinition dd = make_disc_definition(lat, pair, 0.125, 0.375);
    EXPECT_THROW(disc_eval(dd, 0.25, 0.25), DegenerateAddition);
    const DiscReport r = verify_disc_definition(dd, 4, 1e-8);
    EXPECT_EQ(r.points_skipped, 4);
}

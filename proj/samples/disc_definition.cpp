// Evaluates p on the square x + i·y, 1/8 < x, y < 3/8, for the lattice Z + iZ
// using only p and p' at real arguments, and compares with direct evaluation.

#include <wpdef/wpdef.hpp>

#include <cstdio>

int main() {
    using namespace wpdef;
    const Lattice lat = reduce_generators(1.0, complex(0.0, 1.0));

    const auto witness = detect_cm(lat);
    if (!witness) {
        std::puts("no CM multiplier found");
        return 1;
    }
    const CMRationalPair pair = construct_R_S(lat, *witness, 0, 1e-8);
    std::printf("alpha = %g%+gi, R(X) = (%g%+gi)·X\n", pair.alpha.real(), pair.alpha.imag(),
                pair.R.num.coefficient(1).real(), pair.R.num.coefficient(1).imag());

    const DiscDefinition dd = make_disc_definition(lat, pair, 0.125, 0.375);
    const complex via_interval = disc_eval(dd, 0.2, 0.3);
    const complex direct = wp_eval(complex(0.2, 0.3), lat).value;
    std::printf("p(0.2+0.3i) = %.15g%+.15gi (interval formula)\n", via_interval.real(), via_interval.imag());
    std::printf("            = %.15g%+.15gi (direct)\n", direct.real(), direct.imag());

    const DiscReport report = verify_disc_definition(dd, 20, 1e-8);
    std::printf("20x20 grid: max error %.2e over %d points\n", report.max_abs_error, report.points_checked);
    return report.passed() ? 0 : 1;
}

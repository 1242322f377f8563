#include "commands.hpp"

#include <gtest/gtest.h>

#include <cstdio>

using namespace wpdef;
using namespace wpdef::cli;

namespace {

CommandResult run_args(std::vector<std::string> args) {
    args.insert(args.begin(), "wpdef");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run(int(argv.size()), argv.data());
}

}  // namespace

TEST(ParseComplex, Forms) {
    EXPECT_EQ(parse_complex("i"), complex(0, 1));
    EXPECT_EQ(parse_complex("-i"), complex(0, -1));
    EXPECT_EQ(parse_complex("2"), complex(2, 0));
    EXPECT_EQ(parse_complex("2.5i"), complex(0, 2.5));
    EXPECT_EQ(parse_complex("0.31+1.27i"), complex(0.31, 1.27));
    EXPECT_EQ(parse_complex("1-i"), complex(1, -1));
    EXPECT_EQ(parse_complex(" 3 - 2i "), complex(3, -2));
    EXPECT_EQ(parse_complex("1e-3+2e+1i"), complex(1e-3, 20));
    const complex hex = std::polar(1.0, kPi / 3);
    for (const char* s : {"e^{iπ/3}", "e^{i*pi/3}", "exp(iπ/3)", "e^(ipi/3)"})
        EXPECT_LT(std::abs(parse_complex(s) - hex), 1e-15) << s;
    EXPECT_LT(std::abs(parse_complex("e^{2iπ/3}") - hex * hex), 1e-15);
    for (const char* s : {"", "abc", "1+", "i2", "e^{x}"}) EXPECT_THROW(parse_complex(s), std::invalid_argument) << s;
}

TEST(Cli, LatticeReport) {
    const CommandResult r = run_args({"lattice", "--tau", "i"});
    EXPECT_EQ(r.exit_code, kExitOk);
    const json d = machine_block(r.report);
    EXPECT_EQ(d.at("classification"), "Rectangular");
    EXPECT_EQ(d.at("cm").at("found"), true);
    EXPECT_EQ(d.at("command"), "lattice");
}

TEST(Cli, ConjugatePairGeneratorsAreRhombic) {
    const CommandResult r = run_args({"lattice", "--gen", "1-i", "1+i"});
    EXPECT_EQ(r.exit_code, kExitOk);
    EXPECT_EQ(machine_block(r.report).at("classification"), "Rhombic");
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_args({"lattice", "--gen", "1", "2"}).exit_code, kExitDegenerateLattice);
    EXPECT_EQ(run_args({"eval", "--tau", "i", "--z", "1+i"}).exit_code, kExitPole);
    EXPECT_EQ(run_args({"macintyre", "--tau", "0.31+1.27i"}).exit_code, kExitNoCM);
    EXPECT_EQ(run_args({"eval", "--tau", "i", "--z", "abc"}).exit_code, kExitUsage);
    EXPECT_EQ(run_args({"eval", "--tau", "i"}).exit_code, kExitUsage);
    EXPECT_EQ(run_args({"nonsense"}).exit_code, kExitUsage);
    EXPECT_EQ(run_args({"lattice", "--tau", "i", "--gen", "1", "i"}).exit_code, kExitUsage);
    EXPECT_EQ(run_args({"lattice", "--lattice-file", "/nonexistent.json"}).exit_code, kExitUsage);
    EXPECT_EQ(run_args({"verify", "--tau", "i", "--inject-error"}).exit_code, kExitFailed);
    EXPECT_EQ(run_args({"--help"}).exit_code, kExitOk);
}

TEST(Cli, EvalWithOracle) {
    const CommandResult r = run_args({"eval", "--tau", "i", "--z", "0.3+0.2i", "--oracle"});
    EXPECT_EQ(r.exit_code, kExitOk);
    const json d = machine_block(r.report);
    EXPECT_EQ(d.at("oracle").at("passed"), true);
    EXPECT_LT(d.at("oracle").at("difference").get<double>(), 1e-9);
    EXPECT_LT(d.at("diffeq_residual").get<double>(), 1e-9);
}

TEST(Cli, EvalTolCanForceFailure) {
    const CommandResult r = run_args({"eval", "--tau", "i", "--z", "0.3+0.2i", "--oracle", "--tol", "1e-30"});
    EXPECT_EQ(r.exit_code, kExitFailed);
}

TEST(Cli, VerifyPassesAndLocalisesInjectedError) {
    const CommandResult ok = run_args({"verify", "--tau", "e^{iπ/3}"});
    EXPECT_EQ(ok.exit_code, kExitOk) << ok.report;
    const CommandResult bad = run_args({"verify", "--tau", "i", "--inject-error"});
    const json d = machine_block(bad.report);
    for (const auto& s : d.at("suites")) {
        if (s.at("name") == "diffeq")
            EXPECT_EQ(s.at("status"), "fail");
        else
            EXPECT_NE(s.at("status"), "fail") << s.at("name");
    }
}

TEST(Cli, VerifyIsDeterministic) {
    const CommandResult a = run_args({"verify", "--tau", "0.31+1.27i", "--seed", "7"});
    const CommandResult b = run_args({"verify", "--tau", "0.31+1.27i", "--seed", "7"});
    EXPECT_EQ(a.report, b.report);
    EXPECT_EQ(a.exit_code, kExitOk) << a.report;
}

TEST(Cli, MacintyreSquare) {
    const CommandResult r = run_args({"macintyre", "--tau", "i", "--interval", "0.125", "0.375"});
    EXPECT_EQ(r.exit_code, kExitOk) << r.report;
    const json d = machine_block(r.report);
    EXPECT_EQ(d.at("passed"), true);
    EXPECT_LT(d.at("disc").at("max_abs_error").get<double>(), 1e-8);
}

TEST(Cli, LatticeFileAndOut) {
    const std::string in = ::testing::TempDir() + "wpdef_lattice.json";
    const std::string out = ::testing::TempDir() + "wpdef_report.txt";
    {
        std::ofstream f(in);
        f << R"({"omega1": [2.0, 0.0], "omega2": [0.0, 2.0]})";
    }
    const CommandResult r = run_args({"lattice", "--lattice-file", in, "--out", out});
    EXPECT_EQ(r.exit_code, kExitOk);
    std::ifstream f(out, std::ios::binary);
    const std::string written((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    EXPECT_EQ(written, r.report);
    EXPECT_EQ(machine_block(r.report).at("classification"), "Rectangular");
    std::remove(in.c_str());
    std::remove(out.c_str());
}

TEST(Cli, MachineBlockMissing) { EXPECT_THROW(machine_block("no block here"), std::invalid_argument); }

TEST(Cli, RngIsPortable) {
    Rng a(1), b(1);
    for (int k = 0; k < 100; ++k) {
        const double v = a.uniform();
        EXPECT_EQ(v, b.uniform());
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Cli, RankImplicationTrials) {
    Rng rng(3);
    const auto [violations, nonsingular] = cli::detail::rank_implication_trials(rng, 1000);
    EXPECT_EQ(violations, 0);
    EXPECT_GT(nonsingular, 300);
    EXPECT_LT(nonsingular, 1000);
}

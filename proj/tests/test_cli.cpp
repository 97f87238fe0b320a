#include <doctest.h>

#include "affharm/affine.hpp"
#include "affharm/experiment.hpp"

using namespace affharm;

TEST_SUITE("cli_runner") {

TEST_CASE("defaults are applied and echoed into the report") {
    ExperimentResult res = run_experiment({"f-estimate", "--group", "bs12", "--point", "a^-5",
                                           "--r", "16", "--samples", "2000", "--seed", "7"});
    CHECK(res.exit_code == 0);
    CHECK(res.report.find("\"threshold\": \"3\"") != std::string::npos);  // defaulting rule
    CHECK(res.report.find("\"seed\": 7") != std::string::npos);
    CHECK(res.report.find("\"point\": \"(0; 1/32)\"") != std::string::npos);
}

TEST_CASE("invalid group specs raise typed errors") {
    CHECK_THROWS_AS(run_experiment({"f-estimate", "--group", "lamplighter:4"}), NonPrimeError);
    CHECK_THROWS_AS(run_experiment({"walk", "--group", "so3"}), InvalidGroupSpecError);
    CHECK_THROWS_AS(
        run_experiment({"walk", "--group", "bs12", "--point", "a^^2", "--samples", "10"}),
        MalformedWordError);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    std::vector<std::string> base = {"hitting", "mc",       "--group", "zline",
                                     "--labeling", "parity", "--samples", "20000",
                                     "--seed",     "11"};
    ExperimentResult a = run_experiment(base);
    ExperimentResult b = run_experiment(base);
    CHECK(a.report == b.report);
    std::vector<std::string> wide = base;
    wide.push_back("--workers");
    wide.push_back("3");
    ExperimentResult c = run_experiment(wide);
    CHECK(a.report == c.report);
}

TEST_CASE("statistical gates drive the exit code") {
    // the rho oracle is exactly harmonic: pass, exit 0
    ExperimentResult ok = run_experiment(
        {"residual", "--group", "bs12", "--oracle", "rho", "--point", "a b"});
    CHECK(ok.exit_code == 0);
    CHECK(ok.report.find("\"pass\": true") != std::string::npos);

    // uniform:3 jumps exceed 1 on essentially every trajectory, so the whole
    // z sweep sits on the plateau and the decay fit has nothing to work with
    ExperimentResult fail = run_experiment({"lemma", "jump", "--dist", "uniform:3", "--r", "16",
                                            "--z-list", "1,2", "--samples", "2000", "--seed",
                                            "1"});
    CHECK(fail.exit_code == 2);
    CHECK(fail.report.find("\"pass\": false") != std::string::npos);
}

TEST_CASE("csv projection") {
    ExperimentResult res = run_experiment({"hitting", "exact", "--group", "zline", "--labeling",
                                           "parity", "--format", "csv"});
    CHECK(res.exit_code == 0);
    CHECK(res.report.rfind("key,value\n", 0) == 0);
    CHECK(res.report.find("results.measure.support[0].p,\"1/2\"") != std::string::npos);
}

TEST_CASE("help text lists every subcommand") {
    ExperimentResult res = run_experiment({"--help"});
    for (const char* name : {"walk", "f-estimate", "residual", "seminorm", "lemma", "hitting",
                             "orbit", "extend", "moments"})
        CHECK(res.report.find(name) != std::string::npos);
}

}  // TEST_SUITE

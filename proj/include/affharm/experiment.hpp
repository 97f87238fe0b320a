#pragma once

#include <string>
#include <vector>

namespace affharm {

// Parsed, validated CLI invocation -> report + exit code. Reports are
// canonical: same flags and seed give byte-identical bodies regardless of
// worker count (estimates fold in trajectory order; runtime metadata like
// the worker count stays out of the body).
struct ExperimentResult {
    int exit_code = 0;  // 0 pass, 2 statistical-test failure
    std::string report;  // json or csv body
};

// throws the affharm error types for malformed input; the CLI front end
// maps them to distinct exit codes
ExperimentResult run_experiment(const std::vector<std::string>& args);

// full front end: parses argv, writes the report to --out (default stdout),
// returns the process exit code (0 pass, 1 error, 2 stat failure,
// 3 unknown flag, 4 malformed word, 5 bad group spec, 6 non-prime p)
int experiment_main(int argc, char** argv);

}  // namespace affharm

// SPDX-License-Identifier: MIT
// Runs the thirteen acceptance checks and prints one line per check:
//   PASS|FAIL|SKIP  <number> <name>  (<runtime> ms)  <witness>
// Exits non-zero when any check fails. Optional arguments: check numbers to run.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "sepshift/suite.hpp"

#ifndef SEPSHIFT_DATA_DIR
#define SEPSHIFT_DATA_DIR "data"
#endif

int main(int argc, char** argv) {
    sepshift::SuiteConfig config;
    config.data_dir = SEPSHIFT_DATA_DIR;
    config.timing = true;
    for (int i = 1; i < argc; ++i) config.only.push_back(std::atoi(argv[i]));

    int failed = 0, passed = 0;
    const int total = static_cast<int>(sepshift::suite_check_names().size());
    for (int n = 1; n <= total; ++n) {
        if (!config.only.empty() && std::find(config.only.begin(), config.only.end(), n) == config.only.end()) continue;
        const sepshift::CheckReport r = sepshift::run_check(n, config);
        const char* tag = r.passed() ? "PASS" : r.status == "fail" ? "FAIL" : "SKIP";
        std::printf("%s %2d %-22s (%8.1f ms)  %s\n", tag, r.number, r.check.c_str(), r.runtime_ms, r.witness.c_str());
        std::fflush(stdout);
        if (r.status == "fail") ++failed;
        if (r.passed()) ++passed;
    }
    std::printf("%d passed, %d failed\n", passed, failed);
    return failed == 0 ? 0 : 1;
}

// SPDX-License-Identifier: MIT
// The acceptance suite: thirteen end-to-end checks over the fixtures in the
// data directory and the built-in symbolic systems, reported as JSON.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepshift/common.hpp"

namespace sepshift {

struct SuiteConfig {
    std::string data_dir;
    std::uint64_t seed = 20240601;
    // Vertex cap per layer; 0 skips every check.
    std::int64_t budget = default_budget();
    // Record wall-clock times. Off by default so that reports for the same
    // configuration are byte-identical.
    bool timing = false;
    // Check numbers (1-based) to run; empty runs all of them.
    std::vector<int> only;
};

struct CheckReport {
    int number = 0;
    std::string check;
    std::string status;  // "pass", "fail" or "skipped: budget"
    std::string witness;
    double runtime_ms = 0;

    bool passed() const { return status == "pass"; }
    json to_json() const;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::int64_t budget = 0;
    std::vector<CheckReport> checks;

    // True when no check failed (skipped checks do not count as failures).
    bool ok() const;
    json to_json() const;
    // One line per check: "[status] name: witness".
    std::string to_text() const;
};

// Names of the checks in order; check i has name suite_check_names()[i-1].
const std::vector<std::string>& suite_check_names();
CheckReport run_check(int number, const SuiteConfig& config);
SuiteReport run_suite(const SuiteConfig& config);

}  // namespace sepshift

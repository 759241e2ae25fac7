// SPDX-License-Identifier: MIT
// Word-level reference semantics for the built-in symbolic systems. Points
// are finite admissible words on a window; the shift acts by moving letters,
// never through cylinder images.
#pragma once

#include <cstdint>
#include <string>

#include "sepshift/symbolic.hpp"

namespace sepshift {

struct OracleReport {
    bool ok = true;
    std::int64_t checked = 0;
    std::string witness;
};

// For every admissible word x on a window large enough for the cells of
// levels 0..max_depth: the cells containing x form a blue path, shift_prefix
// maps the even prefixes of x to the prefixes of sigma(x), and the prefix of
// x is one of the preimage branches of the prefix of sigma(x).
OracleReport word_shift_oracle(const SymbolicSystem& sys, const BuiltDiagram& built, int max_depth);

}  // namespace sepshift

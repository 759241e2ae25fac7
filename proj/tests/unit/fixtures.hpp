// SPDX-License-Identifier: MIT
// Fixture loading shared by the unit tests.
#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "sepshift/graph.hpp"

#ifndef SEPSHIFT_DATA_DIR
#define SEPSHIFT_DATA_DIR "data"
#endif

namespace sepshift::testing {

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(std::string(SEPSHIFT_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Layer fixture_gfs(const std::string& name) { return parse_graph(read_fixture(name)).layer; }
inline Digraph fixture_digraph(const std::string& name) { return parse_graph(read_fixture(name)).digraph; }

}  // namespace sepshift::testing

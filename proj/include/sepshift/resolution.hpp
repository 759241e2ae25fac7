// SPDX-License-Identifier: MIT
// One-step and canonical resolutions, higher edge graphs, layer isomorphism
// and the red adjacency recursion between consecutive even layers.
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sepshift/common.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/ldiagram.hpp"

namespace sepshift {

// One-step resolution of a separated bipartite layer. The new top is the old
// bottom. Each old top vertex u with ordered blocks X_1..X_k contributes one
// new bottom vertex "v(x1,...,xk)" per choice x_j in X_j, and that vertex gets
// one edge "a[xi](x1,...,^,...,xk)" per position i, with range s(x_i) and the
// color of x_i. The blocks of a new top vertex w are X(x) for the old edges x
// leaving w, blue edges first and then red, each in declaration order; every
// block is tagged with its parent x in block_parents. Throws
// ResourceBudgetExceeded when the new bottom would exceed `budget` vertices
// (a negative budget means default_budget()).
Layer one_step_resolution(const Layer& layer, std::int64_t budget = -1);

// The first `depth` layers of the canonical resolution of a generalized
// finite shift graph. Levels 0 and 1 keep the input names; deeper vertices are
// named "v(" + the ids of the chosen edges + ")" and layer n edges (n >= 1)
// are named "a<n>.<i>", so names stay short at every depth.
LDiagram canonical_resolution(const Layer& gfs, int depth, std::int64_t budget = -1);

// The layer (level k, level k+1) of a diagram as a separated layer; even
// layers of an l-diagram are generalized finite shift graphs.
Layer layer_of(const LDiagram& d, int k);

// Higher edge graph E^[n+1]: vertices are the paths w_1...w_n of length n
// (tgt(w_i) = src(w_{i+1})) and every path of length n+1 is an edge from its
// prefix to its suffix. Names join edge ids with '.'. Requires n >= 1 and no
// sinks or sources.
Digraph higher_edge_graph(const Digraph& g, int n, std::int64_t budget = -1);

struct Isomorphism {
    bool found = false;
    std::map<std::string, std::string> top;     // vertex of a -> vertex of b
    std::map<std::string, std::string> bottom;  // vertex of a -> vertex of b
    std::string witness;                        // reason when not found
};

// Isomorphism of generalized finite shift graphs: bijections of top and of
// bottom vertices carrying red multiplicities and blue incidences onto each
// other. Color refinement followed by backtracking.
Isomorphism find_gfs_isomorphism(const Layer& a, const Layer& b);

// Compares layer 2n of the canonical resolution of gfs_from_digraph(g) with
// gfs_from_digraph(higher_edge_graph(g, n)).
Isomorphism check_resolution_vs_higher_edge(const Digraph& g, int n, std::int64_t budget = -1);

struct RecursionCheck {
    bool ok = false;
    IntMatrix lhs;  // D_{2j} A_{2j}
    IntMatrix rhs;  // P_{2j+2} A_{2j+2} P_{2j+1}^T
    std::string witness;
};

// Red adjacency recursion between the even layers 2j and 2j+2. Vertices are
// identified with their blue paths to level 0. Requires horizon >= 2j+3.
RecursionCheck adjacency_recursion_check(const LDiagram& d, int j);

// Red adjacency matrix of layer k (rows level k+1, columns level k) in the
// stored vertex order.
IntMatrix red_adjacency(const LDiagram& d, int k);

}  // namespace sepshift

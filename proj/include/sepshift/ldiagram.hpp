// SPDX-License-Identifier: MIT
// Depth-truncated l-diagrams: storage, validators, romb solvers and telescoping.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "sepshift/common.hpp"
#include "sepshift/graph.hpp"

namespace sepshift {

// Edge of layer k: source at level k+1, range at level k.
struct DEdge {
    std::string id;
    int src = 0;
    int rng = 0;
    Color color = Color::Blue;
    int block = -1;  // index of the block of rng containing this edge (derived)
};

// A separation block. At odd levels each red block is tagged with its parent
// red edge in the layer above (index into layer k-1); otherwise parent = -1.
struct Block {
    Color color = Color::Blue;
    int parent = -1;
    std::vector<int> edges;
};

struct DLayer {
    std::vector<DEdge> edges;
    std::vector<std::vector<Block>> sep;  // per top vertex (level k)

    // Derived by LDiagram::finalize().
    std::vector<std::vector<int>> in;        // per top vertex
    std::vector<std::vector<int>> blue_out;  // per bottom vertex (level k+1)
    std::vector<std::vector<int>> red_out;   // per bottom vertex
};

// Levels 0..N with vertex names and N layers of edges. Level k is the top of
// layer k and the bottom of layer k-1.
class LDiagram {
public:
    std::vector<std::vector<std::string>> levels;
    std::vector<DLayer> layers;

    int horizon() const { return static_cast<int>(layers.size()); }
    int level_size(int k) const { return static_cast<int>(levels.at(k).size()); }
    const DEdge& edge(int k, int i) const { return layers.at(k).edges.at(i); }
    int vertex_index(int level, const std::string& name) const;  // -1 if absent
    int edge_index(int k, const std::string& id) const;           // -1 if absent

    // Blocks of vertex v at level k (k < horizon).
    const std::vector<Block>& blocks(int k, int v) const { return layers.at(k).sep.at(v); }
    // The block of an edge of layer k.
    const Block& block_of(int k, int e) const { return layers[k].sep[layers[k].edges[e].rng][layers[k].edges[e].block]; }
    // Parent red edge (in layer k-1) of the block containing edge e of layer k, or -1.
    int block_parent(int k, int e) const { return block_of(k, e).parent; }

    // Recomputes adjacency lists, edge block indices, block colors and name
    // indices. Must be called after editing levels/layers directly.
    void finalize();

    // Keeps only the first n layers.
    LDiagram truncated(int n) const;

    std::vector<Layer> to_layers() const;
    static LDiagram from_layers(const std::vector<Layer>& layers);
    json to_json() const;
    static LDiagram from_json(const json& j);

private:
    std::vector<std::unordered_map<std::string, int>> vindex_;
    std::vector<std::unordered_map<std::string, int>> eindex_;
};

// Exact comparison: same level names, same edge ids with the same endpoints
// and colors, same blocks with the same parent tags.
bool structurally_equal(const LDiagram& a, const LDiagram& b);

// Layer-respecting comparison that ignores edge ids: vertices are matched by
// name and edges by (source, range, color) with multiplicity; blocks are
// compared as multisets of such triples, odd red blocks keyed by the triple
// of their parent edge.
bool equal_up_to_edge_names(const LDiagram& a, const LDiagram& b, std::string* witness = nullptr);

Report validate_ldiagram(const LDiagram& d);
Report validate_hdiagram(const LDiagram& d);
bool is_refined(const LDiagram& d);
// Layers containing two red edges with the same source and range.
std::vector<int> unrefined_layers(const LDiagram& d);

struct Romb {
    int layer = 0;  // e0, f0 lie in this layer; e1, f1 in the next one
    int e0 = -1, e1 = -1, f0 = -1, f1 = -1;
    bool operator==(const Romb&) const = default;
};

// Even base level: the unique red pair (f0, f1) with f1 in R(f0).
Romb complete_romb_from_blue(const LDiagram& d, int k, int e0, int e1);
// Odd base level: the unique red pair (f0, f1) with f0 in R(g), where g is a
// red edge of layer k-1 whose source is r(e0).
Romb complete_romb_odd(const LDiagram& d, int k, int g, int e0, int e1);
// The unique blue pair closing a red pair (at even levels f1 must lie in R(f0)).
Romb complete_romb_from_red(const LDiagram& d, int k, int f0, int f1);

struct ContractionSequence {
    std::vector<int> m;

    // Throws CRViolated unless m_0 is even, m is strictly increasing and
    // consecutive differences are odd.
    void check() const;
    static ContractionSequence identity(int layers);
    // Random sequence with m_0 = 0, odd gaps in {1,3,...,2*max_half_gap-1}, m_last <= horizon.
    static ContractionSequence random(std::mt19937_64& rng, int horizon, int max_half_gap = 2);
};

// Contraction along m. The result has m.size() - 1 layers; contracted edges
// are named "(a,b,...)" by the flattened tuple of base edge ids.
LDiagram telescope(const LDiagram& d, const ContractionSequence& m);

// Composed sequence for telescope(telescope(d, m), m2): M_n = m_{m2_n}.
ContractionSequence compose(const ContractionSequence& m, const ContractionSequence& m2);

std::string export_dot(const LDiagram& d);

}  // namespace sepshift

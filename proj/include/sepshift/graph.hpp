// SPDX-License-Identifier: MIT
// Separated bipartite layers, generalized finite shift graphs, digraphs and their file formats.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sepshift/common.hpp"

namespace sepshift {

struct Edge {
    std::string id;
    std::string src;  // a bottom vertex
    std::string tgt;  // a top vertex (the range)
    Color color = Color::Blue;

    bool operator==(const Edge&) const = default;
};

// One bipartite layer: edges run from bottom vertices to top vertices and the
// incoming edges of every top vertex are partitioned into ordered blocks.
struct Layer {
    std::vector<std::string> top;
    std::vector<std::string> bottom;
    std::vector<Edge> edges;
    std::map<std::string, std::vector<std::vector<std::string>>> separation;
    // Optional per-block tags, parallel to `separation`. Layers of an
    // l-diagram at odd levels tag each red block with its parent red edge id;
    // an empty string means "no tag".
    std::map<std::string, std::vector<std::string>> block_parents;

    const Edge* find_edge(const std::string& id) const;
};

struct DigraphEdge {
    std::string id;
    std::string src;
    std::string tgt;

    bool operator==(const DigraphEdge&) const = default;
};

struct Digraph {
    std::vector<std::string> vertices;
    std::vector<DigraphEdge> edges;
};

enum class GraphKind { Layer, Gfs, Digraph };

struct ParsedGraph {
    GraphKind kind = GraphKind::Layer;
    Layer layer;
    Digraph digraph;
};

// Integer matrix with named rows and columns (rows = bottom, cols = top).
struct IntMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    std::vector<std::vector<std::int64_t>> a;

    std::string to_csv() const;
    bool operator==(const IntMatrix&) const = default;
};

Report validate_layer(const Layer& layer);
Report validate_gfs(const Layer& layer);

// Red multiplicity matrix A and blue incidence matrix I, rows and columns in
// lexicographic order of the vertex names.
std::pair<IntMatrix, IntMatrix> red_blue_matrices(const Layer& gfs);

// Throws ErrorKind::SinkOrSource when a vertex lacks an in- or out-edge.
void require_no_sinks_or_sources(const Digraph& g);
Layer gfs_from_digraph(const Digraph& g);

json layer_to_json(const Layer& layer, GraphKind kind = GraphKind::Layer);
Layer layer_from_json(const json& j);
json digraph_to_json(const Digraph& g);
Digraph digraph_from_json(const json& j);

ParsedGraph parse_graph(const std::string& text);
std::string serialize_graph(const Layer& layer, GraphKind kind = GraphKind::Layer);
std::string serialize_graph(const Digraph& g);
std::string export_dot(const Layer& layer);
std::string export_dot(const Digraph& g);

// Equality up to ordering of vertex lists, edge lists and block lists.
bool structurally_equal(const Layer& a, const Layer& b);
bool structurally_equal(const Digraph& a, const Digraph& b);

}  // namespace sepshift

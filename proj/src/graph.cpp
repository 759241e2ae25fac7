// SPDX-License-Identifier: MIT
// Separated bipartite layers, GFS graphs, digraphs and their I/O.
#include "sepshift/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace sepshift {

const Edge* Layer::find_edge(const std::string& id) const {
    for (const auto& e : edges)
        if (e.id == id) return &e;
    return nullptr;
}

std::string IntMatrix::to_csv() const {
    std::ostringstream os;
    os << "";
    for (const auto& c : cols) os << "," << c;
    os << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        os << rows[i];
        for (auto x : a[i]) os << "," << x;
        os << "\n";
    }
    return os.str();
}

namespace {

template <class T>
std::vector<T> sorted(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    return v;
}

void check_unique(const std::vector<std::string>& names, const std::string& what, Report& rep) {
    std::set<std::string> seen;
    for (const auto& n : names)
        if (!seen.insert(n).second) rep.add("unique-" + what, "duplicate " + what + " '" + n + "'");
}

}  // namespace

Report validate_layer(const Layer& layer) {
    Report rep;
    check_unique(layer.top, "top-vertex", rep);
    check_unique(layer.bottom, "bottom-vertex", rep);
    std::set<std::string> top(layer.top.begin(), layer.top.end());
    std::set<std::string> bottom(layer.bottom.begin(), layer.bottom.end());
    for (const auto& t : top)
        if (bottom.count(t)) rep.add("disjoint-levels", "vertex '" + t + "' is both top and bottom");

    std::map<std::string, const Edge*> by_id;
    for (const auto& e : layer.edges) {
        if (!by_id.emplace(e.id, &e).second) rep.add("unique-edge", "duplicate edge id '" + e.id + "'");
        if (!bottom.count(e.src)) rep.add("edge-source", "edge '" + e.id + "' has source '" + e.src + "' outside bottom");
        if (!top.count(e.tgt)) rep.add("edge-range", "edge '" + e.id + "' has range '" + e.tgt + "' outside top");
    }

    std::map<std::string, int> placed;
    for (const auto& [v, blocks] : layer.separation) {
        if (!top.count(v)) {
            rep.add("separation-vertex", "separation declared for unknown top vertex '" + v + "'");
            continue;
        }
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (blocks[b].empty()) rep.add("block-nonempty", "empty block #" + std::to_string(b) + " at '" + v + "'");
            for (const auto& id : blocks[b]) {
                auto it = by_id.find(id);
                if (it == by_id.end()) {
                    rep.add("block-edge", "block at '" + v + "' names unknown edge '" + id + "'");
                    continue;
                }
                if (it->second->tgt != v)
                    rep.add("block-range", "edge '" + id + "' placed at '" + v + "' but its range is '" + it->second->tgt + "'");
                ++placed[id];
            }
        }
    }
    for (const auto& e : layer.edges) {
        int n = placed.count(e.id) ? placed[e.id] : 0;
        if (n == 0) rep.add("block-cover", "edge '" + e.id + "' lies in no block of its range");
        if (n > 1) rep.add("block-disjoint", "edge '" + e.id + "' lies in " + std::to_string(n) + " blocks");
    }
    for (const auto& [v, tags] : layer.block_parents) {
        auto it = layer.separation.find(v);
        std::size_t nb = it == layer.separation.end() ? 0 : it->second.size();
        if (tags.size() != nb) rep.add("block-tags", "block tag list at '" + v + "' does not match its block count");
    }
    return rep;
}

Report validate_gfs(const Layer& layer) {
    Report rep = validate_layer(layer);
    if (!rep.ok()) return rep;
    std::map<std::string, const Edge*> by_id;
    for (const auto& e : layer.edges) by_id[e.id] = &e;

    std::map<std::string, int> blue_out, red_out;
    for (const auto& v : layer.top) {
        auto it = layer.separation.find(v);
        std::vector<std::vector<std::string>> blocks;
        if (it != layer.separation.end()) blocks = it->second;
        int nblue = 0, nred = 0;
        bool shape_ok = blocks.size() == 2;
        for (const auto& b : blocks) {
            bool all_blue = true, all_red = true;
            for (const auto& id : b) {
                if (by_id[id]->color == Color::Blue) all_red = false;
                else all_blue = false;
            }
            if (b.empty() || (!all_blue && !all_red)) shape_ok = false;
            if (!b.empty() && all_blue) ++nblue;
            if (!b.empty() && all_red) ++nred;
        }
        if (!shape_ok || nblue != 1 || nred != 1)
            rep.add("gfs.two-blocks", "top vertex '" + v + "' must carry exactly one nonempty blue block and one nonempty red block");
        std::set<std::string> blue_src;
        for (const auto& b : blocks)
            for (const auto& id : b)
                if (by_id[id]->color == Color::Blue && !blue_src.insert(by_id[id]->src).second)
                    rep.add("gfs.blue-sources-distinct", "two blue edges into '" + v + "' share source '" + by_id[id]->src + "'");
    }
    for (const auto& e : layer.edges) ++(e.color == Color::Blue ? blue_out : red_out)[e.src];
    for (const auto& w : layer.bottom) {
        int b = blue_out.count(w) ? blue_out[w] : 0;
        if (b != 1) rep.add("gfs.blue-partition", "bottom vertex '" + w + "' is the source of " + std::to_string(b) + " blue edges (expected exactly 1)");
        if (!red_out.count(w)) rep.add("gfs.red-cover", "bottom vertex '" + w + "' is the source of no red edge");
    }
    return rep;
}

std::pair<IntMatrix, IntMatrix> red_blue_matrices(const Layer& gfs) {
    IntMatrix A, I;
    A.rows = I.rows = sorted(gfs.bottom);
    A.cols = I.cols = sorted(gfs.top);
    std::map<std::string, std::size_t> ri, ci;
    for (std::size_t i = 0; i < A.rows.size(); ++i) ri[A.rows[i]] = i;
    for (std::size_t i = 0; i < A.cols.size(); ++i) ci[A.cols[i]] = i;
    A.a.assign(A.rows.size(), std::vector<std::int64_t>(A.cols.size(), 0));
    I.a = A.a;
    for (const auto& e : gfs.edges) {
        auto& m = e.color == Color::Red ? A : I;
        auto& cell = m.a.at(ri.at(e.src)).at(ci.at(e.tgt));
        cell = checked_count(cell + 1);
    }
    return {A, I};
}

void require_no_sinks_or_sources(const Digraph& g) {
    std::set<std::string> has_out, has_in;
    for (const auto& e : g.edges) {
        has_out.insert(e.src);
        has_in.insert(e.tgt);
    }
    for (const auto& v : g.vertices) {
        if (!has_out.count(v)) throw Error(ErrorKind::SinkOrSource, "vertex '" + v + "' is a sink");
        if (!has_in.count(v)) throw Error(ErrorKind::SinkOrSource, "vertex '" + v + "' is a source");
    }
}

Layer gfs_from_digraph(const Digraph& g) {
    require_no_sinks_or_sources(g);
    Layer out;
    for (const auto& v : g.vertices) {
        out.top.push_back("v^" + v);
        out.bottom.push_back("v_" + v);
        out.edges.push_back({"e_" + v, "v_" + v, "v^" + v, Color::Blue});
        out.separation["v^" + v] = {{"e_" + v}, {}};
    }
    for (const auto& f : g.edges) {
        out.edges.push_back({f.id, "v_" + f.src, "v^" + f.tgt, Color::Red});
        out.separation["v^" + f.tgt][1].push_back(f.id);
    }
    return out;
}

namespace {

[[noreturn]] void shape_error(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

std::vector<std::string> string_list(const json& j, const std::string& what) {
    if (!j.is_array()) shape_error("'" + what + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& x : j) {
        if (!x.is_string()) shape_error("'" + what + "' must be a list of strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

const json& key(const json& j, const char* k) {
    if (!j.is_object() || !j.contains(k)) shape_error(std::string("missing key '") + k + "'");
    return j.at(k);
}

std::string str_field(const json& j, const char* k) {
    const json& v = key(j, k);
    if (!v.is_string()) shape_error(std::string("key '") + k + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

json layer_to_json(const Layer& layer, GraphKind kind) {
    json j;
    j["kind"] = kind == GraphKind::Gfs ? "gfs" : "layer";
    j["top"] = sorted(layer.top);
    j["bottom"] = sorted(layer.bottom);
    auto edges = layer.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    j["edges"] = json::array();
    for (const auto& e : edges)
        j["edges"].push_back({{"id", e.id}, {"src", e.src}, {"tgt", e.tgt}, {"color", color_name(e.color)}});
    j["separation"] = json::object();
    for (const auto& [v, blocks] : layer.separation) j["separation"][v] = blocks;
    if (!layer.block_parents.empty()) {
        j["block_parents"] = json::object();
        for (const auto& [v, tags] : layer.block_parents) j["block_parents"][v] = tags;
    }
    return j;
}

Layer layer_from_json(const json& j) {
    Layer l;
    l.top = string_list(key(j, "top"), "top");
    l.bottom = string_list(key(j, "bottom"), "bottom");
    const json& edges = key(j, "edges");
    if (!edges.is_array()) shape_error("'edges' must be a list");
    for (const auto& e : edges)
        l.edges.push_back({str_field(e, "id"), str_field(e, "src"), str_field(e, "tgt"), parse_color(str_field(e, "color"))});
    const json& sep = key(j, "separation");
    if (!sep.is_object()) shape_error("'separation' must be a map from vertex to list of blocks");
    for (auto it = sep.begin(); it != sep.end(); ++it) {
        if (!it.value().is_array()) shape_error("separation of '" + it.key() + "' must be a list of blocks");
        auto& blocks = l.separation[it.key()];
        for (const auto& b : it.value()) blocks.push_back(string_list(b, "separation block of " + it.key()));
    }
    if (j.contains("block_parents")) {
        const json& bp = j.at("block_parents");
        if (!bp.is_object()) shape_error("'block_parents' must be a map");
        for (auto it = bp.begin(); it != bp.end(); ++it)
            l.block_parents[it.key()] = string_list(it.value(), "block_parents of " + it.key());
    }
    std::set<std::string> top(l.top.begin(), l.top.end()), bottom(l.bottom.begin(), l.bottom.end()), ids;
    for (const auto& e : l.edges) {
        ids.insert(e.id);
        if (!bottom.count(e.src)) throw Error(ErrorKind::UnknownReference, "edge '" + e.id + "' source '" + e.src + "'");
        if (!top.count(e.tgt)) throw Error(ErrorKind::UnknownReference, "edge '" + e.id + "' target '" + e.tgt + "'");
    }
    for (const auto& [v, blocks] : l.separation) {
        if (!top.count(v)) throw Error(ErrorKind::UnknownReference, "separation vertex '" + v + "'");
        for (const auto& b : blocks)
            for (const auto& id : b)
                if (!ids.count(id)) throw Error(ErrorKind::UnknownReference, "separation edge '" + id + "'");
    }
    return l;
}

json digraph_to_json(const Digraph& g) {
    json j;
    j["kind"] = "digraph";
    j["vertices"] = sorted(g.vertices);
    auto edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const DigraphEdge& a, const DigraphEdge& b) { return a.id < b.id; });
    j["edges"] = json::array();
    for (const auto& e : edges) j["edges"].push_back({{"id", e.id}, {"src", e.src}, {"tgt", e.tgt}});
    return j;
}

Digraph digraph_from_json(const json& j) {
    Digraph g;
    g.vertices = string_list(key(j, "vertices"), "vertices");
    const json& edges = key(j, "edges");
    if (!edges.is_array()) shape_error("'edges' must be a list");
    std::set<std::string> vs(g.vertices.begin(), g.vertices.end());
    for (const auto& e : edges) {
        DigraphEdge d{str_field(e, "id"), str_field(e, "src"), str_field(e, "tgt")};
        if (!vs.count(d.src)) throw Error(ErrorKind::UnknownReference, "edge '" + d.id + "' source '" + d.src + "'");
        if (!vs.count(d.tgt)) throw Error(ErrorKind::UnknownReference, "edge '" + d.id + "' target '" + d.tgt + "'");
        g.edges.push_back(d);
    }
    return g;
}

ParsedGraph parse_graph(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + e.what());
    }
    ParsedGraph out;
    std::string kind = str_field(j, "kind");
    if (kind == "digraph") {
        out.kind = GraphKind::Digraph;
        out.digraph = digraph_from_json(j);
    } else if (kind == "layer" || kind == "gfs") {
        out.kind = kind == "gfs" ? GraphKind::Gfs : GraphKind::Layer;
        out.layer = layer_from_json(j);
    } else {
        shape_error("unknown kind '" + kind + "'");
    }
    return out;
}

std::string serialize_graph(const Layer& layer, GraphKind kind) { return layer_to_json(layer, kind).dump(2) + "\n"; }
std::string serialize_graph(const Digraph& g) { return digraph_to_json(g).dump(2) + "\n"; }

namespace {

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string export_dot(const Layer& layer) {
    std::ostringstream os;
    os << "digraph layer {\n  rankdir=BT;\n";
    os << "  { rank=same;";
    for (const auto& v : sorted(layer.top)) os << " " << dot_quote(v) << ";";
    os << " }\n  { rank=same;";
    for (const auto& v : sorted(layer.bottom)) os << " " << dot_quote(v) << ";";
    os << " }\n";
    auto edges = layer.edges;
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    for (const auto& e : edges) {
        os << "  " << dot_quote(e.src) << " -> " << dot_quote(e.tgt) << " [label=" << dot_quote(e.id);
        if (e.color == Color::Red) os << ", color=red";
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string export_dot(const Digraph& g) {
    std::ostringstream os;
    os << "digraph E {\n";
    for (const auto& v : sorted(g.vertices)) os << "  " << dot_quote(v) << ";\n";
    for (const auto& e : g.edges)
        os << "  " << dot_quote(e.src) << " -> " << dot_quote(e.tgt) << " [label=" << dot_quote(e.id) << "];\n";
    os << "}\n";
    return os.str();
}

namespace {

json canonical_layer(const Layer& l) {
    json j = layer_to_json(l);
    json sep = json::object();
    for (const auto& [v, blocks] : l.separation) {
        std::vector<std::pair<std::string, std::vector<std::string>>> tagged;
        auto tags = l.block_parents.count(v) ? l.block_parents.at(v) : std::vector<std::string>(blocks.size());
        for (std::size_t b = 0; b < blocks.size(); ++b)
            tagged.push_back({b < tags.size() ? tags[b] : std::string(), sorted(blocks[b])});
        std::sort(tagged.begin(), tagged.end());
        json arr = json::array();
        for (const auto& [t, b] : tagged) arr.push_back({{"tag", t}, {"edges", b}});
        sep[v] = arr;
    }
    j["separation"] = sep;
    j.erase("block_parents");
    j.erase("kind");
    return j;
}

}  // namespace

bool structurally_equal(const Layer& a, const Layer& b) { return canonical_layer(a) == canonical_layer(b); }

bool structurally_equal(const Digraph& a, const Digraph& b) { return digraph_to_json(a) == digraph_to_json(b); }

}  // namespace sepshift

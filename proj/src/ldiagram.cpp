// SPDX-License-Identifier: MIT
// l-diagram storage, validators, romb solvers and telescoping.
#include "sepshift/ldiagram.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace sepshift {

namespace {

// Records at most `cap` witnesses per rule and a final count of the rest.
class CappedReport {
public:
    explicit CappedReport(Report& rep, int cap = 20) : rep_(rep), cap_(cap) {}
    ~CappedReport() {
        for (const auto& [rule, n] : counts_)
            if (n > cap_) rep_.add(rule, "... and " + std::to_string(n - cap_) + " more");
    }
    void add(const std::string& rule, const std::string& witness) {
        if (++counts_[rule] <= cap_) rep_.add(rule, witness);
    }
    void unchecked(const std::string& what) { rep_.add_unchecked(what); }

private:
    Report& rep_;
    int cap_;
    std::map<std::string, int> counts_;
};

std::string vname(const LDiagram& d, int level, int v) {
    return "level " + std::to_string(level) + " vertex '" + d.levels[level][v] + "'";
}

std::string ename(const LDiagram& d, int k, int e) {
    return "layer " + std::to_string(k) + " edge '" + d.layers[k].edges[e].id + "'";
}

}  // namespace

int LDiagram::vertex_index(int level, const std::string& name) const {
    if (level < 0 || level >= static_cast<int>(vindex_.size())) return -1;
    auto it = vindex_[level].find(name);
    return it == vindex_[level].end() ? -1 : it->second;
}

int LDiagram::edge_index(int k, const std::string& id) const {
    if (k < 0 || k >= static_cast<int>(eindex_.size())) return -1;
    auto it = eindex_[k].find(id);
    return it == eindex_[k].end() ? -1 : it->second;
}

void LDiagram::finalize() {
    vindex_.assign(levels.size(), {});
    for (std::size_t l = 0; l < levels.size(); ++l)
        for (std::size_t v = 0; v < levels[l].size(); ++v) vindex_[l].emplace(levels[l][v], static_cast<int>(v));
    eindex_.assign(layers.size(), {});
    for (std::size_t k = 0; k < layers.size(); ++k) {
        DLayer& L = layers[k];
        std::size_t ntop = levels.at(k).size(), nbot = levels.at(k + 1).size();
        L.sep.resize(ntop);
        L.in.assign(ntop, {});
        L.blue_out.assign(nbot, {});
        L.red_out.assign(nbot, {});
        for (std::size_t i = 0; i < L.edges.size(); ++i) {
            DEdge& e = L.edges[i];
            e.block = -1;
            eindex_[k].emplace(e.id, static_cast<int>(i));
            L.in.at(e.rng).push_back(static_cast<int>(i));
            (e.color == Color::Blue ? L.blue_out : L.red_out).at(e.src).push_back(static_cast<int>(i));
        }
        for (std::size_t v = 0; v < ntop; ++v)
            for (std::size_t b = 0; b < L.sep[v].size(); ++b) {
                Block& B = L.sep[v][b];
                if (!B.edges.empty()) B.color = L.edges.at(B.edges.front()).color;
                for (int e : B.edges)
                    if (L.edges.at(e).rng == static_cast<int>(v) && L.edges[e].block < 0) L.edges[e].block = static_cast<int>(b);
            }
    }
}

LDiagram LDiagram::truncated(int n) const {
    if (n > horizon()) throw Error(ErrorKind::HorizonExceeded, "cannot truncate to " + std::to_string(n) + " layers");
    LDiagram d;
    d.levels.assign(levels.begin(), levels.begin() + n + 1);
    d.layers.assign(layers.begin(), layers.begin() + n);
    d.finalize();
    return d;
}

std::vector<Layer> LDiagram::to_layers() const {
    std::vector<Layer> out;
    for (int k = 0; k < horizon(); ++k) {
        const DLayer& L = layers[k];
        Layer l;
        l.top = levels[k];
        l.bottom = levels[k + 1];
        for (const auto& e : L.edges) l.edges.push_back({e.id, levels[k + 1][e.src], levels[k][e.rng], e.color});
        for (int v = 0; v < level_size(k); ++v) {
            auto& blocks = l.separation[levels[k][v]];
            std::vector<std::string> tags;
            for (const auto& B : L.sep[v]) {
                std::vector<std::string> ids;
                for (int e : B.edges) ids.push_back(L.edges[e].id);
                blocks.push_back(ids);
                tags.push_back(B.parent >= 0 && k > 0 ? layers[k - 1].edges[B.parent].id : std::string());
            }
            if (k % 2 == 1) l.block_parents[levels[k][v]] = tags;
        }
        out.push_back(std::move(l));
    }
    return out;
}

LDiagram LDiagram::from_layers(const std::vector<Layer>& in) {
    LDiagram d;
    if (in.empty()) {
        d.levels.push_back({});
        d.finalize();
        return d;
    }
    d.levels.push_back(in[0].top);
    for (std::size_t k = 0; k < in.size(); ++k) {
        if (k > 0) {
            std::set<std::string> a(in[k].top.begin(), in[k].top.end()), b(in[k - 1].bottom.begin(), in[k - 1].bottom.end());
            if (a != b)
                throw Error(ErrorKind::StructureMismatch, "layer " + std::to_string(k) + " top does not match layer " + std::to_string(k - 1) + " bottom");
        }
        d.levels.push_back(in[k].bottom);
    }
    std::vector<std::map<std::string, int>> vi(d.levels.size());
    for (std::size_t l = 0; l < d.levels.size(); ++l)
        for (std::size_t v = 0; v < d.levels[l].size(); ++v) vi[l][d.levels[l][v]] = static_cast<int>(v);
    std::vector<std::map<std::string, int>> ei(in.size());
    d.layers.resize(in.size());
    for (std::size_t k = 0; k < in.size(); ++k) {
        for (const auto& e : in[k].edges) {
            auto s = vi[k + 1].find(e.src);
            auto r = vi[k].find(e.tgt);
            if (s == vi[k + 1].end() || r == vi[k].end())
                throw Error(ErrorKind::UnknownReference, "edge '" + e.id + "' in layer " + std::to_string(k));
            ei[k][e.id] = static_cast<int>(d.layers[k].edges.size());
            d.layers[k].edges.push_back({e.id, s->second, r->second, e.color, -1});
        }
        d.layers[k].sep.resize(d.levels[k].size());
        for (const auto& [vn, blocks] : in[k].separation) {
            auto vit = vi[k].find(vn);
            if (vit == vi[k].end()) throw Error(ErrorKind::UnknownReference, "separation vertex '" + vn + "'");
            std::vector<std::string> tags;
            if (auto t = in[k].block_parents.find(vn); t != in[k].block_parents.end()) tags = t->second;
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                Block B;
                for (const auto& id : blocks[b]) {
                    auto it = ei[k].find(id);
                    if (it == ei[k].end()) throw Error(ErrorKind::UnknownReference, "separation edge '" + id + "'");
                    B.edges.push_back(it->second);
                }
                if (!B.edges.empty()) B.color = d.layers[k].edges[B.edges.front()].color;
                if (b < tags.size() && !tags[b].empty()) {
                    if (k == 0) throw Error(ErrorKind::ParseError, "block tags are meaningless at level 0");
                    auto it = ei[k - 1].find(tags[b]);
                    if (it == ei[k - 1].end()) throw Error(ErrorKind::UnknownReference, "block parent '" + tags[b] + "'");
                    B.parent = it->second;
                }
                d.layers[k].sep[vit->second].push_back(std::move(B));
            }
        }
    }
    d.finalize();
    // Untagged red blocks at odd levels are resolved when the choice is forced.
    for (int k = 1; k < d.horizon(); k += 2) {
        for (int v = 0; v < d.level_size(k); ++v) {
            auto& blocks = d.layers[k].sep[v];
            const auto& reds = d.layers[k - 1].red_out[v];
            int red_blocks = 0, untagged = 0;
            for (const auto& B : blocks)
                if (B.color == Color::Red) {
                    ++red_blocks;
                    if (B.parent < 0) ++untagged;
                }
            if (untagged == 1 && red_blocks == 1 && reds.size() == 1)
                for (auto& B : blocks)
                    if (B.color == Color::Red) B.parent = reds.front();
        }
    }
    return d;
}

json LDiagram::to_json() const {
    json j;
    j["kind"] = "ldiagram";
    j["layers"] = json::array();
    for (const auto& l : to_layers()) j["layers"].push_back(layer_to_json(l));
    if (layers.empty() && !levels.empty()) j["top"] = levels[0];
    return j;
}

LDiagram LDiagram::from_json(const json& j) {
    if (!j.is_object() || !j.contains("layers") || !j.at("layers").is_array())
        throw Error(ErrorKind::ParseError, "ldiagram document needs a 'layers' list");
    std::vector<Layer> ls;
    for (const auto& l : j.at("layers")) ls.push_back(layer_from_json(l));
    LDiagram d = from_layers(ls);
    if (ls.empty() && j.contains("top")) {
        d.levels[0] = j.at("top").get<std::vector<std::string>>();
        d.finalize();
    }
    return d;
}

namespace {

json canonical(const LDiagram& d) {
    json j = json::array();
    for (int l = 0; l <= d.horizon(); ++l) {
        auto names = d.levels[l];
        std::sort(names.begin(), names.end());
        j.push_back(names);
    }
    json layers = json::array();
    for (int k = 0; k < d.horizon(); ++k) {
        const DLayer& L = d.layers[k];
        std::vector<std::tuple<std::string, std::string, std::string, int>> es;
        for (const auto& e : L.edges) es.emplace_back(e.id, d.levels[k + 1][e.src], d.levels[k][e.rng], static_cast<int>(e.color));
        std::sort(es.begin(), es.end());
        std::vector<std::tuple<std::string, std::string, std::vector<std::string>>> bs;
        for (int v = 0; v < d.level_size(k); ++v)
            for (const auto& B : L.sep[v]) {
                std::vector<std::string> ids;
                for (int e : B.edges) ids.push_back(L.edges[e].id);
                std::sort(ids.begin(), ids.end());
                bs.emplace_back(d.levels[k][v], B.parent >= 0 ? d.layers[k - 1].edges[B.parent].id : "", ids);
            }
        std::sort(bs.begin(), bs.end());
        json lj;
        lj["edges"] = es;
        lj["blocks"] = bs;
        layers.push_back(lj);
    }
    return json{{"levels", j}, {"layers", layers}};
}

using Triple = std::tuple<std::string, std::string, int>;

Triple triple(const LDiagram& d, int k, int e) {
    const DEdge& x = d.layers[k].edges[e];
    return {d.levels[k + 1][x.src], d.levels[k][x.rng], static_cast<int>(x.color)};
}

json canonical_by_names(const LDiagram& d) {
    json j = json::array();
    for (int l = 0; l <= d.horizon(); ++l) {
        auto names = d.levels[l];
        std::sort(names.begin(), names.end());
        j.push_back(names);
    }
    json layers = json::array();
    for (int k = 0; k < d.horizon(); ++k) {
        const DLayer& L = d.layers[k];
        std::vector<Triple> es;
        for (int e = 0; e < static_cast<int>(L.edges.size()); ++e) es.push_back(triple(d, k, e));
        std::sort(es.begin(), es.end());
        std::vector<std::tuple<std::string, json, std::vector<Triple>>> bs;
        for (int v = 0; v < d.level_size(k); ++v)
            for (const auto& B : L.sep[v]) {
                std::vector<Triple> ts;
                for (int e : B.edges) ts.push_back(triple(d, k, e));
                std::sort(ts.begin(), ts.end());
                json parent = B.parent >= 0 ? json(triple(d, k - 1, B.parent)) : json(nullptr);
                bs.emplace_back(d.levels[k][v], parent, ts);
            }
        std::sort(bs.begin(), bs.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<2>(a)) < std::tie(std::get<0>(b), std::get<2>(b)) ||
                   (std::tie(std::get<0>(a), std::get<2>(a)) == std::tie(std::get<0>(b), std::get<2>(b)) &&
                    std::get<1>(a).dump() < std::get<1>(b).dump());
        });
        json lj;
        lj["edges"] = es;
        lj["blocks"] = bs;
        layers.push_back(lj);
    }
    return json{{"levels", j}, {"layers", layers}};
}

}  // namespace

bool structurally_equal(const LDiagram& a, const LDiagram& b) { return canonical(a) == canonical(b); }

bool equal_up_to_edge_names(const LDiagram& a, const LDiagram& b, std::string* witness) {
    json ca = canonical_by_names(a), cb = canonical_by_names(b);
    if (ca == cb) return true;
    if (witness) {
        if (ca["levels"] != cb["levels"]) {
            *witness = "vertex sets differ";
        } else {
            for (std::size_t k = 0; k < ca["layers"].size() && k < cb["layers"].size(); ++k) {
                if (ca["layers"][k]["edges"] != cb["layers"][k]["edges"]) {
                    *witness = "edges of layer " + std::to_string(k) + " differ";
                    return false;
                }
                if (ca["layers"][k]["blocks"] != cb["layers"][k]["blocks"]) {
                    *witness = "separations of layer " + std::to_string(k) + " differ";
                    return false;
                }
            }
            *witness = "layer counts differ";
        }
    }
    return false;
}

namespace {

// Shared structural checks: edges inside exactly one block of their range,
// monochromatic nonempty blocks, and the Bratteli surjectivity conditions.
void structural_checks(const LDiagram& d, CappedReport& rep) {
    for (int l = 0; l <= d.horizon(); ++l)
        if (d.level_size(l) == 0) rep.add("nonempty-level", "level " + std::to_string(l) + " has no vertices");
    for (int k = 0; k < d.horizon(); ++k) {
        const DLayer& L = d.layers[k];
        std::vector<int> placed(L.edges.size(), 0);
        for (int v = 0; v < d.level_size(k); ++v) {
            if (L.in[v].empty()) rep.add("range-surjective", vname(d, k, v) + " receives no edge");
            for (std::size_t b = 0; b < L.sep[v].size(); ++b) {
                const Block& B = L.sep[v][b];
                if (B.edges.empty()) rep.add("block-nonempty", vname(d, k, v) + " has an empty block");
                for (int e : B.edges) {
                    ++placed[e];
                    if (L.edges[e].rng != v) rep.add("block-range", ename(d, k, e) + " placed in a block of " + vname(d, k, v));
                    if (L.edges[e].color != B.color) rep.add("block-color", ename(d, k, e) + " lies in a block of the other color");
                }
            }
        }
        for (std::size_t e = 0; e < L.edges.size(); ++e)
            if (placed[e] != 1)
                rep.add("block-partition", ename(d, k, static_cast<int>(e)) + " lies in " + std::to_string(placed[e]) + " blocks");
        for (int w = 0; w < d.level_size(k + 1); ++w)
            if (L.blue_out[w].empty() && L.red_out[w].empty())
                rep.add("source-surjective", vname(d, k + 1, w) + " emits no edge");
    }
}

bool structurally_sound(const LDiagram& d) {
    for (int k = 0; k < d.horizon(); ++k)
        for (const auto& e : d.layers[k].edges)
            if (e.block < 0) return false;
    return true;
}

// Blue pairs (e0 in layer k into v, e1 in layer k+1 into s(e0)) whose lower
// source is w.
int count_blue_pairs_to(const LDiagram& d, int k, int v, int w) {
    int n = 0;
    for (int e1 : d.layers[k + 1].blue_out[w])
        for (int e0 : d.layers[k].blue_out[d.edge(k + 1, e1).rng])
            if (d.edge(k, e0).rng == v) ++n;
    return n;
}

}  // namespace

Report validate_ldiagram(const LDiagram& d) {
    Report out;
    {
        CappedReport rep(out);
        structural_checks(d, rep);
        if (!structurally_sound(d)) return out;
        const int N = d.horizon();

        // Separation shapes.
        for (int k = 0; k < N; ++k) {
            const DLayer& L = d.layers[k];
            for (int v = 0; v < d.level_size(k); ++v) {
                const auto& blocks = L.sep[v];
                int nblue = 0, nred = 0;
                for (const auto& B : blocks) (B.color == Color::Blue ? nblue : nred)++;
                if (k % 2 == 0) {
                    if (blocks.size() != 2 || nblue != 1 || nred != 1)
                        rep.add("even-separation", vname(d, k, v) + " must have exactly one blue and one red block");
                    for (const auto& B : blocks)
                        if (B.parent >= 0) rep.add("even-separation", vname(d, k, v) + " has a tagged block");
                } else {
                    if (nblue != 1) rep.add("odd-separation", vname(d, k, v) + " must have exactly one blue block");
                    std::map<int, int> seen;
                    for (const auto& B : blocks) {
                        if (B.color != Color::Red) continue;
                        if (B.parent < 0 || B.parent >= static_cast<int>(d.layers[k - 1].edges.size())) {
                            rep.add("odd-separation", vname(d, k, v) + " has a red block without a parent red edge");
                            continue;
                        }
                        const DEdge& g = d.edge(k - 1, B.parent);
                        if (g.color != Color::Red || g.src != v)
                            rep.add("odd-separation", vname(d, k, v) + " red block tagged by " + ename(d, k - 1, B.parent) + " which is not a red edge leaving it");
                        ++seen[B.parent];
                    }
                    for (int g : d.layers[k - 1].red_out[v])
                        if (seen[g] != 1)
                            rep.add("odd-separation", vname(d, k, v) + " has " + std::to_string(seen[g]) + " blocks for " + ename(d, k - 1, g));
                }
            }
        }

        // Vertex conditions on out-edges.
        for (int l = 1; l <= N; ++l) {
            const DLayer& L = d.layers[l - 1];
            for (int w = 0; w < d.level_size(l); ++w) {
                if (L.blue_out[w].size() != 1)
                    rep.add("blue-source-unique", vname(d, l, w) + " is the source of " + std::to_string(L.blue_out[w].size()) + " blue edges");
                if (l % 2 == 0 && L.red_out[w].size() != 1)
                    rep.add("even-vertices", vname(d, l, w) + " is the source of " + std::to_string(L.red_out[w].size()) + " red edges");
                if (l % 2 == 1 && L.red_out[w].empty()) rep.add("odd-vertices", vname(d, l, w) + " is the source of no red edge");
            }
        }
        if (N > 0) rep.unchecked("out-edge conditions at level " + std::to_string(N));

        for (int k = 0; k < N; ++k) {
            const DLayer& L = d.layers[k];
            if (k + 1 >= N) {
                rep.unchecked("compatibility and romb conditions at level " + std::to_string(k));
                continue;
            }
            const DLayer& L1 = d.layers[k + 1];
            for (int v = 0; v < d.level_size(k); ++v) {
                if (k % 2 == 0) {
                    // Compatibility of blue and red two-step sources.
                    std::multiset<int> sb, sr;
                    for (int e0 : L.in[v]) {
                        if (L.edges[e0].color != Color::Blue) continue;
                        for (int e1 : L1.in[L.edges[e0].src])
                            if (L1.edges[e1].color == Color::Blue) sb.insert(L1.edges[e1].src);
                    }
                    for (int f0 : L.in[v]) {
                        if (L.edges[f0].color != Color::Red) continue;
                        for (int f1 : L1.in[L.edges[f0].src])
                            if (L1.edges[f1].color == Color::Red && d.block_parent(k + 1, f1) == f0) sr.insert(L1.edges[f1].src);
                    }
                    std::set<int> ub(sb.begin(), sb.end()), ur(sr.begin(), sr.end());
                    if (ub.size() != sb.size()) rep.add("compatibility", vname(d, k, v) + ": blue two-step sources repeat");
                    if (ur.size() != sr.size()) rep.add("compatibility", vname(d, k, v) + ": red two-step sources repeat");
                    if (ub != ur) rep.add("compatibility", vname(d, k, v) + ": blue and red two-step source sets differ");
                    // Even rombs from a blue pair.
                    for (int e0 : L.in[v]) {
                        if (L.edges[e0].color != Color::Blue) continue;
                        for (int e1 : L1.in[L.edges[e0].src]) {
                            if (L1.edges[e1].color != Color::Blue) continue;
                            int n = 0;
                            for (int f1 : L1.red_out[L1.edges[e1].src]) {
                                int f0 = d.block_parent(k + 1, f1);
                                if (f0 >= 0 && L.edges[f0].rng == v) ++n;
                            }
                            if (n != 1)
                                rep.add("even-romb", vname(d, k, v) + ": blue pair (" + L.edges[e0].id + "," + L1.edges[e1].id + ") has " + std::to_string(n) + " red completions");
                        }
                    }
                    // Even rombs from a red pair with f1 in R(f0).
                    for (int f0 : L.in[v]) {
                        if (L.edges[f0].color != Color::Red) continue;
                        for (int f1 : L1.in[L.edges[f0].src]) {
                            if (L1.edges[f1].color != Color::Red || d.block_parent(k + 1, f1) != f0) continue;
                            int n = count_blue_pairs_to(d, k, v, L1.edges[f1].src);
                            if (n != 1)
                                rep.add("even-romb-converse", vname(d, k, v) + ": red pair (" + L.edges[f0].id + "," + L1.edges[f1].id + ") has " + std::to_string(n) + " blue completions");
                        }
                    }
                } else {
                    // Red pairs at odd levels close to a unique blue pair.
                    for (int f0 : L.in[v]) {
                        if (L.edges[f0].color != Color::Red) continue;
                        for (int f1 : L1.in[L.edges[f0].src]) {
                            if (L1.edges[f1].color != Color::Red) continue;
                            int n = count_blue_pairs_to(d, k, v, L1.edges[f1].src);
                            if (n != 1)
                                rep.add("odd-red-romb", vname(d, k, v) + ": red pair (" + L.edges[f0].id + "," + L1.edges[f1].id + ") has " + std::to_string(n) + " blue completions");
                        }
                    }
                    // Blue pairs at odd levels close to a unique red pair inside each R(g).
                    for (int g : d.layers[k - 1].red_out[v]) {
                        for (int e0 : L.in[v]) {
                            if (L.edges[e0].color != Color::Blue) continue;
                            for (int e1 : L1.in[L.edges[e0].src]) {
                                if (L1.edges[e1].color != Color::Blue) continue;
                                int n = 0;
                                for (int f1 : L1.red_out[L1.edges[e1].src])
                                    for (int f0 : L.red_out[L1.edges[f1].rng])
                                        if (L.edges[f0].rng == v && d.block_parent(k, f0) == g) ++n;
                                if (n != 1)
                                    rep.add("odd-blue-romb", vname(d, k, v) + ": blue pair (" + L.edges[e0].id + "," + L1.edges[e1].id + ") with parent " + d.layers[k - 1].edges[g].id + " has " + std::to_string(n) + " red completions");
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Report validate_hdiagram(const LDiagram& d) {
    Report out;
    {
        CappedReport rep(out);
        structural_checks(d, rep);
        if (!structurally_sound(d)) return out;
        const int N = d.horizon();
        for (int k = 0; k < N; ++k)
            for (int v = 0; v < d.level_size(k); ++v) {
                int nblue = 0, nred = 0;
                for (const auto& B : d.layers[k].sep[v]) (B.color == Color::Blue ? nblue : nred)++;
                if (nblue != 1 || nred != 1) rep.add("h-separation", vname(d, k, v) + " must have exactly one blue and one red block");
            }
        for (int l = 1; l <= N; ++l) {
            const DLayer& L = d.layers[l - 1];
            for (int w = 0; w < d.level_size(l); ++w) {
                if (L.blue_out[w].size() != 1)
                    rep.add("h-vertices", vname(d, l, w) + " is the source of " + std::to_string(L.blue_out[w].size()) + " blue edges");
                if (L.red_out[w].size() != 1)
                    rep.add("h-vertices", vname(d, l, w) + " is the source of " + std::to_string(L.red_out[w].size()) + " red edges");
            }
        }
        if (N > 0) rep.unchecked("out-edge conditions at level " + std::to_string(N));
        for (int k = 0; k < N; ++k) {
            if (k + 1 >= N) {
                rep.unchecked("compatibility at level " + std::to_string(k));
                continue;
            }
            const DLayer& L = d.layers[k];
            const DLayer& L1 = d.layers[k + 1];
            for (int v = 0; v < d.level_size(k); ++v) {
                std::multiset<int> sb, sr;
                for (int x : L.in[v])
                    for (int y : L1.in[L.edges[x].src])
                        if (L.edges[x].color == L1.edges[y].color) (L.edges[x].color == Color::Blue ? sb : sr).insert(L1.edges[y].src);
                std::set<int> ub(sb.begin(), sb.end()), ur(sr.begin(), sr.end());
                if (ub.size() != sb.size() || ur.size() != sr.size() || ub != ur)
                    rep.add("h-compatibility", vname(d, k, v) + ": blue and red two-step sources differ or repeat");
            }
        }
    }
    return out;
}

std::vector<int> unrefined_layers(const LDiagram& d) {
    std::vector<int> out;
    for (int k = 0; k < d.horizon(); ++k) {
        std::set<std::pair<int, int>> seen;
        for (const auto& e : d.layers[k].edges)
            if (e.color == Color::Red && !seen.insert({e.src, e.rng}).second) {
                out.push_back(k);
                break;
            }
    }
    return out;
}

bool is_refined(const LDiagram& d) { return unrefined_layers(d).empty(); }

namespace {

void require_layers(const LDiagram& d, int k) {
    if (k < 0 || k + 1 >= d.horizon())
        throw Error(ErrorKind::HorizonExceeded, "romb at level " + std::to_string(k) + " needs layers " + std::to_string(k) + " and " + std::to_string(k + 1));
}

Romb finish(std::vector<Romb>& found, const std::string& what) {
    if (found.empty()) throw Error(ErrorKind::NoCompletion, what);
    if (found.size() > 1) throw Error(ErrorKind::AmbiguousCompletion, what);
    return found.front();
}

}  // namespace

Romb complete_romb_from_blue(const LDiagram& d, int k, int e0, int e1) {
    require_layers(d, k);
    if (k % 2 != 0) throw Error(ErrorKind::InvalidArgument, "odd base level needs a parent red edge; use complete_romb_odd");
    const DEdge& a = d.edge(k, e0);
    const DEdge& b = d.edge(k + 1, e1);
    if (a.color != Color::Blue || b.color != Color::Blue || a.src != b.rng)
        throw Error(ErrorKind::InvalidArgument, "not a composable blue pair");
    std::vector<Romb> found;
    for (int f1 : d.layers[k + 1].red_out[b.src]) {
        int f0 = d.block_parent(k + 1, f1);
        if (f0 >= 0 && d.edge(k, f0).rng == a.rng) found.push_back({k, e0, e1, f0, f1});
    }
    return finish(found, "blue pair (" + a.id + "," + b.id + ")");
}

Romb complete_romb_odd(const LDiagram& d, int k, int g, int e0, int e1) {
    require_layers(d, k);
    if (k % 2 != 1) throw Error(ErrorKind::InvalidArgument, "complete_romb_odd needs an odd base level");
    const DEdge& a = d.edge(k, e0);
    const DEdge& b = d.edge(k + 1, e1);
    const DEdge& gg = d.edge(k - 1, g);
    if (a.color != Color::Blue || b.color != Color::Blue || a.src != b.rng)
        throw Error(ErrorKind::InvalidArgument, "not a composable blue pair");
    if (gg.color != Color::Red || gg.src != a.rng) throw Error(ErrorKind::InvalidArgument, "g must be a red edge leaving r(e0)");
    std::vector<Romb> found;
    for (int f1 : d.layers[k + 1].red_out[b.src])
        for (int f0 : d.layers[k].red_out[d.edge(k + 1, f1).rng])
            if (d.edge(k, f0).rng == a.rng && d.block_parent(k, f0) == g) found.push_back({k, e0, e1, f0, f1});
    return finish(found, "blue pair (" + a.id + "," + b.id + ") under " + gg.id);
}

Romb complete_romb_from_red(const LDiagram& d, int k, int f0, int f1) {
    require_layers(d, k);
    const DEdge& a = d.edge(k, f0);
    const DEdge& b = d.edge(k + 1, f1);
    if (a.color != Color::Red || b.color != Color::Red || a.src != b.rng)
        throw Error(ErrorKind::InvalidArgument, "not a composable red pair");
    if (k % 2 == 0 && d.block_parent(k + 1, f1) != f0)
        throw Error(ErrorKind::InvalidArgument, "at an even base level f1 must lie in R(f0)");
    std::vector<Romb> found;
    for (int e1 : d.layers[k + 1].blue_out[b.src])
        for (int e0 : d.layers[k].blue_out[d.edge(k + 1, e1).rng])
            if (d.edge(k, e0).rng == a.rng) found.push_back({k, e0, e1, f0, f1});
    return finish(found, "red pair (" + a.id + "," + b.id + ")");
}

void ContractionSequence::check() const {
    if (m.empty()) throw Error(ErrorKind::CRViolated, "empty sequence");
    if (m[0] < 0 || m[0] % 2 != 0) throw Error(ErrorKind::CRViolated, "m_0 must be even and non-negative");
    for (std::size_t i = 1; i < m.size(); ++i) {
        if (m[i] <= m[i - 1]) throw Error(ErrorKind::CRViolated, "sequence must be strictly increasing");
        if ((m[i] - m[i - 1]) % 2 == 0)
            throw Error(ErrorKind::CRViolated, "gap m_" + std::to_string(i) + " - m_" + std::to_string(i - 1) + " is even");
    }
}

ContractionSequence ContractionSequence::identity(int layers) {
    ContractionSequence s;
    for (int i = 0; i <= layers; ++i) s.m.push_back(i);
    return s;
}

ContractionSequence ContractionSequence::random(std::mt19937_64& rng, int horizon, int max_half_gap) {
    ContractionSequence s;
    int start = horizon >= 3 && (rng() % 2) ? 2 : 0;
    s.m.push_back(start);
    for (;;) {
        int gap = 2 * static_cast<int>(rng() % static_cast<unsigned>(max_half_gap)) + 1;
        if (s.m.back() + gap > horizon) {
            if (s.m.back() + 1 <= horizon) {
                s.m.push_back(s.m.back() + 1);
                continue;
            }
            break;
        }
        s.m.push_back(s.m.back() + gap);
    }
    return s;
}

ContractionSequence compose(const ContractionSequence& m, const ContractionSequence& m2) {
    ContractionSequence out;
    for (int i : m2.m) {
        if (i < 0 || i >= static_cast<int>(m.m.size()))
            throw Error(ErrorKind::HorizonExceeded, "second sequence indexes past the first one");
        out.m.push_back(m.m[i]);
    }
    return out;
}

namespace {

std::string flat_id(const std::vector<std::string>& parts) {
    std::string out = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        const std::string& p = parts[i];
        if (p.size() >= 2 && p.front() == '(' && p.back() == ')') out += p.substr(1, p.size() - 2);
        else out += p;
    }
    return out + ")";
}

struct Path {
    std::vector<int> edges;  // edges[i] lies in layer a+i
};

// All monochromatic paths from level b up to vertex v at level a. Red paths
// obey f_{i+1} in R(f_i) whenever the layer index i is even.
void collect_paths(const LDiagram& d, int a, int b, int v, Color c, std::vector<Path>& out) {
    Path cur;
    auto rec = [&](auto&& self, int layer, int top) -> void {
        if (layer == b) {
            out.push_back(cur);
            return;
        }
        for (int e : d.layers[layer].in[top]) {
            const DEdge& x = d.edge(layer, e);
            if (x.color != c) continue;
            if (c == Color::Red && layer > a && (layer - 1) % 2 == 0 && d.block_parent(layer, e) != cur.edges.back()) continue;
            cur.edges.push_back(e);
            self(self, layer + 1, x.src);
            cur.edges.pop_back();
        }
    };
    rec(rec, a, v);
}

}  // namespace

LDiagram telescope(const LDiagram& d, const ContractionSequence& seq) {
    seq.check();
    const auto& m = seq.m;
    if (m.back() > d.horizon())
        throw Error(ErrorKind::HorizonExceeded, "sequence reaches level " + std::to_string(m.back()) + " beyond horizon " + std::to_string(d.horizon()));
    LDiagram out;
    for (int l : m) out.levels.push_back(d.levels[l]);
    const int L = static_cast<int>(m.size()) - 1;
    out.layers.resize(L);
    // Constituents of each contracted edge, kept to build the odd blocks.
    std::vector<std::vector<Path>> paths(L);
    for (int n = 0; n < L; ++n) {
        const int a = m[n], b = m[n + 1];
        DLayer& OL = out.layers[n];
        OL.sep.resize(d.level_size(a));
        for (int v = 0; v < d.level_size(a); ++v) {
            Block blue;
            blue.color = Color::Blue;
            std::vector<Path> ps;
            collect_paths(d, a, b, v, Color::Blue, ps);
            for (const auto& p : ps) {
                std::vector<std::string> ids;
                for (std::size_t i = 0; i < p.edges.size(); ++i) ids.push_back(d.edge(a + static_cast<int>(i), p.edges[i]).id);
                blue.edges.push_back(static_cast<int>(OL.edges.size()));
                OL.edges.push_back({flat_id(ids), d.edge(b - 1, p.edges.back()).src, v, Color::Blue, -1});
                paths[n].push_back(p);
            }
            std::vector<Path> rs;
            collect_paths(d, a, b, v, Color::Red, rs);
            std::vector<int> red_ids;
            for (const auto& p : rs) {
                std::vector<std::string> ids;
                for (std::size_t i = 0; i < p.edges.size(); ++i) ids.push_back(d.edge(a + static_cast<int>(i), p.edges[i]).id);
                red_ids.push_back(static_cast<int>(OL.edges.size()));
                OL.edges.push_back({flat_id(ids), d.edge(b - 1, p.edges.back()).src, v, Color::Red, -1});
                paths[n].push_back(p);
            }
            OL.sep[v].push_back(blue);
            if (n % 2 == 0) {
                Block red;
                red.color = Color::Red;
                red.edges = red_ids;
                OL.sep[v].push_back(red);
            }
        }
        if (n % 2 == 1) {
            // Odd blocks: one per contracted red edge of layer n-1 leaving v,
            // keyed by the last base edge of that contracted edge.
            const DLayer& prev = out.layers[n - 1];
            for (int fh = 0; fh < static_cast<int>(prev.edges.size()); ++fh) {
                if (prev.edges[fh].color != Color::Red) continue;
                int v = prev.edges[fh].src;
                int last = paths[n - 1][fh].edges.back();
                Block red;
                red.color = Color::Red;
                red.parent = fh;
                for (int e = 0; e < static_cast<int>(OL.edges.size()); ++e) {
                    if (OL.edges[e].color != Color::Red || OL.edges[e].rng != v) continue;
                    int first = paths[n][e].edges.front();
                    if (d.block_parent(a, first) == last) red.edges.push_back(e);
                }
                OL.sep[v].push_back(red);
            }
        }
    }
    out.finalize();
    return out;
}

std::string export_dot(const LDiagram& d) {
    std::ostringstream os;
    auto node = [&](int l, const std::string& n) {
        std::string s = "\"L" + std::to_string(l) + ":";
        for (char c : n) {
            if (c == '"' || c == '\\') s += '\\';
            s += c;
        }
        return s + "\"";
    };
    os << "digraph ldiagram {\n  rankdir=BT;\n";
    for (int l = 0; l <= d.horizon(); ++l) {
        os << "  { rank=same;";
        for (const auto& n : d.levels[l]) os << " " << node(l, n) << ";";
        os << " }\n";
    }
    for (int k = 0; k < d.horizon(); ++k)
        for (const auto& e : d.layers[k].edges) {
            os << "  " << node(k + 1, d.levels[k + 1][e.src]) << " -> " << node(k, d.levels[k][e.rng]);
            if (e.color == Color::Red) os << " [color=red]";
            os << ";\n";
        }
    os << "}\n";
    return os.str();
}

}  // namespace sepshift

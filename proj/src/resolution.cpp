// SPDX-License-Identifier: MIT
#include "sepshift/resolution.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <unordered_map>

namespace sepshift {

namespace {

std::int64_t effective_budget(std::int64_t budget) { return budget < 0 ? default_budget() : budget; }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Names for a new bottom vertex and its edges, given the chosen tuple.
struct Naming {
    std::function<std::string(const std::vector<std::string>&)> vertex;
    std::function<std::string(const std::vector<std::string>&, std::size_t)> edge;
};

Layer resolve(const Layer& layer, std::int64_t budget, const Naming& naming) {
    std::unordered_map<std::string, int> eidx;
    for (std::size_t i = 0; i < layer.edges.size(); ++i) eidx[layer.edges[i].id] = static_cast<int>(i);

    // Resolved blocks of every old top vertex, as edge indices.
    std::vector<std::vector<std::vector<int>>> blocks(layer.top.size());
    std::int64_t total = 0;
    for (std::size_t u = 0; u < layer.top.size(); ++u) {
        auto it = layer.separation.find(layer.top[u]);
        if (it == layer.separation.end() || it->second.empty())
            throw Error(ErrorKind::InvalidArgument, "vertex '" + layer.top[u] + "' has no separation blocks");
        std::int64_t prod = 1;
        for (const auto& blk : it->second) {
            if (blk.empty()) throw Error(ErrorKind::InvalidArgument, "empty block at '" + layer.top[u] + "'");
            std::vector<int> ids;
            for (const auto& id : blk) {
                auto e = eidx.find(id);
                if (e == eidx.end()) throw Error(ErrorKind::UnknownReference, "separation edge '" + id + "'");
                ids.push_back(e->second);
            }
            prod *= static_cast<std::int64_t>(ids.size());
            if (prod > budget) break;
            blocks[u].push_back(std::move(ids));
        }
        total += prod;
        if (total > budget)
            throw Error(ErrorKind::ResourceBudgetExceeded,
                        "resolution needs more than " + std::to_string(budget) + " vertices");
    }

    Layer out;
    out.top = layer.bottom;
    // X(x) for every old edge x, filled as edges are created.
    std::vector<std::vector<std::string>> xblock(layer.edges.size());
    for (std::size_t u = 0; u < layer.top.size(); ++u) {
        const auto& B = blocks[u];
        std::vector<std::size_t> pick(B.size(), 0);
        while (true) {
            std::vector<std::string> ids(B.size());
            for (std::size_t j = 0; j < B.size(); ++j) ids[j] = layer.edges[B[j][pick[j]]].id;
            std::string vname = naming.vertex(ids);
            out.bottom.push_back(vname);
            for (std::size_t i = 0; i < B.size(); ++i) {
                const Edge& x = layer.edges[B[i][pick[i]]];
                Edge e{naming.edge(ids, i), vname, x.src, x.color};
                xblock[B[i][pick[i]]].push_back(e.id);
                out.edges.push_back(std::move(e));
            }
            bool done = true;
            for (std::size_t j = B.size(); j-- > 0;) {
                if (++pick[j] < B[j].size()) {
                    done = false;
                    break;
                }
                pick[j] = 0;
            }
            if (done) break;
        }
    }
    // Blocks of each new top vertex: blue edges leaving it first, then red.
    std::unordered_map<std::string, std::vector<int>> leaving;
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < layer.edges.size(); ++i)
            if ((layer.edges[i].color == Color::Blue) == (pass == 0)) leaving[layer.edges[i].src].push_back(static_cast<int>(i));
    for (const auto& w : out.top) {
        auto& sep = out.separation[w];
        auto& tags = out.block_parents[w];
        for (int x : leaving[w]) {
            sep.push_back(xblock[x]);
            tags.push_back(layer.edges[x].id);
        }
    }
    return out;
}

}  // namespace

Layer one_step_resolution(const Layer& layer, std::int64_t budget) {
    Naming n;
    n.vertex = [](const std::vector<std::string>& ids) { return "v(" + join(ids, ",") + ")"; };
    n.edge = [](const std::vector<std::string>& ids, std::size_t i) {
        auto rest = ids;
        rest[i] = "^";
        return "a[" + ids[i] + "](" + join(rest, ",") + ")";
    };
    return resolve(layer, effective_budget(budget), n);
}

LDiagram canonical_resolution(const Layer& gfs, int depth, std::int64_t budget) {
    if (depth < 0) throw Error(ErrorKind::InvalidArgument, "negative depth");
    Report rep = validate_gfs(gfs);
    if (!rep.ok()) throw Error(ErrorKind::InvalidArgument, "not a generalized finite shift graph: " + rep.to_text());
    const std::int64_t cap = effective_budget(budget);
    std::vector<Layer> layers;
    if (depth >= 1) {
        Layer g = gfs;
        g.block_parents.clear();
        layers.push_back(std::move(g));
    }
    for (int n = 1; n < depth; ++n) {
        Naming nm;
        nm.vertex = [](const std::vector<std::string>& ids) { return "v(" + join(ids, ",") + ")"; };
        auto counter = std::make_shared<std::int64_t>(0);
        nm.edge = [n, counter](const std::vector<std::string>&, std::size_t) {
            return "a" + std::to_string(n) + "." + std::to_string((*counter)++);
        };
        Layer next = resolve(layers.back(), cap, nm);
        // Only red blocks at odd levels carry a parent.
        for (auto& [w, tags] : next.block_parents) {
            const auto& sep = next.separation[w];
            for (std::size_t b = 0; b < tags.size(); ++b) {
                const Edge* e = next.find_edge(sep[b].front());
                if (n % 2 == 0 || e->color == Color::Blue) tags[b].clear();
            }
        }
        layers.push_back(std::move(next));
    }
    if (layers.empty()) {
        LDiagram d;
        d.levels.push_back(gfs.top);
        d.finalize();
        return d;
    }
    return LDiagram::from_layers(layers);
}

Layer layer_of(const LDiagram& d, int k) {
    if (k < 0 || k >= d.horizon()) throw Error(ErrorKind::HorizonExceeded, "layer " + std::to_string(k) + " not stored");
    Layer L;
    L.top = d.levels[k];
    L.bottom = d.levels[k + 1];
    for (const auto& e : d.layers[k].edges) L.edges.push_back({e.id, d.levels[k + 1][e.src], d.levels[k][e.rng], e.color});
    for (int v = 0; v < d.level_size(k); ++v) {
        auto& sep = L.separation[d.levels[k][v]];
        std::vector<std::string> tags;
        for (const auto& b : d.blocks(k, v)) {
            std::vector<std::string> ids;
            for (int e : b.edges) ids.push_back(d.edge(k, e).id);
            sep.push_back(std::move(ids));
            tags.push_back(b.parent >= 0 ? d.edge(k - 1, b.parent).id : std::string());
        }
        if (k % 2 == 1) L.block_parents[d.levels[k][v]] = std::move(tags);
    }
    return L;
}

Digraph higher_edge_graph(const Digraph& g, int n, std::int64_t budget) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "higher edge graph needs n >= 1");
    require_no_sinks_or_sources(g);
    const std::int64_t cap = effective_budget(budget);
    // Paths of length n+1 as edge index sequences, grown left to right.
    std::unordered_map<std::string, std::vector<int>> out_edges;
    for (std::size_t i = 0; i < g.edges.size(); ++i) out_edges[g.edges[i].src].push_back(static_cast<int>(i));
    auto extend = [&](const std::vector<std::vector<int>>& paths) {
        std::vector<std::vector<int>> next;
        for (const auto& p : paths)
            for (int e : out_edges[g.edges[p.back()].tgt]) {
                auto q = p;
                q.push_back(e);
                next.push_back(std::move(q));
                if (static_cast<std::int64_t>(next.size()) > cap)
                    throw Error(ErrorKind::ResourceBudgetExceeded, "higher edge graph exceeds the budget");
            }
        return next;
    };
    std::vector<std::vector<int>> paths;
    for (std::size_t i = 0; i < g.edges.size(); ++i) paths.push_back({static_cast<int>(i)});
    for (int l = 1; l < n; ++l) paths = extend(paths);
    auto name = [&](const std::vector<int>& p, std::size_t from, std::size_t len) {
        std::vector<std::string> ids;
        for (std::size_t i = from; i < from + len; ++i) ids.push_back(g.edges[p[i]].id);
        return join(ids, ".");
    };
    Digraph h;
    for (const auto& p : paths) h.vertices.push_back(name(p, 0, p.size()));
    for (const auto& p : extend(paths))
        h.edges.push_back({name(p, 0, p.size()), name(p, 0, p.size() - 1), name(p, 1, p.size() - 1)});
    return h;
}

namespace {

// Bipartite weighted graph: tops then bottoms; weight (red count, blue flag).
struct WGraph {
    int ntop = 0, nbot = 0;
    std::vector<std::string> names;
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> w;  // [bottom][top]
};

WGraph weighted(const Layer& L) {
    WGraph g;
    g.ntop = static_cast<int>(L.top.size());
    g.nbot = static_cast<int>(L.bottom.size());
    std::unordered_map<std::string, int> ti, bi;
    for (int i = 0; i < g.ntop; ++i) ti[L.top[i]] = i;
    for (int i = 0; i < g.nbot; ++i) bi[L.bottom[i]] = i;
    g.names = L.top;
    g.names.insert(g.names.end(), L.bottom.begin(), L.bottom.end());
    g.w.assign(g.nbot, std::vector<std::pair<std::int64_t, std::int64_t>>(g.ntop, {0, 0}));
    for (const auto& e : L.edges) {
        auto& c = g.w[bi.at(e.src)][ti.at(e.tgt)];
        if (e.color == Color::Red) ++c.first;
        else ++c.second;
    }
    return g;
}

// Joint color refinement so colors are comparable across both graphs.
std::pair<std::vector<int>, std::vector<int>> refine_colors(const WGraph& a, const WGraph& b) {
    auto init = [](const WGraph& g) {
        std::vector<int> c(g.ntop + g.nbot);
        for (int i = 0; i < g.ntop + g.nbot; ++i) c[i] = i < g.ntop ? 0 : 1;
        return c;
    };
    std::vector<int> ca = init(a), cb = init(b);
    using Sig = std::pair<int, std::vector<std::tuple<int, std::int64_t, std::int64_t>>>;
    auto signature = [](const WGraph& g, const std::vector<int>& c, int v) {
        Sig s{c[v], {}};
        if (v < g.ntop) {
            for (int w = 0; w < g.nbot; ++w)
                if (g.w[w][v] != std::pair<std::int64_t, std::int64_t>{0, 0}) s.second.emplace_back(c[g.ntop + w], g.w[w][v].first, g.w[w][v].second);
        } else {
            for (int t = 0; t < g.ntop; ++t)
                if (g.w[v - g.ntop][t] != std::pair<std::int64_t, std::int64_t>{0, 0}) s.second.emplace_back(c[t], g.w[v - g.ntop][t].first, g.w[v - g.ntop][t].second);
        }
        std::sort(s.second.begin(), s.second.end());
        return s;
    };
    std::size_t classes = 2;
    while (true) {
        std::map<Sig, int> ids;
        std::vector<Sig> sa, sb;
        for (int v = 0; v < a.ntop + a.nbot; ++v) sa.push_back(signature(a, ca, v));
        for (int v = 0; v < b.ntop + b.nbot; ++v) sb.push_back(signature(b, cb, v));
        for (const auto& s : sa) ids.emplace(s, 0);
        for (const auto& s : sb) ids.emplace(s, 0);
        int next = 0;
        for (auto& [s, id] : ids) id = next++;
        for (int v = 0; v < a.ntop + a.nbot; ++v) ca[v] = ids[sa[v]];
        for (int v = 0; v < b.ntop + b.nbot; ++v) cb[v] = ids[sb[v]];
        if (ids.size() == classes) break;
        classes = ids.size();
    }
    return {ca, cb};
}

}  // namespace

Isomorphism find_gfs_isomorphism(const Layer& la, const Layer& lb) {
    Isomorphism res;
    WGraph a = weighted(la), b = weighted(lb);
    if (a.ntop != b.ntop || a.nbot != b.nbot) {
        res.witness = "vertex counts differ: " + std::to_string(a.ntop) + "+" + std::to_string(a.nbot) + " vs " +
                      std::to_string(b.ntop) + "+" + std::to_string(b.nbot);
        return res;
    }
    auto [ca, cb] = refine_colors(a, b);
    {
        auto sa = ca, sb = cb;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb) {
            res.witness = "color refinement separates the two graphs";
            return res;
        }
    }
    const int n = a.ntop + a.nbot;
    // Assign the most constrained vertices first: smallest color classes.
    std::map<int, int> class_size;
    for (int c : ca) ++class_size[c];
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return class_size[ca[x]] < class_size[ca[y]]; });
    std::vector<int> map(n, -1);
    std::vector<char> used(n, 0);
    auto weight = [](const WGraph& g, int x, int y) {
        if (x < g.ntop && y >= g.ntop) return g.w[y - g.ntop][x];
        if (y < g.ntop && x >= g.ntop) return g.w[x - g.ntop][y];
        return std::pair<std::int64_t, std::int64_t>{0, 0};
    };
    std::function<bool(int)> search = [&](int pos) {
        if (pos == n) return true;
        int v = order[pos];
        for (int c = 0; c < n; ++c) {
            if (used[c] || cb[c] != ca[v]) continue;
            bool ok = true;
            for (int q = 0; q < pos && ok; ++q) {
                int u = order[q];
                ok = weight(a, v, u) == weight(b, c, map[u]);
            }
            if (!ok) continue;
            map[v] = c;
            used[c] = 1;
            if (search(pos + 1)) return true;
            used[c] = 0;
            map[v] = -1;
        }
        return false;
    };
    if (!search(0)) {
        res.witness = "no color-preserving bijection matches the edge multiplicities";
        return res;
    }
    res.found = true;
    for (int v = 0; v < n; ++v) {
        if (v < a.ntop) res.top[a.names[v]] = b.names[map[v]];
        else res.bottom[a.names[v]] = b.names[map[v]];
    }
    return res;
}

Isomorphism check_resolution_vs_higher_edge(const Digraph& g, int n, std::int64_t budget) {
    LDiagram d = canonical_resolution(gfs_from_digraph(g), 2 * n + 1, budget);
    return find_gfs_isomorphism(layer_of(d, 2 * n), gfs_from_digraph(higher_edge_graph(g, n, budget)));
}

IntMatrix red_adjacency(const LDiagram& d, int k) {
    if (k < 0 || k >= d.horizon()) throw Error(ErrorKind::HorizonExceeded, "layer " + std::to_string(k) + " not stored");
    IntMatrix m;
    m.rows = d.levels[k + 1];
    m.cols = d.levels[k];
    m.a.assign(m.rows.size(), std::vector<std::int64_t>(m.cols.size(), 0));
    for (const auto& e : d.layers[k].edges)
        if (e.color == Color::Red) ++m.a[e.src][e.rng];
    return m;
}

namespace {

// Blue parent of every vertex at level k+1 (the unique blue out-edge's range).
std::vector<int> blue_parent(const LDiagram& d, int k) {
    std::vector<int> p(d.level_size(k + 1), -1);
    for (int v = 0; v < d.level_size(k + 1); ++v) {
        const auto& b = d.layers[k].blue_out[v];
        if (b.size() != 1)
            throw Error(ErrorKind::StructureMismatch, "vertex '" + d.levels[k + 1][v] + "' lacks a unique blue out-edge");
        p[v] = d.edge(k, b.front()).rng;
    }
    return p;
}

// Characteristic matrix: rows level n, columns level n+2, 1 when the column
// vertex lies two blue steps below the row vertex.
IntMatrix characteristic(const LDiagram& d, int n) {
    auto p1 = blue_parent(d, n), p2 = blue_parent(d, n + 1);
    IntMatrix m;
    m.rows = d.levels[n];
    m.cols = d.levels[n + 2];
    m.a.assign(m.rows.size(), std::vector<std::int64_t>(m.cols.size(), 0));
    for (std::size_t c = 0; c < m.cols.size(); ++c) m.a[p1[p2[c]]][c] = 1;
    return m;
}

IntMatrix multiply(const IntMatrix& x, const IntMatrix& y) {
    IntMatrix m;
    m.rows = x.rows;
    m.cols = y.cols;
    m.a.assign(x.rows.size(), std::vector<std::int64_t>(y.cols.size(), 0));
    for (std::size_t i = 0; i < x.rows.size(); ++i)
        for (std::size_t k = 0; k < y.rows.size(); ++k) {
            if (!x.a[i][k]) continue;
            for (std::size_t j = 0; j < y.cols.size(); ++j) m.a[i][j] = checked_count(m.a[i][j] + x.a[i][k] * y.a[k][j]);
        }
    return m;
}

IntMatrix transpose(const IntMatrix& x) {
    IntMatrix m;
    m.rows = x.cols;
    m.cols = x.rows;
    m.a.assign(x.cols.size(), std::vector<std::int64_t>(x.rows.size(), 0));
    for (std::size_t i = 0; i < x.rows.size(); ++i)
        for (std::size_t j = 0; j < x.cols.size(); ++j) m.a[j][i] = x.a[i][j];
    return m;
}

}  // namespace

RecursionCheck adjacency_recursion_check(const LDiagram& d, int j) {
    if (j < 0) throw Error(ErrorKind::InvalidArgument, "negative j");
    if (d.horizon() < 2 * j + 3)
        throw Error(ErrorKind::HorizonExceeded, "recursion at j=" + std::to_string(j) + " needs " + std::to_string(2 * j + 3) + " layers");
    RecursionCheck rc;
    const int n = 2 * j;
    IntMatrix a0 = red_adjacency(d, n), a2 = red_adjacency(d, n + 2);
    // D: number of blue paths of length 2 ending at each level n+1 vertex.
    auto p2 = blue_parent(d, n + 1), p3 = blue_parent(d, n + 2);
    std::vector<std::int64_t> diag(d.level_size(n + 1), 0);
    for (int v = 0; v < d.level_size(n + 3); ++v) ++diag[p2[p3[v]]];
    rc.lhs = a0;
    for (std::size_t r = 0; r < a0.rows.size(); ++r)
        for (auto& x : rc.lhs.a[r]) x = checked_count(x * diag[r]);
    rc.rhs = multiply(multiply(characteristic(d, n + 1), a2), transpose(characteristic(d, n)));
    rc.ok = rc.lhs == rc.rhs;
    if (!rc.ok) {
        for (std::size_t r = 0; r < rc.lhs.rows.size() && rc.witness.empty(); ++r)
            for (std::size_t c = 0; c < rc.lhs.cols.size(); ++c)
                if (rc.lhs.a[r][c] != rc.rhs.a[r][c]) {
                    rc.witness = "entry (" + rc.lhs.rows[r] + ", " + rc.lhs.cols[c] + "): " + std::to_string(rc.lhs.a[r][c]) +
                                 " vs " + std::to_string(rc.rhs.a[r][c]);
                    break;
                }
    }
    return rc;
}

}  // namespace sepshift

// SPDX-License-Identifier: MIT
#include "sepshift/dynamics.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <sstream>

#include "sepshift/resolution.hpp"

namespace sepshift {

namespace {

int blue_parent_edge(const LDiagram& d, int k, int v) {
    const auto& out = d.layers.at(k).blue_out.at(v);
    if (out.size() != 1)
        throw Error(ErrorKind::InvalidArgument, "vertex '" + d.levels[k + 1][v] + "' at level " + std::to_string(k + 1) +
                                                    " has " + std::to_string(out.size()) + " blue out-edges");
    return out[0];
}

void require_depth(const BluePrefix& p, int need, const std::string& what) {
    if (p.depth() < need)
        throw Error(ErrorKind::InsufficientDepth,
                    what + " needs depth " + std::to_string(need) + ", got " + std::to_string(p.depth()));
}

void require_horizon(const LDiagram& d, int need, const std::string& what) {
    if (d.horizon() < need)
        throw Error(ErrorKind::HorizonExceeded,
                    what + " needs horizon " + std::to_string(need) + ", diagram has " + std::to_string(d.horizon()));
}

// Splits on separators outside parentheses and brackets, since edge names of
// built and telescoped diagrams contain commas.
std::vector<std::string> split_top_level(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int nesting = 0;
    for (char c : s) {
        if (c == '(' || c == '[') ++nesting;
        if (c == ')' || c == ']') --nesting;
        if (c == sep && nesting == 0) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

int end_vertex(const LDiagram& d, const BluePrefix& p) {
    if (p.edges.empty()) return p.root;
    return d.edge(p.depth() - 1, p.edges.back()).src;
}

BluePrefix prefix_to_vertex(const LDiagram& d, int level, int v) {
    if (level < 0 || level > d.horizon())
        throw Error(ErrorKind::HorizonExceeded, "level " + std::to_string(level) + " is outside the diagram");
    BluePrefix p;
    p.edges.resize(level);
    for (int k = level - 1; k >= 0; --k) {
        int e = blue_parent_edge(d, k, v);
        p.edges[k] = e;
        v = d.edge(k, e).rng;
    }
    p.root = v;
    return p;
}

BluePrefix truncate(const BluePrefix& p, int depth) {
    if (depth < 0 || depth > p.depth())
        throw Error(ErrorKind::InsufficientDepth,
                    "cannot truncate a prefix of depth " + std::to_string(p.depth()) + " to " + std::to_string(depth));
    BluePrefix q;
    q.root = p.root;
    q.edges.assign(p.edges.begin(), p.edges.begin() + depth);
    return q;
}

bool extends(const BluePrefix& p, const BluePrefix& q) {
    return p.root == q.root && p.depth() >= q.depth() && std::equal(q.edges.begin(), q.edges.end(), p.edges.begin());
}

std::vector<BluePrefix> all_prefixes(const LDiagram& d, int depth) {
    std::vector<BluePrefix> out;
    for (int v = 0; v < d.level_size(depth); ++v) out.push_back(prefix_to_vertex(d, depth, v));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<BluePrefix> extensions(const LDiagram& d, const BluePrefix& p, int to_depth) {
    if (to_depth < p.depth())
        throw Error(ErrorKind::InvalidArgument, "extension depth is below the prefix depth");
    require_horizon(d, to_depth, "extension");
    std::vector<BluePrefix> out;
    BluePrefix cur = p;
    std::function<void(int)> rec = [&](int v) {
        if (cur.depth() == to_depth) {
            out.push_back(cur);
            return;
        }
        int k = cur.depth();
        for (int e : d.layers[k].in[v]) {
            if (d.edge(k, e).color != Color::Blue) continue;
            cur.edges.push_back(e);
            rec(d.edge(k, e).src);
            cur.edges.pop_back();
        }
    };
    rec(end_vertex(d, p));
    std::sort(out.begin(), out.end());
    return out;
}

std::string prefix_name(const LDiagram& d, const BluePrefix& p) {
    std::string s = d.levels.at(0).at(p.root);
    for (int k = 0; k < p.depth(); ++k) s += (k == 0 ? ":" : ",") + d.edge(k, p.edges[k]).id;
    return s;
}

BluePrefix parse_prefix(const LDiagram& d, const std::string& text) {
    if (!text.empty() && text[0] == '@') {
        auto colon = text.find(':');
        if (colon == std::string::npos) throw Error(ErrorKind::ParseError, "expected '@level:vertex', got '" + text + "'");
        int level = 0;
        try {
            level = std::stoi(text.substr(1, colon - 1));
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "bad level in '" + text + "'");
        }
        if (level < 0 || level > d.horizon())
            throw Error(ErrorKind::HorizonExceeded, "level " + std::to_string(level) + " is outside the diagram");
        int v = d.vertex_index(level, text.substr(colon + 1));
        if (v < 0) throw Error(ErrorKind::UnknownReference, "no vertex '" + text.substr(colon + 1) + "' at level " + std::to_string(level));
        return prefix_to_vertex(d, level, v);
    }
    std::string root_name, rest = text;
    if (auto colon = text.find(':'); colon != std::string::npos) {
        root_name = text.substr(0, colon);
        rest = text.substr(colon + 1);
    } else if (text.find(',') == std::string::npos && d.vertex_index(0, text) >= 0) {
        root_name = text;
        rest.clear();
    }
    BluePrefix p;
    auto ids = split_top_level(rest, ',');
    require_horizon(d, static_cast<int>(ids.size()), "prefix '" + text + "'");
    for (int k = 0; k < static_cast<int>(ids.size()); ++k) {
        int e = d.edge_index(k, ids[k]);
        if (e < 0) throw Error(ErrorKind::UnknownReference, "no edge '" + ids[k] + "' in layer " + std::to_string(k));
        if (d.edge(k, e).color != Color::Blue) throw Error(ErrorKind::InvalidArgument, "edge '" + ids[k] + "' is not blue");
        if (k > 0 && d.edge(k, e).rng != d.edge(k - 1, p.edges.back()).src)
            throw Error(ErrorKind::InvalidArgument, "edges '" + ids[k - 1] + "' and '" + ids[k] + "' do not compose");
        p.edges.push_back(e);
    }
    if (!p.edges.empty()) p.root = d.edge(0, p.edges[0]).rng;
    if (!root_name.empty()) {
        int r = d.vertex_index(0, root_name);
        if (r < 0) throw Error(ErrorKind::UnknownReference, "no vertex '" + root_name + "' at level 0");
        if (!p.edges.empty() && r != p.root) throw Error(ErrorKind::InvalidArgument, "prefix does not start at '" + root_name + "'");
        p.root = r;
    } else if (p.edges.empty()) {
        throw Error(ErrorKind::ParseError, "empty prefix '" + text + "'");
    }
    return p;
}

int romb_red_edge(const LDiagram& d, const BluePrefix& p, int k) {
    require_depth(p, k + 2, "romb at level " + std::to_string(k));
    return complete_romb_from_blue(d, k, p.edges[k], p.edges[k + 1]).f0;
}

BluePrefix shift_prefix(const LDiagram& d, const BluePrefix& p) {
    if (p.depth() % 2 != 0) throw Error(ErrorKind::OddDepth, "shift needs an even depth, got " + std::to_string(p.depth()));
    require_depth(p, 2, "shift");
    const int n = (p.depth() - 2) / 2;
    std::vector<int> f(2 * n + 2);
    for (int j = 0; j <= n; ++j) {
        Romb r = complete_romb_from_blue(d, 2 * j, p.edges[2 * j], p.edges[2 * j + 1]);
        f[2 * j] = r.f0;
        f[2 * j + 1] = r.f1;
    }
    BluePrefix q;
    q.edges.resize(2 * n + 1);
    for (int j = 1; j <= n; ++j) {
        Romb r = complete_romb_from_red(d, 2 * j - 1, f[2 * j - 1], f[2 * j]);
        q.edges[2 * j - 1] = r.e0;
        q.edges[2 * j] = r.e1;
    }
    int v1 = n >= 1 ? d.edge(1, q.edges[1]).rng : d.edge(0, f[0]).src;
    q.edges[0] = blue_parent_edge(d, 0, v1);
    q.root = d.edge(0, q.edges[0]).rng;
    return q;
}

std::vector<PreimageBranch> preimages(const LDiagram& d, const BluePrefix& q) {
    if (q.depth() % 2 != 1) throw Error(ErrorKind::EvenDepth, "preimages need an odd depth, got " + std::to_string(q.depth()));
    const int n = (q.depth() - 1) / 2;
    const int s0 = d.edge(0, q.edges[0]).src;
    std::vector<PreimageBranch> out;
    for (int f0 : d.layers[0].red_out[s0]) {
        std::vector<int> f(2 * n + 1);
        f[0] = f0;
        for (int j = 0; j < n; ++j) {
            Romb r = complete_romb_odd(d, 2 * j + 1, f[2 * j], q.edges[2 * j + 1], q.edges[2 * j + 2]);
            f[2 * j + 1] = r.f0;
            f[2 * j + 2] = r.f1;
        }
        PreimageBranch b;
        b.f0 = f0;
        b.prefix.root = d.edge(0, f0).rng;
        for (int j = 0; j < n; ++j) {
            Romb r = complete_romb_from_red(d, 2 * j, f[2 * j], f[2 * j + 1]);
            b.prefix.edges.push_back(r.e0);
            b.prefix.edges.push_back(r.e1);
        }
        out.push_back(std::move(b));
    }
    return out;
}

BluePrefix inverse_shift_prefix(const LDiagram& d, const BluePrefix& p) {
    require_depth(p, 1, "inverse shift");
    BluePrefix q = truncate(p, p.depth() % 2 == 1 ? p.depth() : p.depth() - 1);
    const int s0 = d.edge(0, q.edges[0]).src;
    if (d.layers[0].red_out[s0].size() != 1)
        throw Error(ErrorKind::NotHDiagram, "vertex '" + d.levels[1][s0] + "' has " +
                                                std::to_string(d.layers[0].red_out[s0].size()) + " red out-edges");
    return preimages(d, q).front().prefix;
}

// ---------------------------------------------------------------- cylinder sets

int max_depth(const CylinderSet& s) {
    int m = 0;
    for (const auto& c : s.cells) m = std::max(m, c.depth());
    return m;
}

std::vector<BluePrefix> refine_to(const LDiagram& d, const CylinderSet& s, int depth) {
    std::vector<BluePrefix> out;
    for (const auto& c : s.cells) {
        if (c.depth() > depth)
            throw Error(ErrorKind::InvalidArgument, "cell of depth " + std::to_string(c.depth()) + " cannot be refined to depth " +
                                                        std::to_string(depth));
        auto ext = extensions(d, c, depth);
        out.insert(out.end(), ext.begin(), ext.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CylinderSet normalize(const LDiagram& d, std::vector<BluePrefix> cells) {
    CylinderSet in{std::move(cells)};
    const int D = max_depth(in);
    std::vector<BluePrefix> level = refine_to(d, in, D), kept;
    for (int l = D; l >= 1; --l) {
        std::map<BluePrefix, std::vector<BluePrefix>> groups;
        for (auto& c : level) groups[truncate(c, l - 1)].push_back(c);
        std::vector<BluePrefix> next;
        for (auto& [parent, children] : groups) {
            std::size_t blue_children = 0;
            for (int e : d.layers[l - 1].in[end_vertex(d, parent)])
                if (d.edge(l - 1, e).color == Color::Blue) ++blue_children;
            if (children.size() == blue_children)
                next.push_back(parent);
            else
                kept.insert(kept.end(), children.begin(), children.end());
        }
        level = std::move(next);
    }
    kept.insert(kept.end(), level.begin(), level.end());
    std::sort(kept.begin(), kept.end());
    return CylinderSet{std::move(kept)};
}

bool subset(const LDiagram& d, const CylinderSet& a, const CylinderSet& b) {
    const int D = std::max(max_depth(a), max_depth(b));
    auto ra = refine_to(d, a, D), rb = refine_to(d, b, D);
    return std::includes(rb.begin(), rb.end(), ra.begin(), ra.end());
}

CylinderSet intersect(const LDiagram& d, const CylinderSet& a, const CylinderSet& b) {
    const int D = std::max(max_depth(a), max_depth(b));
    auto ra = refine_to(d, a, D), rb = refine_to(d, b, D);
    std::vector<BluePrefix> out;
    std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(out));
    return normalize(d, std::move(out));
}

CylinderSet unite(const LDiagram& d, const CylinderSet& a, const CylinderSet& b) {
    std::vector<BluePrefix> all = a.cells;
    all.insert(all.end(), b.cells.begin(), b.cells.end());
    return normalize(d, std::move(all));
}

bool disjoint(const LDiagram& d, const CylinderSet& a, const CylinderSet& b) { return intersect(d, a, b).cells.empty(); }

std::string set_name(const LDiagram& d, const CylinderSet& s) {
    std::string out = "{";
    for (std::size_t i = 0; i < s.cells.size(); ++i) out += (i ? " | " : "") + prefix_name(d, s.cells[i]);
    return out + "}";
}

namespace {

std::vector<BluePrefix> image_once(const LDiagram& d, const BluePrefix& p) {
    int D = std::max(2, p.depth() % 2 == 0 ? p.depth() : p.depth() + 1);
    require_horizon(d, D + 2, "sigma image of a depth " + std::to_string(p.depth()) + " cell");
    std::vector<BluePrefix> out;
    for (const auto& x : extensions(d, p, D + 2)) out.push_back(shift_prefix(d, x));
    return out;
}

std::vector<BluePrefix> preimage_once(const LDiagram& d, const BluePrefix& q) {
    int D = std::max(1, q.depth() % 2 == 1 ? q.depth() : q.depth() + 1);
    require_horizon(d, D + 1, "sigma preimage of a depth " + std::to_string(q.depth()) + " cell");
    std::vector<BluePrefix> out;
    for (const auto& qq : extensions(d, q, D))
        for (const auto& b : preimages(d, qq))
            for (const auto& x : extensions(d, b.prefix, D + 1))
                if (shift_prefix(d, x) == qq) out.push_back(x);
    return out;
}

}  // namespace

CylinderSet sigma_image(const LDiagram& d, const CylinderSet& s, int k) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative power");
    CylinderSet cur = s;
    for (int i = 0; i < k; ++i) {
        std::vector<BluePrefix> next;
        for (const auto& c : cur.cells) {
            auto img = image_once(d, c);
            next.insert(next.end(), img.begin(), img.end());
        }
        cur = normalize(d, std::move(next));
    }
    return cur;
}

CylinderSet sigma_image(const LDiagram& d, const BluePrefix& p, int k) { return sigma_image(d, CylinderSet{{p}}, k); }

CylinderSet sigma_preimage_set(const LDiagram& d, const CylinderSet& s, int k) {
    if (k < 0) throw Error(ErrorKind::InvalidArgument, "negative power");
    CylinderSet cur = s;
    for (int i = 0; i < k; ++i) {
        std::vector<BluePrefix> next;
        for (const auto& c : cur.cells) {
            auto pre = preimage_once(d, c);
            next.insert(next.end(), pre.begin(), pre.end());
        }
        cur = normalize(d, std::move(next));
    }
    return cur;
}

CylinderSet sigma_preimage_set(const LDiagram& d, const BluePrefix& q, int k) {
    return sigma_preimage_set(d, CylinderSet{{q}}, k);
}

// ------------------------------------------------------ cylinder decompositions

SigmaCylinderDecomposition extract_cylinder_decomposition(const LDiagram& d, int level, CheckResult* bijectivity) {
    if (level < 0 || level % 2 != 0) throw Error(ErrorKind::InvalidArgument, "decomposition level must be even and non-negative");
    require_horizon(d, level + 2, "cylinder decomposition at level " + std::to_string(level));
    SigmaCylinderDecomposition out;
    out.level = level;
    const int nb = d.level_size(level + 1);
    for (int g = 0; g < nb; ++g) {
        out.gamma.push_back(prefix_to_vertex(d, level + 1, g));
        out.gamma_class.push_back(d.edge(level, out.gamma.back().edges.back()).rng);
    }
    std::map<int, std::vector<BluePrefix>> by_red;
    for (const auto& x : all_prefixes(d, level + 2)) by_red[romb_red_edge(d, x, level)].push_back(x);
    const auto& L = d.layers[level];
    for (int f = 0; f < static_cast<int>(L.edges.size()); ++f) {
        if (L.edges[f].color != Color::Red) continue;
        VCell c;
        c.gamma = L.edges[f].src;
        c.target = L.edges[f].rng;
        c.red_edge = f;
        c.cells = normalize(d, by_red[f]);
        out.v.push_back(std::move(c));
    }
    IntMatrix A;
    A.rows = d.levels[level + 1];
    A.cols = d.levels[level];
    std::sort(A.rows.begin(), A.rows.end());
    std::sort(A.cols.begin(), A.cols.end());
    std::map<std::string, std::size_t> ri, ci;
    for (std::size_t i = 0; i < A.rows.size(); ++i) ri[A.rows[i]] = i;
    for (std::size_t i = 0; i < A.cols.size(); ++i) ci[A.cols[i]] = i;
    A.a.assign(A.rows.size(), std::vector<std::int64_t>(A.cols.size(), 0));
    IntMatrix I = A;
    for (const auto& c : out.v) {
        auto& cell = A.a[ri.at(d.levels[level + 1][c.gamma])][ci.at(d.levels[level][c.target])];
        cell = checked_count(cell + 1);
    }
    for (int g = 0; g < nb; ++g) I.a[ri.at(d.levels[level + 1][g])][ci.at(d.levels[level][out.gamma_class[g]])] += 1;
    out.A = std::move(A);
    out.I = std::move(I);

    if (bijectivity) {
        *bijectivity = CheckResult{};
        if (d.horizon() < level + 4) {
            bijectivity->witness = "horizon too small for the bijectivity check";
            return out;
        }
        for (const auto& c : out.v) {
            CylinderSet z = normalize(d, {out.gamma[c.gamma]});
            CylinderSet img = sigma_image(d, c.cells, 1);
            ++bijectivity->checked;
            if (!(img == z)) {
                bijectivity->ok = false;
                bijectivity->witness = "sigma(V[" + L.edges[c.red_edge].id + "]) = " + set_name(d, img) + " differs from " + set_name(d, z);
                return out;
            }
            auto inside = refine_to(d, c.cells, level + 2);
            for (const auto& q : extensions(d, out.gamma[c.gamma], level + 3)) {
                int hits = 0;
                for (const auto& b : preimages(d, q))
                    if (std::binary_search(inside.begin(), inside.end(), b.prefix)) ++hits;
                ++bijectivity->checked;
                if (hits != 1) {
                    bijectivity->ok = false;
                    bijectivity->witness = prefix_name(d, q) + " has " + std::to_string(hits) + " preimage branches in V[" +
                                           L.edges[c.red_edge].id + "]";
                    return out;
                }
            }
        }
    }
    return out;
}

CheckResult check_refinement(const LDiagram& d, const SigmaCylinderDecomposition& fine, const SigmaCylinderDecomposition& coarse) {
    CheckResult r;
    auto fail = [&](std::string w) {
        r.ok = false;
        r.witness = std::move(w);
        return r;
    };
    if (fine.level < coarse.level) return fail("the fine decomposition sits above the coarse one");
    // (a) the cells refine: Lambda(gamma) partitions Z_gamma.
    std::map<BluePrefix, int> coarse_gamma;
    for (int g = 0; g < static_cast<int>(coarse.gamma.size()); ++g) coarse_gamma[coarse.gamma[g]] = g;
    std::vector<std::vector<int>> lambda(coarse.gamma.size());
    for (int g = 0; g < static_cast<int>(fine.gamma.size()); ++g) {
        auto it = coarse_gamma.find(truncate(fine.gamma[g], coarse.level + 1));
        if (it == coarse_gamma.end()) return fail("fine cell " + prefix_name(d, fine.gamma[g]) + " lies in no coarse cell");
        lambda[it->second].push_back(g);
    }
    for (int g = 0; g < static_cast<int>(coarse.gamma.size()); ++g) {
        std::vector<BluePrefix> parts;
        for (int h : lambda[g]) parts.push_back(fine.gamma[h]);
        ++r.checked;
        if (!(normalize(d, parts) == normalize(d, {coarse.gamma[g]})))
            return fail("fine cells do not cover " + prefix_name(d, coarse.gamma[g]));
    }
    // (b) every fine V-cell lies in exactly one coarse V-cell and B(nu) covers nu.
    std::vector<std::vector<int>> B(coarse.v.size());
    for (int i = 0; i < static_cast<int>(fine.v.size()); ++i) {
        int owner = -1, count = 0;
        for (int j = 0; j < static_cast<int>(coarse.v.size()); ++j)
            if (subset(d, fine.v[i].cells, coarse.v[j].cells)) {
                owner = j;
                ++count;
            }
        ++r.checked;
        if (count != 1)
            return fail("fine V-cell " + set_name(d, fine.v[i].cells) + " lies in " + std::to_string(count) + " coarse V-cells");
        B[owner].push_back(i);
    }
    for (int j = 0; j < static_cast<int>(coarse.v.size()); ++j) {
        CylinderSet u;
        for (int i : B[j]) u = unite(d, u, fine.v[i].cells);
        ++r.checked;
        if (!(u == coarse.v[j].cells)) return fail("fine V-cells do not cover " + set_name(d, coarse.v[j].cells));
        // (c) pi_Lambda is a bijection from B(nu) onto Lambda(gamma(nu)).
        std::vector<int> image, target = lambda[coarse.v[j].gamma];
        for (int i : B[j]) image.push_back(fine.v[i].gamma);
        std::sort(image.begin(), image.end());
        std::sort(target.begin(), target.end());
        ++r.checked;
        if (image != target)
            return fail("the fine V-cells in " + set_name(d, coarse.v[j].cells) + " do not map bijectively onto the cells of " +
                        prefix_name(d, coarse.gamma[coarse.v[j].gamma]));
    }
    return r;
}

// ------------------------------------------------------------ configuration balls

namespace {

// Partial maps rho_f of the decomposition at an even level, on prefixes.
struct Walker {
    const LDiagram& d;
    int L;

    std::pair<int, BluePrefix> forward(const BluePrefix& x) const {
        int E = x.depth() % 2 == 0 ? x.depth() : x.depth() - 1;
        if (E < L + 2 || E < 2)
            throw Error(ErrorKind::InsufficientDepth, "prefix of depth " + std::to_string(x.depth()) + " is too short for the ball");
        BluePrefix t = truncate(x, E);
        return {romb_red_edge(d, t, L), shift_prefix(d, t)};
    }

    const std::vector<int>& backward_letters(const BluePrefix& x) const {
        if (x.depth() < L + 1)
            throw Error(ErrorKind::InsufficientDepth, "prefix of depth " + std::to_string(x.depth()) + " is too short for the ball");
        return d.layers[L].red_out[end_vertex(d, truncate(x, L + 1))];
    }

    BluePrefix backward(const BluePrefix& x, int f) const {
        int D = x.depth() % 2 == 1 ? x.depth() : x.depth() - 1;
        if (D < 1 || (L > 0 && D < L + 3))
            throw Error(ErrorKind::InsufficientDepth, "prefix of depth " + std::to_string(x.depth()) + " is too short for the ball");
        std::optional<BluePrefix> hit;
        int hits = 0;
        for (auto& b : preimages(d, truncate(x, D))) {
            int g = L == 0 ? b.f0 : romb_red_edge(d, b.prefix, L);
            if (g == f) {
                hit = b.prefix;
                ++hits;
            }
        }
        if (hits != 1)
            throw Error(ErrorKind::StructureMismatch, "inverse partial map of '" + d.edge(L, f).id + "' has " + std::to_string(hits) +
                                                          " values at " + prefix_name(d, x));
        return *hit;
    }
};

using Emit = std::function<void(const FreeWord&, const BluePrefix*)>;

// Words a_{f1}^{-1}...a_{fm}^{-1} a_{gn}...a_{g1} with m <= max_m, n <= max_n
// and m + n <= radius, together with the resulting point when requested.
void enumerate_words(const Walker& w, const BluePrefix& x, int radius, int max_m, int max_n, bool points, const Emit& emit) {
    std::vector<int> pos;  // g_1, ..., g_n in application order
    BluePrefix cur = x;
    const int top_n = std::min(radius, max_n);
    for (int n = 0;; ++n) {
        FreeWord pos_written;
        for (auto it = pos.rbegin(); it != pos.rend(); ++it) pos_written.push_back(*it + 1);
        const int rem = std::min(radius - n, max_m);
        std::vector<int> inv;  // f_m, f_{m-1}, ... in application order
        std::function<void(const BluePrefix*, int)> rec = [&](const BluePrefix* p, int left) {
            FreeWord word;
            for (auto it = inv.rbegin(); it != inv.rend(); ++it) word.push_back(-(*it + 1));
            word.insert(word.end(), pos_written.begin(), pos_written.end());
            emit(word, p);
            if (left == 0) return;
            int forbid = inv.empty() && !pos.empty() ? pos.back() : -1;
            for (int f : w.backward_letters(*p)) {
                if (f == forbid) continue;
                inv.push_back(f);
                if (left == 1 && !points) {
                    rec(nullptr, 0);
                } else {
                    BluePrefix q = w.backward(*p, f);
                    rec(&q, left - 1);
                }
                inv.pop_back();
            }
        };
        rec(&cur, rem);
        if (n == top_n) break;
        auto [g, next] = w.forward(cur);
        pos.push_back(g);
        cur = std::move(next);
    }
}

std::vector<std::string> alphabet_for(const LDiagram& d, int L, const std::map<std::string, std::string>& names) {
    std::vector<std::string> out;
    for (const auto& e : d.layers.at(L).edges) {
        if (e.color != Color::Red) {
            out.emplace_back();
            continue;
        }
        auto it = names.find(e.id);
        out.push_back(it == names.end() ? e.id : it->second);
    }
    return out;
}

}  // namespace

std::string ConfigBall::word_name(const FreeWord& w) const {
    if (w.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < w.size();) {
        std::size_t j = i;
        while (j < w.size() && w[j] == w[i]) ++j;
        int power = static_cast<int>(j - i) * (w[i] > 0 ? 1 : -1);
        out += alphabet.at(std::abs(w[i]) - 1);
        if (power != 1) out += "^" + std::to_string(power);
        i = j;
    }
    return out;
}

std::vector<std::string> ConfigBall::names() const {
    std::vector<std::pair<std::size_t, std::string>> tmp;
    for (const auto& w : words) tmp.emplace_back(w.size(), word_name(w));
    std::sort(tmp.begin(), tmp.end());
    std::vector<std::string> out;
    for (auto& [len, name] : tmp) out.push_back(std::move(name));
    return out;
}

json ConfigBall::to_json() const { return json{{"radius", radius}, {"words", names()}}; }

std::string ConfigBall::to_dot() const {
    std::ostringstream out;
    out << "digraph ball {\n  rankdir=LR;\n";
    for (const auto& w : words) out << "  \"" << word_name(w) << "\";\n";
    for (const auto& w : words) {
        if (w.empty()) continue;
        FreeWord rest(w.begin() + 1, w.end());
        FreeWord letter{w.front()};
        out << "  \"" << word_name(rest) << "\" -> \"" << word_name(w) << "\" [label=\"" << word_name(letter) << "\", color="
            << (w.front() > 0 ? "red" : "blue") << "];\n";
    }
    out << "}\n";
    return out.str();
}

ConfigBall config_ball(const LDiagram& d, const BluePrefix& p, int radius, int level,
                       const std::map<std::string, std::string>& letter_names) {
    if (radius < 0) throw Error(ErrorKind::InvalidArgument, "negative radius");
    if (level < 0 || level % 2 != 0) throw Error(ErrorKind::InvalidArgument, "ball level must be even and non-negative");
    require_horizon(d, level + 1, "configuration ball");
    ConfigBall ball;
    ball.radius = radius;
    ball.alphabet = alphabet_for(d, level, letter_names);
    Walker w{d, level};
    enumerate_words(w, p, radius, radius, radius, false, [&](const FreeWord& word, const BluePrefix*) { ball.words.insert(word); });
    return ball;
}

ConfigBall tau(const ConfigBall& ball) {
    if (ball.radius < 1) throw Error(ErrorKind::InvalidArgument, "tau needs a ball of radius at least 1");
    int letter = 0;
    for (const auto& w : ball.words)
        if (w.size() == 1 && w[0] > 0) letter = w[0];
    if (letter == 0) throw Error(ErrorKind::StructureMismatch, "ball has no positive letter");
    ConfigBall out;
    out.radius = ball.radius - 1;
    out.alphabet = ball.alphabet;
    for (auto w : ball.words) {
        if (!w.empty() && w.back() == letter)
            w.pop_back();
        else
            w.push_back(-letter);
        if (static_cast<int>(w.size()) <= out.radius) out.words.insert(std::move(w));
    }
    return out;
}

// ------------------------------------------------------------------ universal map

StructureMap default_structure(const LDiagram& y, const Layer& gfs) {
    Layer l0 = layer_of(y, 0);
    Isomorphism iso = find_gfs_isomorphism(l0, gfs);
    if (!iso.found) throw Error(ErrorKind::StructureMismatch, "layer 0 is not isomorphic to the given graph: " + iso.witness);
    using Key = std::tuple<std::string, std::string, Color>;
    std::map<Key, std::vector<std::string>> theirs;
    for (const auto& e : gfs.edges) theirs[{e.src, e.tgt, e.color}].push_back(e.id);
    std::map<Key, std::vector<std::string>> ours;
    for (const auto& e : l0.edges) ours[{iso.bottom.at(e.src), iso.top.at(e.tgt), e.color}].push_back(e.id);
    StructureMap out;
    for (auto& [key, ids] : ours) {
        auto& other = theirs[key];
        std::sort(ids.begin(), ids.end());
        std::sort(other.begin(), other.end());
        if (ids.size() != other.size()) throw Error(ErrorKind::StructureMismatch, "edge multiplicities differ");
        for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = other[i];
    }
    return out;
}

namespace {

void check_structure(const LDiagram& y, const Layer& gfs, const StructureMap& s) {
    std::map<std::string, const Edge*> theirs;
    for (const auto& e : gfs.edges) theirs[e.id] = &e;
    std::map<std::string, std::string> top, bottom;
    std::set<std::string> used;
    auto bind = [](std::map<std::string, std::string>& m, const std::string& a, const std::string& b) {
        auto [it, fresh] = m.emplace(a, b);
        if (!fresh && it->second != b) throw Error(ErrorKind::StructureMismatch, "vertex '" + a + "' maps to two vertices");
    };
    for (const auto& e : y.layers.at(0).edges) {
        auto it = s.find(e.id);
        if (it == s.end()) throw Error(ErrorKind::StructureMismatch, "edge '" + e.id + "' is not mapped");
        auto jt = theirs.find(it->second);
        if (jt == theirs.end()) throw Error(ErrorKind::StructureMismatch, "edge '" + it->second + "' is not in the target graph");
        if (jt->second->color != e.color) throw Error(ErrorKind::StructureMismatch, "edge '" + e.id + "' changes color");
        if (!used.insert(it->second).second) throw Error(ErrorKind::StructureMismatch, "edge '" + it->second + "' is hit twice");
        bind(top, y.levels[0][e.rng], jt->second->tgt);
        bind(bottom, y.levels[1][e.src], jt->second->src);
    }
    if (used.size() != gfs.edges.size()) throw Error(ErrorKind::StructureMismatch, "edge map is not onto");
    auto injective = [](const std::map<std::string, std::string>& m, std::size_t n) {
        std::set<std::string> vals;
        for (auto& [k, v] : m) vals.insert(v);
        return vals.size() == m.size() && m.size() == n;
    };
    if (!injective(top, gfs.top.size()) || !injective(bottom, gfs.bottom.size()))
        throw Error(ErrorKind::StructureMismatch, "edge map does not induce vertex bijections");
}

}  // namespace

ConfigBall universal_map(const LDiagram& y_diagram, const BluePrefix& y, int radius, const Layer& gfs, const StructureMap& structure) {
    check_structure(y_diagram, gfs, structure);
    return config_ball(y_diagram, y, radius, 0, structure);
}

// ------------------------------------------------------------------ inverse limit

CheckResult inverse_limit_check(const LDiagram& d, int depth, std::int64_t budget) {
    if (budget < 0) budget = default_budget();
    require_horizon(d, depth, "inverse limit check");
    CheckResult r;
    const auto points = all_prefixes(d, depth);
    if (static_cast<std::int64_t>(points.size()) > budget)
        throw Error(ErrorKind::ResourceBudgetExceeded, std::to_string(points.size()) + " prefixes exceed the budget");
    const auto layers = d.to_layers();
    // Deeper structure levels need deeper points; stop at the first level the
    // prefixes cannot support.
    for (int i = 0; 2 * i + 4 <= depth; ++i) {
        try {
            config_ball(d, points.front(), 2, 2 * i);
            config_ball(d, points.front(), 1, 2 * i + 2);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientDepth) throw;
            break;
        }
        LDiagram F = canonical_resolution(layer_of(d, 2 * i + 2), 2, budget);
        LDiagram G = LDiagram::from_layers({layers[2 * i], layers[2 * i + 1], F.to_layers()[0], F.to_layers()[1]});
        std::map<std::vector<std::string>, std::vector<BluePrefix>> f_balls;
        for (const auto& q : all_prefixes(F, 2)) f_balls[config_ball(F, q, 1).names()].push_back(q);
        for (const auto& x : points) {
            auto b1 = config_ball(d, x, 1, 2 * i + 2).names();
            auto it = f_balls.find(b1);
            ++r.checked;
            if (it == f_balls.end() || it->second.size() != 1) {
                r.ok = false;
                r.witness = "psi_" + std::to_string(i + 1) + "(" + prefix_name(d, x) + ") matches " +
                            std::to_string(it == f_balls.end() ? 0 : it->second.size()) + " cells of depth 2";
                return r;
            }
            const BluePrefix& q = it->second.front();
            BluePrefix lift = prefix_to_vertex(G, 2, G.vertex_index(2, F.levels[0][q.root]));
            for (int k = 0; k < 2; ++k) lift.edges.push_back(G.edge_index(2 + k, F.edge(k, q.edges[k]).id));
            auto via = config_ball(G, lift, 2).names();
            auto direct = config_ball(d, x, 2, 2 * i).names();
            if (via != direct) {
                r.ok = false;
                r.witness = "psi_" + std::to_string(i) + " and the composite through psi_" + std::to_string(i + 1) + " disagree at " +
                            prefix_name(d, x);
                return r;
            }
        }
    }
    const int I = (depth - 2) / 2;
    if (I >= 0) {
        std::map<std::vector<std::vector<std::string>>, BluePrefix> seen;
        for (const auto& x : points) {
            std::vector<std::vector<std::string>> key;
            for (int i = 0; i <= I; ++i) key.push_back(config_ball(d, x, 1, 2 * i).names());
            BluePrefix t = truncate(x, 2 * I + 1);
            auto [it, fresh] = seen.emplace(key, t);
            ++r.checked;
            if (!fresh && !(it->second == t)) {
                r.ok = false;
                r.witness = prefix_name(d, it->second) + " and " + prefix_name(d, t) + " have the same balls";
                return r;
            }
        }
    }
    return r;
}

// ------------------------------------------------------------------ groupoid fibers

namespace {

constexpr std::int64_t kResolutionModelCap = std::int64_t{1} << 17;

// The configuration of a point rerooted at the end of the word w: every word
// u becomes u w^{-1}, reduced, keeping the words of length at most radius.
std::set<FreeWord> reroot(const std::set<FreeWord>& words, const FreeWord& w, int radius) {
    std::set<FreeWord> out;
    for (FreeWord u : words) {
        for (auto it = w.rbegin(); it != w.rend(); ++it) {
            if (!u.empty() && u.back() == *it)
                u.pop_back();
            else
                u.push_back(-*it);
        }
        if (static_cast<int>(u.size()) <= radius) out.insert(std::move(u));
    }
    return out;
}

// Whether a reduced word has the form a^{-1}...a^{-1} a...a with at most
// max_m inverse and max_n positive letters.
bool fiber_shape(const FreeWord& w, int max_m, int max_n) {
    int m = 0;
    while (m < static_cast<int>(w.size()) && w[m] < 0) ++m;
    for (std::size_t i = m; i < w.size(); ++i)
        if (w[i] < 0) return false;
    return m <= max_m && static_cast<int>(w.size()) - m <= max_n;
}

CheckResult fibers_via_configurations(const LDiagram& d, int bound_m, int bound_n, int depth) {
    const int R = bound_m + bound_n;
    const Layer gfs = layer_of(d, 0);
    StructureMap structure;
    for (const auto& e : gfs.edges) structure[e.id] = e.id;
    const Walker wy{d, 0};
    CheckResult r;
    r.note = "configuration model";
    for (const auto& y : all_prefixes(d, depth)) {
        // Configuration of psi(y); radius R+1 also fixes the radius-1 balls
        // at the fiber endpoints when y is deep enough.
        ConfigBall ball;
        bool full = true;
        try {
            ball = universal_map(d, y, R + 1, gfs, structure);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientDepth) throw;
            ball = universal_map(d, y, R, gfs, structure);
            full = false;
        }
        auto fail = [&](const std::string& what) {
            r.ok = false;
            r.witness = what + " over " + prefix_name(d, y);
            return r;
        };
        // Fiber of y in Y: the points reached through the partial maps, each
        // checked against its own forward orbit.
        std::map<FreeWord, BluePrefix> fy;
        std::set<std::pair<BluePrefix, int>> elements;
        std::string problem;
        enumerate_words(wy, y, R, bound_m, bound_n, true, [&](const FreeWord& w, const BluePrefix* z) {
            if (!problem.empty()) return;
            int m = 0;
            while (m < static_cast<int>(w.size()) && w[m] < 0) ++m;
            const int n = static_cast<int>(w.size()) - m;
            if (!elements.emplace(*z, m - n).second) problem = "two words reach " + prefix_name(d, *z) + " in degree " + std::to_string(m - n);
            BluePrefix cur = *z;
            try {
                for (int i = 0; i < m && problem.empty(); ++i) {
                    auto [f, next] = wy.forward(cur);
                    if (f + 1 != -w[i]) problem = "the orbit of " + prefix_name(d, *z) + " does not retrace " + ball.word_name(w);
                    cur = std::move(next);
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InsufficientDepth) throw;
            }
            fy.emplace(w, *z);
        });
        ++r.checked;
        if (!problem.empty()) return fail(problem);
        std::set<FreeWord> fx;
        for (const auto& w : ball.words)
            if (static_cast<int>(w.size()) <= R && fiber_shape(w, bound_m, bound_n)) fx.insert(w);
        ++r.checked;
        for (const auto& [w, z] : fy)
            if (!fx.count(w)) return fail("psi_* sends the element " + ball.word_name(w) + " outside the fiber");
        if (fx.size() != fy.size())
            return fail("fibers differ: " + std::to_string(fy.size()) + " vs " + std::to_string(fx.size()) + " elements");
        if (!full) continue;
        for (const auto& [w, z] : fy) {
            std::set<FreeWord> at_z;
            try {
                at_z = universal_map(d, z, 1, gfs, structure).words;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InsufficientDepth) throw;
                continue;
            }
            ++r.checked;
            if (at_z != reroot(ball.words, w, 1)) return fail("psi does not intertwine the element " + ball.word_name(w));
        }
    }
    return r;
}

CheckResult fibers_via_resolution(const LDiagram& d, int bound_m, int bound_n, int depth, std::int64_t budget, const LDiagram& X) {
    const int R = bound_m + bound_n;
    const Layer gfs = layer_of(d, 0);
    StructureMap structure;
    for (const auto& e : gfs.edges) structure[e.id] = e.id;
    const Walker wy{d, 0}, wx{X, 0};
    CheckResult r;
    auto radius1 = [](const LDiagram& dd, const BluePrefix& p) -> std::optional<std::vector<std::string>> {
        try {
            return config_ball(dd, p, 1).names();
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::InsufficientDepth) throw;
            return std::nullopt;
        }
    };
    for (const auto& y : all_prefixes(d, depth)) {
        // Fiber of y in Y, with the end point of each word.
        std::map<std::string, BluePrefix> fy;
        ConfigBall names_y;
        names_y.alphabet = alphabet_for(d, 0, structure);
        enumerate_words(wy, y, R, bound_m, bound_n, true,
                        [&](const FreeWord& w, const BluePrefix* z) { fy.emplace(names_y.word_name(w), *z); });
        // psi(y): a point of X whose radius-R ball equals that of y.
        std::vector<BluePrefix> cands;
        for (int v = 0; v < X.level_size(0); ++v) cands.push_back(prefix_to_vertex(X, 0, v));
        // Radius R fixes the fiber words; radius R+1 also fixes the radius-1
        // balls at the ends of those words when y is deep enough.
        bool full = true;
        for (int k = 1; k <= R + 1; ++k) {
            std::vector<std::string> want;
            try {
                want = universal_map(d, y, k, gfs, structure).names();
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InsufficientDepth || k <= R) throw;
                full = false;
                break;
            }
            std::vector<BluePrefix> next;
            for (const auto& c : cands)
                for (const auto& e : extensions(X, c, 2 * k))
                    if (config_ball(X, e, k).names() == want) next.push_back(e);
            if (static_cast<std::int64_t>(next.size()) > budget)
                throw Error(ErrorKind::ResourceBudgetExceeded, "too many candidates for psi(" + prefix_name(d, y) + ")");
            cands = std::move(next);
        }
        ++r.checked;
        if (cands.empty()) {
            r.ok = false;
            r.witness = "no point of the shift space has the configuration of " + prefix_name(d, y);
            return r;
        }
        std::map<std::string, BluePrefix> fx;
        ConfigBall names_x;
        names_x.alphabet = alphabet_for(X, 0, {});
        enumerate_words(wx, cands.front(), R, bound_m, bound_n, true,
                        [&](const FreeWord& w, const BluePrefix* z) { fx.emplace(names_x.word_name(w), *z); });
        std::vector<std::string> ky, kx;
        for (auto& [k, v] : fy) ky.push_back(k);
        for (auto& [k, v] : fx) kx.push_back(k);
        ++r.checked;
        if (ky != kx) {
            r.ok = false;
            r.witness = "fibers over " + prefix_name(d, y) + " differ: " + std::to_string(ky.size()) + " vs " + std::to_string(kx.size()) +
                        " elements";
            return r;
        }
        if (!full) continue;
        for (const auto& [word, z] : fy) {
            auto by = radius1(d, z);
            auto bx = radius1(X, fx.at(word));
            if (!by || !bx) continue;
            ++r.checked;
            if (*by != *bx) {
                r.ok = false;
                r.witness = "psi does not intertwine the element " + word + " over " + prefix_name(d, y);
                return r;
            }
        }
    }
    return r;
}

}  // namespace

CheckResult fiber_bijection_check(const LDiagram& d, int bound_m, int bound_n, int depth, std::int64_t budget, FiberModel model) {
    if (budget < 0) budget = default_budget();
    if (bound_m < 0 || bound_n < 0) throw Error(ErrorKind::InvalidArgument, "negative fiber bound");
    if (depth < 0) depth = d.horizon();
    require_horizon(d, depth, "fiber check");
    const int R = bound_m + bound_n;
    if (model != FiberModel::Configuration) {
        const std::int64_t cap = model == FiberModel::Auto ? std::min(budget, kResolutionModelCap) : budget;
        try {
            LDiagram X = canonical_resolution(layer_of(d, 0), 2 * R + 2, cap);
            CheckResult r = fibers_via_resolution(d, bound_m, bound_n, depth, budget, X);
            r.note = "resolution model";
            return r;
        } catch (const Error& e) {
            if (model == FiberModel::Resolution || e.kind() != ErrorKind::ResourceBudgetExceeded) throw;
        }
    }
    return fibers_via_configurations(d, bound_m, bound_n, depth);
}

}  // namespace sepshift

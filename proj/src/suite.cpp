// SPDX-License-Identifier: MIT
#include "sepshift/suite.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "sepshift/algebra.hpp"
#include "sepshift/dynamics.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/ldiagram.hpp"
#include "sepshift/oracle.hpp"
#include "sepshift/resolution.hpp"
#include "sepshift/symbolic.hpp"

namespace sepshift {

namespace {

// Outcome of a check body: a failure message, or the pass summary.
struct Outcome {
    bool ok = true;
    std::string witness;
};

Outcome fail(std::string w) { return {false, std::move(w)}; }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Context {
    const SuiteConfig& config;

    std::string path(const std::string& name) const { return config.data_dir + "/" + name; }
    Layer gfs(const std::string& name) const { return parse_graph(read_file(path(name))).layer; }
    Digraph digraph(const std::string& name) const { return parse_graph(read_file(path(name))).digraph; }
};

// The three canonical resolutions shared by several checks.
struct NamedDiagram {
    std::string name;
    LDiagram d;
};

std::vector<NamedDiagram> resolutions(const Context& cx, int depth) {
    std::vector<NamedDiagram> out;
    out.push_back({"gfs_4top_6bottom", canonical_resolution(cx.gfs("gfs_4top_6bottom.json"), depth, cx.config.budget)});
    out.push_back({"gfs_1top_2bottom", canonical_resolution(cx.gfs("gfs_1top_2bottom.json"), depth, cx.config.budget)});
    out.push_back({"digraph_two_loops",
                   canonical_resolution(gfs_from_digraph(cx.digraph("digraph_two_loops.json")), depth, cx.config.budget)});
    return out;
}

// Deepest even depth <= 6 whose resolutions fit the budget.
std::pair<int, std::vector<NamedDiagram>> affordable_resolutions(const Context& cx) {
    for (int depth = 6;; depth -= 2) {
        try {
            return {depth, resolutions(cx, depth)};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ResourceBudgetExceeded || depth <= 2) throw;
        }
    }
}

std::string depth_note(int depth) { return depth == 6 ? "depth 6" : "depth shrunk to " + std::to_string(depth); }

// ------------------------------------------------------------------ checks

Outcome check_gfs_matrices(const Context& cx) {
    const Layer g = cx.gfs("gfs_4top_6bottom.json");
    auto [A, I] = red_blue_matrices(g);
    const std::vector<std::string> rows = {"w1", "w2", "w3", "w4", "w5", "w6"};
    const std::vector<std::string> cols = {"v1", "v2", "v3", "v4"};
    const std::vector<std::vector<std::int64_t>> want_a = {
        {1, 1, 1, 0}, {0, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 1, 0}, {0, 0, 1, 1}};
    const std::vector<std::vector<std::int64_t>> want_i = {
        {1, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 1}};
    auto compare = [&](const IntMatrix& m, const std::vector<std::vector<std::int64_t>>& want,
                       const char* label) -> std::string {
        if (m.rows.size() != rows.size() || m.cols.size() != cols.size())
            return std::string(label) + " has shape " + std::to_string(m.rows.size()) + "x" + std::to_string(m.cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) {
                auto r = std::find(m.rows.begin(), m.rows.end(), rows[i]);
                auto c = std::find(m.cols.begin(), m.cols.end(), cols[j]);
                if (r == m.rows.end() || c == m.cols.end()) return std::string(label) + " lacks " + rows[i] + "/" + cols[j];
                auto got = m.a[r - m.rows.begin()][c - m.cols.begin()];
                if (got != want[i][j])
                    return std::string(label) + "[" + rows[i] + "][" + cols[j] + "] = " + std::to_string(got) +
                           ", expected " + std::to_string(want[i][j]);
            }
        return {};
    };
    for (auto w : {compare(A, want_a, "A"), compare(I, want_i, "I")})
        if (!w.empty()) return fail(w);
    return {true, "A and I match on 6x4"};
}

std::vector<int> edge_counts(const LDiagram& d, Color c) {
    std::vector<int> out;
    for (const auto& L : d.layers) {
        int n = 0;
        for (const auto& e : L.edges) n += e.color == c;
        out.push_back(n);
    }
    return out;
}

std::string seq(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

Outcome check_level_edge_counts(const Context& cx) {
    struct Want {
        const char* system;
        std::vector<int> levels, blue, red;
    };
    const std::vector<Want> wants = {{"full2:2", {2, 4, 8}, {4, 8}, {4, 8}}, {"full1:2", {2, 4, 8}, {4, 8}, {8, 8}}};
    std::string summary;
    for (const auto& w : wants) {
        LDiagram d = build_ldiagram(SymbolicSystem::parse(w.system), 2, cx.config.budget);
        std::vector<int> levels;
        for (int k = 0; k <= d.horizon(); ++k) levels.push_back(d.level_size(k));
        auto blue = edge_counts(d, Color::Blue);
        auto red = edge_counts(d, Color::Red);
        std::string got = std::string(w.system) + " levels " + seq(levels) + " blue " + seq(blue) + " red " + seq(red);
        if (levels != w.levels || blue != w.blue || red != w.red) return fail(got);
        summary += (summary.empty() ? "" : "; ") + got;
    }
    return {true, summary};
}

Outcome check_higher_edge(const Context& cx) {
    const Digraph E = cx.digraph("digraph_no_000.json");
    const Layer g = gfs_from_digraph(E);
    auto blue = std::count_if(g.edges.begin(), g.edges.end(), [](const Edge& e) { return e.color == Color::Blue; });
    auto red = std::count_if(g.edges.begin(), g.edges.end(), [](const Edge& e) { return e.color == Color::Red; });
    if (blue != 4 || red != 7)
        return fail("gfs has " + std::to_string(blue) + " blue and " + std::to_string(red) + " red edges");
    Isomorphism iso = check_resolution_vs_higher_edge(E, 1, cx.config.budget);
    if (!iso.found) return fail("layer 2 is not isomorphic to the higher edge gfs: " + iso.witness);

    // Layer 2 of the resolution is identified with the gfs of the edge graph,
    // whose vertices are the edges of E; the red adjacency must be the edge
    // incidence matrix r(e) = s(f).
    LDiagram X = canonical_resolution(g, 3, cx.config.budget);
    IntMatrix A2 = red_adjacency(X, 2);
    std::map<std::string, const DigraphEdge*> by_id;
    for (const auto& e : E.edges) by_id[e.id] = &e;
    auto edge_of = [&](const std::map<std::string, std::string>& m, const std::string& v) -> const DigraphEdge* {
        auto it = m.find(v);
        if (it == m.end() || it->second.size() < 2) return nullptr;
        auto e = by_id.find(it->second.substr(2));  // strip the "v^" / "v_" marker
        return e == by_id.end() ? nullptr : e->second;
    };
    if (A2.rows.size() != E.edges.size() || A2.cols.size() != E.edges.size())
        return fail("layer-2 red adjacency is " + std::to_string(A2.rows.size()) + "x" + std::to_string(A2.cols.size()));
    for (std::size_t i = 0; i < A2.rows.size(); ++i)
        for (std::size_t j = 0; j < A2.cols.size(); ++j) {
            const DigraphEdge* e = edge_of(iso.bottom, A2.rows[i]);
            const DigraphEdge* f = edge_of(iso.top, A2.cols[j]);
            if (!e || !f) return fail("no edge of E matches " + A2.rows[i] + " / " + A2.cols[j]);
            std::int64_t want = e->tgt == f->src ? 1 : 0;
            if (A2.a[i][j] != want)
                return fail("A2[" + A2.rows[i] + "][" + A2.cols[j] + "] = " + std::to_string(A2.a[i][j]) + " but " + e->id +
                            " -> " + f->id + " gives " + std::to_string(want));
        }
    return {true, "4 blue, 7 red; layer 2 matches the edge graph; A2 is the 7x7 incidence matrix"};
}

Outcome check_resolution_validity(const Context& cx) {
    auto [depth, ds] = affordable_resolutions(cx);
    for (const auto& [name, d] : ds) {
        Report r = validate_ldiagram(d);
        if (!r.ok()) return fail(name + ": " + r.violations.front().rule + " " + r.violations.front().witness);
        for (int k = 0; k < d.horizon(); k += 2) {
            Report g = validate_gfs(layer_of(d, k));
            if (!g.ok()) return fail(name + " layer " + std::to_string(k) + ": " + g.violations.front().rule);
        }
        for (int k : unrefined_layers(d))
            if (k > 0) return fail(name + " layer " + std::to_string(k) + " is not refined");
    }
    return {true, depth_note(depth) + "; 3 diagrams valid, even layers are gfs, layers past 0 refined"};
}

Outcome check_recursion(const Context& cx) {
    auto [depth, ds] = affordable_resolutions(cx);
    for (const auto& [name, d] : ds)
        for (int j = 0; j <= 1 && 2 * j + 3 <= d.horizon(); ++j) {
            RecursionCheck r = adjacency_recursion_check(d, j);
            if (!r.ok) return fail(name + " j=" + std::to_string(j) + ": " + r.witness);
        }
    return {true, depth_note(depth) + "; j=0,1 on 3 diagrams"};
}

// Exhaustive romb completion on layer pair (k, k+1); returns the number of
// completions or throws with the failing pair.
std::int64_t romb_sweep(const LDiagram& d, int k) {
    std::int64_t n = 0;
    const auto& top = d.layers[k];
    const auto& bot = d.layers[k + 1];
    auto closes = [&](const Romb& r) {
        const DEdge &e0 = d.edge(k, r.e0), &e1 = d.edge(k + 1, r.e1), &f0 = d.edge(k, r.f0), &f1 = d.edge(k + 1, r.f1);
        return e0.color == Color::Blue && e1.color == Color::Blue && f0.color == Color::Red && f1.color == Color::Red &&
               e0.rng == f0.rng && e0.src == e1.rng && f0.src == f1.rng && e1.src == f1.src;
    };
    auto bad = [&](const Romb& r) {
        return Error(ErrorKind::NoCompletion, "romb at layer " + std::to_string(k) + " does not close: " + d.edge(k, r.e0).id +
                                                  "," + d.edge(k + 1, r.e1).id);
    };
    for (int e0 = 0; e0 < static_cast<int>(top.edges.size()); ++e0) {
        if (top.edges[e0].color != Color::Blue) continue;
        for (int e1 : bot.in[top.edges[e0].src]) {
            if (bot.edges[e1].color != Color::Blue) continue;
            if (k % 2 == 0) {
                Romb r = complete_romb_from_blue(d, k, e0, e1);
                if (!closes(r)) throw bad(r);
                ++n;
            } else {
                for (int g : d.layers[k - 1].red_out[top.edges[e0].rng]) {
                    Romb r = complete_romb_odd(d, k, g, e0, e1);
                    if (!closes(r)) throw bad(r);
                    ++n;
                }
            }
        }
    }
    for (int f0 = 0; f0 < static_cast<int>(top.edges.size()); ++f0) {
        if (top.edges[f0].color != Color::Red) continue;
        for (int f1 : bot.in[top.edges[f0].src]) {
            if (bot.edges[f1].color != Color::Red) continue;
            if (k % 2 == 0 && d.block_parent(k + 1, f1) != f0) continue;
            Romb r = complete_romb_from_red(d, k, f0, f1);
            if (!closes(r)) throw bad(r);
            ++n;
        }
    }
    return n;
}

Outcome check_rombs(const Context& cx) {
    auto [depth, ds] = affordable_resolutions(cx);
    std::int64_t total = 0;
    for (const auto& [name, d] : ds)
        for (int k = 0; k + 1 < d.horizon(); ++k) {
            try {
                total += romb_sweep(d, k);
            } catch (const Error& e) {
                return fail(name + ": " + e.what());
            }
        }
    return {true, depth_note(depth) + "; " + std::to_string(total) + " rombs completed uniquely"};
}

Outcome check_shift_oracle(const Context& cx) {
    std::string summary;
    for (const char* name : {"full1:2", "full2:2"}) {
        SymbolicSystem sys = SymbolicSystem::parse(name);
        BuiltDiagram built = build_ldiagram_cells(sys, 8, cx.config.budget);
        const LDiagram& d = built.diagram;
        OracleReport o = word_shift_oracle(sys, built, 8);
        if (!o.ok) return fail(std::string(name) + " oracle: " + o.witness);
        std::int64_t branches = 0;
        for (int depth = 1; depth < 8; depth += 2)
            for (const auto& q : all_prefixes(d, depth)) {
                const int s = d.edge(0, q.edges[0]).src;
                int red = 0, all = 0;
                for (const auto& e : d.layers[0].edges)
                    if (e.src == s) ++all, red += e.color == Color::Red;
                auto pre = preimages(d, q);
                if (static_cast<int>(pre.size()) != red || red != all - 1)
                    return fail(std::string(name) + " " + prefix_name(d, q) + " has " + std::to_string(pre.size()) +
                                " branches, " + std::to_string(red) + " red edges at s(e0)");
                branches += static_cast<std::int64_t>(pre.size());
            }
        std::int64_t round_trips = 0;
        if (!sys.one_sided()) {
            for (int depth = 4; depth <= 8; depth += 2)
                for (const auto& p : all_prefixes(d, depth)) {
                    BluePrefix back = inverse_shift_prefix(d, shift_prefix(d, p));
                    if (back != truncate(p, depth - 2))
                        return fail(std::string(name) + " inverse of the shift at " + prefix_name(d, p) + " gives " +
                                    prefix_name(d, back));
                    BluePrefix q = truncate(p, depth - 1);
                    BluePrefix fwd = shift_prefix(d, inverse_shift_prefix(d, q));
                    if (fwd != truncate(q, depth - 3))
                        return fail(std::string(name) + " shift of the inverse at " + prefix_name(d, q) + " gives " +
                                    prefix_name(d, fwd));
                    round_trips += 2;
                }
        }
        summary += (summary.empty() ? "" : "; ") + std::string(name) + " " + std::to_string(o.checked) + " words, " +
                   std::to_string(branches) + " branches" +
                   (round_trips ? ", " + std::to_string(round_trips) + " round trips" : std::string());
    }
    return {true, summary};
}

Outcome check_telescoping(const Context& cx) {
    std::mt19937_64 rng(cx.config.seed);
    SymbolicSystem sys = SymbolicSystem::parse("full1:2");
    LDiagram d12 = build_ldiagram(sys, 12, cx.config.budget);
    for (int trial = 0; trial < 2; ++trial) {
        ContractionSequence m = ContractionSequence::random(rng, d12.horizon());
        LDiagram t1 = telescope(d12, m);
        ContractionSequence m2 = ContractionSequence::random(rng, t1.horizon());
        LDiagram lhs = telescope(t1, m2);
        LDiagram rhs = telescope(d12, compose(m, m2));
        std::string why;
        if (!equal_up_to_edge_names(lhs, rhs, &why))
            return fail("composition law fails for m=" + seq(m.m) + " m'=" + seq(m2.m) + ": " + why);
    }
    auto [depth, ds] = affordable_resolutions(cx);
    ds.push_back({"full1:2", d12});
    for (const auto& [name, d] : ds) {
        ContractionSequence m;
        for (int i = 2; i <= d.horizon(); ++i) m.m.push_back(i);
        LDiagram t = telescope(d, m);
        if (!is_refined(t)) return fail(name + " telescoped by " + seq(m.m) + " is not refined");
    }
    BuiltDiagram built = build_ldiagram_cells(sys, 9, cx.config.budget);
    std::vector<Partition> sub = {built.cells[0], built.cells[3], built.cells[6], built.cells[9]};
    LDiagram direct = build_from_partitions(sys, sub).diagram;
    LDiagram tele = telescope(built.diagram, ContractionSequence{{0, 3, 6, 9}});
    std::string why;
    if (!equal_up_to_edge_names(direct, tele, &why))
        return fail("subsampled partitions (0,3,6,9) differ from the telescoped diagram: " + why);
    return {true, "composition law on 2 random pairs; telescoping by (2,3,...) refined on 4 diagrams; (0,3,6,9) matches"};
}

// Random nonzero reduced word of the given length over layer m: letters
// alternate between edges and ghosts as the relations allow.
std::vector<int> random_word(const LDiagram& d, int m, int length, std::mt19937_64& rng) {
    const auto& E = d.layers[m].edges;
    const int n = static_cast<int>(E.size());
    std::vector<int> w;
    int x = static_cast<int>(rng() % n);
    w.push_back(rng() % 2 ? x + 1 : -(x + 1));
    while (static_cast<int>(w.size()) < length) {
        std::vector<int> next;
        const int last = w.back();
        for (int e = 0; e < n; ++e) {
            if (last > 0 && E[e].src == E[last - 1].src) next.push_back(-(e + 1));
            if (last < 0 && E[e].rng == E[-last - 1].rng) next.push_back(e + 1);
        }
        w.push_back(next[rng() % next.size()]);
    }
    return w;
}

Outcome check_tameness(const Context& cx) {
    std::mt19937_64 rng(cx.config.seed);
    LDiagram F = canonical_resolution(cx.gfs("gfs_1top_2bottom.json"), 6, cx.config.budget);
    for (int i = 0; i < 200; ++i) {
        const int m = static_cast<int>(rng() % 2);
        const int k = 1 + static_cast<int>(rng() % 4);
        auto w = random_word(F, m, k, rng);
        if (!tameness_check(F, m, w)) return fail("word " + word_element(F, m, w).to_string() + " is not tame");
    }
    auto gens = corner_generators(F, 0);
    for (int i = 0; i < 200; ++i) {
        const auto& a = gens[rng() % gens.size()];
        const auto& b = gens[rng() % gens.size()];
        if (!equal_in_limit(phi_step(multiply(a, b)), multiply(phi_step(a), phi_step(b))))
            return fail("phi_step is not multiplicative on " + a.to_string() + " and " + b.to_string());
        if (!(phi_step(star(a)) == star(phi_step(a)))) return fail("phi_step does not commute with * on " + a.to_string());
    }
    return {true, "200 tame words; 200 generator pairs respected by the connecting map"};
}

Outcome check_steinberg(const Context& cx) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 10, cx.config.budget);
    auto T = single_factor_terms(d, 0);
    const int n = static_cast<int>(T.size());
    std::vector<SteinbergElement> S;
    std::vector<AlgElement> X;
    for (const auto& t : T) S.push_back(to_steinberg(d, t)), X.push_back(t.element(d));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || T[i].degree(d) != T[j].degree(d)) continue;
            if (!supports_disjoint(S[i], S[j]))
                return fail("supports of " + T[i].name(d) + " and " + T[j].name(d) + " overlap");
        }
    std::int64_t products = 0, nonzero = 0;
    std::function<Outcome(const AlgElement&, const SteinbergElement&, std::string, int)> walk =
        [&](const AlgElement& x, const SteinbergElement& s, std::string name, int left) -> Outcome {
        ++products;
        SteinbergElement lhs = to_steinberg(d, canonicalize(x));
        if (!lhs.is_zero()) ++nonzero;
        if (!equals(lhs, s)) return fail("product " + name + ": canonical image " + lhs.to_string() + " vs convolution " + s.to_string());
        if (left == 0) return {};
        for (int k = 0; k < n; ++k) {
            Outcome o = walk(multiply(x, X[k]), convolve(s, S[k]), name + "*" + T[k].name(d), left - 1);
            if (!o.ok) return o;
        }
        return {};
    };
    for (int i = 0; i < n; ++i) {
        Outcome o = walk(X[i], S[i], T[i].name(d), 2);
        if (!o.ok) return o;
    }
    return {true, std::to_string(n) + " terms; " + std::to_string(products) + " products (" + std::to_string(nonzero) +
                      " nonzero) agree; same-degree supports disjoint"};
}

Outcome check_colimit(const Context& cx) {
    LDiagram F = canonical_resolution(cx.gfs("gfs_1top_2bottom.json"), 6, cx.config.budget);
    LDiagram L = canonical_resolution(gfs_from_digraph(cx.digraph("digraph_two_loops.json")), 8, cx.config.budget);
    CommutativityResult a = commutativity_check(F, 0, 6);
    if (!a.ok) return fail("gfs_1top_2bottom: " + a.witness);
    CommutativityResult b = commutativity_check(L, 0, 8);
    if (!b.ok) return fail("digraph_two_loops: " + b.witness);
    return {true, "square commutes on " + std::to_string(a.generators) + " and " + std::to_string(b.generators) + " generators"};
}

Outcome check_inverse_limit(const Context& cx) {
    std::vector<NamedDiagram> ds;
    ds.push_back({"full1:2", build_ldiagram(SymbolicSystem::parse("full1:2"), 10, cx.config.budget)});
    ds.push_back({"gfs_4top_6bottom", canonical_resolution(cx.gfs("gfs_4top_6bottom.json"), 10, cx.config.budget)});
    std::string summary;
    for (const auto& [name, d] : ds) {
        CheckResult il = inverse_limit_check(d, 4, cx.config.budget);
        if (!il.ok) return fail(name + " inverse limit: " + il.witness);
        CheckResult fb = fiber_bijection_check(d, 2, 2, -1, cx.config.budget);
        if (!fb.ok) return fail(name + " fibers: " + fb.witness);
        summary += (summary.empty() ? "" : "; ") + name + " " + std::to_string(il.checked) + " prefixes, " +
                   std::to_string(fb.checked) + " fiber checks (" + fb.note + ")";
    }
    return {true, summary};
}

Outcome check_configuration_shift(const Context& cx) {
    Layer g = cx.gfs("gfs_1top_2bottom.json");
    LDiagram X = canonical_resolution(g, 6, cx.config.budget);
    const std::map<std::string, std::string> letters = {{"beta0", "a"}, {"beta1", "b"}, {"beta2", "c"}};
    const std::vector<std::string> before = {"1", "b", "a^-1", "b^-1"};
    const std::vector<std::string> after = {"1", "a", "a^-1", "b^-1"};
    auto same = [](std::vector<std::string> x, std::vector<std::string> y) {
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        return x == y;
    };
    for (const auto& p : all_prefixes(X, 4)) {
        if (!same(config_ball(X, p, 1, 0, letters).names(), before)) continue;
        ConfigBall moved = tau(config_ball(X, p, 2, 0, letters));
        if (!same(moved.names(), after)) continue;
        ConfigBall direct = config_ball(X, shift_prefix(X, p), 1, 0, letters);
        if (moved.names() != direct.names())
            return fail("tau at " + prefix_name(X, p) + " differs from the ball at the shifted point");
        return {true, "at " + prefix_name(X, p) + " {b, a^-1, b^-1} moves to {a, a^-1, b^-1}"};
    }
    return fail("no depth-4 prefix shows {b, a^-1, b^-1} moving to {a, a^-1, b^-1}");
}

struct CheckEntry {
    const char* name;
    Outcome (*body)(const Context&);
};

const std::vector<CheckEntry>& entries() {
    static const std::vector<CheckEntry> e = {
        {"gfs-matrices", check_gfs_matrices},
        {"level-edge-counts", check_level_edge_counts},
        {"higher-edge", check_higher_edge},
        {"resolution-validity", check_resolution_validity},
        {"adjacency-recursion", check_recursion},
        {"romb-completion", check_rombs},
        {"shift-oracle", check_shift_oracle},
        {"telescoping", check_telescoping},
        {"tameness-homomorphism", check_tameness},
        {"steinberg-soundness", check_steinberg},
        {"colimit-square", check_colimit},
        {"inverse-limit-fibers", check_inverse_limit},
        {"configuration-shift", check_configuration_shift},
    };
    return e;
}

}  // namespace

json CheckReport::to_json() const {
    return json{{"check", check}, {"status", status}, {"witness", witness}, {"runtime_ms", runtime_ms}};
}

bool SuiteReport::ok() const {
    return std::none_of(checks.begin(), checks.end(), [](const CheckReport& c) { return c.status == "fail"; });
}

json SuiteReport::to_json() const {
    json arr = json::array();
    for (const auto& c : checks) arr.push_back(c.to_json());
    return json{{"seed", seed}, {"budget", budget}, {"ok", ok()}, {"checks", arr}};
}

std::string SuiteReport::to_text() const {
    std::string out;
    for (const auto& c : checks)
        out += "[" + c.status + "] " + std::to_string(c.number) + " " + c.check + (c.witness.empty() ? "" : ": " + c.witness) + "\n";
    return out;
}

const std::vector<std::string>& suite_check_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : entries()) n.push_back(e.name);
        return n;
    }();
    return names;
}

CheckReport run_check(int number, const SuiteConfig& config) {
    const auto& all = entries();
    if (number < 1 || number > static_cast<int>(all.size()))
        throw Error(ErrorKind::InvalidArgument, "no check numbered " + std::to_string(number));
    CheckReport r;
    r.number = number;
    r.check = all[number - 1].name;
    if (config.budget == 0) {
        r.status = "skipped: budget";
        return r;
    }
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = all[number - 1].body(Context{config});
    } catch (const Error& e) {
        o = fail(e.what());
    } catch (const std::exception& e) {
        o = fail(e.what());
    }
    r.status = o.ok ? "pass" : "fail";
    r.witness = o.witness;
    if (config.timing)
        r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

SuiteReport run_suite(const SuiteConfig& config) {
    SuiteReport rep;
    rep.seed = config.seed;
    rep.budget = config.budget;
    const int n = static_cast<int>(entries().size());
    for (int i = 1; i <= n; ++i) {
        if (!config.only.empty() && std::find(config.only.begin(), config.only.end(), i) == config.only.end()) continue;
        rep.checks.push_back(run_check(i, config));
    }
    return rep;
}

}  // namespace sepshift

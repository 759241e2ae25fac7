// SPDX-License-Identifier: MIT
// Cylinder calculus for the built-in systems and the partition-sequence diagram.
#include "sepshift/symbolic.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace sepshift {

namespace {

void sort_unique(std::vector<Word>& ws) {
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
}

bool whole_window(const Clopen& c) { return c.hi < c.lo; }

}  // namespace

SymbolicSystem SymbolicSystem::full_one_sided(int alphabet) {
    if (alphabet < 1) throw Error(ErrorKind::InvalidArgument, "alphabet size must be positive");
    SymbolicSystem s;
    s.kind_ = Kind::FullOneSided;
    s.alphabet_ = alphabet;
    for (int a = 0; a < alphabet; ++a) s.symbols_.push_back(std::to_string(a));
    return s;
}

SymbolicSystem SymbolicSystem::full_two_sided(int alphabet) {
    SymbolicSystem s = full_one_sided(alphabet);
    s.kind_ = Kind::FullTwoSided;
    return s;
}

SymbolicSystem SymbolicSystem::edge_shift(const Digraph& g) {
    require_no_sinks_or_sources(g);
    SymbolicSystem s;
    s.kind_ = Kind::EdgeShift;
    auto edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const DigraphEdge& a, const DigraphEdge& b) { return a.id < b.id; });
    std::map<std::string, int> vi;
    for (const auto& v : g.vertices) vi.emplace(v, static_cast<int>(vi.size()));
    for (const auto& e : edges) {
        s.symbols_.push_back(e.id);
        s.sym_src_.push_back(vi.at(e.src));
        s.sym_tgt_.push_back(vi.at(e.tgt));
    }
    s.alphabet_ = static_cast<int>(edges.size());
    return s;
}

SymbolicSystem SymbolicSystem::parse(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "system spec must look like full1:K, full2:K or loop:K");
    std::string kind = spec.substr(0, colon);
    int k = 0;
    try {
        k = std::stoi(spec.substr(colon + 1));
    } catch (...) {
        throw Error(ErrorKind::InvalidArgument, "bad alphabet size in '" + spec + "'");
    }
    if (kind == "full1") return full_one_sided(k);
    if (kind == "full2") return full_two_sided(k);
    if (kind == "loop") {
        Digraph g;
        g.vertices = {"v"};
        for (int i = 0; i < k; ++i) g.edges.push_back({"l" + std::to_string(i), "v", "v"});
        return edge_shift(g);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown system kind '" + kind + "'");
}

std::string SymbolicSystem::describe() const {
    switch (kind_) {
        case Kind::FullOneSided: return "full one-sided shift on " + std::to_string(alphabet_) + " symbols";
        case Kind::FullTwoSided: return "full two-sided shift on " + std::to_string(alphabet_) + " symbols";
        case Kind::EdgeShift: return "one-sided edge shift on " + std::to_string(alphabet_) + " edges";
    }
    return "";
}

std::string SymbolicSystem::symbol_name(int a) const { return symbols_.at(a); }

bool SymbolicSystem::follows(int a, int b) const {
    if (kind_ != Kind::EdgeShift) return true;
    return sym_tgt_[a] == sym_src_[b];
}

std::vector<Word> SymbolicSystem::all_words(int lo, int hi) const {
    std::vector<Word> out{{}};
    for (int pos = lo; pos <= hi; ++pos) {
        std::vector<Word> next;
        for (const auto& w : out)
            for (int b = 0; b < alphabet_; ++b)
                if (w.empty() || follows(w.back(), b)) {
                    Word x = w;
                    x.push_back(b);
                    next.push_back(std::move(x));
                }
        out = std::move(next);
    }
    return out;
}

Clopen SymbolicSystem::whole() const { return Clopen{0, -1, {Word{}}}; }

Clopen SymbolicSystem::cylinder(int lo, const Word& w) const {
    for (std::size_t i = 1; i < w.size(); ++i)
        if (!follows(w[i - 1], w[i])) return empty();
    return Clopen{lo, lo + static_cast<int>(w.size()) - 1, {w}};
}

Clopen SymbolicSystem::refine(const Clopen& c, int lo, int hi) const {
    if (c.words.empty()) return Clopen{lo, hi, {}};
    if (whole_window(c)) return Clopen{lo, hi, all_words(lo, hi)};
    if (lo > c.lo || hi < c.hi) throw Error(ErrorKind::InvalidArgument, "refine needs a larger window");
    std::vector<Word> ws = c.words;
    for (int pos = c.hi + 1; pos <= hi; ++pos) {
        std::vector<Word> next;
        for (const auto& w : ws)
            for (int b = 0; b < alphabet_; ++b)
                if (follows(w.back(), b)) {
                    Word x = w;
                    x.push_back(b);
                    next.push_back(std::move(x));
                }
        ws = std::move(next);
    }
    for (int pos = c.lo - 1; pos >= lo; --pos) {
        std::vector<Word> next;
        for (const auto& w : ws)
            for (int a = 0; a < alphabet_; ++a)
                if (follows(a, w.front())) {
                    Word x;
                    x.reserve(w.size() + 1);
                    x.push_back(a);
                    x.insert(x.end(), w.begin(), w.end());
                    next.push_back(std::move(x));
                }
        ws = std::move(next);
    }
    sort_unique(ws);
    return Clopen{lo, hi, ws};
}

Clopen SymbolicSystem::canonical(const Clopen& in) const {
    if (in.words.empty()) return empty();
    if (whole_window(in)) return whole();
    Clopen c = in;
    sort_unique(c.words);
    bool changed = true;
    while (changed && !whole_window(c)) {
        changed = false;
        // Drop the rightmost position if the set does not depend on it.
        {
            std::vector<Word> shorter;
            for (const auto& w : c.words) shorter.emplace_back(w.begin(), w.end() - 1);
            sort_unique(shorter);
            Clopen cand{c.lo, c.hi - 1, shorter};
            if (cand.hi < cand.lo) cand = whole();
            if (refine(cand, c.lo, c.hi).words.size() == c.words.size()) {
                c = cand;
                changed = true;
                continue;
            }
        }
        {
            std::vector<Word> shorter;
            for (const auto& w : c.words) shorter.emplace_back(w.begin() + 1, w.end());
            sort_unique(shorter);
            Clopen cand{c.lo + 1, c.hi, shorter};
            if (cand.hi < cand.lo) cand = whole();
            if (refine(cand, c.lo, c.hi).words.size() == c.words.size()) {
                c = cand;
                changed = true;
            }
        }
    }
    if (whole_window(c)) return whole();
    return c;
}

namespace {

std::pair<int, int> common_window(const Clopen& a, const Clopen& b) {
    if (whole_window(a)) return {b.lo, b.hi};
    if (whole_window(b)) return {a.lo, a.hi};
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace

Clopen SymbolicSystem::intersect(const Clopen& a, const Clopen& b) const {
    auto [lo, hi] = common_window(a, b);
    Clopen x = refine(a, lo, hi), y = refine(b, lo, hi);
    Clopen out{lo, hi, {}};
    std::set_intersection(x.words.begin(), x.words.end(), y.words.begin(), y.words.end(), std::back_inserter(out.words));
    return out;
}

Clopen SymbolicSystem::unite(const Clopen& a, const Clopen& b) const {
    auto [lo, hi] = common_window(a, b);
    Clopen x = refine(a, lo, hi), y = refine(b, lo, hi);
    Clopen out{lo, hi, {}};
    std::set_union(x.words.begin(), x.words.end(), y.words.begin(), y.words.end(), std::back_inserter(out.words));
    return out;
}

Clopen SymbolicSystem::subtract(const Clopen& a, const Clopen& b) const {
    auto [lo, hi] = common_window(a, b);
    Clopen x = refine(a, lo, hi), y = refine(b, lo, hi);
    Clopen out{lo, hi, {}};
    std::set_difference(x.words.begin(), x.words.end(), y.words.begin(), y.words.end(), std::back_inserter(out.words));
    return out;
}

bool SymbolicSystem::subset(const Clopen& a, const Clopen& b) const {
    auto [lo, hi] = common_window(a, b);
    Clopen x = refine(a, lo, hi), y = refine(b, lo, hi);
    return std::includes(y.words.begin(), y.words.end(), x.words.begin(), x.words.end());
}

bool SymbolicSystem::equal(const Clopen& a, const Clopen& b) const {
    auto [lo, hi] = common_window(a, b);
    return refine(a, lo, hi).words == refine(b, lo, hi).words;
}

Clopen SymbolicSystem::image(const Clopen& c) const {
    if (c.words.empty()) return empty();
    if (whole_window(c)) return whole();
    if (kind_ == Kind::FullTwoSided) return Clopen{c.lo - 1, c.hi - 1, c.words};
    if (c.lo >= 1) return Clopen{c.lo - 1, c.hi - 1, c.words};
    Clopen r = refine(c, 0, std::max(c.hi, 1));
    Clopen out{0, r.hi - 1, {}};
    for (const auto& w : r.words) out.words.emplace_back(w.begin() + 1, w.end());
    sort_unique(out.words);
    return out;
}

Clopen SymbolicSystem::preimage(const Clopen& c) const {
    if (c.words.empty()) return empty();
    if (whole_window(c)) return whole();
    return Clopen{c.lo + 1, c.hi + 1, c.words};
}

bool SymbolicSystem::injective_on(const Clopen& c) const {
    if (kind_ == Kind::FullTwoSided || c.words.empty()) return true;
    int hi = whole_window(c) ? 0 : std::max(c.hi, 0);
    int lo = whole_window(c) ? 0 : std::min(c.lo, 0);
    Clopen r = refine(c, lo, hi);
    std::set<Word> tails;
    for (const auto& w : r.words)
        if (!tails.insert(Word(w.begin() + 1, w.end())).second) return false;
    return true;
}

std::string SymbolicSystem::name(const Clopen& in) const {
    Clopen c = canonical(in);
    if (c.words.empty()) return "empty";
    if (whole_window(c)) return "X";
    bool dotted = kind_ == Kind::EdgeShift || alphabet_ > 10;
    std::string out = "[";
    if (kind_ == Kind::FullTwoSided || c.lo != 0) out += std::to_string(c.lo) + ":";
    for (std::size_t i = 0; i < c.words.size(); ++i) {
        if (i) out += "|";
        for (std::size_t j = 0; j < c.words[i].size(); ++j) {
            if (dotted && j) out += ".";
            out += symbols_[c.words[i][j]];
        }
    }
    return out + "]";
}

std::vector<Clopen> SymbolicSystem::natural_partition(int n) const {
    int lo = 0, hi = n;
    if (kind_ == Kind::FullTwoSided) {
        int j = n / 2;
        lo = n % 2 == 0 ? -j : -j - 1;
        hi = j;
    }
    std::vector<Clopen> out;
    for (const auto& w : all_words(lo, hi)) out.push_back(Clopen{lo, hi, {w}});
    return out;
}

namespace {

// Sorts cells by name after canonicalization.
Partition finish_cells(const SymbolicSystem& sys, std::vector<Clopen> cells) {
    std::vector<std::pair<std::string, Clopen>> named;
    for (auto& c : cells) {
        Clopen k = sys.canonical(c);
        named.emplace_back(sys.name(k), std::move(k));
    }
    std::sort(named.begin(), named.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    Partition out;
    for (auto& [n, c] : named) out.push_back(std::move(c));
    return out;
}

std::pair<int, int> window_of(const std::vector<const Clopen*>& cs) {
    int lo = 0, hi = -1;
    bool any = false;
    for (const Clopen* c : cs) {
        if (c->hi < c->lo) continue;
        if (!any) {
            lo = c->lo;
            hi = c->hi;
            any = true;
        } else {
            lo = std::min(lo, c->lo);
            hi = std::max(hi, c->hi);
        }
    }
    return {lo, hi};
}

// For every word of the window, the index of the cell of P containing it.
std::map<Word, int> label_words(const SymbolicSystem& sys, const Partition& P, int lo, int hi) {
    std::map<Word, int> label;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (const auto& w : sys.refine(P[i], lo, hi).words)
            if (!label.emplace(w, static_cast<int>(i)).second)
                throw Error(ErrorKind::InvalidArgument, "cells overlap: not a partition");
    return label;
}

}  // namespace

Partition wedge(const SymbolicSystem& sys, const std::vector<Partition>& parts) {
    std::vector<const Clopen*> all;
    for (const auto& p : parts)
        for (const auto& c : p) all.push_back(&c);
    auto [lo, hi] = window_of(all);
    auto words = sys.all_words(lo, hi);
    std::vector<std::map<Word, int>> labels;
    for (const auto& p : parts) labels.push_back(label_words(sys, p, lo, hi));
    std::map<std::vector<int>, std::vector<Word>> groups;
    for (const auto& w : words) {
        std::vector<int> key;
        for (const auto& lab : labels) {
            auto it = lab.find(w);
            if (it == lab.end()) throw Error(ErrorKind::InvalidArgument, "cells do not cover the space: not a partition");
            key.push_back(it->second);
        }
        groups[key].push_back(w);
    }
    std::vector<Clopen> cells;
    for (auto& [k, ws] : groups) cells.push_back(Clopen{lo, hi, ws});
    return finish_cells(sys, std::move(cells));
}

Partition sigma_partition(const SymbolicSystem& sys, const Partition& P) {
    std::vector<Clopen> images;
    for (const auto& Z : P) {
        if (!sys.injective_on(Z)) throw Error(ErrorKind::NonInjectiveCell, "sigma is not injective on " + sys.name(Z));
        images.push_back(sys.image(Z));
    }
    std::vector<const Clopen*> ptrs;
    for (const auto& c : images) ptrs.push_back(&c);
    auto [lo, hi] = window_of(ptrs);
    std::map<Word, std::vector<int>> sig;
    for (const auto& w : sys.all_words(lo, hi)) sig[w];
    for (std::size_t i = 0; i < images.size(); ++i)
        for (const auto& w : sys.refine(images[i], lo, hi).words) sig[w].push_back(static_cast<int>(i));
    std::map<std::vector<int>, std::vector<Word>> groups;
    for (auto& [w, s] : sig) groups[s].push_back(w);
    std::vector<Clopen> cells;
    for (auto& [s, ws] : groups) cells.push_back(Clopen{lo, hi, ws});
    return finish_cells(sys, std::move(cells));
}

Partition preimage_partition(const SymbolicSystem& sys, const Partition& P) {
    std::vector<Clopen> cells;
    for (const auto& Z : P) {
        Clopen c = sys.preimage(Z);
        if (!SymbolicSystem::is_empty(c)) cells.push_back(c);
    }
    return finish_cells(sys, std::move(cells));
}

std::pair<Partition, Partition> refine_partition(const SymbolicSystem& sys, const Partition& P) {
    return {wedge(sys, {P, sigma_partition(sys, P)}), wedge(sys, {P, preimage_partition(sys, P)})};
}

PreimageCounts preimage_counts(const SymbolicSystem& sys, const Partition& P) {
    std::vector<Clopen> images;
    for (const auto& Z : P) {
        if (!sys.injective_on(Z)) throw Error(ErrorKind::NonInjectiveCell, "sigma is not injective on " + sys.name(Z));
        images.push_back(sys.image(Z));
    }
    std::vector<const Clopen*> ptrs;
    for (const auto& c : images) ptrs.push_back(&c);
    auto [lo, hi] = window_of(ptrs);
    std::map<Word, int> count;
    for (const auto& w : sys.all_words(lo, hi)) count[w] = 0;
    for (const auto& im : images)
        for (const auto& w : sys.refine(im, lo, hi).words) ++count[w];
    PreimageCounts pc;
    for (const auto& [w, n] : count) pc.n_sigma = std::max(pc.n_sigma, n);
    for (int i = 1; i <= pc.n_sigma; ++i) {
        Clopen ge{lo, hi, {}}, eq{lo, hi, {}};
        for (const auto& [w, n] : count) {
            if (n >= i) ge.words.push_back(w);
            if (n == i) eq.words.push_back(w);
        }
        pc.at_least.push_back(sys.canonical(ge));
        pc.exactly.push_back(sys.canonical(eq));
    }
    return pc;
}

std::vector<Partition> refined_sequence(const SymbolicSystem& sys, int depth, std::int64_t budget) {
    if (budget < 0) budget = default_budget();
    std::vector<Partition> out;
    out.push_back(wedge(sys, {sys.natural_partition(0)}));
    for (int n = 1; n <= depth; ++n) {
        const Partition& prev = out.back();
        Partition extra = n % 2 == 1 ? sigma_partition(sys, prev) : preimage_partition(sys, prev);
        out.push_back(wedge(sys, {sys.natural_partition(n), prev, extra}));
        if (static_cast<std::int64_t>(out.back().size()) > budget)
            throw Error(ErrorKind::ResourceBudgetExceeded, "partition at level " + std::to_string(n) + " has " + std::to_string(out.back().size()) + " cells");
    }
    return out;
}

BuiltDiagram build_from_partitions(const SymbolicSystem& sys, const std::vector<Partition>& parts) {
    BuiltDiagram out;
    for (const auto& P : parts) out.cells.push_back(finish_cells(sys, P));
    LDiagram& d = out.diagram;
    for (const auto& P : out.cells) {
        std::vector<std::string> names;
        for (const auto& c : P) names.push_back(sys.name(c));
        d.levels.push_back(names);
    }
    const int N = static_cast<int>(parts.size()) - 1;
    d.layers.resize(std::max(N, 0));
    std::vector<std::vector<int>> blue_parent(parts.size());
    for (int n = 0; n < N; ++n) {
        const Partition& top = out.cells[n];
        const Partition& bot = out.cells[n + 1];
        DLayer& L = d.layers[n];
        L.sep.assign(top.size(), {});
        for (auto& s : L.sep) {
            s.push_back(Block{Color::Blue, -1, {}});
            if (n % 2 == 0) s.push_back(Block{Color::Red, -1, {}});
        }
        auto add_edge = [&](int src, int rng, Color c) {
            std::string id = std::string(c == Color::Blue ? "e(" : "f(") + d.levels[n + 1][src] + "," + d.levels[n][rng] + ")";
            L.edges.push_back({id, src, rng, c, -1});
            return static_cast<int>(L.edges.size()) - 1;
        };
        // Blue edges: inclusions.
        {
            std::vector<const Clopen*> all;
            for (const auto& c : top) all.push_back(&c);
            for (const auto& c : bot) all.push_back(&c);
            auto [lo, hi] = window_of(all);
            auto label = label_words(sys, top, lo, hi);
            blue_parent[n + 1].assign(bot.size(), -1);
            for (std::size_t z = 0; z < bot.size(); ++z) {
                auto ws = sys.refine(bot[z], lo, hi).words;
                int t = label.at(ws.front());
                bool inside = std::all_of(ws.begin(), ws.end(), [&](const Word& w) { return label.at(w) == t; });
                if (!inside) continue;
                blue_parent[n + 1][z] = t;
                L.sep[t][0].edges.push_back(add_edge(static_cast<int>(z), t, Color::Blue));
            }
        }
        // Red edges.
        std::vector<Clopen> images;
        const Partition& imaged = n % 2 == 0 ? top : bot;
        for (const auto& c : imaged) images.push_back(sys.image(c));
        std::vector<const Clopen*> all;
        for (const auto& c : top) all.push_back(&c);
        for (const auto& c : bot) all.push_back(&c);
        for (const auto& c : images) all.push_back(&c);
        auto [lo, hi] = window_of(all);
        if (n % 2 == 0) {
            auto label = label_words(sys, bot, lo, hi);
            std::vector<std::size_t> size(bot.size(), 0);
            for (const auto& [w, z] : label) ++size[z];
            for (std::size_t t = 0; t < top.size(); ++t) {
                std::vector<std::size_t> hit(bot.size(), 0);
                for (const auto& w : sys.refine(images[t], lo, hi).words) ++hit[label.at(w)];
                for (std::size_t z = 0; z < bot.size(); ++z)
                    if (hit[z] == size[z]) L.sep[t][1].edges.push_back(add_edge(static_cast<int>(z), static_cast<int>(t), Color::Red));
            }
        } else {
            auto label = label_words(sys, top, lo, hi);
            for (std::size_t z = 0; z < bot.size(); ++z) {
                auto ws = sys.refine(images[z], lo, hi).words;
                if (ws.empty()) continue;
                int t = label.at(ws.front());
                bool inside = std::all_of(ws.begin(), ws.end(), [&](const Word& w) { return label.at(w) == t; });
                if (inside) add_edge(static_cast<int>(z), t, Color::Red);
            }
        }
    }
    // Odd separations: R(f) = {g red into Z' : s(g) inside r(f)}, decided
    // through the blue ancestors two levels up.
    for (int n = 1; n < N; n += 2) {
        DLayer& L = d.layers[n];
        const DLayer& P = d.layers[n - 1];
        for (int f = 0; f < static_cast<int>(P.edges.size()); ++f) {
            if (P.edges[f].color != Color::Red) continue;
            Block B{Color::Red, f, {}};
            int v = P.edges[f].src;
            for (int g = 0; g < static_cast<int>(L.edges.size()); ++g) {
                const DEdge& ge = L.edges[g];
                if (ge.color != Color::Red || ge.rng != v) continue;
                int up1 = blue_parent[n + 1][ge.src];
                int up2 = up1 >= 0 ? blue_parent[n][up1] : -1;
                if (up2 == P.edges[f].rng) B.edges.push_back(g);
            }
            L.sep[v].push_back(std::move(B));
        }
    }
    d.finalize();
    return out;
}

BuiltDiagram build_ldiagram_cells(const SymbolicSystem& sys, int depth, std::int64_t budget) {
    return build_from_partitions(sys, refined_sequence(sys, depth, budget));
}

LDiagram build_ldiagram(const SymbolicSystem& sys, int depth, std::int64_t budget) {
    return build_ldiagram_cells(sys, depth, budget).diagram;
}

}  // namespace sepshift

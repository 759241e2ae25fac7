// SPDX-License-Identifier: MIT
#include "sepshift/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

#include "sepshift/resolution.hpp"

namespace sepshift {

namespace {

int letter_edge(int x) { return (x > 0 ? x : -x) - 1; }

// (side, vertex) at the left and right end of a word.
std::pair<int, int> left_end(const LDiagram& d, int m, const AlgWord& w) {
    if (w.is_vertex()) return {w.side, w.vertex};
    const int x = w.letters.front();
    const DEdge& e = d.edge(m, letter_edge(x));
    return x > 0 ? std::pair{0, e.rng} : std::pair{1, e.src};
}

std::pair<int, int> right_end(const LDiagram& d, int m, const AlgWord& w) {
    if (w.is_vertex()) return {w.side, w.vertex};
    const int x = w.letters.back();
    const DEdge& e = d.edge(m, letter_edge(x));
    return x > 0 ? std::pair{1, e.src} : std::pair{0, e.rng};
}

void add_term(std::map<AlgWord, Scalar>& terms, const AlgWord& w, const Scalar& c) {
    if (c == 0) return;
    auto [it, inserted] = terms.emplace(w, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms.erase(it);
    }
}

void require_layer(const LDiagram& d, int layer, const std::string& what) {
    if (layer < 0 || layer >= d.horizon())
        throw Error(ErrorKind::HorizonExceeded, what + " needs layer " + std::to_string(layer) + " but the horizon is " +
                                                    std::to_string(d.horizon()));
}

const Block& block_of_color(const LDiagram& d, int level, int v, Color c) {
    for (const auto& b : d.blocks(level, v))
        if (b.color == c) return b;
    throw Error(ErrorKind::InvalidArgument, "vertex " + d.levels[level][v] + " has no " + color_name(c) + " block");
}

std::string edge_name(const LDiagram& d, int m, int e) { return d.edge(m, e).id; }

}  // namespace

// ------------------------------------------------------------------ elements

AlgElement zero_element(const LDiagram& d, int layer) {
    require_layer(d, layer, "an algebra element");
    return AlgElement{&d, layer, {}};
}

AlgElement vertex_element(const LDiagram& d, int layer, int v, int side) {
    AlgElement a = zero_element(d, layer);
    if (v < 0 || v >= d.level_size(layer + side)) throw Error(ErrorKind::UnknownReference, "vertex index out of range");
    a.terms[AlgWord{v, side, {}}] = 1;
    return a;
}

AlgElement edge_element(const LDiagram& d, int layer, int e) { return word_element(d, layer, {e + 1}); }
AlgElement ghost_element(const LDiagram& d, int layer, int e) { return word_element(d, layer, {-(e + 1)}); }

AlgElement tau_element(const LDiagram& d, int layer, int e, int f) {
    if (d.edge(layer, e).src != d.edge(layer, f).src)
        throw Error(ErrorKind::InvalidArgument, "tau(" + edge_name(d, layer, e) + "," + edge_name(d, layer, f) +
                                                    ") needs edges with a common source");
    return word_element(d, layer, {e + 1, -(f + 1)});
}

AlgElement word_element(const LDiagram& d, int layer, const std::vector<int>& letters) {
    AlgElement a = zero_element(d, layer);
    if (letters.empty()) throw Error(ErrorKind::InvalidArgument, "empty word");
    std::optional<AlgWord> acc;
    for (int x : letters) {
        if (x == 0 || letter_edge(x) >= static_cast<int>(d.layers[layer].edges.size()))
            throw Error(ErrorKind::UnknownReference, "letter out of range");
        AlgWord w{-1, 0, {x}};
        acc = acc ? multiply_words(d, layer, *acc, w) : std::optional<AlgWord>(w);
        if (!acc) return a;
    }
    a.terms[*acc] = 1;
    return a;
}

std::optional<AlgWord> multiply_words(const LDiagram& d, int m, const AlgWord& a, const AlgWord& b) {
    if (right_end(d, m, a) != left_end(d, m, b)) return std::nullopt;
    if (a.is_vertex()) return b;
    if (b.is_vertex()) return a;
    std::vector<int> left = a.letters;
    std::size_t pos = 0;  // consumed prefix of b
    while (!left.empty() && pos < b.letters.size() && left.back() < 0 && b.letters[pos] > 0) {
        const int f = letter_edge(left.back()), g = letter_edge(b.letters[pos]);
        const DEdge& ef = d.edge(m, f);
        const DEdge& eg = d.edge(m, g);
        if (ef.rng != eg.rng || ef.block != eg.block) break;  // different blocks: no relation
        if (f != g) return std::nullopt;
        left.pop_back();
        ++pos;
        if (left.empty() && pos == b.letters.size()) return AlgWord{ef.src, 1, {}};
    }
    left.insert(left.end(), b.letters.begin() + static_cast<std::ptrdiff_t>(pos), b.letters.end());
    return AlgWord{-1, 0, std::move(left)};
}

AlgElement push_to_layer(const AlgElement& a, int layer) {
    if (layer < a.layer) throw Error(ErrorKind::InvalidArgument, "cannot move an element to a lower layer");
    AlgElement cur = a;
    try {
        while (cur.layer < layer) cur = phi_tilde(cur);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::HorizonExceeded) throw Error(ErrorKind::StageOverflow, e.what());
        throw;
    }
    return cur;
}

namespace {

std::pair<AlgElement, AlgElement> matched(const AlgElement& a, const AlgElement& b) {
    if (a.d != b.d) throw Error(ErrorKind::InvalidArgument, "elements over different diagrams");
    const int L = std::max(a.layer, b.layer);
    return {push_to_layer(a, L), push_to_layer(b, L)};
}

}  // namespace

AlgElement add(const AlgElement& a, const AlgElement& b) {
    auto [x, y] = matched(a, b);
    for (const auto& [w, c] : y.terms) add_term(x.terms, w, c);
    return x;
}

AlgElement scale(const AlgElement& a, const Scalar& c) {
    AlgElement out{a.d, a.layer, {}};
    for (const auto& [w, v] : a.terms) add_term(out.terms, w, v * c);
    return out;
}

AlgElement multiply(const AlgElement& a, const AlgElement& b) {
    auto [x, y] = matched(a, b);
    AlgElement out{x.d, x.layer, {}};
    for (const auto& [wa, ca] : x.terms)
        for (const auto& [wb, cb] : y.terms)
            if (auto w = multiply_words(*x.d, x.layer, wa, wb)) add_term(out.terms, *w, ca * cb);
    return out;
}

AlgElement star(const AlgElement& a) {
    AlgElement out{a.d, a.layer, {}};
    for (const auto& [w, c] : a.terms) {
        AlgWord s = w;
        std::reverse(s.letters.begin(), s.letters.end());
        for (int& x : s.letters) x = -x;
        add_term(out.terms, s, c);
    }
    return out;
}

// ------------------------------------------------------------ connecting maps

const Block& image_block(const LDiagram& d, int m, int e) {
    require_layer(d, m + 1, "the image of an edge of layer " + std::to_string(m));
    const DEdge& ed = d.edge(m, e);
    if (ed.color == Color::Blue) return block_of_color(d, m + 1, ed.src, Color::Blue);
    for (const auto& b : d.blocks(m + 1, ed.src))
        if (b.color == Color::Red && (m % 2 == 1 || b.parent == e)) return b;
    throw Error(ErrorKind::InvalidArgument, "no red block for edge " + ed.id);
}

std::vector<int> vertex_sum(const LDiagram& d, int m, int v, int block) {
    const auto& blocks = d.blocks(m, v);
    if (block < 0 || block >= static_cast<int>(blocks.size())) throw Error(ErrorKind::InvalidArgument, "block index out of range");
    std::vector<int> out;
    for (int e : blocks[block].edges)
        for (int e2 : image_block(d, m, e).edges) out.push_back(d.edge(m + 1, e2).src);
    std::sort(out.begin(), out.end());
    return out;
}

AlgElement phi_tilde(const AlgElement& a) {
    const LDiagram& d = *a.d;
    const int m = a.layer;
    require_layer(d, m + 1, "the connecting map from layer " + std::to_string(m));
    auto letter_image = [&](int x) {
        AlgElement img{&d, m + 1, {}};
        for (int e2 : image_block(d, m, letter_edge(x)).edges) img.terms[AlgWord{-1, 0, {x > 0 ? -(e2 + 1) : e2 + 1}}] = 1;
        return img;
    };
    AlgElement out{&d, m + 1, {}};
    for (const auto& [w, c] : a.terms) {
        if (w.is_vertex()) {
            if (w.side == 1) {
                add_term(out.terms, AlgWord{w.vertex, 0, {}}, c);
            } else {
                int blue = 0;
                const auto& bl = d.blocks(m, w.vertex);
                while (bl[blue].color != Color::Blue) ++blue;
                for (int u : vertex_sum(d, m, w.vertex, blue)) add_term(out.terms, AlgWord{u, 1, {}}, c);
            }
            continue;
        }
        AlgElement acc = letter_image(w.letters.front());
        for (std::size_t i = 1; i < w.letters.size() && !acc.is_zero(); ++i) acc = multiply(acc, letter_image(w.letters[i]));
        for (const auto& [w2, c2] : acc.terms) add_term(out.terms, w2, c * c2);
    }
    return out;
}

AlgElement phi_step(const AlgElement& a) { return phi_tilde(phi_tilde(a)); }

bool equal_in_limit(const AlgElement& a, const AlgElement& b) {
    auto [x, y] = matched(a, b);
    return phi_tilde(x) == phi_tilde(y);
}

bool tameness_check(const LDiagram& d, int m, const std::vector<int>& letters) {
    const int k = static_cast<int>(letters.size());
    require_layer(d, m + k, "tameness of a word of length " + std::to_string(k));
    AlgElement w = word_element(d, m, letters);
    AlgElement x = multiply(w, star(w));
    for (int i = 0; i < k; ++i) x = phi_tilde(x);
    for (const auto& [word, c] : x.terms)
        if (!word.is_vertex() || c != 1) return false;
    return true;
}

std::string AlgElement::to_string() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [w, c] : terms) {
        Scalar mag = abs(c);
        os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        if (mag != 1) os << mag.get_str() << " ";
        first = false;
        if (w.is_vertex()) {
            os << "p(" << d->levels[layer + w.side][w.vertex] << ")";
            continue;
        }
        const bool corner = w.letters.size() % 2 == 0 && w.letters.front() > 0 && [&] {
            for (std::size_t i = 0; i < w.letters.size(); ++i)
                if ((w.letters[i] > 0) != (i % 2 == 0)) return false;
            return true;
        }();
        if (corner) {
            for (std::size_t i = 0; i < w.letters.size(); i += 2)
                os << (i ? "*" : "") << "t(" << edge_name(*d, layer, letter_edge(w.letters[i])) << ","
                   << edge_name(*d, layer, letter_edge(w.letters[i + 1])) << ")";
        } else {
            for (std::size_t i = 0; i < w.letters.size(); ++i)
                os << (i ? " " : "") << edge_name(*d, layer, letter_edge(w.letters[i])) << (w.letters[i] < 0 ? "^*" : "");
        }
    }
    return os.str();
}

// ------------------------------------------------------------ canonical terms

namespace {

BluePrefix vertex_prefix(const LDiagram& d, int level, int v) { return prefix_to_vertex(d, level, v); }

// T(f_1, ..., f_j) = C(f_1) meet sigma^{-1}(Z(s(f_1)) meet T(f_2, ..., f_j)).
CylinderSet chain_set(const LDiagram& d, int L, const std::vector<int>& reds) {
    CylinderSet cur = red_cell(d, L, reds.back());
    for (int i = static_cast<int>(reds.size()) - 2; i >= 0; --i) {
        const int f = reds[i];
        CylinderSet w{{vertex_prefix(d, L + 1, d.edge(L, f).src)}};
        cur = intersect(d, red_cell(d, L, f), sigma_preimage_set(d, intersect(d, w, cur), 1));
        if (cur.cells.empty()) break;
    }
    return cur;
}

struct TermShape {
    std::vector<int> left;   // reds of the left chain, ending with the central red edge (types B, D)
    std::vector<int> right;  // reds of the right chain read from the far end (types C, D)
    int last_blue_source = -1;
};

TermShape shape_of(const LDiagram& d, const CanonicalTerm& t) {
    const int L = 2 * t.stage;
    TermShape s;
    const auto& F = t.factors;
    switch (t.type) {
        case TermType::A:
            break;
        case TermType::B:
            for (auto [f, e] : F) s.left.push_back(f);
            s.last_blue_source = d.edge(L, F.back().first).src;
            break;
        case TermType::C:
            for (auto it = F.rbegin(); it != F.rend(); ++it) s.right.push_back(it->second);
            s.last_blue_source = d.edge(L, F.front().second).src;
            break;
        case TermType::D: {
            std::size_t c = 0;
            while (d.edge(L, F[c].second).color == Color::Blue) ++c;
            for (std::size_t i = 0; i <= c; ++i) s.left.push_back(F[i].first);
            for (std::size_t i = F.size(); i-- > c + 1;) s.right.push_back(F[i].second);
            s.right.push_back(F[c].second);
            break;
        }
    }
    return s;
}

}  // namespace

int CanonicalTerm::degree(const LDiagram& d) const {
    int deg = 0;
    for (auto [x, y] : factors) {
        deg += d.edge(2 * stage, x).color == Color::Red ? 1 : 0;
        deg -= d.edge(2 * stage, y).color == Color::Red ? 1 : 0;
    }
    return deg;
}

AlgElement CanonicalTerm::element(const LDiagram& d) const {
    if (type == TermType::A) return vertex_element(d, 2 * stage, vertex);
    std::vector<int> letters;
    for (auto [x, y] : factors) {
        letters.push_back(x + 1);
        letters.push_back(-(y + 1));
    }
    return word_element(d, 2 * stage, letters);
}

std::string CanonicalTerm::name(const LDiagram& d) const {
    static const char* tags = "ABCD";
    return std::string(1, tags[static_cast<int>(type)]) + "[" + element(d).to_string() + "]";
}

std::optional<CanonicalTerm> classify_word(const LDiagram& d, int stage, const AlgWord& w) {
    const int L = 2 * stage;
    CanonicalTerm t;
    t.stage = stage;
    if (w.is_vertex()) {
        if (w.side != 0) throw Error(ErrorKind::InvalidArgument, "bottom vertices are not in the corner");
        t.type = TermType::A;
        t.vertex = w.vertex;
        t.witness = CylinderSet{{vertex_prefix(d, L, w.vertex)}};
        return t;
    }
    if (w.letters.size() % 2 != 0 || w.letters.front() < 0) throw Error(ErrorKind::InvalidArgument, "word is not in the corner");
    std::string colors;
    for (std::size_t i = 0; i < w.letters.size(); i += 2) {
        const int x = letter_edge(w.letters[i]), y = letter_edge(w.letters[i + 1]);
        if (w.letters[i] < 0 || w.letters[i + 1] > 0) throw Error(ErrorKind::InvalidArgument, "word is not in the corner");
        if (x == y) return std::nullopt;
        t.factors.emplace_back(x, y);
        colors += d.edge(L, x).color == Color::Red ? 'R' : 'B';
        colors += d.edge(L, y).color == Color::Red ? 'R' : 'B';
    }
    auto all_pairs = [&](const char* p) {
        for (std::size_t i = 0; i < colors.size(); i += 2)
            if (colors.compare(i, 2, p) != 0) return false;
        return true;
    };
    if (all_pairs("RB")) {
        t.type = TermType::B;
    } else if (all_pairs("BR")) {
        t.type = TermType::C;
    } else {
        const std::size_t c = colors.find("RR");
        const bool ok = c != std::string::npos && c % 2 == 0 && [&] {
            for (std::size_t i = 0; i < c; i += 2)
                if (colors.compare(i, 2, "RB") != 0) return false;
            for (std::size_t i = c + 2; i < colors.size(); i += 2)
                if (colors.compare(i, 2, "BR") != 0) return false;
            return true;
        }();
        if (!ok) throw Error(ErrorKind::InvalidArgument, "word with colour pattern " + colors + " is not reduced");
        t.type = TermType::D;
    }
    const TermShape s = shape_of(d, t);
    if (t.type == TermType::B) {
        t.witness = chain_set(d, L, s.left);
    } else if (t.type == TermType::C) {
        t.witness = chain_set(d, L, s.right);
    } else {
        const int a = static_cast<int>(s.left.size()), b = static_cast<int>(s.right.size());
        CylinderSet u0 = chain_set(d, L, s.left), v0 = chain_set(d, L, s.right);
        if (u0.cells.empty() || v0.cells.empty()) {
            t.witness = {};
        } else {
            t.witness = intersect(d, u0, sigma_preimage_set(d, sigma_image(d, v0, b), a));
        }
    }
    return t;
}

CanonicalForm canonicalize(const AlgElement& a, int stage_budget) {
    if (a.layer % 2 != 0) throw Error(ErrorKind::InvalidArgument, "canonical forms live in the corners of even layers");
    AlgElement cur = a;
    for (int advances = 0;; ++advances) {
        bool needs = false;
        for (const auto& [w, c] : cur.terms) {
            if (w.is_vertex()) continue;
            for (std::size_t i = 0; i + 1 < w.letters.size(); i += 2)
                if (w.letters[i] == -w.letters[i + 1]) needs = true;
        }
        if (!needs) break;
        if (advances == stage_budget)
            throw Error(ErrorKind::StageOverflow, "canonical form needs more than " + std::to_string(stage_budget) + " stage advances");
        cur = push_to_layer(cur, cur.layer + 2);
    }
    CanonicalForm out;
    out.stage = cur.stage();
    for (const auto& [w, c] : cur.terms) {
        auto t = classify_word(*cur.d, out.stage, w);
        if (t->witness.cells.empty()) continue;
        out.terms.emplace_back(c, std::move(*t));
    }
    return out;
}

// ------------------------------------------------------------ Steinberg model

bool shift_power_injective(int depth, int power) {
    for (int i = 0; i < power; ++i) {
        if (depth < 2) return false;
        depth = depth - depth % 2 - 1;
    }
    return true;
}

int injectivity_depth(int power) {
    int d = 0;
    while (!shift_power_injective(d, power)) ++d;
    return d;
}

namespace {

std::optional<BluePrefix> shift_hull(const LDiagram& d, BluePrefix x, int k) {
    for (int i = 0; i < k; ++i) {
        if (x.depth() < 2) return std::nullopt;
        x = shift_prefix(d, truncate(x, x.depth() - x.depth() % 2));
    }
    return x;
}

std::optional<BluePrefix> common_prefix(const std::vector<BluePrefix>& cells) {
    BluePrefix cp = cells.front();
    for (const auto& c : cells) {
        if (c.root != cp.root) return std::nullopt;
        std::size_t i = 0;
        while (i < cp.edges.size() && i < c.edges.size() && cp.edges[i] == c.edges[i]) ++i;
        cp.edges.resize(i);
    }
    return cp;
}

enum class HullKind { Empty, Unknown, Found };
struct Hull {
    HullKind kind = HullKind::Unknown;
    BluePrefix cell;
};

// A cylinder containing theta(Z(x)) for a sub-cylinder x of the piece domain.
Hull theta_hull(const LDiagram& d, const Piece& p, const BluePrefix& x) {
    auto q = shift_hull(d, x, p.k);
    if (!q) return {};
    CylinderSet target{{*q}};
    if (p.l > 0) target = sigma_preimage_set(d, target, p.l);
    CylinderSet s = intersect(d, p.v, target);
    if (s.cells.empty()) return {HullKind::Empty, {}};
    auto cp = common_prefix(s.cells);
    if (!cp) return {};
    return {HullKind::Found, *cp};
}

std::vector<BluePrefix> children(const LDiagram& d, const BluePrefix& x) {
    if (x.depth() >= d.horizon())
        throw Error(ErrorKind::HorizonExceeded, "bisection refinement needs cylinders below depth " + std::to_string(d.horizon()));
    return extensions(d, x, x.depth() + 1);
}

std::vector<Piece> compose_pieces(const LDiagram& d, const Piece& a, const Piece& b) {
    const int K = a.k + b.k, L = a.l + b.l, Db = injectivity_depth(L);
    std::vector<Piece> out;
    std::vector<BluePrefix> work{a.u};
    while (!work.empty()) {
        BluePrefix x = work.back();
        work.pop_back();
        auto refine = [&] {
            for (auto& c : children(d, x)) work.push_back(std::move(c));
        };
        Hull ha = theta_hull(d, a, x);
        if (ha.kind == HullKind::Empty) continue;
        if (ha.kind == HullKind::Unknown) {
            refine();
            continue;
        }
        const BluePrefix& c = ha.cell;
        if (!extends(c, b.u)) {
            if (extends(b.u, c)) refine();
            continue;
        }
        Hull hb = theta_hull(d, b, c);
        if (hb.kind == HullKind::Empty) continue;
        if (hb.kind == HullKind::Unknown || hb.cell.depth() < Db) {
            refine();
            continue;
        }
        out.push_back(Piece{x, K, L, intersect(d, b.v, CylinderSet{{hb.cell}})});
    }
    return out;
}

struct AtomTable {
    std::map<Atom, std::pair<Scalar, Piece>> table;
};

// Smallest uniform domain depth at which every piece restricted to a cylinder
// has its image inside one cylinder of depth Db.
int atom_depth(const LDiagram& d, const std::vector<const Piece*>& pieces, int Db) {
    int D = 0;
    for (const Piece* p : pieces) D = std::max(D, p->u.depth());
    for (;; ++D) {
        if (D > d.horizon())
            throw Error(ErrorKind::HorizonExceeded, "bisection normal form needs cylinders below depth " + std::to_string(d.horizon()));
        bool ok = true;
        for (const Piece* p : pieces) {
            for (const auto& x : extensions(d, p->u, D)) {
                Hull h = theta_hull(d, *p, x);
                if (h.kind == HullKind::Unknown || (h.kind == HullKind::Found && h.cell.depth() < Db)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) break;
        }
        if (ok) return D;
    }
}

AtomTable atom_table(const SteinbergElement& a, const SteinbergElement* partner) {
    const LDiagram& d = *a.d;
    std::vector<const Piece*> all;
    int maxl = 0;
    for (const auto& [c, p] : a.pieces) all.push_back(&p), maxl = std::max(maxl, p.l);
    if (partner)
        for (const auto& [c, p] : partner->pieces) all.push_back(&p), maxl = std::max(maxl, p.l);
    AtomTable out;
    if (all.empty()) return out;
    const int Db = injectivity_depth(maxl);
    const int D = atom_depth(d, all, Db);
    for (const auto& [c, p] : a.pieces) {
        for (const auto& x : extensions(d, p.u, D)) {
            Hull h = theta_hull(d, p, x);
            if (h.kind != HullKind::Found) continue;
            Atom key{x, p.degree(), truncate(h.cell, Db)};
            auto it = out.table.find(key);
            if (it == out.table.end()) {
                out.table.emplace(key, std::pair{c, Piece{x, p.k, p.l, intersect(d, p.v, CylinderSet{{key.b}})}});
            } else {
                it->second.first += c;
            }
        }
    }
    for (auto it = out.table.begin(); it != out.table.end();) it = it->second.first == 0 ? out.table.erase(it) : std::next(it);
    return out;
}

void require_same(const SteinbergElement& a, const SteinbergElement& b) {
    if (a.d != b.d && a.d && b.d) throw Error(ErrorKind::InvalidArgument, "Steinberg elements over different diagrams");
}

}  // namespace

std::map<Atom, Scalar> atoms(const SteinbergElement& a, const SteinbergElement& partner) {
    require_same(a, partner);
    std::map<Atom, Scalar> out;
    if (!a.d) return out;
    for (auto& [k, v] : atom_table(a, &partner).table) out.emplace(k, v.first);
    return out;
}

SteinbergElement normalize(const SteinbergElement& a) {
    SteinbergElement out{a.d, {}};
    if (!a.d) return out;
    for (auto& [k, v] : atom_table(a, nullptr).table) out.pieces.push_back(v);
    return out;
}

bool equals(const SteinbergElement& a, const SteinbergElement& b) {
    require_same(a, b);
    if (!a.d || !b.d) return a.is_zero() && b.is_zero();
    return atoms(a, b) == atoms(b, a);
}

bool supports_disjoint(const SteinbergElement& a, const SteinbergElement& b) {
    require_same(a, b);
    if (!a.d || !b.d) return true;
    auto x = atoms(a, b), y = atoms(b, a);
    for (const auto& [k, c] : x)
        if (y.count(k)) return false;
    return true;
}

SteinbergElement bisection(const LDiagram& d, const CylinderSet& u, int k, int l, const CylinderSet& v, const Scalar& c) {
    SteinbergElement out{&d, {}};
    if (c == 0) return out;
    for (const auto& cell : u.cells) out.pieces.emplace_back(c, Piece{cell, k, l, v});
    return out;
}

SteinbergElement unit_indicator(const LDiagram& d, const CylinderSet& u) {
    SteinbergElement out{&d, {}};
    for (const auto& cell : u.cells) out.pieces.emplace_back(1, Piece{cell, 0, 0, CylinderSet{{cell}}});
    return out;
}

SteinbergElement add(const SteinbergElement& a, const SteinbergElement& b) {
    require_same(a, b);
    SteinbergElement out{a.d ? a.d : b.d, a.pieces};
    out.pieces.insert(out.pieces.end(), b.pieces.begin(), b.pieces.end());
    return out.d ? normalize(out) : out;
}

SteinbergElement scale(const SteinbergElement& a, const Scalar& c) {
    SteinbergElement out{a.d, {}};
    if (c == 0) return out;
    for (const auto& [x, p] : a.pieces) out.pieces.emplace_back(x * c, p);
    return out;
}

SteinbergElement convolve(const SteinbergElement& a, const SteinbergElement& b) {
    require_same(a, b);
    SteinbergElement out{a.d ? a.d : b.d, {}};
    if (!a.d || !b.d) return out;
    for (const auto& [ca, pa] : a.pieces)
        for (const auto& [cb, pb] : b.pieces)
            for (auto& p : compose_pieces(*a.d, pa, pb)) out.pieces.emplace_back(ca * cb, std::move(p));
    return normalize(out);
}

SteinbergElement star(const SteinbergElement& a) {
    SteinbergElement out{a.d, {}};
    if (!a.d) return out;
    const LDiagram& d = *a.d;
    for (const auto& [c, p] : a.pieces) {
        const int need = std::max(p.u.depth(), injectivity_depth(p.k));
        for (const auto& x : extensions(d, p.u, need)) {
            CylinderSet img = sigma_image(d, x, p.k);
            if (p.l > 0) img = sigma_preimage_set(d, img, p.l);
            img = intersect(d, p.v, img);
            for (const auto& cell : img.cells) out.pieces.emplace_back(c, Piece{cell, p.l, p.k, CylinderSet{{x}}});
        }
    }
    return normalize(out);
}

std::string SteinbergElement::to_string() const {
    if (pieces.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [c, p] : pieces) {
        Scalar mag = abs(c);
        os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
        if (mag != 1) os << mag.get_str() << " ";
        first = false;
        os << "Z{" << prefix_name(*d, p.u) << ";" << p.k << ";" << p.l << ";" << set_name(*d, p.v) << "}";
    }
    return os.str();
}

CylinderSet red_cell(const LDiagram& d, int L, int f) {
    const DEdge& e = d.edge(L, f);
    if (e.color != Color::Red || L % 2 != 0) throw Error(ErrorKind::InvalidArgument, "red cells belong to red edges of even layers");
    if (d.horizon() < L + 2) throw Error(ErrorKind::HorizonExceeded, "the cell of a red edge of layer " + std::to_string(L) + " needs depth " + std::to_string(L + 2));
    std::vector<BluePrefix> cells;
    for (auto& x : extensions(d, vertex_prefix(d, L, e.rng), L + 2))
        if (romb_red_edge(d, x, L) == f) cells.push_back(std::move(x));
    return normalize(d, std::move(cells));
}

SteinbergElement vertex_bisection(const LDiagram& d, int stage, int v) {
    return unit_indicator(d, CylinderSet{{vertex_prefix(d, 2 * stage, v)}});
}

SteinbergElement generator_bisection(const LDiagram& d, int stage, int e, int f) {
    const int L = 2 * stage;
    const DEdge& ee = d.edge(L, e);
    const DEdge& ef = d.edge(L, f);
    if (ee.src != ef.src) throw Error(ErrorKind::InvalidArgument, "tau needs edges with a common source");
    const CylinderSet w{{vertex_prefix(d, L + 1, ee.src)}};
    const bool re = ee.color == Color::Red, rf = ef.color == Color::Red;
    if (!re && !rf) return unit_indicator(d, w);
    return bisection(d, re ? red_cell(d, L, e) : w, re ? 1 : 0, rf ? 1 : 0, rf ? red_cell(d, L, f) : w);
}

SteinbergElement element_to_steinberg(const AlgElement& a) {
    const LDiagram& d = *a.d;
    if (a.layer % 2 != 0) throw Error(ErrorKind::InvalidArgument, "only corners of even layers map to the groupoid");
    const int n = a.stage();
    SteinbergElement out{&d, {}};
    for (const auto& [w, c] : a.terms) {
        SteinbergElement term;
        if (w.is_vertex()) {
            if (w.side != 0) throw Error(ErrorKind::InvalidArgument, "bottom vertices are not in the corner");
            term = vertex_bisection(d, n, w.vertex);
        } else {
            if (w.letters.size() % 2 != 0 || w.letters.front() < 0) throw Error(ErrorKind::InvalidArgument, "word is not in the corner");
            for (std::size_t i = 0; i < w.letters.size(); i += 2) {
                auto g = generator_bisection(d, n, letter_edge(w.letters[i]), letter_edge(w.letters[i + 1]));
                term = i == 0 ? g : convolve(term, g);
            }
        }
        auto scaled = scale(term, c);
        out.pieces.insert(out.pieces.end(), scaled.pieces.begin(), scaled.pieces.end());
    }
    return normalize(out);
}

SteinbergElement to_steinberg(const LDiagram& d, const CanonicalTerm& t) {
    const int L = 2 * t.stage;
    if (t.type == TermType::A) return vertex_bisection(d, t.stage, t.vertex);
    if (t.witness.cells.empty()) return SteinbergElement{&d, {}};
    const TermShape s = shape_of(d, t);
    switch (t.type) {
        case TermType::B: {
            const int k = static_cast<int>(s.left.size());
            return bisection(d, t.witness, k, 0, CylinderSet{{vertex_prefix(d, L + 1, s.last_blue_source)}});
        }
        case TermType::C: {
            const int k = static_cast<int>(s.right.size());
            return star(bisection(d, t.witness, k, 0, CylinderSet{{vertex_prefix(d, L + 1, s.last_blue_source)}}));
        }
        default: {
            const int a = static_cast<int>(s.left.size()), b = static_cast<int>(s.right.size());
            return bisection(d, t.witness, a, b, chain_set(d, L, s.right));
        }
    }
}

SteinbergElement to_steinberg(const LDiagram& d, const CanonicalForm& f) {
    SteinbergElement out{&d, {}};
    for (const auto& [c, t] : f.terms) {
        auto s = scale(to_steinberg(d, t), c);
        out.pieces.insert(out.pieces.end(), s.pieces.begin(), s.pieces.end());
    }
    return normalize(out);
}

bool injectivity_witness(const LDiagram& d, const CanonicalTerm& t1, const CanonicalTerm& t2) {
    return supports_disjoint(to_steinberg(d, t1), to_steinberg(d, t2));
}

std::vector<AlgElement> corner_generators(const LDiagram& d, int stage) {
    const int L = 2 * stage;
    require_layer(d, L, "corner generators");
    std::vector<AlgElement> out;
    for (int v = 0; v < d.level_size(L); ++v) out.push_back(vertex_element(d, L, v));
    const auto& edges = d.layers[L].edges;
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
        for (int f = 0; f < static_cast<int>(edges.size()); ++f)
            if (edges[e].src == edges[f].src) out.push_back(tau_element(d, L, e, f));
    return out;
}

std::vector<CanonicalTerm> single_factor_terms(const LDiagram& d, int stage) {
    std::vector<CanonicalTerm> out;
    for (const auto& g : corner_generators(d, stage)) {
        const AlgWord& w = g.terms.begin()->first;
        auto t = classify_word(d, stage, w);
        if (t && !t->witness.cells.empty()) out.push_back(std::move(*t));
    }
    return out;
}

// ------------------------------------------------------------ colimit square

LDiagram stage_diagram(const LDiagram& d, int n, int depth) {
    if (d.horizon() < 2 * n + 3) throw Error(ErrorKind::HorizonExceeded, "the stage diagram needs layer " + std::to_string(2 * n + 2));
    if (depth < 3) throw Error(ErrorKind::InvalidArgument, "stage diagrams need depth at least 3");
    std::vector<Layer> layers{layer_of(d, 2 * n), layer_of(d, 2 * n + 1)};
    for (auto& l : canonical_resolution(layer_of(d, 2 * n + 2), depth - 2).to_layers()) layers.push_back(std::move(l));
    return LDiagram::from_layers(layers);
}

namespace {

BluePrefix translate_prefix(const LDiagram& from, const LDiagram& to, const BluePrefix& p) {
    if (p.depth() > 2) throw Error(ErrorKind::InvalidArgument, "pullback is defined for cells of depth at most 2");
    const std::string& name = from.levels[p.depth()][end_vertex(from, p)];
    const int v = to.vertex_index(p.depth(), name);
    if (v < 0) throw Error(ErrorKind::StructureMismatch, "vertex " + name + " has no counterpart");
    return prefix_to_vertex(to, p.depth(), v);
}

AlgElement translate_element(const AlgElement& a, const LDiagram& to, int layer) {
    AlgElement out = zero_element(to, layer);
    const LDiagram& from = *a.d;
    for (const auto& [w, c] : a.terms) {
        AlgWord t;
        if (w.is_vertex()) {
            const std::string& name = from.levels[a.layer + w.side][w.vertex];
            t.vertex = to.vertex_index(layer + w.side, name);
            t.side = w.side;
            if (t.vertex < 0) throw Error(ErrorKind::StructureMismatch, "vertex " + name + " has no counterpart");
        } else {
            for (int x : w.letters) {
                const std::string& id = from.edge(a.layer, letter_edge(x)).id;
                const int e = to.edge_index(layer, id);
                if (e < 0) throw Error(ErrorKind::StructureMismatch, "edge " + id + " has no counterpart");
                t.letters.push_back(x > 0 ? e + 1 : -(e + 1));
            }
        }
        add_term(out.terms, t, c);
    }
    return out;
}

}  // namespace

SteinbergElement pullback_indicator(const LDiagram& g, const SteinbergElement& s) {
    SteinbergElement out{&g, {}};
    if (!s.d) return out;
    for (const auto& [c, p] : s.pieces) {
        CylinderSet v;
        for (const auto& cell : p.v.cells) v.cells.push_back(translate_prefix(*s.d, g, cell));
        out.pieces.emplace_back(c, Piece{translate_prefix(*s.d, g, p.u), p.k, p.l, normalize(g, v.cells)});
    }
    return normalize(out);
}

CommutativityResult commutativity_check(const LDiagram& d, int n, int depth) {
    CommutativityResult r;
    const LDiagram xn = n == 0 ? d.truncated(std::min(d.horizon(), depth)) : canonical_resolution(layer_of(d, 2 * n), depth);
    const LDiagram g = stage_diagram(d, n, depth);
    for (const auto& x : corner_generators(d, n)) {
        ++r.generators;
        const AlgElement x0 = translate_element(x, xn, 0);
        const AlgWord& w = x0.terms.begin()->first;
        const SteinbergElement raw = w.is_vertex() ? vertex_bisection(xn, 0, w.vertex)
                                                   : generator_bisection(xn, 0, letter_edge(w.letters[0]), letter_edge(w.letters[1]));
        const SteinbergElement lhs = pullback_indicator(g, raw);
        const AlgElement y = translate_element(phi_step(x), g, 2);
        const SteinbergElement rhs = element_to_steinberg(y);
        if (!equals(lhs, rhs)) {
            r.ok = false;
            r.witness = x.to_string() + ": " + lhs.to_string() + " != " + rhs.to_string();
            return r;
        }
    }
    return r;
}

// ------------------------------------------------------------ text grammar

namespace {

class ElementParser {
public:
    ElementParser(const LDiagram& d, int stage, const std::string& s) : d_(d), L_(2 * stage), s_(s) {}

    AlgElement parse() {
        AlgElement e = sum();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + s_.substr(i_, 1) + "'");
        return e;
    }

private:
    const LDiagram& d_;
    int L_;
    const std::string& s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::ParseError, what + " at offset " + std::to_string(i_) + " in '" + s_ + "'");
    }
    [[noreturn]] void unknown(const std::string& what) const {
        throw Error(ErrorKind::UnknownReference, what + " in '" + s_ + "'");
    }
    std::string digits() {
        std::size_t j = i_;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j == i_) fail("expected digits");
        std::string out = s_.substr(i_, j - i_);
        i_ = j;
        return out;
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(const std::string& tok) {
        skip();
        if (s_.compare(i_, tok.size(), tok) == 0) {
            i_ += tok.size();
            return true;
        }
        return false;
    }
    void expect(const std::string& tok) {
        if (!eat(tok)) fail("expected '" + tok + "'");
    }
    std::string name() {
        skip();
        std::size_t j = i_;
        int depth = 0;
        while (j < s_.size()) {
            const char ch = s_[j];
            if (ch == '(') ++depth;
            if (ch == ')' && depth-- == 0) break;
            if (ch == ',' && depth == 0) break;
            if (std::isspace(static_cast<unsigned char>(ch))) break;
            ++j;
        }
        if (j == i_) fail("expected a name");
        std::string out = s_.substr(i_, j - i_);
        i_ = j;
        return out;
    }
    AlgElement sum() {
        AlgElement acc = product();
        for (;;) {
            if (eat("+"))
                acc = add(acc, product());
            else if (eat("-"))
                acc = add(acc, scale(product(), -1));
            else
                return acc;
        }
    }
    AlgElement product() {
        AlgElement acc = factor();
        while (eat("*")) acc = multiply(acc, factor());
        return acc;
    }
    AlgElement factor() {
        skip();
        Scalar c = 1;
        bool has_scalar = false;
        if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
            std::string text = digits();
            if (i_ < s_.size() && s_[i_] == '/') {
                ++i_;
                const std::string den = digits();
                if (den.find_first_not_of('0') == std::string::npos) fail("zero denominator");
                text += "/" + den;
            }
            c = Scalar(text);
            c.canonicalize();
            has_scalar = true;
            skip();
        }
        AlgElement base = zero_element(d_, L_);
        if (eat("(")) {
            base = sum();
            expect(")");
        } else if (eat("p(")) {
            const std::string v = name();
            expect(")");
            const int idx = d_.vertex_index(L_, v);
            if (idx < 0) unknown("unknown vertex " + v);
            base = vertex_element(d_, L_, idx);
        } else if (eat("t(")) {
            const std::string e = name();
            expect(",");
            const std::string f = name();
            expect(")");
            const int ie = d_.edge_index(L_, e), jf = d_.edge_index(L_, f);
            if (ie < 0 || jf < 0) unknown("unknown edge in t(" + e + "," + f + ")");
            base = tau_element(d_, L_, ie, jf);
        } else if (has_scalar) {
            for (int v = 0; v < d_.level_size(L_); ++v) base = add(base, vertex_element(d_, L_, v));
            skip();
        } else {
            fail("expected p(...), t(...,...), a scalar or '('");
        }
        while (eat("^*")) base = star(base);
        return scale(base, c);
    }
};

}  // namespace

AlgElement parse_element(const LDiagram& d, int stage, const std::string& text) {
    require_layer(d, 2 * stage, "parsing an element");
    return ElementParser(d, stage, text).parse();
}

}  // namespace sepshift

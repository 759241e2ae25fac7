// SPDX-License-Identifier: MIT
// Exact algebra over an l-diagram: the Leavitt algebras of its layers with the
// connecting maps, the corner algebras of the even layers, canonical forms of
// their elements, and the Steinberg model of the shift groupoid they map into.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "sepshift/common.hpp"
#include "sepshift/dynamics.hpp"
#include "sepshift/ldiagram.hpp"

namespace sepshift {

using Scalar = mpq_class;

// Monomial of the Leavitt algebra of layer m. A letter is +(e+1) for the edge
// e and -(e+1) for its ghost e*; words are read left to right. A word with no
// letters is the vertex `vertex` at level m + side (side 0 = top).
struct AlgWord {
    int vertex = -1;
    int side = 0;
    std::vector<int> letters;

    bool is_vertex() const { return letters.empty(); }
    auto operator<=>(const AlgWord&) const = default;
    bool operator==(const AlgWord&) const = default;
};

// Finite rational combination of reduced words of layer `layer`. Words are
// kept reduced for the vertex, edge and same-block ghost-edge relations; the
// relation expanding a vertex into a sum over one of its blocks is never
// applied, so two combinations can agree in the algebra without being
// syntactically equal (see equal_in_limit).
struct AlgElement {
    const LDiagram* d = nullptr;
    int layer = 0;
    std::map<AlgWord, Scalar> terms;

    int stage() const { return layer / 2; }
    bool is_zero() const { return terms.empty(); }
    std::string to_string() const;
    bool operator==(const AlgElement& o) const { return layer == o.layer && terms == o.terms; }
};

AlgElement zero_element(const LDiagram& d, int layer);
// The vertex v at level `layer` + side.
AlgElement vertex_element(const LDiagram& d, int layer, int v, int side = 0);
AlgElement edge_element(const LDiagram& d, int layer, int e);
AlgElement ghost_element(const LDiagram& d, int layer, int e);
// tau_(e,f) = e f* for edges of layer m with s(e) = s(f).
AlgElement tau_element(const LDiagram& d, int layer, int e, int f);
AlgElement word_element(const LDiagram& d, int layer, const std::vector<int>& letters);

// Product of two reduced words (zero or one word).
std::optional<AlgWord> multiply_words(const LDiagram& d, int layer, const AlgWord& a, const AlgWord& b);

// Stage-matched operations; the element in the lower layer is first pushed
// forward with phi_tilde. Throws StageOverflow when that runs past the horizon.
AlgElement add(const AlgElement& a, const AlgElement& b);
AlgElement scale(const AlgElement& a, const Scalar& c);
AlgElement multiply(const AlgElement& a, const AlgElement& b);
AlgElement star(const AlgElement& a);

// The connecting map from layer m to layer m+1, extended multiplicatively
// from the generators: a top vertex v goes to S(v), a bottom vertex to itself,
// an edge e to the sum of the ghosts of the block X(e) at s(e), and a ghost
// e* to the sum of the edges of X(e). Throws HorizonExceeded without layer m+1.
AlgElement phi_tilde(const AlgElement& a);
// Two applications: the corner of layer 2n into the corner of layer 2n+2.
AlgElement phi_step(const AlgElement& a);
AlgElement push_to_layer(const AlgElement& a, int layer);

// Equality in the direct limit, decided one layer above the common layer.
// The connecting map sends every vertex-minus-block-sum relation to zero
// syntactically, so this is exact. Throws HorizonExceeded when no layer is left.
bool equal_in_limit(const AlgElement& a, const AlgElement& b);

// S(v) for a top vertex v of layer m: the sorted multiset of vertices s(e')
// over e in a chosen block X of v and e' in X(e).
std::vector<int> vertex_sum(const LDiagram& d, int layer, int v, int block);
// Block X(e) of s(e) in layer m+1 that the edge e of layer m maps onto.
const Block& image_block(const LDiagram& d, int layer, int e);

// Whether phi_tilde applied k times to w w* (k = number of letters) is a sum
// of pairwise distinct vertices with coefficient 1. Needs layer + k < horizon.
bool tameness_check(const LDiagram& d, int layer, const std::vector<int>& letters);

// --------------------------------------------------------- canonical forms

enum class TermType { A, B, C, D };

// Canonical term at stage n. Type A: p_v for a vertex of level 2n. Types B,
// C and D: a product of tau_(x_i, y_i) whose colour pattern is (red, blue)^k,
// (blue, red)^k or (red, blue)^a (red, red) (blue, red)^b with distinct
// central red edges. `witness` is the nonvanishing set of the term: the
// domain of its bisection (type C: the range).
struct CanonicalTerm {
    TermType type = TermType::A;
    int stage = 0;
    int vertex = -1;
    std::vector<std::pair<int, int>> factors;
    CylinderSet witness;

    int degree(const LDiagram& d) const;
    AlgElement element(const LDiagram& d) const;
    std::string name(const LDiagram& d) const;
};

struct CanonicalForm {
    int stage = 0;
    std::vector<std::pair<Scalar, CanonicalTerm>> terms;
};

// Advances the stage until no factor tau_(e,e) is left (at most
// `stage_budget` advances), classifies every word and drops terms whose
// nonvanishing set is empty. Throws StageOverflow past the budget or horizon.
CanonicalForm canonicalize(const AlgElement& a, int stage_budget = 4);
// Classifies a word of the corner at stage n (no stage advance).
std::optional<CanonicalTerm> classify_word(const LDiagram& d, int stage, const AlgWord& w);

// --------------------------------------------------------- Steinberg model

// Piece {(x, k-l, y) : x in Z(u), y in V, sigma^k x = sigma^l y} where sigma^l
// is injective on V and every x in Z(u) has such a partner y. Pieces are
// therefore compact open bisections, and the partial homeomorphism
// theta(x) = y is defined on all of Z(u).
struct Piece {
    BluePrefix u;
    int k = 0;
    int l = 0;
    CylinderSet v;

    int degree() const { return k - l; }
    bool operator==(const Piece&) const = default;
};

// Finite rational combination of pieces. normalize() rewrites it as a sum of
// canonical atoms (pairwise disjoint when distinct), so equal functions on
// the groupoid have equal normal forms.
struct SteinbergElement {
    const LDiagram* d = nullptr;
    std::vector<std::pair<Scalar, Piece>> pieces;

    bool is_zero() const { return pieces.empty(); }
    std::string to_string() const;
};

// Number of shift applications whose injectivity on a cylinder of the given
// depth is guaranteed (sigma is injective on every cylinder of depth >= 2).
bool shift_power_injective(int depth, int power);
int injectivity_depth(int power);

// 1_{Z(U, k, l, V)} for a full-domain bisection; U is split into its cells.
SteinbergElement bisection(const LDiagram& d, const CylinderSet& u, int k, int l, const CylinderSet& v, const Scalar& c = 1);
SteinbergElement unit_indicator(const LDiagram& d, const CylinderSet& u);
SteinbergElement add(const SteinbergElement& a, const SteinbergElement& b);
SteinbergElement scale(const SteinbergElement& a, const Scalar& c);
SteinbergElement convolve(const SteinbergElement& a, const SteinbergElement& b);
SteinbergElement star(const SteinbergElement& a);
SteinbergElement normalize(const SteinbergElement& a);
bool equals(const SteinbergElement& a, const SteinbergElement& b);
// Whether the supports of a and b share no groupoid element.
bool supports_disjoint(const SteinbergElement& a, const SteinbergElement& b);
// Canonical atoms (u, degree, b) -> coefficient at a resolution fine enough
// for both elements; exposed for tests and reports.
struct Atom {
    BluePrefix u;
    int degree = 0;
    BluePrefix b;
    auto operator<=>(const Atom&) const = default;
};
std::map<Atom, Scalar> atoms(const SteinbergElement& a, const SteinbergElement& partner);

// Cylinder set of the red edge f of the even layer L: the points of Z(r(f))
// that sigma maps onto Z(s(f)) through f (depth L+2).
CylinderSet red_cell(const LDiagram& d, int layer, int f);
// Images of the corner generators at stage n: p_v -> 1_{Z(v)} and
// tau_(e,f) -> the bisection between the cells of e and f.
SteinbergElement generator_bisection(const LDiagram& d, int stage, int e, int f);
SteinbergElement vertex_bisection(const LDiagram& d, int stage, int v);
// Multiplicative extension on words of the corner.
SteinbergElement element_to_steinberg(const AlgElement& a);
// Closed forms of the canonical terms.
SteinbergElement to_steinberg(const LDiagram& d, const CanonicalTerm& t);
SteinbergElement to_steinberg(const LDiagram& d, const CanonicalForm& f);
// Whether two canonical terms have disjoint bisections.
bool injectivity_witness(const LDiagram& d, const CanonicalTerm& t1, const CanonicalTerm& t2);

// All corner generators of stage n: vertices first, then tau_(e,f) in edge order.
std::vector<AlgElement> corner_generators(const LDiagram& d, int stage);
// Canonical terms with one factor at stage n (types A to D), nonvanishing only.
std::vector<CanonicalTerm> single_factor_terms(const LDiagram& d, int stage);

// ------------------------------------------------ the colimit square

// Diagram of X_{n+1} whose first two layers are layers 2n, 2n+1 of d and
// whose remaining layers are the canonical resolution of layer 2n+2.
LDiagram stage_diagram(const LDiagram& d, int n, int depth);
// Pullback of an element over the diagram of X_n to the diagram g of
// X_{n+1}; cells are matched by vertex name (depth at most 2).
SteinbergElement pullback_indicator(const LDiagram& g, const SteinbergElement& s);

struct CommutativityResult {
    bool ok = true;
    int generators = 0;
    std::string witness;
};
// Compares psi* of the stage-0 image of every generator of layer 2n with the
// stage-1 image of its connecting-map image, on the diagram of X_{n+1}.
CommutativityResult commutativity_check(const LDiagram& d, int n, int depth = 6);

// --------------------------------------------------------- text grammar
//
//   expr    = sum ;
//   sum     = product { ("+" | "-") product } ;
//   product = factor { "*" factor } ;
//   factor  = rational [ atom ] { "^*" } | atom { "^*" } ;
//   atom    = "p(" vertex ")" | "t(" edge "," edge ")" | "(" sum ")" ;
//   rational = digits [ "/" digits ] ;
//
// Vertex and edge names refer to level and layer 2n of the diagram. A bare
// rational c stands for c times the unit, the sum of all vertices of level 2n.
AlgElement parse_element(const LDiagram& d, int stage, const std::string& text);

}  // namespace sepshift

// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "sepshift/algebra.hpp"
#include "sepshift/resolution.hpp"
#include "sepshift/symbolic.hpp"

using namespace sepshift;
using sepshift::testing::fixture_gfs;

namespace {

LDiagram small_resolution() { return canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6); }

int edge(const LDiagram& d, int layer, const std::string& id) {
    int e = d.edge_index(layer, id);
    EXPECT_GE(e, 0) << id;
    return e;
}

// Pointwise evaluation of Steinberg elements on the one-sided full 2-shift.
// A point is a finite word followed by zeros, stored without trailing zeros,
// so sigma^k x = sigma^l y is decided exactly and the groupoid elements
// between such points are (x, n, y) with finitely many candidates z.
class PointModel {
public:
    explicit PointModel(int depth) : sys_(SymbolicSystem::parse("full1:2")), built_(build_ldiagram_cells(sys_, depth)) {}

    const LDiagram& diagram() const { return built_.diagram; }

    static int letter(const Word& x, int i) { return i < static_cast<int>(x.size()) ? x[i] : 0; }

    bool in_clopen(const Clopen& c, const Word& x) const {
        if (c.words.empty()) return false;
        if (c.hi < c.lo) return true;
        Word slice;
        for (int i = c.lo; i <= c.hi; ++i) slice.push_back(letter(x, i));
        return std::binary_search(c.words.begin(), c.words.end(), slice);
    }
    bool in_prefix(const BluePrefix& p, const Word& x) const {
        return in_clopen(built_.cells[p.depth()][end_vertex(built_.diagram, p)], x);
    }
    bool in_set(const CylinderSet& s, const Word& x) const {
        return std::any_of(s.cells.begin(), s.cells.end(), [&](const BluePrefix& p) { return in_prefix(p, x); });
    }
    static bool shifts_meet(const Word& x, int k, const Word& y, int l) {
        const int n = static_cast<int>(std::max(x.size(), y.size())) + k + l;
        for (int i = 0; i < n; ++i)
            if (letter(x, k + i) != letter(y, l + i)) return false;
        return true;
    }

    Scalar eval(const SteinbergElement& s, const Word& x, int n, const Word& y) const {
        Scalar out = 0;
        for (const auto& [c, p] : s.pieces)
            if (p.degree() == n && in_prefix(p.u, x) && in_set(p.v, y) && shifts_meet(x, p.k, y, p.l)) out += c;
        return out;
    }

    // Words of length at most `len` with no trailing zero (including the empty word).
    static std::vector<Word> points(int len) {
        std::vector<Word> out{{}};
        for (int n = 1; n <= len; ++n)
            for (int bits = 0; bits < (1 << (n - 1)); ++bits) {
                Word w;
                for (int i = 0; i + 1 < n; ++i) w.push_back((bits >> i) & 1);
                w.push_back(1);
                out.push_back(w);
            }
        return out;
    }

private:
    SymbolicSystem sys_;
    BuiltDiagram built_;
};

std::set<int> degrees(const SteinbergElement& s) {
    std::set<int> out;
    for (const auto& [c, p] : s.pieces) out.insert(p.degree());
    return out;
}

int max_lag(const SteinbergElement& s) {
    int m = 0;
    for (const auto& [c, p] : s.pieces) m = std::max({m, p.k, p.l});
    return m;
}

}  // namespace

TEST(Algebra, LeavittRelationsOnGenerators) {
    LDiagram d = small_resolution();
    const int a0 = edge(d, 0, "alpha0"), b0 = edge(d, 0, "beta0"), b1 = edge(d, 0, "beta1");
    // e* e = s(e) and e* f = 0 for distinct edges of one block.
    AlgElement ee = multiply(ghost_element(d, 0, b0), edge_element(d, 0, b0));
    EXPECT_EQ(ee, vertex_element(d, 0, d.edge(0, b0).src, 1));
    EXPECT_TRUE(multiply(ghost_element(d, 0, b0), edge_element(d, 0, b1)).is_zero());
    // Edges with different sources do not compose.
    EXPECT_TRUE(multiply(edge_element(d, 0, a0), edge_element(d, 0, b0)).is_zero());
    // e e* is a nonzero word, not a vertex.
    AlgElement proj = multiply(edge_element(d, 0, b0), ghost_element(d, 0, b0));
    EXPECT_FALSE(proj.is_zero());
    EXPECT_NE(proj, vertex_element(d, 0, d.edge(0, b0).rng));
}

TEST(Algebra, BlockSumEqualsVertexInTheLimit) {
    LDiagram d = small_resolution();
    const int v = d.vertex_index(0, "v");
    for (const Block& block : d.blocks(0, v)) {
        AlgElement sum = zero_element(d, 0);
        for (int e : block.edges) sum = add(sum, multiply(edge_element(d, 0, e), ghost_element(d, 0, e)));
        EXPECT_FALSE(sum == vertex_element(d, 0, v));
        EXPECT_TRUE(equal_in_limit(sum, vertex_element(d, 0, v)));
    }
    // Negative control: one summand short of a block.
    const Block& red = d.blocks(0, v)[1];
    AlgElement partial = multiply(edge_element(d, 0, red.edges[0]), ghost_element(d, 0, red.edges[0]));
    EXPECT_FALSE(equal_in_limit(partial, vertex_element(d, 0, v)));
}

TEST(Algebra, StarIsAnAntiInvolution) {
    LDiagram d = small_resolution();
    auto gens = corner_generators(d, 0);
    for (const auto& a : gens) {
        EXPECT_EQ(star(star(a)), a);
        for (const auto& b : gens) EXPECT_EQ(star(multiply(a, b)), multiply(star(b), star(a)));
    }
}

TEST(Algebra, ConnectingMapIsAStarHomomorphism) {
    LDiagram d = small_resolution();
    auto gens = corner_generators(d, 0);
    for (const auto& a : gens) {
        EXPECT_EQ(phi_step(star(a)), star(phi_step(a)));
        for (const auto& b : gens) {
            EXPECT_TRUE(equal_in_limit(phi_step(multiply(a, b)), multiply(phi_step(a), phi_step(b))))
                << a.to_string() << " , " << b.to_string();
            EXPECT_TRUE(equal_in_limit(phi_step(add(a, b)), add(phi_step(a), phi_step(b))));
        }
    }
}

TEST(Algebra, StageMatchingPushesForward) {
    LDiagram d = small_resolution();
    auto g0 = corner_generators(d, 0);
    auto g1 = corner_generators(d, 1);
    ASSERT_FALSE(g0.empty());
    ASSERT_FALSE(g1.empty());
    AlgElement mixed = multiply(g0[0], g1[0]);
    EXPECT_EQ(mixed.layer, 2);
    EXPECT_EQ(mixed, multiply(phi_step(g0[0]), g1[0]));
}

TEST(Algebra, ConnectingMapNeedsALayer) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 2);
    AlgElement a = vertex_element(d, 0, 0);
    EXPECT_NO_THROW(phi_tilde(a));
    try {
        phi_tilde(phi_tilde(a));
        FAIL() << "expected HorizonExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::HorizonExceeded);
    }
}

TEST(Algebra, SingleEdgesAreTame) {
    LDiagram d = small_resolution();
    for (int m = 0; m <= 1; ++m)
        for (int e = 0; e < static_cast<int>(d.layers[m].edges.size()); ++e) {
            EXPECT_TRUE(tameness_check(d, m, {e + 1}));
            EXPECT_TRUE(tameness_check(d, m, {-(e + 1)}));
        }
}

TEST(Algebra, ParserBuildsTheSameElements) {
    LDiagram d = small_resolution();
    const int b0 = edge(d, 0, "beta0"), b1 = edge(d, 0, "beta1");
    EXPECT_EQ(parse_element(d, 0, "p(v)"), vertex_element(d, 0, d.vertex_index(0, "v")));
    EXPECT_EQ(parse_element(d, 0, "t(beta0,beta1)"), tau_element(d, 0, b0, b1));
    EXPECT_EQ(parse_element(d, 0, "t(beta0,beta1)^*"), tau_element(d, 0, b1, b0));
    EXPECT_EQ(parse_element(d, 0, "2*t(beta0,beta1) - 1/2 p(v)"),
              add(scale(tau_element(d, 0, b0, b1), 2), scale(vertex_element(d, 0, 0), Scalar(-1, 2))));
    EXPECT_EQ(parse_element(d, 0, "(p(v) + t(beta0,beta1)) * t(beta1,beta0)"),
              multiply(add(vertex_element(d, 0, 0), tau_element(d, 0, b0, b1)), tau_element(d, 0, b1, b0)));
    EXPECT_EQ(parse_element(d, 0, "3"), scale(vertex_element(d, 0, 0), 3));
    EXPECT_EQ(parse_element(d, 1, "p(" + d.levels[2][0] + ")").layer, 2);
}

TEST(Algebra, ParserErrors) {
    LDiagram d = small_resolution();
    for (std::string bad : {"p(v", "t(beta0)", "p(v) +", "*p(v)", "p(v))", "1/", "1/0", "1//2", ""}) {
        try {
            parse_element(d, 0, bad);
            ADD_FAILURE() << "accepted '" << bad << "'";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
        }
    }
    for (std::string unknown : {"p(w9)", "t(beta0,gamma)"}) {
        try {
            parse_element(d, 0, unknown);
            ADD_FAILURE() << "accepted '" << unknown << "'";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::UnknownReference) << unknown;
        }
    }
}

TEST(Algebra, CanonicalFormsAdvanceStagesAndClassify) {
    LDiagram d = small_resolution();
    const int b0 = edge(d, 0, "beta0");
    // tau_(e,e) is not canonical, so canonicalization must advance a stage.
    CanonicalForm f = canonicalize(tau_element(d, 0, b0, b0));
    EXPECT_GE(f.stage, 1);
    for (const auto& [c, t] : f.terms) {
        EXPECT_EQ(t.stage, f.stage);
        EXPECT_NE(c, 0);
    }
    CanonicalForm v = canonicalize(vertex_element(d, 0, 0));
    ASSERT_EQ(v.terms.size(), 1u);
    EXPECT_EQ(v.terms[0].second.type, TermType::A);
    EXPECT_THROW(canonicalize(tau_element(d, 0, b0, b0), 0), Error);
}

TEST(Algebra, ConvolutionMatchesPointwiseSum) {
    PointModel model(10);
    const LDiagram& d = model.diagram();
    auto terms = single_factor_terms(d, 0);
    ASSERT_FALSE(terms.empty());
    const auto pts = PointModel::points(4);
    const auto zs = PointModel::points(8);
    int compared = 0, nonzero = 0;
    for (std::size_t i = 0; i < terms.size(); i += 3)
        for (std::size_t j = 1; j < terms.size(); j += 4) {
            SteinbergElement a = to_steinberg(d, terms[i]);
            SteinbergElement b = to_steinberg(d, terms[j]);
            SteinbergElement ab = convolve(a, b);
            ASSERT_LE(max_lag(a) + max_lag(b), 4);
            // Oracle: (a*b)(x, n, y) = sum over z and m of a(x, m, z) b(z, n - m, y).
            std::map<std::tuple<Word, int, Word>, Scalar> expected;
            for (const auto& x : pts)
                for (int m : degrees(a))
                    for (const auto& z : zs) {
                        Scalar va = model.eval(a, x, m, z);
                        if (va == 0) continue;
                        for (int m2 : degrees(b))
                            for (const auto& y : pts) {
                                Scalar vb = model.eval(b, z, m2, y);
                                if (vb != 0) expected[{x, m + m2, y}] += va * vb;
                            }
                    }
            for (const auto& x : pts)
                for (int n = -4; n <= 4; ++n)
                    for (const auto& y : pts) {
                        auto it = expected.find({x, n, y});
                        Scalar want = it == expected.end() ? Scalar(0) : it->second;
                        Scalar got = model.eval(ab, x, n, y);
                        ASSERT_EQ(got, want) << terms[i].name(d) << " * " << terms[j].name(d);
                        ++compared;
                        nonzero += want != 0;
                    }
        }
    EXPECT_GT(nonzero, 0);
    EXPECT_GT(compared, 0);
}

TEST(Algebra, StarAndNormalizeArePointwise) {
    PointModel model(10);
    const LDiagram& d = model.diagram();
    const auto pts = PointModel::points(4);
    for (const auto& t : single_factor_terms(d, 0)) {
        SteinbergElement s = to_steinberg(d, t);
        SteinbergElement ss = star(s);
        SteinbergElement ns = normalize(s);
        for (const auto& x : pts)
            for (int n = -3; n <= 3; ++n)
                for (const auto& y : pts) {
                    ASSERT_EQ(model.eval(ss, x, n, y), model.eval(s, y, -n, x)) << t.name(d);
                    ASSERT_EQ(model.eval(ns, x, n, y), model.eval(s, x, n, y)) << t.name(d);
                }
    }
}

TEST(Algebra, CanonicalImagesMatchGeneratorImages) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 10);
    auto gens = corner_generators(d, 0);
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = 0; j < gens.size(); j += 2) {
            AlgElement x = multiply(gens[i], gens[j]);
            EXPECT_TRUE(equals(to_steinberg(d, canonicalize(x)), element_to_steinberg(x))) << x.to_string();
        }
}

TEST(Algebra, EqualityDetectsTampering) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 10);
    auto terms = single_factor_terms(d, 0);
    ASSERT_GE(terms.size(), 2u);
    SteinbergElement a = to_steinberg(d, terms[0]);
    SteinbergElement b = to_steinberg(d, terms[1]);
    EXPECT_TRUE(equals(a, normalize(a)));
    EXPECT_FALSE(equals(a, add(a, b)));
    EXPECT_FALSE(equals(a, scale(a, 2)));
    EXPECT_TRUE(equals(add(a, b), add(b, a)));
    EXPECT_TRUE(normalize(add(a, scale(a, -1))).is_zero());
}

TEST(Algebra, SameDegreeTermsHaveDisjointSupports) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 10);
    auto terms = single_factor_terms(d, 0);
    for (std::size_t i = 0; i < terms.size(); ++i)
        for (std::size_t j = i + 1; j < terms.size(); ++j) {
            if (terms[i].degree(d) != terms[j].degree(d)) continue;
            EXPECT_TRUE(supports_disjoint(to_steinberg(d, terms[i]), to_steinberg(d, terms[j])))
                << terms[i].name(d) << " vs " << terms[j].name(d);
            EXPECT_TRUE(injectivity_witness(d, terms[i], terms[j]));
        }
    // A term overlaps itself.
    EXPECT_FALSE(supports_disjoint(to_steinberg(d, terms[0]), to_steinberg(d, terms[0])));
}

TEST(Algebra, ColimitSquareCommutes) {
    CommutativityResult r = commutativity_check(small_resolution(), 0, 6);
    EXPECT_TRUE(r.ok) << r.witness;
    EXPECT_GT(r.generators, 0);
}

TEST(Algebra, ParserAcceptsStructuredNames) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 4);
    int checked = 0;
    for (int e = 0; e < static_cast<int>(d.layers[0].edges.size()); ++e)
        for (int f = 0; f < static_cast<int>(d.layers[0].edges.size()); ++f) {
            if (d.edge(0, e).src != d.edge(0, f).src) continue;
            const std::string text = "t(" + d.edge(0, e).id + ", " + d.edge(0, f).id + ")";
            EXPECT_EQ(parse_element(d, 0, text), tau_element(d, 0, e, f)) << text;
            ++checked;
        }
    EXPECT_GT(checked, 0);
    for (int v = 0; v < d.level_size(0); ++v)
        EXPECT_EQ(parse_element(d, 0, "p(" + d.levels[0][v] + ")"), vertex_element(d, 0, v));
}

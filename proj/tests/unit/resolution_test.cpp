// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "fixtures.hpp"
#include "sepshift/ldiagram.hpp"
#include "sepshift/resolution.hpp"

using namespace sepshift;
using sepshift::testing::fixture_digraph;
using sepshift::testing::fixture_gfs;

namespace {

const char* kDigraphs[] = {"digraph_no_000.json", "digraph_one_loop.json", "digraph_three_vertex.json",
                           "digraph_two_loops.json"};

// Renames every vertex and edge and reverses all lists.
Layer disguise(const Layer& l) {
    auto rn = [](const std::string& s) { return "x_" + s; };
    Layer out;
    for (auto it = l.top.rbegin(); it != l.top.rend(); ++it) out.top.push_back(rn(*it));
    for (auto it = l.bottom.rbegin(); it != l.bottom.rend(); ++it) out.bottom.push_back(rn(*it));
    for (auto it = l.edges.rbegin(); it != l.edges.rend(); ++it)
        out.edges.push_back({rn(it->id), rn(it->src), rn(it->tgt), it->color});
    for (const auto& [v, blocks] : l.separation) {
        auto& nb = out.separation[rn(v)];
        for (const auto& b : blocks) {
            nb.emplace_back();
            for (const auto& id : b) nb.back().push_back(rn(id));
        }
    }
    return out;
}

// Whether the maps of an isomorphism carry red multiplicities and blue
// incidences of a onto those of b.
bool preserves_matrices(const Layer& a, const Layer& b, const Isomorphism& iso) {
    std::map<std::tuple<std::string, std::string, Color>, int> ca, cb;
    for (const auto& e : a.edges) ++ca[{iso.bottom.at(e.src), iso.top.at(e.tgt), e.color}];
    for (const auto& e : b.edges) ++cb[{e.src, e.tgt, e.color}];
    return ca == cb;
}

}  // namespace

TEST(Resolution, OneStepBottomCountIsProductOfBlockSizes) {
    for (const char* name : {"gfs_1top_2bottom.json", "gfs_4top_6bottom.json"}) {
        Layer l = fixture_gfs(name);
        std::int64_t expected = 0;
        std::int64_t edges = 0;
        for (const auto& [v, blocks] : l.separation) {
            std::int64_t prod = 1;
            for (const auto& b : blocks) prod *= static_cast<std::int64_t>(b.size());
            expected += prod;
            edges += prod * static_cast<std::int64_t>(blocks.size());
        }
        Layer r = one_step_resolution(l);
        EXPECT_EQ(static_cast<std::int64_t>(r.bottom.size()), expected) << name;
        EXPECT_EQ(static_cast<std::int64_t>(r.edges.size()), edges) << name;
        EXPECT_EQ(r.top, l.bottom);
        EXPECT_TRUE(validate_layer(r).ok()) << validate_layer(r).to_text();
    }
}

TEST(Resolution, OneStepNamesRecordTheChoice) {
    Layer r = one_step_resolution(fixture_gfs("gfs_1top_2bottom.json"));
    EXPECT_NE(std::find(r.bottom.begin(), r.bottom.end(), "v(alpha0,beta2)"), r.bottom.end());
    const Edge* e = r.find_edge("a[beta2](alpha0,^)");
    ASSERT_NE(e, nullptr);
    EXPECT_EQ(e->src, "v(alpha0,beta2)");
    EXPECT_EQ(e->tgt, "w2");
    EXPECT_EQ(e->color, Color::Red);
}

TEST(Resolution, OneStepRespectsBudget) {
    try {
        one_step_resolution(fixture_gfs("gfs_4top_6bottom.json"), 2);
        FAIL() << "expected ResourceBudgetExceeded";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ResourceBudgetExceeded);
    }
}

TEST(Resolution, CanonicalResolutionIsAnLDiagramWithGfsEvenLayers) {
    for (const char* name : {"gfs_1top_2bottom.json", "gfs_4top_6bottom.json"}) {
        LDiagram d = canonical_resolution(fixture_gfs(name), 5);
        EXPECT_TRUE(validate_ldiagram(d).ok()) << validate_ldiagram(d).to_text();
        for (int k = 0; k < d.horizon(); k += 2) EXPECT_TRUE(validate_gfs(layer_of(d, k)).ok()) << name << " " << k;
        for (int k = 0; k < d.horizon(); ++k) EXPECT_TRUE(validate_layer(layer_of(d, k)).ok());
    }
}

TEST(Resolution, FourTopFixtureIsUnrefinedOnlyAtTheBase) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 6);
    EXPECT_EQ(unrefined_layers(d), std::vector<int>{0});
    EXPECT_FALSE(is_refined(d));
    LDiagram small = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6);
    for (int k : unrefined_layers(small)) EXPECT_EQ(k, 0);
}

TEST(Resolution, LevelSizesFollowTheOneStepCount) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 4);
    // Level k+2 is the one-step bottom of layer k, so its size is the sum over
    // level-k vertices of the product of their block sizes.
    for (int k = 0; k + 2 <= d.horizon(); ++k) {
        std::int64_t expected = 0;
        for (const auto& blocks : d.layers[k].sep) {
            std::int64_t prod = 1;
            for (const auto& b : blocks) prod *= static_cast<std::int64_t>(b.edges.size());
            expected += prod;
        }
        EXPECT_EQ(d.level_size(k + 2), expected) << "level " << k + 2;
    }
}

TEST(Resolution, EvenLayersMatchHigherEdgeGraphs) {
    for (const char* name : kDigraphs) {
        Digraph g = fixture_digraph(name);
        for (int n = 1; n <= 2; ++n) {
            Isomorphism iso = check_resolution_vs_higher_edge(g, n);
            EXPECT_TRUE(iso.found) << name << " n=" << n << ": " << iso.witness;
        }
    }
}

TEST(Resolution, IsomorphismFoundOnDisguisedCopy) {
    for (const char* name : {"gfs_1top_2bottom.json", "gfs_4top_6bottom.json"}) {
        Layer a = fixture_gfs(name);
        Layer b = disguise(a);
        Isomorphism iso = find_gfs_isomorphism(a, b);
        ASSERT_TRUE(iso.found) << iso.witness;
        EXPECT_TRUE(preserves_matrices(a, b, iso));
    }
}

TEST(Resolution, IsomorphismRejectsModifiedCopy) {
    Layer a = fixture_gfs("gfs_4top_6bottom.json");
    Layer b = disguise(a);
    const Edge red = *std::find_if(b.edges.begin(), b.edges.end(), [](const Edge& e) { return e.color == Color::Red; });
    b.edges.push_back({"x_extra", red.src, red.tgt, Color::Red});
    b.separation[red.tgt][1].push_back("x_extra");
    Isomorphism iso = find_gfs_isomorphism(a, b);
    EXPECT_FALSE(iso.found);
    EXPECT_FALSE(iso.witness.empty());
}

TEST(Resolution, DigraphIsNotConfusedWithItsReverse) {
    Digraph g = fixture_digraph("digraph_three_vertex.json");
    Digraph rev = g;
    for (auto& e : rev.edges) std::swap(e.src, e.tgt);
    // Vertex a has out-degree 2 and in-degree 1, and no vertex of the reverse
    // has both, so the two graphs are not isomorphic.
    EXPECT_FALSE(find_gfs_isomorphism(gfs_from_digraph(g), gfs_from_digraph(rev)).found);
}

TEST(Resolution, AdjacencyRecursionHolds) {
    for (const char* name : {"gfs_1top_2bottom.json", "gfs_4top_6bottom.json"}) {
        LDiagram d = canonical_resolution(fixture_gfs(name), 5);
        for (int j = 0; j <= 1; ++j) {
            RecursionCheck rc = adjacency_recursion_check(d, j);
            EXPECT_TRUE(rc.ok) << name << " j=" << j << ": " << rc.witness;
            EXPECT_EQ(rc.lhs, rc.rhs);
        }
    }
}

TEST(Resolution, AdjacencyRecursionNeedsDepth) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 4);
    EXPECT_THROW(adjacency_recursion_check(d, 1), Error);
}

TEST(Resolution, RedAdjacencyCountsRedEdges) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 3);
    for (int k = 0; k < d.horizon(); ++k) {
        IntMatrix m = red_adjacency(d, k);
        ASSERT_EQ(static_cast<int>(m.rows.size()), d.level_size(k + 1));
        ASSERT_EQ(static_cast<int>(m.cols.size()), d.level_size(k));
        std::int64_t total = 0, red = 0;
        for (const auto& row : m.a)
            for (auto x : row) total += x;
        for (const auto& e : d.layers[k].edges) red += e.color == Color::Red;
        EXPECT_EQ(total, red) << "layer " << k;
    }
}

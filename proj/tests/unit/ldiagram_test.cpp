// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "sepshift/ldiagram.hpp"
#include "sepshift/resolution.hpp"
#include "sepshift/symbolic.hpp"

using namespace sepshift;
using sepshift::testing::fixture_digraph;
using sepshift::testing::fixture_gfs;

namespace {

std::vector<LDiagram> sample_diagrams() {
    return {
        canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6),
        canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 5),
        canonical_resolution(gfs_from_digraph(fixture_digraph("digraph_two_loops.json")), 6),
        build_ldiagram(SymbolicSystem::parse("full1:2"), 8),
        build_ldiagram(SymbolicSystem::parse("full2:2"), 6),
    };
}

// Every romb closing the blue pair (e0, e1) at an even base level, found by
// scanning all red pairs.
std::vector<Romb> rombs_from_blue(const LDiagram& d, int k, int e0, int e1) {
    std::vector<Romb> out;
    const auto& L0 = d.layers[k];
    const auto& L1 = d.layers[k + 1];
    for (int f0 = 0; f0 < static_cast<int>(L0.edges.size()); ++f0) {
        if (L0.edges[f0].color != Color::Red || L0.edges[f0].rng != L0.edges[e0].rng) continue;
        for (int f1 = 0; f1 < static_cast<int>(L1.edges.size()); ++f1) {
            const DEdge& r = L1.edges[f1];
            if (r.color != Color::Red || r.rng != L0.edges[f0].src || r.src != L1.edges[e1].src) continue;
            if (d.block_parent(k + 1, f1) != f0) continue;
            out.push_back({k, e0, e1, f0, f1});
        }
    }
    return out;
}

// Every blue pair closing the red pair (f0, f1).
std::vector<Romb> rombs_from_red(const LDiagram& d, int k, int f0, int f1) {
    std::vector<Romb> out;
    const auto& L0 = d.layers[k];
    const auto& L1 = d.layers[k + 1];
    for (int e0 = 0; e0 < static_cast<int>(L0.edges.size()); ++e0) {
        if (L0.edges[e0].color != Color::Blue || L0.edges[e0].rng != L0.edges[f0].rng) continue;
        for (int e1 = 0; e1 < static_cast<int>(L1.edges.size()); ++e1) {
            const DEdge& b = L1.edges[e1];
            if (b.color != Color::Blue || b.rng != L0.edges[e0].src || b.src != L1.edges[f1].src) continue;
            out.push_back({k, e0, e1, f0, f1});
        }
    }
    return out;
}

}  // namespace

TEST(LDiagram, SampleDiagramsValidate) {
    for (const LDiagram& d : sample_diagrams()) {
        Report r = validate_ldiagram(d);
        EXPECT_TRUE(r.ok()) << r.to_text();
    }
}

TEST(LDiagram, ValidatorCatchesRecoloredEdge) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 4);
    for (int k = 0; k < d.horizon(); ++k) {
        LDiagram bad = d;
        for (auto& e : bad.layers[k].edges)
            if (e.color == Color::Red) {
                e.color = Color::Blue;
                break;
            }
        bad.finalize();
        EXPECT_FALSE(validate_ldiagram(bad).ok()) << "layer " << k;
    }
}

TEST(LDiagram, ValidatorCatchesMissingRedEdge) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 4);
    LDiagram bad = d;
    auto& L = bad.layers[1];
    int victim = -1;
    for (int i = 0; i < static_cast<int>(L.edges.size()); ++i)
        if (L.edges[i].color == Color::Red) victim = i;
    ASSERT_GE(victim, 0);
    std::vector<Layer> layers = d.to_layers();
    std::string id = L.edges[victim].id;
    Layer& l1 = layers[1];
    l1.edges.erase(std::remove_if(l1.edges.begin(), l1.edges.end(), [&](const Edge& e) { return e.id == id; }),
                   l1.edges.end());
    for (auto& [v, blocks] : l1.separation) {
        for (auto& b : blocks) b.erase(std::remove(b.begin(), b.end(), id), b.end());
        for (std::size_t i = blocks.size(); i-- > 0;)
            if (blocks[i].empty()) {
                blocks.erase(blocks.begin() + static_cast<long>(i));
                auto& tags = l1.block_parents[v];
                if (i < tags.size()) tags.erase(tags.begin() + static_cast<long>(i));
            }
    }
    EXPECT_FALSE(validate_ldiagram(LDiagram::from_layers(layers)).ok());
}

TEST(LDiagram, JsonRoundTrip) {
    for (const LDiagram& d : sample_diagrams()) {
        LDiagram back = LDiagram::from_json(d.to_json());
        EXPECT_TRUE(structurally_equal(d, back));
        EXPECT_TRUE(structurally_equal(d, LDiagram::from_layers(d.to_layers())));
    }
}

TEST(LDiagram, RombFromBlueIsUniqueAndMatchesSolver) {
    for (const LDiagram& d : sample_diagrams()) {
        for (int k = 0; k + 1 < d.horizon(); k += 2) {
            for (int e0 = 0; e0 < static_cast<int>(d.layers[k].edges.size()); ++e0) {
                if (d.edge(k, e0).color != Color::Blue) continue;
                for (int e1 = 0; e1 < static_cast<int>(d.layers[k + 1].edges.size()); ++e1) {
                    if (d.edge(k + 1, e1).color != Color::Blue || d.edge(k + 1, e1).rng != d.edge(k, e0).src) continue;
                    auto all = rombs_from_blue(d, k, e0, e1);
                    ASSERT_EQ(all.size(), 1u) << "layer " << k;
                    EXPECT_EQ(complete_romb_from_blue(d, k, e0, e1), all[0]);
                }
            }
        }
    }
}

TEST(LDiagram, RombFromRedIsUniqueAndMatchesSolver) {
    for (const LDiagram& d : sample_diagrams()) {
        for (int k = 0; k + 1 < d.horizon(); ++k) {
            for (int f1 = 0; f1 < static_cast<int>(d.layers[k + 1].edges.size()); ++f1) {
                if (d.edge(k + 1, f1).color != Color::Red) continue;
                for (int f0 = 0; f0 < static_cast<int>(d.layers[k].edges.size()); ++f0) {
                    if (d.edge(k, f0).color != Color::Red || d.edge(k, f0).src != d.edge(k + 1, f1).rng) continue;
                    if (k % 2 == 0 && d.block_parent(k + 1, f1) != f0) continue;
                    auto all = rombs_from_red(d, k, f0, f1);
                    ASSERT_EQ(all.size(), 1u) << "layer " << k;
                    EXPECT_EQ(complete_romb_from_red(d, k, f0, f1), all[0]);
                }
            }
        }
    }
}

TEST(LDiagram, RombSolverRejectsOpenPair) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 4);
    // A blue pair that does not chain (s(e0) != r(e1)) has no completion.
    int e0 = -1, e1 = -1;
    for (int i = 0; i < static_cast<int>(d.layers[0].edges.size()) && e0 < 0; ++i)
        if (d.edge(0, i).color == Color::Blue) e0 = i;
    for (int i = 0; i < static_cast<int>(d.layers[1].edges.size()) && e1 < 0; ++i)
        if (d.edge(1, i).color == Color::Blue && d.edge(1, i).rng != d.edge(0, e0).src) e1 = i;
    ASSERT_GE(e1, 0);
    EXPECT_THROW(complete_romb_from_blue(d, 0, e0, e1), Error);
}

TEST(LDiagram, ContractionSequenceRules) {
    EXPECT_NO_THROW((ContractionSequence{{0, 1, 4, 5}}.check()));
    EXPECT_NO_THROW((ContractionSequence{{2, 5}}.check()));
    for (std::vector<int> bad : {std::vector<int>{1, 2}, {0, 2}, {0, 3, 2}, {0, 0}}) {
        try {
            ContractionSequence{bad}.check();
            ADD_FAILURE() << "accepted a sequence of size " << bad.size();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::CRViolated);
        }
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) EXPECT_NO_THROW(ContractionSequence::random(rng, 12).check());
}

TEST(LDiagram, TelescopeByIdentityChangesOnlyNames) {
    for (const LDiagram& d : sample_diagrams()) {
        LDiagram t = telescope(d, ContractionSequence::identity(d.horizon()));
        std::string why;
        EXPECT_TRUE(equal_up_to_edge_names(d, t, &why)) << why;
    }
}

TEST(LDiagram, TelescopeKeepsDiagramsValid) {
    std::mt19937_64 rng(11);
    for (const LDiagram& d : sample_diagrams()) {
        for (int i = 0; i < 4; ++i) {
            ContractionSequence m = ContractionSequence::random(rng, d.horizon());
            if (m.m.size() < 2) continue;
            LDiagram t = telescope(d, m);
            EXPECT_EQ(t.horizon(), static_cast<int>(m.m.size()) - 1);
            Report r = validate_ldiagram(t);
            EXPECT_TRUE(r.ok()) << r.to_text();
            for (std::size_t n = 0; n < m.m.size(); ++n) EXPECT_EQ(t.levels[n], d.levels[m.m[n]]);
        }
    }
}

TEST(LDiagram, TelescopeComposes) {
    const LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 12);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        std::mt19937_64 rng(seed);
        ContractionSequence m = ContractionSequence::random(rng, d.horizon());
        if (m.m.size() < 3) continue;
        ContractionSequence m2 = ContractionSequence::random(rng, static_cast<int>(m.m.size()) - 1, 1);
        if (m2.m.size() < 2) continue;
        LDiagram twice = telescope(telescope(d, m), m2);
        LDiagram once = telescope(d, compose(m, m2));
        std::string why;
        EXPECT_TRUE(equal_up_to_edge_names(twice, once, &why)) << "seed " << seed << ": " << why;
    }
}

TEST(LDiagram, TelescopeRejectsBadSequence) {
    const LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 4);
    EXPECT_THROW(telescope(d, ContractionSequence{{0, 2}}), Error);
    EXPECT_THROW(telescope(d, ContractionSequence{{0, 1, 6}}), Error);
}

TEST(LDiagram, TruncationKeepsPrefix) {
    const LDiagram d = build_ldiagram(SymbolicSystem::parse("full2:2"), 6);
    LDiagram t = d.truncated(3);
    EXPECT_EQ(t.horizon(), 3);
    EXPECT_TRUE(equal_up_to_edge_names(t, telescope(d, ContractionSequence{{0, 1, 2, 3}})));
    EXPECT_TRUE(validate_ldiagram(t).ok());
}

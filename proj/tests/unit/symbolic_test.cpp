// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <iterator>
#include <map>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "sepshift/ldiagram.hpp"
#include "sepshift/symbolic.hpp"

using namespace sepshift;
using sepshift::testing::fixture_digraph;

namespace {

// Points are admissible words on the window [kLo, kHi]; every clopen used
// below lives well inside it, and the shift moves one letter off either end.
constexpr int kLo = -3;
constexpr int kHi = 3;

std::vector<SymbolicSystem> systems() {
    return {SymbolicSystem::parse("full1:2"), SymbolicSystem::parse("full2:2"),
            SymbolicSystem::edge_shift(fixture_digraph("digraph_three_vertex.json"))};
}

int point_lo(const SymbolicSystem& s) { return s.one_sided() ? 0 : kLo; }

bool contains(const Clopen& c, const Word& x, int x_lo) {
    if (c.words.empty()) return false;
    if (c.hi < c.lo) return true;
    Word slice(x.begin() + (c.lo - x_lo), x.begin() + (c.hi - x_lo) + 1);
    return std::binary_search(c.words.begin(), c.words.end(), slice);
}

std::set<Word> members(const SymbolicSystem& s, const Clopen& c) {
    std::set<Word> out;
    for (const auto& x : s.all_words(point_lo(s), kHi))
        if (contains(c, x, point_lo(s))) out.insert(x);
    return out;
}

// Random clopen set: a random subset of the words on a random small window.
Clopen random_clopen(const SymbolicSystem& s, std::mt19937_64& rng) {
    int lo = s.one_sided() ? static_cast<int>(rng() % 2) : -1 + static_cast<int>(rng() % 2);
    int hi = lo + static_cast<int>(rng() % 2);
    Clopen c{lo, hi, {}};
    for (const auto& w : s.all_words(lo, hi))
        if (rng() % 2) c.words.push_back(w);
    return c;
}

}  // namespace

TEST(Symbolic, BooleanOperationsMatchPointSets) {
    std::mt19937_64 rng(3);
    for (const auto& s : systems()) {
        for (int trial = 0; trial < 40; ++trial) {
            Clopen a = random_clopen(s, rng), b = random_clopen(s, rng);
            auto A = members(s, a), B = members(s, b);
            std::set<Word> I, U, D;
            std::set_intersection(A.begin(), A.end(), B.begin(), B.end(), std::inserter(I, I.end()));
            std::set_union(A.begin(), A.end(), B.begin(), B.end(), std::inserter(U, U.end()));
            std::set_difference(A.begin(), A.end(), B.begin(), B.end(), std::inserter(D, D.end()));
            EXPECT_EQ(members(s, s.intersect(a, b)), I) << s.describe();
            EXPECT_EQ(members(s, s.unite(a, b)), U) << s.describe();
            EXPECT_EQ(members(s, s.subtract(a, b)), D) << s.describe();
            EXPECT_EQ(s.subset(a, b), std::includes(B.begin(), B.end(), A.begin(), A.end()));
            EXPECT_EQ(s.equal(a, b), A == B);
        }
    }
}

TEST(Symbolic, CanonicalFormIsUniquePerSet) {
    std::mt19937_64 rng(5);
    for (const auto& s : systems()) {
        for (int trial = 0; trial < 40; ++trial) {
            Clopen a = random_clopen(s, rng);
            Clopen wide = s.refine(a, a.lo - (s.one_sided() ? 0 : 1), a.hi + 1);
            if (s.one_sided() && a.lo > 0) wide = s.refine(a, 0, a.hi + 1);
            EXPECT_EQ(members(s, wide), members(s, a));
            EXPECT_EQ(s.canonical(wide), s.canonical(a));
            EXPECT_EQ(s.name(wide), s.name(a));
        }
    }
}

TEST(Symbolic, ImageAndPreimageMatchWordShift) {
    std::mt19937_64 rng(9);
    for (const auto& s : systems()) {
        const int lo = point_lo(s);
        for (int trial = 0; trial < 30; ++trial) {
            Clopen c = random_clopen(s, rng);
            // sigma^{-1}(c) = {x : sigma(x) in c}; sigma(x) is x read one place later.
            std::set<Word> pre;
            for (const auto& x : s.all_words(lo, kHi + 1)) {
                Word shifted(x.begin() + 1, x.end());
                if (contains(c, shifted, lo)) pre.insert(Word(x.begin(), x.end() - 1));
            }
            EXPECT_EQ(members(s, s.preimage(c)), pre) << s.describe();

            // sigma(c) = {sigma(x) : x in c}.
            std::set<Word> img;
            for (const auto& x : s.all_words(lo - (s.one_sided() ? 0 : 1), kHi + 1)) {
                const int xlo = lo - (s.one_sided() ? 0 : 1);
                if (!contains(c, x, xlo)) continue;
                if (s.one_sided()) img.insert(Word(x.begin() + 1, x.end()));
                else img.insert(Word(x.begin() + 2, x.end()));
            }
            EXPECT_EQ(members(s, s.image(c)), img) << s.describe();
        }
    }
}

TEST(Symbolic, InjectivityOnCylinders) {
    SymbolicSystem s = SymbolicSystem::parse("full1:2");
    EXPECT_FALSE(s.injective_on(s.whole()));
    EXPECT_FALSE(s.injective_on(s.cylinder(1, {0})));
    EXPECT_TRUE(s.injective_on(s.cylinder(0, {1})));
    EXPECT_TRUE(SymbolicSystem::parse("full2:3").injective_on(SymbolicSystem::parse("full2:3").whole()));
}

TEST(Symbolic, NaturalPartitionsPartitionTheSpace) {
    for (const auto& s : systems()) {
        for (int n = 0; n <= 3; ++n) {
            std::set<Word> seen;
            std::size_t total = 0;
            for (const auto& c : s.natural_partition(n)) {
                auto m = members(s, c);
                EXPECT_FALSE(m.empty());
                total += m.size();
                seen.insert(m.begin(), m.end());
            }
            EXPECT_EQ(total, seen.size()) << "cells overlap";
            EXPECT_EQ(seen, members(s, s.whole()));
        }
    }
}

TEST(Symbolic, WedgeIsCommonRefinement) {
    for (const auto& s : systems()) {
        Partition p = s.natural_partition(1);
        Partition q = preimage_partition(s, p);
        Partition w = wedge(s, {p, q});
        for (const auto& cell : w) {
            int in_p = 0, in_q = 0;
            for (const auto& c : p) in_p += s.subset(cell, c);
            for (const auto& c : q) in_q += s.subset(cell, c);
            EXPECT_EQ(in_p, 1);
            EXPECT_EQ(in_q, 1);
        }
    }
}

TEST(Symbolic, PreimageCountsMatchLetterCounts) {
    for (const auto& s : systems()) {
        if (!s.one_sided()) continue;
        PreimageCounts pc = preimage_counts(s, s.natural_partition(1));
        std::map<int, std::set<Word>> exactly;
        for (const auto& x : s.all_words(0, kHi)) {
            int n = 0;
            for (int a = 0; a < s.alphabet(); ++a) n += s.follows(a, x[0]);
            exactly[n].insert(x);
        }
        EXPECT_EQ(pc.n_sigma, exactly.rbegin()->first);
        ASSERT_EQ(static_cast<int>(pc.exactly.size()), pc.n_sigma);
        for (int i = 1; i <= pc.n_sigma; ++i) EXPECT_EQ(members(s, pc.exactly[i - 1]), exactly[i]) << i;
    }
}

TEST(Symbolic, NonInjectivePartitionIsRejected) {
    SymbolicSystem s = SymbolicSystem::parse("full1:2");
    try {
        sigma_partition(s, Partition{s.whole()});
        FAIL() << "expected NonInjectiveCell";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonInjectiveCell);
    }
}

TEST(Symbolic, BuiltDiagramCellsAreNestedPartitions) {
    for (const auto& s : systems()) {
        BuiltDiagram b = build_ldiagram_cells(s, 6);
        EXPECT_TRUE(validate_ldiagram(b.diagram).ok()) << validate_ldiagram(b.diagram).to_text();
        for (int n = 0; n <= b.diagram.horizon(); ++n) {
            ASSERT_EQ(static_cast<int>(b.cells[n].size()), b.diagram.level_size(n));
            Clopen all = s.empty();
            for (const auto& c : b.cells[n]) {
                EXPECT_TRUE(s.is_empty(s.intersect(all, c)));
                all = s.unite(all, c);
            }
            EXPECT_TRUE(s.equal(all, s.whole()));
        }
        for (int k = 0; k < b.diagram.horizon(); ++k)
            for (const auto& e : b.diagram.layers[k].edges) {
                const Clopen& lower = b.cells[k + 1][e.src];
                const Clopen& upper = b.cells[k][e.rng];
                if (e.color == Color::Blue) EXPECT_TRUE(s.subset(lower, upper));
                else if (k % 2 == 0) EXPECT_TRUE(s.subset(lower, s.image(upper)));
                else EXPECT_TRUE(s.subset(s.image(lower), upper));
            }
    }
}

TEST(Symbolic, ParseRejectsUnknownSystems) {
    for (std::string bad : {"full3:2", "full1:0", "loop", "nonsense"}) EXPECT_THROW(SymbolicSystem::parse(bad), Error) << bad;
}

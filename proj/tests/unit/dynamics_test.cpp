// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "sepshift/dynamics.hpp"
#include "sepshift/oracle.hpp"
#include "sepshift/resolution.hpp"
#include "sepshift/symbolic.hpp"

using namespace sepshift;
using sepshift::testing::fixture_gfs;

namespace {

// The clopen set of a cylinder union, read off the cells of a built diagram.
Clopen cells_of(const SymbolicSystem& s, const BuiltDiagram& b, const CylinderSet& c) {
    Clopen out = s.empty();
    for (const auto& p : c.cells) out = s.unite(out, b.cells[p.depth()][end_vertex(b.diagram, p)]);
    return out;
}

CylinderSet single(const LDiagram& d, const BluePrefix& p) { return normalize(d, {p}); }

}  // namespace

TEST(Dynamics, WordOracleAgreesWithPrefixShift) {
    for (const char* name : {"full1:2", "full1:3", "full2:2"}) {
        SymbolicSystem s = SymbolicSystem::parse(name);
        BuiltDiagram b = build_ldiagram_cells(s, 6);
        OracleReport o = word_shift_oracle(s, b, 6);
        EXPECT_TRUE(o.ok) << name << ": " << o.witness;
        EXPECT_GT(o.checked, 0);
    }
}

TEST(Dynamics, PrefixNamesRoundTrip) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 6);
    for (int depth = 0; depth <= 4; ++depth)
        for (const auto& p : all_prefixes(d, depth)) {
            EXPECT_EQ(parse_prefix(d, prefix_name(d, p)), p);
            EXPECT_EQ(prefix_to_vertex(d, depth, end_vertex(d, p)), p);
            EXPECT_EQ(parse_prefix(d, "@" + std::to_string(depth) + ":" + d.levels[depth][end_vertex(d, p)]), p);
        }
    EXPECT_THROW(parse_prefix(d, "no-such-vertex"), Error);
}

TEST(Dynamics, ExtensionsPartitionTheCylinder) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full2:2"), 6);
    for (const auto& p : all_prefixes(d, 2)) {
        auto ext = extensions(d, p, 5);
        for (const auto& q : ext) EXPECT_TRUE(extends(q, p));
        EXPECT_EQ(normalize(d, ext), single(d, p));
    }
}

TEST(Dynamics, ShiftedCylinderImagesMatchClopenImages) {
    for (const char* name : {"full1:2", "full2:2"}) {
        SymbolicSystem s = SymbolicSystem::parse(name);
        BuiltDiagram b = build_ldiagram_cells(s, 8);
        const LDiagram& d = b.diagram;
        for (int depth = 1; depth <= 4; ++depth)
            for (const auto& p : all_prefixes(d, depth)) {
                const Clopen z = b.cells[depth][end_vertex(d, p)];
                EXPECT_TRUE(s.equal(cells_of(s, b, sigma_image(d, p, 1)), s.image(z))) << name << " " << prefix_name(d, p);
                EXPECT_TRUE(s.equal(cells_of(s, b, sigma_preimage_set(d, p, 1)), s.preimage(z)))
                    << name << " " << prefix_name(d, p);
            }
    }
}

TEST(Dynamics, ShiftPrefixContainsImage) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 8);
    for (int depth = 2; depth <= 6; depth += 2)
        for (const auto& p : all_prefixes(d, depth)) {
            BluePrefix q = shift_prefix(d, p);
            EXPECT_EQ(q.depth(), depth - 1);
            EXPECT_TRUE(subset(d, sigma_image(d, p, 1), single(d, q)));
        }
}

TEST(Dynamics, PreimageBranchesCoverThePreimage) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 8);
    for (int depth = 1; depth <= 5; depth += 2)
        for (const auto& q : all_prefixes(d, depth)) {
            auto branches = preimages(d, q);
            std::vector<BluePrefix> cells;
            for (const auto& br : branches) {
                EXPECT_EQ(br.prefix.depth(), depth - 1);
                cells.push_back(br.prefix);
            }
            // The branches are pairwise distinct and every depth-(depth+1)
            // prefix mapping onto q lies in one of them.
            std::sort(cells.begin(), cells.end());
            EXPECT_EQ(std::adjacent_find(cells.begin(), cells.end()), cells.end());
            for (const auto& p : all_prefixes(d, depth + 1)) {
                if (shift_prefix(d, p) != q) continue;
                BluePrefix t = truncate(p, depth - 1);
                EXPECT_TRUE(std::binary_search(cells.begin(), cells.end(), t)) << prefix_name(d, p);
            }
        }
}

TEST(Dynamics, ImageOfPreimageForSurjectiveShift) {
    for (const char* name : {"full1:2", "full2:2"}) {
        LDiagram d = build_ldiagram(SymbolicSystem::parse(name), 8);
        for (const auto& q : all_prefixes(d, 3)) {
            CylinderSet back = sigma_image(d, sigma_preimage_set(d, q, 1), 1);
            EXPECT_EQ(back, single(d, q)) << name << " " << prefix_name(d, q);
        }
        for (const auto& p : all_prefixes(d, 2))
            EXPECT_TRUE(subset(d, single(d, p), sigma_preimage_set(d, sigma_image(d, p, 1), 1)));
    }
}

TEST(Dynamics, CylinderSetAlgebra) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 6);
    auto ps = all_prefixes(d, 2);
    ASSERT_GE(ps.size(), 3u);
    CylinderSet a = normalize(d, {ps[0], ps[1]});
    CylinderSet b = normalize(d, {ps[1], ps[2]});
    EXPECT_EQ(intersect(d, a, b), single(d, ps[1]));
    EXPECT_EQ(unite(d, a, b), normalize(d, {ps[0], ps[1], ps[2]}));
    EXPECT_FALSE(disjoint(d, a, b));
    EXPECT_TRUE(disjoint(d, single(d, ps[0]), single(d, ps[2])));
    EXPECT_TRUE(subset(d, single(d, ps[1]), a));
    EXPECT_FALSE(subset(d, a, b));
    EXPECT_EQ(normalize(d, refine_to(d, a, 4)), a);
}

TEST(Dynamics, CylinderDecompositionMatchesLayerMatrices) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 5);
    CheckResult bij;
    SigmaCylinderDecomposition dec = extract_cylinder_decomposition(d, 0, &bij);
    EXPECT_TRUE(bij.ok) << bij.witness;
    auto [A, I] = red_blue_matrices(layer_of(d, 0));
    // Rows of the decomposition are named by level-1 vertices, as in layer 0.
    auto sorted = [](IntMatrix m) {
        std::vector<std::tuple<std::string, std::string, std::int64_t>> out;
        for (std::size_t i = 0; i < m.rows.size(); ++i)
            for (std::size_t j = 0; j < m.cols.size(); ++j)
                if (m.a[i][j]) out.emplace_back(m.rows[i], m.cols[j], m.a[i][j]);
        std::sort(out.begin(), out.end());
        return out;
    };
    EXPECT_EQ(sorted(dec.A), sorted(A));
    EXPECT_EQ(sorted(dec.I), sorted(I));
}

TEST(Dynamics, FinerDecompositionRefinesCoarser) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6);
    auto coarse = extract_cylinder_decomposition(d, 0);
    auto fine = extract_cylinder_decomposition(d, 2);
    CheckResult r = check_refinement(d, fine, coarse);
    EXPECT_TRUE(r.ok) << r.witness;
}

TEST(Dynamics, TauMatchesBallAtShiftedPoint) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6);
    int compared = 0;
    for (const auto& p : all_prefixes(d, 4)) {
        ConfigBall moved = tau(config_ball(d, p, 2));
        ConfigBall direct = config_ball(d, shift_prefix(d, p), 1);
        EXPECT_EQ(moved.words, direct.words) << prefix_name(d, p);
        ++compared;
    }
    EXPECT_GT(compared, 0);
}

TEST(Dynamics, BallsContainIdentityAndAreClosedUnderPrefixes) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 8);
    for (const auto& p : all_prefixes(d, 6)) {
        ConfigBall b = config_ball(d, p, 2);
        EXPECT_TRUE(b.words.count(FreeWord{}));
        for (const auto& w : b.words) {
            EXPECT_LE(static_cast<int>(w.size()), 2);
            for (std::size_t i = 0; i + 1 < w.size(); ++i) EXPECT_NE(w[i], -w[i + 1]) << "unreduced word";
            if (!w.empty()) EXPECT_TRUE(b.words.count(FreeWord(w.begin() + 1, w.end())));
        }
    }
}

TEST(Dynamics, ShortPrefixHasNoBall) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full1:2"), 8);
    try {
        config_ball(d, all_prefixes(d, 1)[0], 3);
        FAIL() << "expected InsufficientDepth";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientDepth);
    }
}

TEST(Dynamics, UniversalMapOfLayerZeroIsTheBall) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_1top_2bottom.json"), 6);
    Layer g = layer_of(d, 0);
    StructureMap st = default_structure(d, g);
    for (const auto& p : all_prefixes(d, 4))
        EXPECT_EQ(universal_map(d, p, 1, g, st).words, config_ball(d, p, 1).words) << prefix_name(d, p);
    EXPECT_THROW(default_structure(d, fixture_gfs("gfs_4top_6bottom.json")), Error);
}

TEST(Dynamics, InverseLimitIsConsistent) {
    for (const LDiagram& d : {build_ldiagram(SymbolicSystem::parse("full1:2"), 8),
                              canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 8)}) {
        CheckResult r = inverse_limit_check(d, 4);
        EXPECT_TRUE(r.ok) << r.witness;
        EXPECT_GT(r.checked, 0);
    }
}

TEST(Dynamics, FiberModelsAgree) {
    LDiagram d = build_ldiagram(SymbolicSystem::parse("full2:2"), 10);
    for (auto [m, n] : {std::pair{1, 0}, {0, 1}, {1, 1}}) {
        CheckResult res = fiber_bijection_check(d, m, n, -1, -1, FiberModel::Resolution);
        CheckResult conf = fiber_bijection_check(d, m, n, -1, -1, FiberModel::Configuration);
        EXPECT_TRUE(res.ok) << res.witness;
        EXPECT_TRUE(conf.ok) << conf.witness;
        EXPECT_EQ(res.checked, conf.checked);
        EXPECT_EQ(res.note, "resolution model");
        EXPECT_EQ(conf.note, "configuration model");
    }
}

TEST(Dynamics, FiberCheckOnGfsFixture) {
    LDiagram d = canonical_resolution(fixture_gfs("gfs_4top_6bottom.json"), 10);
    CheckResult r = fiber_bijection_check(d, 1, 1);
    EXPECT_TRUE(r.ok) << r.witness;
    EXPECT_FALSE(r.note.empty());
}

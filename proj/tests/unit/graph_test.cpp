// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/resolution.hpp"

using namespace sepshift;
using sepshift::testing::fixture_digraph;
using sepshift::testing::fixture_gfs;
using sepshift::testing::read_fixture;

namespace {

bool has_rule(const Report& r, const std::string& rule) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

// Counts edges directly from the edge list, keyed by vertex names.
std::map<std::pair<std::string, std::string>, std::int64_t> count_edges(const Layer& l, Color c) {
    std::map<std::pair<std::string, std::string>, std::int64_t> out;
    for (const auto& e : l.edges)
        if (e.color == c) ++out[{e.src, e.tgt}];
    return out;
}

// Number of paths with n edges, by depth-first enumeration.
std::int64_t count_paths(const Digraph& g, int n) {
    std::int64_t total = 0;
    std::function<void(const std::string&, int)> walk = [&](const std::string& v, int left) {
        if (left == 0) {
            ++total;
            return;
        }
        for (const auto& e : g.edges)
            if (e.src == v) walk(e.tgt, left - 1);
    };
    for (const auto& v : g.vertices) walk(v, n);
    return total;
}

const char* kDigraphs[] = {"digraph_no_000.json", "digraph_one_loop.json", "digraph_three_vertex.json",
                           "digraph_two_loops.json"};
const char* kGfs[] = {"gfs_1top_2bottom.json", "gfs_4top_6bottom.json"};

}  // namespace

TEST(Graph, FixturesAreGeneralizedFiniteShiftGraphs) {
    for (const char* name : kGfs) {
        ParsedGraph p = parse_graph(read_fixture(name));
        EXPECT_EQ(p.kind, GraphKind::Gfs) << name;
        EXPECT_TRUE(validate_layer(p.layer).ok()) << name;
        EXPECT_TRUE(validate_gfs(p.layer).ok()) << name << validate_gfs(p.layer).to_text();
    }
}

TEST(Graph, JsonRoundTripPreservesStructure) {
    for (const char* name : kGfs) {
        Layer l = fixture_gfs(name);
        Layer back = parse_graph(serialize_graph(l, GraphKind::Gfs)).layer;
        EXPECT_TRUE(structurally_equal(l, back)) << name;
    }
    for (const char* name : kDigraphs) {
        Digraph g = fixture_digraph(name);
        ParsedGraph back = parse_graph(serialize_graph(g));
        EXPECT_EQ(back.kind, GraphKind::Digraph);
        EXPECT_TRUE(structurally_equal(g, back.digraph)) << name;
    }
}

TEST(Graph, StructuralEqualityIgnoresOrderButNotContent) {
    Layer l = fixture_gfs("gfs_4top_6bottom.json");
    Layer shuffled = l;
    std::reverse(shuffled.edges.begin(), shuffled.edges.end());
    std::reverse(shuffled.top.begin(), shuffled.top.end());
    std::reverse(shuffled.bottom.begin(), shuffled.bottom.end());
    EXPECT_TRUE(structurally_equal(l, shuffled));

    Layer recolored = l;
    for (auto& e : recolored.edges)
        if (e.color == Color::Red) {
            e.color = Color::Blue;
            break;
        }
    EXPECT_FALSE(structurally_equal(l, recolored));
}

TEST(Graph, ValidatorReportsEveryBrokenRule) {
    Layer l = fixture_gfs("gfs_1top_2bottom.json");
    Layer bad = l;
    bad.edges.push_back({"alpha0", "w1", "v", Color::Blue});  // duplicate id
    bad.edges.push_back({"ghost", "nowhere", "v", Color::Red});
    Report r = validate_layer(bad);
    EXPECT_TRUE(has_rule(r, "unique-edge"));
    EXPECT_TRUE(has_rule(r, "edge-source"));
    EXPECT_TRUE(has_rule(r, "block-cover"));
    EXPECT_GE(r.violations.size(), 3u);
}

TEST(Graph, GfsValidatorRejectsSharedBlueSource) {
    Layer l = fixture_gfs("gfs_1top_2bottom.json");
    ASSERT_TRUE(validate_gfs(l).ok());
    Layer bad = l;
    for (auto& e : bad.edges)
        if (e.id == "alpha1") e.src = "w1";
    Report r = validate_gfs(bad);
    EXPECT_TRUE(has_rule(r, "gfs.blue-sources-distinct"));
    EXPECT_TRUE(has_rule(r, "gfs.blue-partition"));
}

TEST(Graph, GfsValidatorRejectsBottomWithoutRedEdge) {
    Layer l = fixture_gfs("gfs_1top_2bottom.json");
    l.bottom.push_back("w3");
    l.edges.push_back({"alpha2", "w3", "v", Color::Blue});
    l.separation["v"][0].push_back("alpha2");
    EXPECT_TRUE(has_rule(validate_gfs(l), "gfs.red-cover"));
}

TEST(Graph, MatricesMatchEdgeCounts) {
    for (const char* name : kGfs) {
        Layer l = fixture_gfs(name);
        auto [A, I] = red_blue_matrices(l);
        EXPECT_TRUE(std::is_sorted(A.rows.begin(), A.rows.end()));
        EXPECT_TRUE(std::is_sorted(A.cols.begin(), A.cols.end()));
        EXPECT_EQ(A.rows, I.rows);
        EXPECT_EQ(A.cols, I.cols);
        auto red = count_edges(l, Color::Red);
        auto blue = count_edges(l, Color::Blue);
        for (std::size_t i = 0; i < A.rows.size(); ++i)
            for (std::size_t j = 0; j < A.cols.size(); ++j) {
                EXPECT_EQ(A.a[i][j], (red[{A.rows[i], A.cols[j]}]));
                EXPECT_EQ(I.a[i][j], (blue[{I.rows[i], I.cols[j]}]));
            }
    }
}

TEST(Graph, SmallFixtureMatrices) {
    auto [A, I] = red_blue_matrices(fixture_gfs("gfs_1top_2bottom.json"));
    EXPECT_EQ(A.a, (std::vector<std::vector<std::int64_t>>{{2}, {1}}));
    EXPECT_EQ(I.a, (std::vector<std::vector<std::int64_t>>{{1}, {1}}));
}

TEST(Graph, DigraphGivesGfsWithOneBlueAndRedPerEdge) {
    for (const char* name : kDigraphs) {
        Digraph g = fixture_digraph(name);
        Layer l = gfs_from_digraph(g);
        EXPECT_TRUE(validate_gfs(l).ok()) << name;
        EXPECT_EQ(l.top.size(), g.vertices.size());
        EXPECT_EQ(l.bottom.size(), g.vertices.size());
        EXPECT_EQ(count_edges(l, Color::Blue).size(), g.vertices.size());
        std::int64_t red = 0;
        for (const auto& [k, c] : count_edges(l, Color::Red)) red += c;
        EXPECT_EQ(red, static_cast<std::int64_t>(g.edges.size()));
        // Red multiplicities reproduce the adjacency matrix.
        auto [A, I] = red_blue_matrices(l);
        std::map<std::pair<std::string, std::string>, std::int64_t> adj;
        for (const auto& e : g.edges) ++adj[{"v_" + e.src, "v^" + e.tgt}];
        for (std::size_t i = 0; i < A.rows.size(); ++i)
            for (std::size_t j = 0; j < A.cols.size(); ++j) EXPECT_EQ(A.a[i][j], (adj[{A.rows[i], A.cols[j]}]));
    }
}

TEST(Graph, SinksAndSourcesAreRejected) {
    Digraph g = fixture_digraph("digraph_three_vertex.json");
    g.vertices.push_back("d");
    g.edges.push_back({"cd", "c", "d"});
    try {
        gfs_from_digraph(g);
        FAIL() << "expected SinkOrSource";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SinkOrSource);
    }
}

TEST(Graph, MalformedJsonIsAParseError) {
    for (std::string text : {"{", "{\"kind\":\"gfs\"}", "{\"kind\":\"digraph\",\"vertices\":[1],\"edges\":[]}", "[]"}) {
        try {
            parse_graph(text);
            ADD_FAILURE() << "accepted: " << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ParseError) << text;
        }
    }
}

TEST(Graph, HigherEdgeGraphSizesMatchPathCounts) {
    for (const char* name : kDigraphs) {
        Digraph g = fixture_digraph(name);
        for (int n = 1; n <= 3; ++n) {
            Digraph h = higher_edge_graph(g, n);
            EXPECT_EQ(static_cast<std::int64_t>(h.vertices.size()), count_paths(g, n)) << name << " n=" << n;
            EXPECT_EQ(static_cast<std::int64_t>(h.edges.size()), count_paths(g, n + 1)) << name << " n=" << n;
            EXPECT_NO_THROW(require_no_sinks_or_sources(h));
        }
    }
}

TEST(Graph, HigherEdgeGraphOfOneIsTheEdgeGraph) {
    Digraph g = fixture_digraph("digraph_three_vertex.json");
    Digraph h = higher_edge_graph(g, 1);
    std::set<std::string> ids;
    for (const auto& e : g.edges) ids.insert(e.id);
    EXPECT_EQ(std::set<std::string>(h.vertices.begin(), h.vertices.end()), ids);
    for (const auto& e : h.edges) {
        // Edge "x.y" runs from x to y and requires tgt(x) = src(y).
        EXPECT_EQ(e.id, e.src + "." + e.tgt);
        auto find = [&](const std::string& id) {
            return *std::find_if(g.edges.begin(), g.edges.end(), [&](const DigraphEdge& d) { return d.id == id; });
        };
        EXPECT_EQ(find(e.src).tgt, find(e.tgt).src);
    }
}

TEST(Graph, DotExportMentionsEveryEdge) {
    Layer l = fixture_gfs("gfs_4top_6bottom.json");
    std::string dot = export_dot(l);
    for (const auto& e : l.edges) EXPECT_NE(dot.find(e.id), std::string::npos) << e.id;
}

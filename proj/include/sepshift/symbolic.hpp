// SPDX-License-Identifier: MIT
// Built-in symbolic systems, cylinder calculus, partition refinement and the
// l-diagram of a refined partition sequence.
#pragma once

#include <string>
#include <vector>

#include "sepshift/common.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/ldiagram.hpp"

namespace sepshift {

using Word = std::vector<int>;

// A clopen set given as the union of the cylinders {x : x[lo..hi] = w} over
// the listed words. An empty window (hi = lo - 1) with the single empty word
// is the whole space; no words at all is the empty set. Words are sorted and
// unique.
struct Clopen {
    int lo = 0;
    int hi = -1;
    std::vector<Word> words;

    bool operator==(const Clopen&) const = default;
};

class SymbolicSystem {
public:
    enum class Kind { FullOneSided, FullTwoSided, EdgeShift };

    static SymbolicSystem full_one_sided(int alphabet);
    static SymbolicSystem full_two_sided(int alphabet);
    static SymbolicSystem edge_shift(const Digraph& g);
    // "full1:K", "full2:K", or "loop:K" (one vertex, K loops, as an edge shift).
    static SymbolicSystem parse(const std::string& spec);

    Kind kind() const { return kind_; }
    bool one_sided() const { return kind_ != Kind::FullTwoSided; }
    int alphabet() const { return alphabet_; }
    std::string describe() const;
    std::string symbol_name(int a) const;

    // Whether symbol b may follow symbol a.
    bool follows(int a, int b) const;
    // Every admissible word on the window [lo, hi].
    std::vector<Word> all_words(int lo, int hi) const;

    Clopen whole() const;
    Clopen empty() const { return Clopen{0, -1, {}}; }
    Clopen cylinder(int lo, const Word& w) const;

    // Re-expresses c on a window containing its own window.
    Clopen refine(const Clopen& c, int lo, int hi) const;
    // Smallest window representation; equal sets have equal canonical forms.
    Clopen canonical(const Clopen& c) const;

    Clopen intersect(const Clopen& a, const Clopen& b) const;
    Clopen unite(const Clopen& a, const Clopen& b) const;
    Clopen subtract(const Clopen& a, const Clopen& b) const;
    bool subset(const Clopen& a, const Clopen& b) const;
    bool equal(const Clopen& a, const Clopen& b) const;
    static bool is_empty(const Clopen& c) { return c.words.empty(); }

    Clopen image(const Clopen& c) const;     // sigma(c)
    Clopen preimage(const Clopen& c) const;  // sigma^{-1}(c)
    bool injective_on(const Clopen& c) const;

    std::string name(const Clopen& c) const;

    // Natural cylinder partitions: one-sided systems use the window [0, n];
    // the two-sided shift uses [-j, j] at n = 2j and [-j-1, j] at n = 2j+1.
    std::vector<Clopen> natural_partition(int n) const;

private:
    Kind kind_ = Kind::FullOneSided;
    int alphabet_ = 2;
    std::vector<std::string> symbols_;
    std::vector<int> sym_src_, sym_tgt_;  // edge shift endpoints (vertex indices)
};

using Partition = std::vector<Clopen>;

// Common refinement; empty intersections are dropped, cells canonical and
// sorted by name.
Partition wedge(const SymbolicSystem& sys, const std::vector<Partition>& parts);
// Cells grouped by the set of cells of P whose image contains the point.
// Throws NonInjectiveCell if sigma is not injective on some cell of P.
Partition sigma_partition(const SymbolicSystem& sys, const Partition& P);
Partition preimage_partition(const SymbolicSystem& sys, const Partition& P);
// (P v P^sigma, P v sigma^{-1}(P)).
std::pair<Partition, Partition> refine_partition(const SymbolicSystem& sys, const Partition& P);

// Preimage-count data relative to a partition P on whose cells sigma is
// injective: level_sets[i-1] = {x : |sigma^{-1}(x)| >= i} for i = 1..N(sigma).
struct PreimageCounts {
    int n_sigma = 0;
    std::vector<Clopen> at_least;
    std::vector<Clopen> exactly;
};
PreimageCounts preimage_counts(const SymbolicSystem& sys, const Partition& P);

// The refined partition sequence P_0..P_N obtained from the natural
// partitions by the closure P_{2j+1} = P'_{2j+1} v P_{2j} v P_{2j}^sigma and
// P_{2j+2} = P'_{2j+2} v P_{2j+1} v sigma^{-1}(P_{2j+1}).
std::vector<Partition> refined_sequence(const SymbolicSystem& sys, int depth, std::int64_t budget = -1);

struct BuiltDiagram {
    LDiagram diagram;
    std::vector<Partition> cells;  // cells[n][v] is vertex v of level n
};

// Diagram of an arbitrary sequence of partitions (assumed refined as above):
// blue edges for inclusions, red edges Z' in sigma(Z) at even layers and
// sigma(Z'') in Z' at odd layers.
BuiltDiagram build_from_partitions(const SymbolicSystem& sys, const std::vector<Partition>& parts);
BuiltDiagram build_ldiagram_cells(const SymbolicSystem& sys, int depth, std::int64_t budget = -1);
LDiagram build_ldiagram(const SymbolicSystem& sys, int depth, std::int64_t budget = -1);

}  // namespace sepshift

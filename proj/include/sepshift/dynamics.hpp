// SPDX-License-Identifier: MIT
// Truncated path-space dynamics of an l-diagram: blue prefixes, the shift and
// its preimage branches, exact cylinder images, sigma-cylinder decompositions,
// configuration balls, universal maps, inverse limits and groupoid fibers.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sepshift/common.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/ldiagram.hpp"

namespace sepshift {

// Blue path (e_0, ..., e_{m-1}) with e_i in layer i, r(e_0) = root and
// s(e_i) = r(e_{i+1}). Depth 0 is the bare level-0 vertex `root`. The
// cylinder Z(p) is the set of infinite blue paths extending p.
struct BluePrefix {
    int root = 0;
    std::vector<int> edges;

    int depth() const { return static_cast<int>(edges.size()); }
    auto operator<=>(const BluePrefix&) const = default;
    bool operator==(const BluePrefix&) const = default;
};

// Vertex at level depth() where the prefix ends.
int end_vertex(const LDiagram& d, const BluePrefix& p);
// The unique blue path from vertex v at `level` up to level 0.
BluePrefix prefix_to_vertex(const LDiagram& d, int level, int v);
BluePrefix truncate(const BluePrefix& p, int depth);
// Whether p extends q (q is a truncation of p).
bool extends(const BluePrefix& p, const BluePrefix& q);
std::vector<BluePrefix> all_prefixes(const LDiagram& d, int depth);
// Every blue extension of p to `to_depth`; their cylinders partition Z(p).
std::vector<BluePrefix> extensions(const LDiagram& d, const BluePrefix& p, int to_depth);
// "v" for depth 0, otherwise "v:e0,e1,...".
std::string prefix_name(const LDiagram& d, const BluePrefix& p);
// Accepts "v" (a level-0 vertex), "v:e0,e1,..." or "e0,e1,...", or "@k:name"
// for the blue path ending at vertex `name` of level k.
BluePrefix parse_prefix(const LDiagram& d, const std::string& text);

// The red edge f_k of the romb completing the blue pair (e_k, e_{k+1}), k even.
int romb_red_edge(const LDiagram& d, const BluePrefix& p, int k);

// Depth 2n+2 to depth 2n+1: sigma(Z(p)) is contained in Z(shift_prefix(p)).
BluePrefix shift_prefix(const LDiagram& d, const BluePrefix& p);

struct PreimageBranch {
    int f0 = -1;  // red edge of layer 0 with s(f0) = s(e'_0)
    BluePrefix prefix;
};
// Depth 2n+1 to depth 2n: one branch per red edge leaving s(e'_0).
std::vector<PreimageBranch> preimages(const LDiagram& d, const BluePrefix& q);

// Inverse of the shift of an h-diagram, applied to the largest odd
// truncation of p (so depth d becomes d-1 or d-2).
BluePrefix inverse_shift_prefix(const LDiagram& d, const BluePrefix& p);

// Finite union of cylinders in canonical form: the coarsest cylinders
// contained in the set, sorted. Equal sets have equal canonical forms.
struct CylinderSet {
    std::vector<BluePrefix> cells;
    bool operator==(const CylinderSet&) const = default;
};
CylinderSet normalize(const LDiagram& d, std::vector<BluePrefix> cells);
// All prefixes of the given depth whose cylinders lie in the set.
std::vector<BluePrefix> refine_to(const LDiagram& d, const CylinderSet& s, int depth);
int max_depth(const CylinderSet& s);
bool subset(const LDiagram& d, const CylinderSet& a, const CylinderSet& b);
CylinderSet intersect(const LDiagram& d, const CylinderSet& a, const CylinderSet& b);
CylinderSet unite(const LDiagram& d, const CylinderSet& a, const CylinderSet& b);
bool disjoint(const LDiagram& d, const CylinderSet& a, const CylinderSet& b);
std::string set_name(const LDiagram& d, const CylinderSet& s);

// Exact sigma^k(Z(p)) and sigma^{-k}(Z(q)). One application of sigma maps a
// set of depth at most m to cells of depth at most m+2 (even depths are
// extended by two edges and shifted); preimages need one level more.
CylinderSet sigma_image(const LDiagram& d, const CylinderSet& s, int k);
CylinderSet sigma_image(const LDiagram& d, const BluePrefix& p, int k);
CylinderSet sigma_preimage_set(const LDiagram& d, const CylinderSet& s, int k);
CylinderSet sigma_preimage_set(const LDiagram& d, const BluePrefix& q, int k);

// sigma-cylinder decomposition attached to the even layer 2j.
struct VCell {
    int gamma = -1;     // index into SigmaCylinderDecomposition::gamma
    int target = -1;    // vertex i of level 2j
    int red_edge = -1;  // red edge of layer 2j labelling the cell
    CylinderSet cells;
};
struct SigmaCylinderDecomposition {
    int level = 0;
    std::vector<BluePrefix> gamma;  // depth level+1
    std::vector<int> gamma_class;   // level-2j vertex containing Z_gamma
    std::vector<VCell> v;
    IntMatrix A;  // rows gamma (named by their level 2j+1 vertex), columns level 2j
    IntMatrix I;
};

struct CheckResult {
    bool ok = true;
    std::int64_t checked = 0;
    std::string witness;
    std::string note;  // how the check was carried out, when there is a choice
};

// Requires horizon >= 2j+2. Checks that sigma maps every V-cell
// bijectively onto its Z-cell at one further level when the horizon allows.
SigmaCylinderDecomposition extract_cylinder_decomposition(const LDiagram& d, int level, CheckResult* bijectivity = nullptr);
CheckResult check_refinement(const LDiagram& d, const SigmaCylinderDecomposition& fine, const SigmaCylinderDecomposition& coarse);

// Reduced words in the free group on the red edges of one even layer. A
// letter is +(f+1) for a_f and -(f+1) for its inverse; words are stored as
// written, left to right.
using FreeWord = std::vector<int>;

struct ConfigBall {
    int radius = 0;
    std::vector<std::string> alphabet;  // name of a_f per red edge f (empty: not red)
    std::set<FreeWord> words;

    std::string word_name(const FreeWord& w) const;
    std::vector<std::string> names() const;  // sorted by length, then name
    json to_json() const;
    std::string to_dot() const;
};

// Radius-r ball of the configuration of the point with prefix p, computed
// with the partial maps of the sigma-cylinder decomposition at `level`
// (level 0 for the generalized finite shift given by layer 0). Letter names
// default to the red edge ids of that layer. Throws InsufficientDepth when p
// is too short.
ConfigBall config_ball(const LDiagram& d, const BluePrefix& p, int radius, int level = 0,
                       const std::map<std::string, std::string>& letter_names = {});
// tau(xi) = xi a_f^{-1} restricted to radius r-1.
ConfigBall tau(const ConfigBall& ball);

// Edge identification between layer 0 of a diagram for (Y, rho) and a
// generalized finite shift graph (E, C): id in Y -> id in E.
using StructureMap = std::map<std::string, std::string>;
// Any identification built from a layer isomorphism (parallel red edges are
// paired in id order). Throws StructureMismatch if none exists.
StructureMap default_structure(const LDiagram& y, const Layer& gfs);
// Radius-r ball of psi(y) for the unique equivariant map psi: Y -> X(E, C);
// letters carry the red edge ids of (E, C). Throws StructureMismatch when the
// map is not an isomorphism of layer 0 onto (E, C).
ConfigBall universal_map(const LDiagram& y_diagram, const BluePrefix& y, int radius, const Layer& gfs,
                         const StructureMap& structure);

// Finite-depth consistency of X -> lim X_i: psi_i agrees with
// psi_{i,i+1} o psi_{i+1} on radius-2 balls, and the radius-1 balls of
// (psi_0(x), psi_1(x), ...) separate the prefixes of x.
CheckResult inverse_limit_check(const LDiagram& d, int depth, std::int64_t budget = -1);

// How the fibers of the shift space X(E, C) of layer 0 are enumerated.
// Resolution walks the canonical resolution of layer 0 truncated at depth
// 2(m+n)+2; Configuration reads them off the configuration ball of psi(y),
// whose words are the points of X related to psi(y). Auto uses Resolution
// when the truncated resolution stays below 2^17 vertices per level and the
// budget, and Configuration otherwise.
enum class FiberModel { Auto, Resolution, Configuration };

// For every prefix y of the given depth, psi_* maps the groupoid fiber
// {(z, m-n, y)} with m <= bound_m, n <= bound_n bijectively onto the fiber of
// psi(y) in the generalized finite shift of layer 0. The model used is
// recorded in the note of the result.
CheckResult fiber_bijection_check(const LDiagram& d, int bound_m, int bound_n, int depth = -1, std::int64_t budget = -1,
                                  FiberModel model = FiberModel::Auto);

}  // namespace sepshift

// SPDX-License-Identifier: MIT
#include "sepshift/oracle.hpp"

#include <algorithm>
#include <functional>

#include "sepshift/dynamics.hpp"

namespace sepshift {

namespace {

struct WindowWord {
    int lo = 0;
    Word w;
};

bool contains(const Clopen& c, const WindowWord& x) {
    if (c.words.empty()) return false;
    if (c.hi < c.lo) return true;
    const int hi = x.lo + static_cast<int>(x.w.size()) - 1;
    if (c.lo < x.lo || c.hi > hi) throw Error(ErrorKind::InvalidArgument, "oracle window does not cover a cell");
    Word sub(x.w.begin() + (c.lo - x.lo), x.w.begin() + (c.hi - x.lo + 1));
    return std::binary_search(c.words.begin(), c.words.end(), sub);
}

std::vector<Word> admissible_words(const SymbolicSystem& sys, int length) {
    std::vector<Word> out;
    Word cur;
    std::function<void()> rec = [&] {
        if (static_cast<int>(cur.size()) == length) {
            out.push_back(cur);
            return;
        }
        for (int a = 0; a < sys.alphabet(); ++a) {
            if (!cur.empty() && !sys.follows(cur.back(), a)) continue;
            cur.push_back(a);
            rec();
            cur.pop_back();
        }
    };
    rec();
    return out;
}

}  // namespace

OracleReport word_shift_oracle(const SymbolicSystem& sys, const BuiltDiagram& built, int max_depth) {
    const LDiagram& d = built.diagram;
    if (max_depth > d.horizon()) throw Error(ErrorKind::HorizonExceeded, "oracle depth exceeds the diagram horizon");
    int lo = 0, hi = 0;
    for (int m = 0; m <= max_depth; ++m)
        for (const auto& c : built.cells.at(m))
            if (c.hi >= c.lo) {
                lo = std::min(lo, c.lo);
                hi = std::max(hi, c.hi);
            }
    ++hi;  // room for one shift
    OracleReport r;
    auto fail = [&](std::string w) {
        r.ok = false;
        r.witness = std::move(w);
        return r;
    };
    auto cell_path = [&](const WindowWord& x, std::vector<int>& out) -> bool {
        out.assign(max_depth + 1, -1);
        for (int m = 0; m <= max_depth; ++m) {
            int hits = 0;
            for (int v = 0; v < static_cast<int>(built.cells[m].size()); ++v)
                if (contains(built.cells[m][v], x)) {
                    out[m] = v;
                    ++hits;
                }
            if (hits != 1) return false;
        }
        return true;
    };
    auto word_text = [&](const WindowWord& x) {
        std::string s = "[" + std::to_string(x.lo) + "]";
        for (int a : x.w) s += sys.symbol_name(a) + " ";
        return s;
    };
    for (const auto& w : admissible_words(sys, hi - lo + 1)) {
        WindowWord x{lo, w};
        WindowWord y = sys.one_sided() ? WindowWord{0, Word(w.begin() + 1, w.end())} : WindowWord{lo - 1, w};
        std::vector<int> px, py;
        if (!cell_path(x, px) || !cell_path(y, py)) return fail("level cells do not partition the space at " + word_text(x));
        for (int m = 1; m <= max_depth; ++m) {
            BluePrefix xm = prefix_to_vertex(d, m, px[m]);
            if (end_vertex(d, truncate(xm, m - 1)) != px[m - 1])
                return fail("cells of " + word_text(x) + " do not form a blue path at level " + std::to_string(m));
            BluePrefix ym = prefix_to_vertex(d, m, py[m]);
            ++r.checked;
            if (m % 2 == 0 && m >= 2) {
                if (!(shift_prefix(d, xm) == truncate(ym, m - 1)))
                    return fail("shift of the depth " + std::to_string(m) + " prefix of " + word_text(x) + " is " +
                                prefix_name(d, shift_prefix(d, xm)) + ", the shifted word lies in " + prefix_name(d, truncate(ym, m - 1)));
            } else if (m % 2 == 1) {
                auto branches = preimages(d, ym);
                BluePrefix want = truncate(xm, m - 1);
                bool found = std::any_of(branches.begin(), branches.end(), [&](const PreimageBranch& b) { return b.prefix == want; });
                if (!found)
                    return fail(prefix_name(d, want) + " is missing from the preimage branches of " + prefix_name(d, ym));
            }
        }
    }
    return r;
}

}  // namespace sepshift

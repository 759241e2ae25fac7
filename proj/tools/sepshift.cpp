// SPDX-License-Identifier: MIT
// sepshift: command-line front end for the library.
//
// Exit codes: 0 on success or a passing check, 1 on a failing check or a
// domain error, 2 on a usage error (bad arguments, unreadable or malformed
// input, unknown names).

#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "sepshift/algebra.hpp"
#include "sepshift/dynamics.hpp"
#include "sepshift/graph.hpp"
#include "sepshift/ldiagram.hpp"
#include "sepshift/resolution.hpp"
#include "sepshift/suite.hpp"
#include "sepshift/symbolic.hpp"

#ifndef SEPSHIFT_DATA_DIR
#define SEPSHIFT_DATA_DIR "data"
#endif

using namespace sepshift;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string document_kind(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw Error(ErrorKind::ParseError, "document needs a string field 'kind'");
    return j.at("kind").get<std::string>();
}

// Options shared by every command that works on an l-diagram: either a
// built-in system or a file holding an l-diagram, a gfs or a digraph (the
// latter two are resolved canonically).
struct DiagramSource {
    std::string input;
    std::string system;
    int depth = 6;

    void add_to(CLI::App* app) {
        app->add_option("input", input, "l-diagram, gfs or digraph JSON file ('-' for stdin)");
        app->add_option("--system", system, "built-in system: full1:K, full2:K or loop:K");
        app->add_option("--depth", depth, "depth of the built or resolved diagram")->check(CLI::NonNegativeNumber);
    }

    LDiagram load(std::int64_t budget) const {
        if (!system.empty()) {
            if (!input.empty()) throw UsageError("give either an input file or --system, not both");
            return build_ldiagram(SymbolicSystem::parse(system), depth, budget);
        }
        if (input.empty()) throw UsageError("an input file or --system is required");
        const std::string text = read_input(input);
        const std::string kind = document_kind(text);
        if (kind == "ldiagram") return LDiagram::from_json(json::parse(text));
        ParsedGraph g = parse_graph(text);
        if (g.kind == GraphKind::Digraph) return canonical_resolution(gfs_from_digraph(g.digraph), depth, budget);
        return canonical_resolution(g.layer, depth, budget);
    }
};

struct Globals {
    std::string format = "text";
    std::int64_t budget = -1;
    bool timing = false;

    std::int64_t cap() const { return budget < 0 ? default_budget() : budget; }
};

// Prints a check report and returns the exit code.
int emit_report(const Globals& g, const std::string& check, bool ok, const std::string& witness,
                std::chrono::steady_clock::time_point start) {
    CheckReport r;
    r.check = check;
    r.status = ok ? "pass" : "fail";
    r.witness = witness;
    if (g.timing)
        r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (g.format == "json")
        std::cout << r.to_json().dump(2) << "\n";
    else
        std::cout << "[" << r.status << "] " << r.check << (r.witness.empty() ? "" : ": " + r.witness) << "\n";
    return ok ? 0 : 1;
}

int emit_validation(const Globals& g, const Report& rep) {
    if (g.format == "json")
        std::cout << rep.to_json().dump(2) << "\n";
    else
        std::cout << rep.to_text();
    return rep.ok() ? 0 : 1;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("'" + text + "' is not a comma-separated list of integers");
        }
    }
    return out;
}

std::map<std::string, std::string> parse_letters(const std::string& text) {
    std::map<std::string, std::string> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("letter names are written edge=name, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

// Letters of a word over layer m: edge ids separated by spaces, "id^*" for a ghost.
std::vector<int> parse_letters_of_word(const LDiagram& d, int m, const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (ss >> tok) {
        bool ghost = tok.size() > 2 && tok.compare(tok.size() - 2, 2, "^*") == 0;
        std::string id = ghost ? tok.substr(0, tok.size() - 2) : tok;
        int e = d.edge_index(m, id);
        if (e < 0) throw Error(ErrorKind::UnknownReference, "no edge '" + id + "' in layer " + std::to_string(m));
        out.push_back(ghost ? -(e + 1) : e + 1);
    }
    if (out.empty()) throw UsageError("empty word");
    return out;
}

std::string canonical_text(const LDiagram& d, const CanonicalForm& f) {
    if (f.terms.empty()) return "0\n";
    std::ostringstream os;
    for (const auto& [c, t] : f.terms) {
        const char* type = t.type == TermType::A ? "A" : t.type == TermType::B ? "B" : t.type == TermType::C ? "C" : "D";
        os << c.get_str() << " " << t.name(d) << "  [type " << type << ", degree " << t.degree(d) << ", stage " << t.stage << "]\n";
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sepshift: separated Bratteli diagrams, generalized finite shifts and their algebras"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"text", "json", "dot", "csv"}));
    app.add_option("--budget", g.budget, "vertex cap per layer (default: SEPSHIFT_BUDGET or 1000000)");
    app.add_flag("--timing", g.timing, "record runtimes in reports");

    std::function<int()> action;
    auto start = std::chrono::steady_clock::now();

    // ---------------------------------------------------------------- graphs
    std::string file;
    auto* validate = app.add_subcommand("validate", "validate a layer, gfs, digraph or l-diagram file");
    validate->add_option("input", file, "JSON file ('-' for stdin)")->required();
    bool as_h = false;
    validate->add_flag("--hdiagram", as_h, "also require the h-diagram conditions");
    validate->callback([&] {
        action = [&] {
            const std::string text = read_input(file);
            Report rep;
            try {
                const std::string kind = document_kind(text);
                if (kind == "ldiagram") {
                    LDiagram d = LDiagram::from_json(json::parse(text));
                    rep = as_h ? validate_hdiagram(d) : validate_ldiagram(d);
                } else {
                    ParsedGraph pg = parse_graph(text);
                    if (pg.kind == GraphKind::Gfs)
                        rep = validate_gfs(pg.layer);
                    else if (pg.kind == GraphKind::Layer)
                        rep = validate_layer(pg.layer);
                    else
                        require_no_sinks_or_sources(pg.digraph);
                }
            } catch (const Error& e) {
                // what() starts with the kind, which is already the rule name.
                std::string witness = e.what();
                const std::string kind = std::string(error_kind_name(e.kind())) + ": ";
                if (witness.rfind(kind, 0) == 0) witness.erase(0, kind.size());
                rep.add(error_kind_name(e.kind()), witness);
            }
            return emit_validation(g, rep);
        };
    });

    auto* matrices = app.add_subcommand("matrices", "red adjacency A and blue incidence I of a gfs, as CSV");
    matrices->add_option("input", file, "gfs JSON file")->required();
    matrices->callback([&] {
        action = [&] {
            ParsedGraph pg = parse_graph(read_input(file));
            Layer l = pg.kind == GraphKind::Digraph ? gfs_from_digraph(pg.digraph) : pg.layer;
            auto [A, I] = red_blue_matrices(l);
            if (g.format == "json") {
                auto mj = [](const IntMatrix& m) { return json{{"rows", m.rows}, {"cols", m.cols}, {"a", m.a}}; };
                std::cout << json{{"A", mj(A)}, {"I", mj(I)}}.dump(2) << "\n";
            } else {
                std::cout << "# A\n" << A.to_csv() << "# I\n" << I.to_csv();
            }
            return 0;
        };
    });

    auto* from_digraph = app.add_subcommand("gfs-from-digraph", "the gfs of a digraph");
    from_digraph->add_option("input", file, "digraph JSON file ('-' for stdin)")->required();
    from_digraph->callback([&] {
        action = [&] {
            ParsedGraph pg = parse_graph(read_input(file));
            if (pg.kind != GraphKind::Digraph) throw UsageError("input is not a digraph");
            Layer l = gfs_from_digraph(pg.digraph);
            std::cout << (g.format == "dot" ? export_dot(l) : serialize_graph(l, GraphKind::Gfs)) << "\n";
            return 0;
        };
    });

    int n_param = 1;
    auto* higher = app.add_subcommand("higher-edge", "the n-step higher edge graph of a digraph");
    higher->add_option("input", file, "digraph JSON file ('-' for stdin)")->required();
    higher->add_option("--n", n_param, "block length")->check(CLI::PositiveNumber);
    higher->callback([&] {
        action = [&] {
            ParsedGraph pg = parse_graph(read_input(file));
            if (pg.kind != GraphKind::Digraph) throw UsageError("input is not a digraph");
            Digraph h = higher_edge_graph(pg.digraph, n_param, g.cap());
            std::cout << (g.format == "dot" ? export_dot(h) : serialize_graph(h)) << "\n";
            return 0;
        };
    });

    auto* vs_higher = app.add_subcommand("check-resolution-vs-higher-edge",
                                         "compare layer 2n of the resolution with the gfs of the higher edge graph");
    vs_higher->add_option("input", file, "digraph JSON file ('-' for stdin)")->required();
    vs_higher->add_option("--n", n_param, "block length")->check(CLI::PositiveNumber);
    vs_higher->callback([&] {
        action = [&] {
            ParsedGraph pg = parse_graph(read_input(file));
            if (pg.kind != GraphKind::Digraph) throw UsageError("input is not a digraph");
            Isomorphism iso = check_resolution_vs_higher_edge(pg.digraph, n_param, g.cap());
            return emit_report(g, "resolution-vs-higher-edge", iso.found, iso.witness, start);
        };
    });

    // -------------------------------------------------------------- diagrams
    DiagramSource src;
    auto* resolve = app.add_subcommand("resolve", "canonical resolution of a gfs or digraph");
    src.add_to(resolve);
    resolve->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            std::cout << (g.format == "dot" ? export_dot(d) : d.to_json().dump(2)) << "\n";
            return 0;
        };
    });

    auto* build = app.add_subcommand("build", "l-diagram of a built-in symbolic system");
    src.add_to(build);
    build->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            std::cout << (g.format == "dot" ? export_dot(d) : d.to_json().dump(2)) << "\n";
            return 0;
        };
    });

    int j_param = 0;
    auto* recursion = app.add_subcommand("check-recursion", "red adjacency recursion between layers 2j and 2j+2");
    src.add_to(recursion);
    recursion->add_option("--j", j_param, "index j")->check(CLI::NonNegativeNumber);
    recursion->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            RecursionCheck r = adjacency_recursion_check(d, j_param);
            std::string w = r.witness;
            if (!r.ok && g.format == "csv") w += "\nlhs\n" + r.lhs.to_csv() + "rhs\n" + r.rhs.to_csv();
            return emit_report(g, "adjacency-recursion j=" + std::to_string(j_param), r.ok, w, start);
        };
    });

    std::string seq_text;
    auto* tele = app.add_subcommand("telescope", "telescope an l-diagram along a contraction sequence");
    src.add_to(tele);
    tele->add_option("--seq", seq_text, "contraction sequence, e.g. 0,3,6")->required();
    tele->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            ContractionSequence m{parse_int_list(seq_text)};
            LDiagram t = telescope(d, m);
            std::cout << (g.format == "dot" ? export_dot(t) : t.to_json().dump(2)) << "\n";
            return 0;
        };
    });

    // -------------------------------------------------------------- dynamics
    std::string prefix_text;
    auto* shift = app.add_subcommand("shift", "image prefix of an even-depth prefix under the shift");
    src.add_to(shift);
    shift->add_option("--prefix", prefix_text, "prefix: v:e0,e1,... or e0,e1,...")->required();
    shift->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            BluePrefix q = shift_prefix(d, parse_prefix(d, prefix_text));
            if (g.format == "json")
                std::cout << json{{"prefix", prefix_name(d, q)}, {"depth", q.depth()}}.dump() << "\n";
            else
                std::cout << prefix_name(d, q) << "\n";
            return 0;
        };
    });

    auto* pre = app.add_subcommand("preimages", "preimage branches of an odd-depth prefix");
    src.add_to(pre);
    pre->add_option("--prefix", prefix_text, "prefix: v:e0,e1,... or e0,e1,...")->required();
    pre->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            auto branches = preimages(d, parse_prefix(d, prefix_text));
            json arr = json::array();
            for (const auto& b : branches) arr.push_back(json{{"red_edge", d.edge(0, b.f0).id}, {"prefix", prefix_name(d, b.prefix)}});
            if (g.format == "json")
                std::cout << arr.dump(2) << "\n";
            else
                for (const auto& b : branches) std::cout << d.edge(0, b.f0).id << " " << prefix_name(d, b.prefix) << "\n";
            return 0;
        };
    });

    int steps = 1;
    auto* orbit = app.add_subcommand("orbit", "forward orbit of a prefix; each step loses one or two levels");
    src.add_to(orbit);
    orbit->add_option("--prefix", prefix_text, "prefix: v:e0,e1,... or e0,e1,...")->required();
    orbit->add_option("--steps", steps, "number of shift steps")->check(CLI::NonNegativeNumber);
    orbit->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            BluePrefix p = parse_prefix(d, prefix_text);
            json arr = json::array({prefix_name(d, p)});
            for (int i = 0; i < steps; ++i) {
                const int even = p.depth() % 2 == 0 ? p.depth() : p.depth() - 1;
                if (even < 2) throw Error(ErrorKind::InsufficientDepth, "orbit ran out of depth after " + std::to_string(i) + " steps");
                p = shift_prefix(d, truncate(p, even));
                arr.push_back(prefix_name(d, p));
            }
            if (g.format == "json")
                std::cout << arr.dump(2) << "\n";
            else
                for (const auto& s : arr) std::cout << s.get<std::string>() << "\n";
            return 0;
        };
    });

    int radius = 1, level = 0;
    bool dot = false;
    std::string letters;
    auto* ball = app.add_subcommand("config-ball", "configuration ball of a prefix");
    src.add_to(ball);
    ball->add_option("--prefix", prefix_text, "prefix: v:e0,e1,... or e0,e1,...")->required();
    ball->add_option("--radius", radius, "radius")->check(CLI::NonNegativeNumber);
    ball->add_option("--level", level, "even level of the structure")->check(CLI::NonNegativeNumber);
    ball->add_option("--letters", letters, "letter names, e.g. beta0=a,beta1=b");
    ball->add_flag("--dot", dot, "print the ball as a DOT graph");
    ball->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            ConfigBall b = config_ball(d, parse_prefix(d, prefix_text), radius, level, parse_letters(letters));
            if (dot || g.format == "dot")
                std::cout << b.to_dot();
            else if (g.format == "json")
                std::cout << b.to_json().dump(2) << "\n";
            else
                for (const auto& n : b.names()) std::cout << n << "\n";
            return 0;
        };
    });

    int check_depth = 4;
    auto* invlim = app.add_subcommand("check-inverse-limit", "consistency of the maps to the inverse limit");
    src.add_to(invlim);
    invlim->add_option("--check-depth", check_depth, "prefix depth of the check")->check(CLI::NonNegativeNumber);
    invlim->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            CheckResult r = inverse_limit_check(d, check_depth, g.cap());
            return emit_report(g, "inverse-limit", r.ok, r.ok ? std::to_string(r.checked) + " checks" : r.witness, start);
        };
    });

    int bound_m = 2, bound_n = 2, fiber_depth = -1;
    std::string model_text = "auto";
    auto* fibers = app.add_subcommand("check-fibers", "psi_* on groupoid fibers");
    src.add_to(fibers);
    fibers->add_option("--m", bound_m, "bound on m")->check(CLI::NonNegativeNumber);
    fibers->add_option("--n", bound_n, "bound on n")->check(CLI::NonNegativeNumber);
    fibers->add_option("--check-depth", fiber_depth, "prefix depth (default: the horizon)");
    fibers->add_option("--model", model_text, "target model")->check(CLI::IsMember({"auto", "resolution", "configuration"}));
    fibers->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            FiberModel model = model_text == "resolution"      ? FiberModel::Resolution
                               : model_text == "configuration" ? FiberModel::Configuration
                                                               : FiberModel::Auto;
            CheckResult r = fiber_bijection_check(d, bound_m, bound_n, fiber_depth, g.cap(), model);
            return emit_report(g, "fibers", r.ok, r.ok ? std::to_string(r.checked) + " checks, " + r.note : r.witness, start);
        };
    });

    // --------------------------------------------------------------- algebra
    auto* alg = app.add_subcommand("alg", "corner algebras and their Steinberg model");
    alg->require_subcommand(1);
    int stage = 0;
    std::vector<std::string> exprs;
    auto alg_cmd = [&](const char* name, const char* help, int n_exprs) {
        auto* c = alg->add_subcommand(name, help);
        src.add_to(c);
        c->add_option("--stage", stage, "stage n (layer 2n)")->check(CLI::NonNegativeNumber);
        if (n_exprs > 0) c->add_option("--expr", exprs, "element expression")->expected(n_exprs)->required();
        return c;
    };
    auto* mul = alg_cmd("mul", "product of two elements", 2);
    mul->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            std::cout << multiply(parse_element(d, stage, exprs.at(0)), parse_element(d, stage, exprs.at(1))).to_string() << "\n";
            return 0;
        };
    });
    auto* st = alg_cmd("star", "involution of an element", 1);
    st->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            std::cout << star(parse_element(d, stage, exprs.at(0))).to_string() << "\n";
            return 0;
        };
    });
    int stage_budget = 4;
    auto* canon = alg_cmd("canon", "canonical form of an element", 1);
    canon->add_option("--stage-budget", stage_budget, "maximal number of stage advances");
    canon->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            std::cout << canonical_text(d, canonicalize(parse_element(d, stage, exprs.at(0)), stage_budget));
            return 0;
        };
    });
    bool atoms_flag = false;
    auto* eval = alg_cmd("eval-steinberg", "image of an element in the Steinberg model", 1);
    eval->add_flag("--atoms", atoms_flag, "print the normal form as a sum of disjoint atoms");
    eval->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            SteinbergElement s = to_steinberg(d, canonicalize(parse_element(d, stage, exprs.at(0))));
            std::cout << (atoms_flag ? normalize(s) : s).to_string() << "\n";
            return 0;
        };
    });
    int word_layer = 0;
    std::string word_text;
    auto* tame = alg_cmd("check-tame", "whether w w* becomes a sum of distinct vertices", 0);
    tame->add_option("--layer", word_layer, "layer of the word")->check(CLI::NonNegativeNumber);
    tame->add_option("--word", word_text, "edge ids separated by spaces, id^* for a ghost")->required();
    tame->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            auto w = parse_letters_of_word(d, word_layer, word_text);
            bool ok = tameness_check(d, word_layer, w);
            return emit_report(g, "tameness", ok, ok ? "" : word_element(d, word_layer, w).to_string() + " is not tame", start);
        };
    });
    int square_depth = 6;
    auto* commute = alg_cmd("check-commute", "commutativity of the colimit square at stage n", 0);
    commute->add_option("--square-depth", square_depth, "depth of the stage diagram");
    commute->callback([&] {
        action = [&] {
            LDiagram d = src.load(g.cap());
            CommutativityResult r = commutativity_check(d, stage, square_depth);
            return emit_report(g, "colimit-square", r.ok, r.ok ? std::to_string(r.generators) + " generators" : r.witness, start);
        };
    });

    // ----------------------------------------------------------------- suite
    SuiteConfig cfg;
    cfg.data_dir = SEPSHIFT_DATA_DIR;
    std::string only;
    auto* suite = app.add_subcommand("suite", "run the acceptance suite");
    suite->add_option("--data", cfg.data_dir, "fixture directory");
    suite->add_option("--seed", cfg.seed, "seed of the randomized checks");
    suite->add_option("--only", only, "comma-separated check numbers");
    suite->callback([&] {
        action = [&] {
            cfg.timing = g.timing;
            if (g.budget >= 0) cfg.budget = g.budget;
            if (!only.empty()) cfg.only = parse_int_list(only);
            SuiteReport rep = run_suite(cfg);
            if (g.format == "json")
                std::cout << rep.to_json().dump(2) << "\n";
            else
                std::cout << rep.to_text();
            return rep.ok() ? 0 : 1;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return action ? action() : 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const bool usage = e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::ParseError ||
                           e.kind() == ErrorKind::UnknownReference;
        return usage ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

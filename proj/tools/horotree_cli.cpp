// Command-line front end: builds graph balls, atom trees, type graphs and
// boundary-action transducers, and runs the verification suite.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "horotree/pipeline.hpp"
#include "horotree/selfsimilar.hpp"
#include "horotree/verify.hpp"

using namespace horotree;

namespace {

void write_artifact(const RunConfig& cfg, const std::string& name, const std::string& content) {
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/" + name, std::ios::binary);
    if (!out) fail_input("cannot write artifact '" + name + "'");
    out << content;
}

int cmd_ball(const RunConfig& cfg) {
    auto g = build_source(cfg);
    std::ostringstream out;
    out << "source " << cfg.source << " radius " << g.radius << "\n";
    for (int n = 0; n <= g.radius; ++n)
        out << "sphere " << n << " " << g.sphere_at(n).size() << "\n";
    out << "vertices " << g.size() << " certified-limit " << g.certified_limit() << "\n";
    std::cout << out.str();
    write_artifact(cfg, "ball.txt", out.str());
    return 0;
}

int cmd_atoms(const RunConfig& cfg) {
    RunConfig c = cfg;
    c.depth = cfg.level;
    c.validate();
    auto g = build_source(c);
    auto tree = build_atom_tree(g, c.depth, c.horizon);
    std::ostringstream out;
    for (int n = 0; n <= c.depth; ++n) {
        const auto& lv = tree.levels[static_cast<std::size_t>(n)];
        out << "level " << n << ": " << lv.atoms.size() << " atoms, " << lv.infinite_count
            << " infinite\n";
    }
    if (cfg.dump) {
        for (int n = 0; n <= c.depth; ++n)
            for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
                out << "atom " << n << " " << a.index << (a.infinite ? " infinite" : " finite")
                    << " members";
                for (Vertex m : a.members) out << " " << m;
                out << "\n";
            }
    }
    std::cout << out.str();
    write_artifact(cfg, "atoms.txt", out.str());
    return 0;
}

int cmd_tree(const RunConfig& cfg) {
    auto g = build_source(cfg);
    auto tree = build_atom_tree(g, cfg.depth, cfg.horizon);
    std::ostringstream out;
    out << "tree depth " << cfg.depth << " horizon " << cfg.horizon << "\n";
    for (int n = 0; n <= cfg.depth; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            out << "atom " << n << " " << a.index << " parent "
                << (n > 0 ? std::to_string(a.parent) : std::string("-")) << " children "
                << a.child_atoms.size() << " tip " << g.layer[a.rep] << "\n";
        }
    std::cout << out.str();
    write_artifact(cfg, "tree.txt", out.str());
    return 0;
}

int cmd_types(const RunConfig& cfg) {
    auto p = build_pipeline(cfg);
    if (!p->sym->available()) fail_input("types: this source carries no symmetry data");
    auto text = p->type_graph.serialize();
    std::cout << text;
    write_artifact(cfg, "type_graph.txt", text);
    write_artifact(cfg, "type_graph.dot", p->type_graph.to_dot());
    return 0;
}

int cmd_transducer(const RunConfig& cfg) {
    if (cfg.element.empty()) fail_input("transducer: --element is required");
    auto p = build_pipeline(cfg);
    if (!p->sym->available()) fail_input("transducer: this source carries no symmetry data");
    SynthesisParams sp;
    sp.max_states = cfg.state_bound;
    auto g = p->sym->from_word(cfg.element);
    auto res = synthesize_action_transducer(*p->sym, p->tree, p->typing, p->type_graph, g, sp);
    auto text = serialize_transducer(res.machine);
    std::cout << text;
    write_artifact(cfg, "transducer.txt", text);
    write_artifact(cfg, "transducer.dot", transducer_to_dot(res.machine));
    auto minimized = minimize(res.machine, cfg.equiv_depth);
    std::ostringstream sum;
    sum << "element " << cfg.element << " states " << res.machine.state_count() << " minimized "
        << minimized.state_count() << "\n";
    std::cout << sum.str();
    write_artifact(cfg, "transducer_minimized.txt", serialize_transducer(minimized));
    return 0;
}

int cmd_encode(const RunConfig& cfg) {
    auto p = build_pipeline(cfg);
    if (!p->sym->available()) fail_input("encode: this source carries no symmetry data");
    TypeGraph tg = p->type_graph;
    auto expanded = expand(tg);
    std::ostringstream out;
    if (!(expanded == tg))
        out << "# isolated branches replaced by a binary type\n" << expanded.serialize();
    auto simp = simplify(expanded);
    auto code = build_prefix_code(simp.graph);
    out << code.serialize(simp.graph);
    std::cout << out.str();
    write_artifact(cfg, "codes.txt", out.str());
    if (!cfg.element.empty()) {
        if (!(expanded == tg))
            fail_input("encode: binary transducers need a source without isolated branches");
        SynthesisParams sp;
        sp.max_states = cfg.state_bound;
        auto g = p->sym->from_word(cfg.element);
        auto res = synthesize_action_transducer(*p->sym, p->tree, p->typing, p->type_graph, g, sp);
        auto bin = to_binary(res.machine, simp, code);
        auto text = serialize_transducer(bin);
        std::cout << text;
        write_artifact(cfg, "transducer_binary.txt", text);
        write_artifact(cfg, "transducer_binary.dot", transducer_to_dot(bin));
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    auto p = build_pipeline(cfg);
    auto rep = run_verify(*p);
    std::ostringstream out;
    for (const auto& item : rep.items) {
        out << (item.passed ? "PASS " : "FAIL ") << item.name;
        if (!item.detail.empty()) out << " (" << item.detail << ")";
        out << "\n";
    }
    out << (rep.all_passed ? "VERIFY OK" : "VERIFY FAILED") << " (" << rep.items.size()
        << " checks)\n";
    std::cout << out.str();
    write_artifact(cfg, "verify.txt", out.str());
    if (!rep.all_passed) throw Error(ErrorClass::Audit, "verification suite failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree-of-atoms horofunction boundary toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option("--source", cfg.source, "tiling:<p>,<q> | free:<rank> | line | file:<path>");
        sub->add_option("--radius,-R", cfg.radius, "ball radius");
        sub->add_option("--depth,-N", cfg.depth, "tree depth");
        sub->add_option("--horizon,-H", cfg.horizon, "infinitude horizon");
        sub->add_option("--delta", cfg.delta, "hyperbolicity constant override");
        sub->add_option("--cone-depth", cfg.cone_depth, "cone truncation depth");
        sub->add_option("--equiv-depth", cfg.equiv_depth, "bounded equivalence depth");
        sub->add_option("--state-bound", cfg.state_bound, "synthesis state bound");
        sub->add_option("--out", cfg.out_dir, "artifact directory");
    };

    auto* ball = app.add_subcommand("ball", "build a ball and report layer sizes");
    add_common(ball);
    auto* atoms = app.add_subcommand("atoms", "per-level atom counts");
    add_common(atoms);
    atoms->add_option("--level", cfg.level, "deepest level to report");
    atoms->add_flag("--dump", cfg.dump, "dump atom membership");
    auto* tree = app.add_subcommand("tree", "tree of atoms with parent links");
    add_common(tree);
    auto* types = app.add_subcommand("types", "classify atom types and emit the type graph");
    add_common(types);
    auto* trans = app.add_subcommand("transducer", "synthesize a boundary-action transducer");
    add_common(trans);
    trans->add_option("--element", cfg.element, "generator word, e.g. \"r s r^-1\"");
    auto* verify = app.add_subcommand("verify", "run the invariant and golden-comparison suite");
    add_common(verify);
    auto* encode = app.add_subcommand("encode", "binary prefix codes and binary transducers");
    add_common(encode);
    encode->add_option("--element", cfg.element, "generator word to convert");

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_path.empty()) {
            // File values load first; explicitly given flags override them.
            RunConfig flags = cfg;
            cfg.load_file(config_path);
            auto given = [&](const std::string& name) {
                auto* opt = sub->get_option_no_throw(name);
                return opt != nullptr && opt->count() > 0;
            };
            if (given("--source")) cfg.source = flags.source;
            if (given("--radius")) cfg.radius = flags.radius;
            if (given("--depth")) cfg.depth = flags.depth;
            if (given("--horizon")) cfg.horizon = flags.horizon;
            if (given("--delta")) cfg.delta = flags.delta;
            if (given("--cone-depth")) cfg.cone_depth = flags.cone_depth;
            if (given("--equiv-depth")) cfg.equiv_depth = flags.equiv_depth;
            if (given("--state-bound")) cfg.state_bound = flags.state_bound;
            if (given("--level")) cfg.level = flags.level;
            if (given("--element")) cfg.element = flags.element;
            if (given("--out")) cfg.out_dir = flags.out_dir;
            if (given("--dump")) cfg.dump = flags.dump;
        }
        if (ball->parsed()) return cmd_ball(cfg);
        if (atoms->parsed()) return cmd_atoms(cfg);
        if (tree->parsed()) return cmd_tree(cfg);
        if (types->parsed()) return cmd_types(cfg);
        if (trans->parsed()) return cmd_transducer(cfg);
        if (verify->parsed()) return cmd_verify(cfg);
        if (encode->parsed()) return cmd_encode(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

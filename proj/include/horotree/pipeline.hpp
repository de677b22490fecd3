#pragma once

#include <fstream>
#include <memory>
#include <string>

#include "horotree/atoms.hpp"
#include "horotree/config.hpp"
#include "horotree/group.hpp"
#include "horotree/sources.hpp"
#include "horotree/transducer.hpp"
#include "horotree/typing.hpp"

namespace horotree {

inline LayeredGraph build_source(const RunConfig& cfg) {
    auto spec = parse_source_spec(cfg.source);
    LayeredGraph g;
    switch (spec.kind) {
        case SourceKind::Tiling:
            g = build_tiling_ball(spec.p, spec.q, cfg.radius);
            break;
        case SourceKind::FreeGroup:
            g = build_free_ball(spec.rank, cfg.radius);
            break;
        case SourceKind::Line:
            g = build_line_ball(cfg.radius);
            break;
        case SourceKind::File: {
            std::ifstream in(spec.path);
            if (!in) fail_input("cannot open graph file '" + spec.path + "'");
            g = build_file_ball(in, cfg.radius, cfg.delta >= 0 ? cfg.delta : 1);
            break;
        }
    }
    if (cfg.delta >= 0) g.cert_margin = cfg.delta;
    return g;
}

// Everything the downstream stages share. Symmetry holds a pointer into the
// graph, so the bundle is non-copyable and heap-pinned.
struct Pipeline {
    RunConfig cfg;
    LayeredGraph graph;
    std::unique_ptr<Symmetry> sym;
    AtomTree tree;
    Typing typing;
    TypeGraph type_graph;
};

inline std::unique_ptr<Pipeline> build_pipeline(const RunConfig& cfg, bool with_types = true) {
    cfg.validate();
    auto p = std::make_unique<Pipeline>();
    p->cfg = cfg;
    p->graph = build_source(cfg);
    p->sym = std::make_unique<Symmetry>(p->graph);
    p->tree = build_atom_tree(p->graph, cfg.depth, cfg.horizon);
    if (with_types && p->sym->available()) {
        MorphismParams params;
        params.cone_depth = cfg.cone_depth;
        p->typing = classify_types(*p->sym, p->tree, params);
        p->type_graph = type_graph_of(p->typing);
    }
    return p;
}

// Slot label of each tree atom within its parent.
inline std::vector<std::vector<int>> slot_labels(const AtomTree& tree, const Typing& ty) {
    std::vector<std::vector<int>> slot_of(tree.levels.size());
    for (std::size_t n = 0; n < tree.levels.size(); ++n)
        slot_of[n].assign(tree.levels[n].atoms.size(), -1);
    for (std::size_t n = 0; n + 1 < tree.levels.size(); ++n)
        for (std::size_t ai = 0; ai < tree.levels[n].atoms.size(); ++ai) {
            const auto& slots = ty.child_at_slot[n][ai];
            for (std::size_t s = 0; s < slots.size(); ++s)
                if (slots[s] >= 0)
                    slot_of[n + 1][static_cast<std::size_t>(slots[s])] = static_cast<int>(s);
        }
    return slot_of;
}

inline std::vector<int> atom_address(const AtomTree& tree,
                                     const std::vector<std::vector<int>>& slot_of, int level,
                                     int index) {
    std::vector<int> addr;
    int lvl = level, idx = index;
    while (lvl > 0) {
        addr.push_back(slot_of[static_cast<std::size_t>(lvl)][static_cast<std::size_t>(idx)]);
        idx = tree.atom(lvl, idx).parent;
        --lvl;
    }
    std::reverse(addr.begin(), addr.end());
    return addr;
}

}  // namespace horotree

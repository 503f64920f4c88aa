#pragma once

// Random signatures, graphs, patterns and rules for the property tests and
// the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hopg/port_graph.hpp"
#include "hopg/rewrite.hpp"
#include "hopg/signature.hpp"

namespace hopg::testing {

using Rng = std::mt19937_64;

/// HOPG_SEED overrides the default seed of every randomized test.
inline std::uint64_t seed_from_env(std::uint64_t fallback) {
    if (const char* s = std::getenv("HOPG_SEED"))
        return std::strtoull(s, nullptr, 10);
    return fallback;
}

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
inline bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// Constants N0/A/B/P2/Q/T, first-order variables U1/U2/U2b/U3 (U2 keeps
/// the constant port r in second position, which only P2 has), higher-order
/// variables H0..H3 and G1..G3, and for each first-order variable U a
/// higher-order twin hU of the same arity.
inline std::shared_ptr<const PSignature> random_signature() {
    static const auto sig = [] {
        PSignature s;
        auto c = [](const char* t) { return const_port(t); };
        auto v = [](const char* t) { return var_port(t); };
        s.declare_in_place({"N0", NameKind::fo_constant, 0, {}});
        s.declare_in_place({"A", NameKind::fo_constant, 1, {c("a")}});
        s.declare_in_place({"B", NameKind::fo_constant, 1, {c("b")}});
        s.declare_in_place({"P2", NameKind::fo_constant, 2, {c("l"), c("r")}});
        s.declare_in_place({"Q", NameKind::fo_constant, 2, {c("l"), c("q")}});
        s.declare_in_place({"T", NameKind::fo_constant, 3, {c("l"), c("r"), c("s")}});
        s.declare_in_place({"U1", NameKind::fo_variable, 1, {v("u")}});
        s.declare_in_place({"U2", NameKind::fo_variable, 2, {v("u"), c("r")}});
        s.declare_in_place({"U2b", NameKind::fo_variable, 2, {v("u"), v("w")}});
        s.declare_in_place({"U3", NameKind::fo_variable, 3, {v("u"), v("v"), v("w")}});
        s.declare_in_place({"hU1", NameKind::ho_variable, 1, {v("u")}});
        s.declare_in_place({"hU2", NameKind::ho_variable, 2, {v("u"), v("r")}});
        s.declare_in_place({"hU2b", NameKind::ho_variable, 2, {v("u"), v("w")}});
        s.declare_in_place({"hU3", NameKind::ho_variable, 3, {v("u"), v("v"), v("w")}});
        s.declare_in_place({"H0", NameKind::ho_variable, 0, {}});
        s.declare_in_place({"H1", NameKind::ho_variable, 1, {v("h1")}});
        s.declare_in_place({"H2", NameKind::ho_variable, 2, {v("h1"), v("h2")}});
        s.declare_in_place({"H3", NameKind::ho_variable, 3, {v("h1"), v("h2"), v("h3")}});
        s.declare_in_place({"G1", NameKind::ho_variable, 1, {v("g1")}});
        s.declare_in_place({"G2", NameKind::ho_variable, 2, {v("g1"), v("g2")}});
        s.declare_in_place({"G3", NameKind::ho_variable, 3, {v("g1"), v("g2"), v("g3")}});
        return std::make_shared<const PSignature>(std::move(s));
    }();
    return sig;
}

inline const std::vector<std::string>& constant_labels() {
    static const std::vector<std::string> labels{"N0", "A", "B", "P2", "Q", "T"};
    return labels;
}

/// Adds random edges between free ports; same-node edges only if allowed.
inline void add_random_edges(Rng& rng, PortGraph& g, double density, bool allow_same_node) {
    auto free = interface(g);
    std::shuffle(free.begin(), free.end(), rng);
    std::set<PortRef> used;
    for (std::size_t i = 0; i < free.size(); ++i) {
        if (used.count(free[i]) || !chance(rng, density))
            continue;
        for (std::size_t j = i + 1; j < free.size(); ++j) {
            if (used.count(free[j]))
                continue;
            if (!allow_same_node && free[j].node == free[i].node)
                continue;
            g.add_edge(free[i], free[j]);
            used.insert(free[i]);
            used.insert(free[j]);
            break;
        }
    }
}

/// A ground graph (constant labels only) with 1..max_nodes nodes.
inline PortGraph random_subject(Rng& rng, std::size_t max_nodes, bool allow_same_node = true) {
    PortGraph g(random_signature());
    const auto n = 1 + pick(rng, max_nodes);
    for (std::size_t i = 0; i < n; ++i) {
        // Small labels first: 0-ary nodes are rare.
        static const std::vector<std::string> weighted{"A", "A", "B", "B", "P2", "P2", "Q", "Q", "T", "T", "N0"};
        g.add_node(weighted[pick(rng, weighted.size())], NodeClass::fo);
    }
    add_random_edges(rng, g, 0.7, allow_same_node);
    return g;
}

/// A first-order variable that the constant `label` can instantiate, or the
/// label itself.
inline std::string generalize(Rng& rng, const std::string& label) {
    std::vector<std::string> options{label};
    if (label == "A" || label == "B")
        options.push_back("U1");
    if (label == "P2")
        options.insert(options.end(), {"U2", "U2b"});
    if (label == "Q")
        options.push_back("U2b");
    if (label == "T")
        options.push_back("U3");
    return options[pick(rng, options.size())];
}

/// A pattern of at most max_nodes nodes (at most max_ho higher-order).
/// Usually carved out of `subject` (so that it tends to match): some nodes
/// kept as first-order nodes, possibly generalized to variables, some node
/// groups collapsed into higher-order nodes whose arity is the group's free
/// port count, and most of the edges between them kept. Otherwise random.
inline PortGraph random_pattern(Rng& rng, const PortGraph& subject, std::size_t max_nodes, std::size_t max_ho) {
    const auto sig = random_signature();
    PortGraph p(sig);
    if (chance(rng, 0.2)) {
        const auto n = 1 + pick(rng, max_nodes);
        std::size_t ho = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (ho < max_ho && chance(rng, 0.35)) {
                static const std::vector<std::string> hl{"H0", "H1", "H1", "H2", "H2", "H3", "G1", "G2"};
                p.add_node(hl[pick(rng, hl.size())], NodeClass::ho);
                ++ho;
            } else {
                static const std::vector<std::string> fl{"A", "B", "P2", "Q", "T", "U1", "U2", "U2b", "U3"};
                p.add_node(fl[pick(rng, fl.size())], NodeClass::fo);
            }
        }
        add_random_edges(rng, p, 0.5, true);
        return p;
    }

    auto ids = subject.node_ids();
    std::shuffle(ids.begin(), ids.end(), rng);
    // Assign subject nodes to pattern items: fo (one node each) or one of
    // up to max_ho groups.
    std::vector<NodeId> fo_nodes;
    std::vector<std::set<NodeId>> groups;
    std::size_t items = 0;
    const auto n_ho = pick(rng, max_ho + 1);
    groups.resize(n_ho);
    for (const auto& id : ids) {
        const auto r = pick(rng, 4);
        if (r == 0)
            continue;
        if (r == 1 && n_ho > 0) {
            auto& grp = groups[pick(rng, n_ho)];
            if (grp.empty() && items >= max_nodes)
                continue;
            if (grp.empty())
                ++items;
            grp.insert(id);
            continue;
        }
        if (items >= max_nodes)
            continue;
        fo_nodes.push_back(id);
        ++items;
    }
    std::map<PortRef, PortRef> port_of; // subject port -> pattern port
    for (const auto& s : fo_nodes) {
        auto label = generalize(rng, subject.node(s).label);
        NodeId v = p.add_node(label, NodeClass::fo);
        for (std::size_t i = 1; i <= subject.degree(s); ++i)
            port_of[{s, i}] = {v, i};
    }
    for (const auto& grp : groups) {
        if (grp.empty())
            continue;
        // Only arities 0..3 are declared.
        auto iface = interface(induced_full_subgraph(subject, grp));
        if (iface.size() > 3)
            continue;
        std::shuffle(iface.begin(), iface.end(), rng);
        static const char* primary[] = {"H0", "H1", "H2", "H3"};
        static const char* secondary[] = {"H0", "G1", "G2", "G3"};
        const char* label = chance(rng, 0.7) ? primary[iface.size()] : secondary[iface.size()];
        NodeId v = p.add_node(label, NodeClass::ho);
        for (std::size_t i = 0; i < iface.size(); ++i)
            port_of[iface[i]] = {v, i + 1};
    }
    for (const auto& e : subject.edges()) {
        auto a = port_of.find(e.first());
        auto b = port_of.find(e.second());
        if (a == port_of.end() || b == port_of.end() || !chance(rng, 0.85))
            continue;
        if (a->second == b->second)
            continue;
        p.add_edge(a->second, b->second);
    }
    if (p.node_count() == 0)
        p.add_node(generalize(rng, subject.node(ids.front()).label), NodeClass::fo);
    return p;
}

/// Replaces every first-order variable node by its higher-order twin of the
/// same arity (same node ids, same edges).
inline PortGraph lift_fo_variables(const PortGraph& g) {
    PortGraph out(g.signature_ptr());
    const auto& sig = g.signature();
    for (const auto& [id, info] : g.nodes()) {
        if (info.cls == NodeClass::fo && sig.at(info.label).kind == NameKind::fo_variable)
            out.add_node(id, "h" + info.label, NodeClass::ho);
        else
            out.add_node(id, info.label, info.cls);
    }
    for (const auto& e : g.edges())
        out.add_edge(e.first(), e.second());
    return out;
}

/// A random rule whose lhs is a random pattern. The rhs reuses the lhs
/// variables (zero, one or several times) plus constants, and the interface
/// map sends each free lhs port to zero, one or occasionally two free rhs
/// ports, so that black holes and fan-out both occur.
inline Rule random_rule(Rng& rng, const PortGraph& subject, std::size_t max_nodes, std::size_t max_ho) {
    auto lhs = random_pattern(rng, subject, max_nodes, max_ho);
    PortGraph rhs(random_signature());
    std::vector<std::string> vars;
    for (const auto& [id, info] : lhs.nodes())
        if (lhs.signature().at(info.label).is_variable())
            vars.push_back(info.label);
    const auto n = pick(rng, max_nodes + 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!vars.empty() && chance(rng, 0.5)) {
            const auto& label = vars[pick(rng, vars.size())];
            const auto cls = lhs.signature().at(label).kind == NameKind::ho_variable ? NodeClass::ho : NodeClass::fo;
            rhs.add_node(label, cls);
        } else {
            rhs.add_node(constant_labels()[pick(rng, constant_labels().size())], NodeClass::fo);
        }
    }
    add_random_edges(rng, rhs, 0.4, false);
    auto rfree = interface(rhs);
    std::shuffle(rfree.begin(), rfree.end(), rng);
    InterfaceMap imap;
    std::size_t next = 0;
    for (const auto& port : interface(lhs)) {
        auto& targets = imap[port];
        const auto r = pick(rng, 10);
        const std::size_t want = r < 2 ? 0 : (r < 9 ? 1 : 2);
        for (std::size_t k = 0; k < want && !rfree.empty(); ++k) {
            // Mostly distinct targets; sometimes shared ones.
            if (next < rfree.size() && chance(rng, 0.9))
                targets.insert(rfree[next++]);
            else
                targets.insert(rfree[pick(rng, rfree.size())]);
        }
    }
    return compile_rule(std::move(lhs), std::move(rhs), std::move(imap), "r");
}

/// Same graph with every node id replaced by a fresh one, in shuffled order.
inline std::pair<PortGraph, std::map<NodeId, NodeId>> renamed_copy(Rng& rng, const PortGraph& g) {
    auto ids = g.node_ids();
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::map<NodeId, NodeId> ren;
    for (std::size_t i = 0; i < ids.size(); ++i)
        ren[ids[i]] = NodeId("r" + std::to_string(order[i]));
    PortGraph out(g.signature_ptr());
    for (const auto& [id, info] : g.nodes())
        out.add_node(ren.at(id), info.label, info.cls);
    for (const auto& e : g.edges())
        out.add_edge({ren.at(e.first().node), e.first().port}, {ren.at(e.second().node), e.second().port});
    return {out, ren};
}

} // namespace hopg::testing

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hopg/equality.hpp"
#include "hopg/error.hpp"
#include "hopg/matcher.hpp"
#include "hopg/morphism.hpp"
#include "hopg/port_graph.hpp"

namespace hopg {

using InterfaceMap = std::map<PortRef, std::set<PortRef>>;

/// L => R together with the arrow-node port map from interface(L) to sets of
/// ports of interface(R). An empty target set is a black hole.
struct Rule {
    std::string name;
    PortGraph lhs;
    PortGraph rhs;
    InterfaceMap interface_map;
};

inline Rule compile_rule(PortGraph lhs, PortGraph rhs, InterfaceMap imap, std::string name) {
    if (!lhs.same_signature(rhs))
        throw error(errc::signature_mismatch, "rule '" + name + "': lhs and rhs use different signatures");
    const auto lhs_iface = interface(lhs);
    const std::set<PortRef> lhs_free(lhs_iface.begin(), lhs_iface.end());
    const auto rhs_iface = interface(rhs);
    const std::set<PortRef> rhs_free(rhs_iface.begin(), rhs_iface.end());

    for (const auto& [from, to] : imap) {
        if (!lhs_free.count(from))
            throw error(errc::source_not_free, "rule '" + name + "': " + PortGraph::describe(from) +
                                                   " is not a free port of the lhs");
        for (const auto& t : to)
            if (!rhs_free.count(t))
                throw error(errc::target_not_free, "rule '" + name + "': " + PortGraph::describe(t) +
                                                       " is not a free port of the rhs");
    }
    for (const auto& p : lhs_free)
        if (!imap.count(p))
            throw error(errc::incomplete_interface_map, "rule '" + name + "': no entry for lhs port " +
                                                            PortGraph::describe(p));

    std::set<std::string> lhs_labels;
    for (const auto& [id, info] : lhs.nodes())
        lhs_labels.insert(info.label);
    const auto& sig = rhs.signature();
    for (const auto& [id, info] : rhs.nodes())
        if (sig.at(info.label).is_variable() && !lhs_labels.count(info.label))
            throw error(errc::free_rhs_variable, "rule '" + name + "': variable '" + info.label +
                                                     "' occurs in the rhs only");
    return Rule{std::move(name), std::move(lhs), std::move(rhs), std::move(imap)};
}

struct Redex {
    std::size_t rule_index = 0;
    std::string rule;
    Morphism morphism;
};

/// Every (rule, morphism) pair, rules in list order, morphisms in matcher order.
inline std::vector<Redex> enumerate_redexes(const std::vector<Rule>& rules, const PortGraph& g,
                                            const MatchOptions& opts = {}) {
    std::vector<Redex> out;
    for (std::size_t i = 0; i < rules.size(); ++i)
        for (auto& m : find_morphisms(rules[i].lhs, g, opts).morphisms)
            out.push_back({i, rules[i].name, std::move(m)});
    return out;
}

/// m(R): the rhs with variables instantiated. `port_map` sends every rhs
/// port to its concrete port in `fragment`; `copies` lists, per rhs node, the
/// fragment nodes standing for it.
struct RhsInstance {
    PortGraph fragment;
    std::map<PortRef, PortRef> port_map;
    std::map<NodeId, std::vector<NodeId>> copies;
};

inline RhsInstance instantiate_rhs(const Rule& rule, const Morphism& m, const PortGraph& subject) {
    RhsInstance out{PortGraph(subject.signature_ptr()), {}, {}};
    std::size_t next = subject.node_count() + 1;
    auto fresh = [&] {
        for (;; ++next) {
            NodeId id("n" + std::to_string(next));
            if (!subject.contains(id) && !out.fragment.contains(id)) {
                ++next;
                return id;
            }
        }
    };
    const auto& sig = rule.rhs.signature();

    for (const auto& [r, info] : rule.rhs.nodes()) {
        const auto& decl = sig.at(info.label);
        if (decl.kind != NameKind::ho_variable) {
            std::string label = info.label;
            if (decl.kind == NameKind::fo_variable) {
                auto it = m.sigma_n.find(info.label);
                if (it == m.sigma_n.end())
                    throw error(errc::unbound_variable, "no instance for variable '" + info.label + "'");
                label = it->second;
            }
            NodeId id = fresh();
            out.fragment.add_node(id, label, NodeClass::fo);
            out.copies[r] = {id};
            for (std::size_t p = 1; p <= info.degree; ++p)
                out.port_map[{r, p}] = {id, p};
            continue;
        }
        // A fresh copy of the image of the first lhs occurrence of the label.
        std::optional<NodeId> source;
        for (const auto& [l, linfo] : rule.lhs.nodes())
            if (linfo.label == info.label) {
                source = l;
                break;
            }
        if (!source || !m.ho.count(*source) || !m.tr_ports.count(*source))
            throw error(errc::unbound_variable, "no instance for variable '" + info.label + "'");
        const auto& image = m.ho.at(*source);
        const auto& ports = m.tr_ports.at(*source);
        std::map<NodeId, NodeId> copy;
        for (const auto& s : image) {
            NodeId id = fresh();
            const auto& sinfo = subject.node(s);
            out.fragment.add_node(id, sinfo.label, sinfo.cls);
            copy[s] = id;
            out.copies[r].push_back(id);
        }
        for (const auto& e : subject.edges())
            if (image.count(e.first().node) && image.count(e.second().node))
                out.fragment.add_edge({copy.at(e.first().node), e.first().port},
                                      {copy.at(e.second().node), e.second().port});
        for (std::size_t p = 1; p <= info.degree; ++p) {
            if (p > ports.size())
                throw error(errc::stale_morphism, "port bijection of " + source->str() + " is too short");
            out.port_map[{r, p}] = {copy.at(ports[p - 1].node), ports[p - 1].port};
        }
    }
    for (const auto& e : rule.rhs.edges())
        out.fragment.add_edge(out.port_map.at(e.first()), out.port_map.at(e.second()));
    return out;
}

struct RewriteResult {
    PortGraph graph;
    std::vector<NodeId> removed;
    std::vector<NodeId> added;
    /// Context port and what it is attached to afterwards (nothing for a black hole).
    std::vector<std::pair<PortRef, std::optional<PortRef>>> rewired;
};

inline RewriteResult apply_with_diff(const Rule& rule, const Morphism& m, const PortGraph& g) {
    if (auto v = check_morphism(m, rule.lhs, g); !v.empty())
        throw error(errc::stale_morphism, "rule '" + rule.name + "': " + std::string(to_string(v.front().clause)) +
                                              ": " + v.front().detail);
    const auto matched = m.image_nodes();
    auto rhs = instantiate_rhs(rule, m, g);

    // Where each lhs interface port's context edge goes: the concrete
    // targets in m(R). Every port of a matched node carrying an edge outside
    // m(L) is the image of such an interface port.
    std::map<PortRef, std::vector<PortRef>> targets_at; // subject port -> fragment ports
    for (const auto& [from, to] : rule.interface_map) {
        auto at = image_port(m, rule.lhs, from);
        if (!at)
            throw error(errc::stale_morphism, "lhs port " + PortGraph::describe(from) + " has no image");
        auto& t = targets_at[*at];
        for (const auto& q : to)
            t.push_back(rhs.port_map.at(q));
    }

    RewriteResult out{g, {matched.begin(), matched.end()}, {}, {}};
    PortGraph& h = out.graph;
    std::vector<std::pair<PortRef, PortRef>> context; // (context-side port, matched-side port)
    std::set<Edge> seen;
    for (const auto& [port, t] : targets_at) {
        auto l = g.link(port);
        if (!l)
            continue;
        Edge e(port, *l);
        if (!seen.insert(e).second)
            continue;
        context.push_back({*l, port});
    }
    for (const auto& n : matched)
        h.remove_node(n);
    for (const auto& [id, info] : rhs.fragment.nodes()) {
        h.add_node(id, info.label, info.cls);
        out.added.push_back(id);
    }
    for (const auto& e : rhs.fragment.edges())
        h.add_edge(e.first(), e.second());

    auto overflow = [&](const PortRef& p, const std::string& why) {
        return error(errc::linearity_overflow, "rule '" + rule.name + "' at " + PortGraph::describe(p) + ": " + why);
    };
    for (const auto& [outer, inner] : context) {
        const auto& t_inner = targets_at.at(inner);
        if (!matched.count(outer.node)) {
            if (t_inner.size() > 1)
                throw overflow(outer, "context edge would fan out to " + std::to_string(t_inner.size()) + " ports");
            if (t_inner.empty()) {
                out.rewired.push_back({outer, std::nullopt});
                continue;
            }
            if (h.link(t_inner.front()))
                throw overflow(outer, "target port " + PortGraph::describe(t_inner.front()) + " is already used");
            h.add_edge(outer, t_inner.front());
            out.rewired.push_back({outer, t_inner.front()});
            continue;
        }
        // Both ends were matched: an edge between two images of lhs
        // interface ports, reconnected between their targets.
        auto it_outer = targets_at.find(outer);
        if (it_outer == targets_at.end() || t_inner.empty() || it_outer->second.empty())
            continue;
        const auto& t_outer = it_outer->second;
        if (t_inner.size() > 1 || t_outer.size() > 1)
            throw overflow(outer, "edge between matched ports would fan out");
        if (t_inner.front() == t_outer.front() || h.link(t_inner.front()) || h.link(t_outer.front()))
            throw overflow(outer, "target port is already used");
        h.add_edge(t_outer.front(), t_inner.front());
    }
    return out;
}

inline PortGraph apply(const Rule& rule, const Morphism& m, const PortGraph& g) {
    return apply_with_diff(rule, m, g).graph;
}

inline PortGraph apply(const std::vector<Rule>& rules, const Redex& r, const PortGraph& g) {
    return apply(rules.at(r.rule_index), r.morphism, g);
}

struct DerivationStep {
    std::string rule;
    Morphism morphism;
    std::string digest; // of the graph after the step
};

struct Derivation {
    std::string initial;
    std::vector<DerivationStep> steps;
};

inline const Rule& find_rule(const std::vector<Rule>& rules, const std::string& name) {
    for (const auto& r : rules)
        if (r.name == name)
            return r;
    throw error(errc::unknown_rule, "no rule named '" + name + "'");
}

/// Re-executes a derivation from `g`, checking every recorded digest.
inline PortGraph replay(const std::vector<Rule>& rules, const PortGraph& g, const Derivation& d) {
    if (graph_digest(g) != d.initial)
        throw error(errc::digest_mismatch, "initial graph does not match the derivation");
    PortGraph cur = g;
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
        const auto& step = d.steps[i];
        cur = apply(find_rule(rules, step.rule), step.morphism, cur);
        if (graph_digest(cur) != step.digest)
            throw error(errc::digest_mismatch, "step " + std::to_string(i + 1) + " produced a different graph");
    }
    return cur;
}

enum class Strategy { leftmost_first, exhaustive_bfs };

struct NormalForm {
    PortGraph graph;
    Derivation derivation;
};

/// leftmost_first: one entry, the last graph reached. exhaustive_bfs: every
/// distinct normal form found within the step budget. step_limit_reached is
/// set when some reachable graph still had a redex after max_steps steps;
/// revisited when a rewrite led back to an already explored graph (bfs only).
struct NormalizeResult {
    std::vector<NormalForm> results;
    bool step_limit_reached = false;
    bool revisited = false;
};

inline NormalizeResult normalize(const std::vector<Rule>& rules, const PortGraph& g, Strategy strategy,
                                 std::size_t max_steps) {
    NormalizeResult out;
    if (strategy == Strategy::leftmost_first) {
        NormalForm cur{g, {graph_digest(g), {}}};
        for (;;) {
            auto redexes = enumerate_redexes(rules, cur.graph);
            if (redexes.empty())
                break;
            if (cur.derivation.steps.size() >= max_steps) {
                out.step_limit_reached = true;
                break;
            }
            const auto& r = redexes.front();
            cur.graph = apply(rules, r, cur.graph);
            cur.derivation.steps.push_back({r.rule, r.morphism, graph_digest(cur.graph)});
        }
        out.results.push_back(std::move(cur));
        return out;
    }

    std::map<std::string, std::vector<PortGraph>> visited;
    auto first_visit = [&](const PortGraph& x, const std::string& digest) {
        auto& bucket = visited[digest];
        for (const auto& y : bucket)
            if (syntactic_equal(x, y))
                return false;
        bucket.push_back(x);
        return true;
    };
    std::vector<NormalForm> frontier{{g, {graph_digest(g), {}}}};
    first_visit(g, frontier.front().derivation.initial);
    for (std::size_t depth = 0; !frontier.empty(); ++depth) {
        std::vector<NormalForm> next;
        for (auto& state : frontier) {
            auto redexes = enumerate_redexes(rules, state.graph);
            if (redexes.empty()) {
                out.results.push_back(std::move(state));
                continue;
            }
            if (depth >= max_steps) {
                out.step_limit_reached = true;
                continue;
            }
            for (const auto& r : redexes) {
                PortGraph h = apply(rules, r, state.graph);
                auto digest = graph_digest(h);
                if (!first_visit(h, digest)) {
                    out.revisited = true;
                    continue;
                }
                NormalForm succ{std::move(h), state.derivation};
                succ.derivation.steps.push_back({r.rule, r.morphism, digest});
                next.push_back(std::move(succ));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

} // namespace hopg

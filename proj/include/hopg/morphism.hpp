#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "hopg/equality.hpp"
#include "hopg/port_graph.hpp"

namespace hopg {

/// A higher-order port-graph morphism from a pattern into a subject.
///
/// `ho` holds the node set of each higher-order image (the image itself is
/// the full sub-graph those nodes induce). `tr_ports[v̂][i-1]` is the subject
/// port that pattern port v̂.i is sent to. `edges` is f_E.
struct Morphism {
    std::map<NodeId, NodeId> fo;
    std::map<NodeId, std::set<NodeId>> ho;
    std::map<std::string, std::string> sigma_n;
    std::map<std::pair<std::string, std::string>, std::string> sigma_p;
    std::map<NodeId, std::vector<PortRef>> tr_ports;
    std::map<Edge, Edge> edges;

    /// Every subject node covered by an image.
    std::set<NodeId> image_nodes() const {
        std::set<NodeId> out;
        for (const auto& [p, s] : fo)
            out.insert(s);
        for (const auto& [p, set] : ho)
            out.insert(set.begin(), set.end());
        return out;
    }

    friend bool operator==(const Morphism&, const Morphism&) = default;
    friend bool operator<(const Morphism& a, const Morphism& b) {
        return std::tie(a.fo, a.ho, a.tr_ports, a.sigma_n) < std::tie(b.fo, b.ho, b.tr_ports, b.sigma_n);
    }
};

/// Where a pattern port lands in the subject, if the morphism defines it.
inline std::optional<PortRef> image_port(const Morphism& m, const PortGraph& pattern, const PortRef& p) {
    const auto& info = pattern.node(p.node);
    if (info.cls == NodeClass::fo) {
        auto it = m.fo.find(p.node);
        if (it == m.fo.end())
            return std::nullopt;
        return PortRef{it->second, p.port};
    }
    auto it = m.tr_ports.find(p.node);
    if (it == m.tr_ports.end() || p.port < 1 || p.port > it->second.size())
        return std::nullopt;
    return it->second[p.port - 1];
}

/// Fills in f_E and σ_p from the node maps. Returns false when some pattern
/// edge has an endpoint the morphism does not map.
inline bool complete_derived_maps(Morphism& m, const PortGraph& pattern) {
    m.edges.clear();
    bool ok = true;
    for (const auto& e : pattern.edges()) {
        auto a = image_port(m, pattern, e.first());
        auto b = image_port(m, pattern, e.second());
        if (!a || !b) {
            ok = false;
            continue;
        }
        m.edges.emplace(e, Edge(*a, *b));
    }
    m.sigma_p.clear();
    const auto& sig = pattern.signature();
    for (const auto& [var, name] : m.sigma_n) {
        if (!sig.contains(var) || !sig.contains(name))
            continue;
        const auto& from = sig.at(var).interface;
        const auto& to = sig.at(name).interface;
        for (std::size_t i = 0; i < from.size() && i < to.size(); ++i)
            if (from[i].kind == PortKind::variable)
                m.sigma_p[{var, from[i].text}] = to[i].text;
    }
    return ok;
}

enum class Clause { totality, fo_instantiation, ho_instantiation, injection, edge_preservation };

constexpr std::string_view to_string(Clause c) {
    switch (c) {
    case Clause::totality: return "Totality";
    case Clause::fo_instantiation: return "FirstOrderInstantiation";
    case Clause::ho_instantiation: return "HigherOrderInstantiation";
    case Clause::injection: return "Injection";
    case Clause::edge_preservation: return "EdgePreservation";
    }
    return "?";
}

struct Violation {
    Clause clause;
    std::string detail;
};

/// Checks every clause of the morphism definition; empty result iff `m` is a
/// valid morphism pattern -> subject.
inline std::vector<Violation> check_morphism(const Morphism& m, const PortGraph& pattern, const PortGraph& subject) {
    std::vector<Violation> out;
    auto add = [&](Clause c, std::string d) { out.push_back({c, std::move(d)}); };
    if (!pattern.same_signature(subject)) {
        add(Clause::totality, "pattern and subject use different signatures");
        return out;
    }
    const auto& sig = pattern.signature();

    // Totality.
    for (const auto& [id, info] : pattern.nodes()) {
        if (info.cls == NodeClass::fo && !m.fo.count(id))
            add(Clause::totality, "first-order node " + id.str() + " is unmapped");
        if (info.cls == NodeClass::ho && (!m.ho.count(id) || !m.tr_ports.count(id)))
            add(Clause::totality, "higher-order node " + id.str() + " is unmapped");
    }
    for (const auto& [p, s] : m.fo)
        if (!pattern.contains(p) || pattern.node(p).cls != NodeClass::fo)
            add(Clause::totality, "map entry for unknown first-order node " + p.str());
    for (const auto& [p, s] : m.ho)
        if (!pattern.contains(p) || pattern.node(p).cls != NodeClass::ho)
            add(Clause::totality, "map entry for unknown higher-order node " + p.str());
    if (!out.empty())
        return out;

    // Instantiation of first-order variables.
    for (const auto& [p, s] : m.fo) {
        const auto& pinfo = pattern.node(p);
        if (!subject.contains(s) || subject.node(s).cls != NodeClass::fo) {
            add(Clause::fo_instantiation, p.str() + " -> " + s.str() + ": image is not a first-order subject node");
            continue;
        }
        const auto& slabel = subject.node(s).label;
        const auto& pdecl = sig.at(pinfo.label);
        if (pdecl.kind == NameKind::fo_constant) {
            if (slabel != pinfo.label)
                add(Clause::fo_instantiation, p.str() + ": constant '" + pinfo.label + "' sent to '" + slabel + "'");
            continue;
        }
        auto it = m.sigma_n.find(pinfo.label);
        if (it == m.sigma_n.end()) {
            add(Clause::fo_instantiation, "no instantiation for variable '" + pinfo.label + "'");
            continue;
        }
        if (it->second != slabel)
            add(Clause::fo_instantiation, p.str() + ": variable '" + pinfo.label + "' is instantiated to '" +
                                              it->second + "' but the image is labelled '" + slabel + "'");
    }
    for (const auto& [var, name] : m.sigma_n) {
        if (!sig.contains(var) || sig.at(var).kind != NameKind::fo_variable) {
            add(Clause::fo_instantiation, "'" + var + "' is not a first-order variable");
            continue;
        }
        if (!sig.contains(name) || !sig.at(name).is_first_order()) {
            add(Clause::fo_instantiation, "'" + var + "' instantiated to non first-order name '" + name + "'");
            continue;
        }
        const auto& from = sig.at(var);
        const auto& to = sig.at(name);
        if (from.arity != to.arity) {
            add(Clause::fo_instantiation, "'" + var + "' and '" + name + "' differ in arity");
            continue;
        }
        for (std::size_t i = 0; i < from.arity; ++i)
            if (from.interface[i].kind == PortKind::constant && from.interface[i] != to.interface[i])
                add(Clause::fo_instantiation, "'" + name + "' does not keep constant port '" +
                                                  from.interface[i].text + "' of '" + var + "'");
    }
    for (const auto& [key, value] : m.sigma_p) {
        auto it = m.sigma_n.find(key.first);
        if (it == m.sigma_n.end() || !sig.contains(key.first) || !sig.contains(it->second))
            continue;
        const auto& from = sig.at(key.first).interface;
        const auto& to = sig.at(it->second).interface;
        for (std::size_t i = 0; i < from.size() && i < to.size(); ++i)
            if (from[i].text == key.second && from[i].kind == PortKind::variable && to[i].text != value)
                add(Clause::fo_instantiation, "port variable '" + key.second + "' of '" + key.first +
                                                  "' recorded as '" + value + "', position gives '" + to[i].text + "'");
    }

    // Instantiation of higher-order variables.
    std::map<std::string, std::vector<NodeId>> by_label;
    for (const auto& [p, image] : m.ho) {
        const auto& pinfo = pattern.node(p);
        bool nodes_ok = true;
        for (const auto& s : image)
            if (!subject.contains(s)) {
                add(Clause::ho_instantiation, p.str() + ": image node " + s.str() + " not in subject");
                nodes_ok = false;
            }
        const auto& ports = m.tr_ports.at(p);
        if (ports.size() != pinfo.degree) {
            add(Clause::ho_instantiation, p.str() + ": tr_ports has " + std::to_string(ports.size()) +
                                              " entries for " + std::to_string(pinfo.degree) + " ports");
            continue;
        }
        if (!nodes_ok)
            continue;
        auto iface = interface(induced_full_subgraph(subject, image));
        std::set<PortRef> targets(ports.begin(), ports.end());
        std::set<PortRef> iface_set(iface.begin(), iface.end());
        if (targets.size() != ports.size())
            add(Clause::ho_instantiation, p.str() + ": tr_ports is not injective");
        if (targets != iface_set)
            add(Clause::ho_instantiation, p.str() + ": tr_ports is not a bijection onto the image interface (" +
                                              std::to_string(iface.size()) + " free ports, arity " +
                                              std::to_string(pinfo.degree) + ")");
        by_label[pinfo.label].push_back(p);
    }
    for (const auto& [label, occ] : by_label) {
        for (std::size_t i = 1; i < occ.size(); ++i) {
            if (!equal_images_with_ports(subject, m.ho.at(occ[0]), m.tr_ports.at(occ[0]), m.ho.at(occ[i]),
                                         m.tr_ports.at(occ[i])))
                add(Clause::ho_instantiation, "occurrences " + occ[0].str() + " and " + occ[i].str() + " of '" +
                                                  label + "' do not share one instance");
        }
    }

    // Injection.
    std::map<NodeId, NodeId> owner;
    auto claim = [&](const NodeId& s, const NodeId& p) {
        auto [it, inserted] = owner.emplace(s, p);
        if (!inserted)
            add(Clause::injection, "subject node " + s.str() + " is the image of both " + it->second.str() +
                                       " and " + p.str());
    };
    for (const auto& [p, s] : m.fo)
        claim(s, p);
    for (const auto& [p, image] : m.ho)
        for (const auto& s : image)
            claim(s, p);

    // Edge preservation.
    for (const auto& e : pattern.edges()) {
        auto a = image_port(m, pattern, e.first());
        auto b = image_port(m, pattern, e.second());
        if (!a || !b) {
            add(Clause::edge_preservation, "edge endpoint of " + PortGraph::describe(e.first()) + " -- " +
                                               PortGraph::describe(e.second()) + " has no image");
            continue;
        }
        if (*a == *b || !subject.has_edge(Edge(*a, *b))) {
            add(Clause::edge_preservation, "no subject edge " + PortGraph::describe(*a) + " -- " +
                                               PortGraph::describe(*b));
            continue;
        }
        auto it = m.edges.find(e);
        if (it != m.edges.end() && it->second != Edge(*a, *b))
            add(Clause::edge_preservation, "recorded edge image disagrees with the node maps");
    }
    return out;
}

} // namespace hopg

#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "hopg/error.hpp"
#include "hopg/morphism.hpp"
#include "hopg/port_graph.hpp"
#include "hopg/rewrite.hpp"
#include "hopg/signature.hpp"

// JSON formats. Objects are written with sorted keys (nlohmann::json's
// default), so equal values always serialize to identical text.
//
//   signature   {"nodes":[{"name":"A","kind":"fo_constant","ports":[{"name":"a","kind":"constant"}]}]}
//   graph       {"signature":<sig>?, "nodes":[{"id":"n1","label":"A","class":"fo"}],
//                "edges":[[["n1",1],["n2",1]]]}
//   rule        {"name":"beta","lhs":<graph>,"rhs":<graph>,"signature":<sig>?,
//                "interface":[{"from":["s",1],"to":[["body",1]]}]}
//   morphism    {"fo":{"a":"n1"},"ho":{"x":["n2"]},"sigma_n":{"X":"ax"},"sigma_p":{"X":{"x":"in"}},
//                "tr_ports":{"x":[["n2",1]]}}
//   derivation  {"initial":"<digest>","steps":[{"rule":"beta","morphism":<morphism>,"digest":"…"}]}
namespace hopg::json_io {

using json = nlohmann::json;

namespace detail {

template <class F>
auto guarded(const std::string& what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const error&) {
        throw;
    } catch (const std::exception& e) {
        throw error(errc::parse_error, what + ": " + e.what());
    }
}

inline NameKind parse_name_kind(const std::string& s) {
    if (s == "fo_constant")
        return NameKind::fo_constant;
    if (s == "fo_variable")
        return NameKind::fo_variable;
    if (s == "ho_variable")
        return NameKind::ho_variable;
    throw error(errc::parse_error, "unknown node-name kind '" + s + "'");
}

inline PortKind parse_port_kind(const std::string& s) {
    if (s == "constant")
        return PortKind::constant;
    if (s == "variable")
        return PortKind::variable;
    throw error(errc::parse_error, "unknown port kind '" + s + "'");
}

inline NodeClass parse_class(const std::string& s) {
    if (s == "fo")
        return NodeClass::fo;
    if (s == "ho")
        return NodeClass::ho;
    throw error(errc::parse_error, "unknown node class '" + s + "'");
}

} // namespace detail

inline json to_json(const PSignature& sig) {
    json nodes = json::array();
    for (const auto& [name, d] : sig.decls()) {
        json ports = json::array();
        for (const auto& p : d.interface)
            ports.push_back({{"name", p.text}, {"kind", std::string(to_string(p.kind))}});
        nodes.push_back({{"name", name}, {"kind", std::string(to_string(d.kind))}, {"ports", ports}});
    }
    return {{"nodes", nodes}};
}

/// With checked = false the declarations are stored as written, so that
/// validate() can report on them.
inline PSignature signature_from_json(const json& j, bool checked = true) {
    return detail::guarded("signature", [&] {
        PSignature sig;
        for (const auto& n : j.at("nodes")) {
            NodeNameDecl d;
            d.name = n.at("name").get<std::string>();
            d.kind = detail::parse_name_kind(n.at("kind").get<std::string>());
            for (const auto& p : n.at("ports"))
                d.interface.push_back(
                    {p.at("name").get<std::string>(), detail::parse_port_kind(p.at("kind").get<std::string>())});
            d.arity = n.contains("arity") ? n.at("arity").get<std::size_t>() : d.interface.size();
            if (checked)
                sig.declare_in_place(std::move(d));
            else
                sig.add_unchecked(std::move(d));
        }
        return sig;
    });
}

inline json to_json(const PortRef& p) { return json::array({p.node.str(), p.port}); }

inline PortRef port_from_json(const json& j) {
    return detail::guarded("port", [&] {
        if (!j.is_array() || j.size() != 2)
            throw error(errc::parse_error, "a port is written [\"node\", index]");
        return PortRef{NodeId(j.at(0).get<std::string>()), j.at(1).get<std::size_t>()};
    });
}

inline json to_json(const PortGraph& g, bool with_signature = false) {
    json nodes = json::array();
    for (const auto& [id, info] : g.nodes())
        nodes.push_back({{"id", id.str()}, {"label", info.label}, {"class", std::string(to_string(info.cls))}});
    json edges = json::array();
    for (const auto& e : g.edges())
        edges.push_back(json::array({to_json(e.first()), to_json(e.second())}));
    json out{{"nodes", nodes}, {"edges", edges}};
    if (with_signature)
        out["signature"] = to_json(g.signature());
    return out;
}

/// Uses `sig` when given, otherwise the embedded "signature" member.
inline PortGraph graph_from_json(const json& j, std::shared_ptr<const PSignature> sig = nullptr) {
    return detail::guarded("graph", [&] {
        if (!sig) {
            if (!j.contains("signature"))
                throw error(errc::parse_error, "graph has no signature and none was supplied");
            sig = std::make_shared<const PSignature>(signature_from_json(j.at("signature")));
        } else if (j.contains("signature") && signature_from_json(j.at("signature")) != *sig) {
            throw error(errc::signature_mismatch, "embedded signature differs from the supplied one");
        }
        PortGraph g(sig);
        for (const auto& n : j.at("nodes")) {
            const auto label = n.at("label").get<std::string>();
            if (!sig->contains(label))
                throw error(errc::unknown_label, "label '" + label + "' is not in the signature");
            NodeClass cls;
            if (n.contains("class"))
                cls = detail::parse_class(n.at("class").get<std::string>());
            else
                cls = sig->at(label).kind == NameKind::ho_variable ? NodeClass::ho : NodeClass::fo;
            g.add_node(NodeId(n.at("id").get<std::string>()), label, cls);
        }
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2)
                throw error(errc::parse_error, "an edge is written [port, port]");
            g.add_edge(port_from_json(e.at(0)), port_from_json(e.at(1)));
        }
        return g;
    });
}

inline json to_json(const Rule& r, bool with_signature = false) {
    json iface = json::array();
    for (const auto& [from, to] : r.interface_map) {
        json targets = json::array();
        for (const auto& t : to)
            targets.push_back(to_json(t));
        iface.push_back({{"from", to_json(from)}, {"to", targets}});
    }
    json out{{"name", r.name}, {"lhs", to_json(r.lhs)}, {"rhs", to_json(r.rhs)}, {"interface", iface}};
    if (with_signature)
        out["signature"] = to_json(r.lhs.signature());
    return out;
}

inline Rule rule_from_json(const json& j, std::shared_ptr<const PSignature> sig = nullptr) {
    return detail::guarded("rule", [&] {
        if (j.contains("signature")) {
            auto embedded = signature_from_json(j.at("signature"));
            if (!sig)
                sig = std::make_shared<const PSignature>(std::move(embedded));
            else if (embedded != *sig)
                throw error(errc::signature_mismatch, "rule signature differs from the supplied one");
        }
        auto lhs = graph_from_json(j.at("lhs"), sig);
        auto rhs = graph_from_json(j.at("rhs"), sig ? sig : lhs.signature_ptr());
        InterfaceMap imap;
        for (const auto& entry : j.at("interface")) {
            auto& targets = imap[port_from_json(entry.at("from"))];
            for (const auto& t : entry.at("to"))
                targets.insert(port_from_json(t));
        }
        return compile_rule(std::move(lhs), std::move(rhs), std::move(imap), j.at("name").get<std::string>());
    });
}

inline json to_json(const Morphism& m) {
    json fo = json::object();
    for (const auto& [p, s] : m.fo)
        fo[p.str()] = s.str();
    json ho = json::object();
    for (const auto& [p, set] : m.ho) {
        json nodes = json::array();
        for (const auto& s : set)
            nodes.push_back(s.str());
        ho[p.str()] = nodes;
    }
    json sigma_n = json::object();
    for (const auto& [var, name] : m.sigma_n)
        sigma_n[var] = name;
    json sigma_p = json::object();
    for (const auto& [key, name] : m.sigma_p)
        sigma_p[key.first][key.second] = name;
    json tr = json::object();
    for (const auto& [p, ports] : m.tr_ports) {
        json list = json::array();
        for (const auto& q : ports)
            list.push_back(to_json(q));
        tr[p.str()] = list;
    }
    return {{"fo", fo}, {"ho", ho}, {"sigma_n", sigma_n}, {"sigma_p", sigma_p}, {"tr_ports", tr}};
}

/// f_E and σ_p are recomputed from the node maps against `pattern`.
inline Morphism morphism_from_json(const json& j, const PortGraph& pattern) {
    return detail::guarded("morphism", [&] {
        Morphism m;
        for (const auto& [p, s] : j.at("fo").items())
            m.fo[NodeId(p)] = NodeId(s.get<std::string>());
        if (j.contains("ho"))
            for (const auto& [p, list] : j.at("ho").items()) {
                auto& set = m.ho[NodeId(p)];
                for (const auto& s : list)
                    set.insert(NodeId(s.get<std::string>()));
            }
        if (j.contains("sigma_n"))
            for (const auto& [var, name] : j.at("sigma_n").items())
                m.sigma_n[var] = name.get<std::string>();
        if (j.contains("tr_ports"))
            for (const auto& [p, list] : j.at("tr_ports").items()) {
                auto& ports = m.tr_ports[NodeId(p)];
                for (const auto& q : list)
                    ports.push_back(port_from_json(q));
            }
        complete_derived_maps(m, pattern);
        return m;
    });
}

inline json to_json(const Derivation& d) {
    json steps = json::array();
    for (const auto& s : d.steps)
        steps.push_back({{"rule", s.rule}, {"morphism", to_json(s.morphism)}, {"digest", s.digest}});
    return {{"initial", d.initial}, {"steps", steps}};
}

inline Derivation derivation_from_json(const json& j, const std::vector<Rule>& rules) {
    return detail::guarded("derivation", [&] {
        Derivation d;
        d.initial = j.at("initial").get<std::string>();
        for (const auto& s : j.at("steps")) {
            const auto name = s.at("rule").get<std::string>();
            const auto& rule = find_rule(rules, name);
            d.steps.push_back({name, morphism_from_json(s.at("morphism"), rule.lhs), s.at("digest").get<std::string>()});
        }
        return d;
    });
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse(const std::string& text) {
    return detail::guarded("json", [&] { return json::parse(text); });
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw error(errc::parse_error, "cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return detail::guarded(path, [&] { return json::parse(ss.str()); });
}

inline void write_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out)
        throw error(errc::parse_error, "cannot write '" + path + "'");
    out << dump(j);
}

} // namespace hopg::json_io

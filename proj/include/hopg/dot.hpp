#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include "hopg/port_graph.hpp"
#include "hopg/rewrite.hpp"

// Graphviz output. Nodes are records with one field per port (named after
// the signature), higher-order nodes are dashed, edges join port fields.
namespace hopg::dot {

inline std::string escape_record(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '{' || c == '}' || c == '|' || c == '<' || c == '>' || c == '"' || c == '\\' || c == ' ')
            out += '\\';
        out += c;
    }
    return out;
}

inline std::string quoted(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    return out + "\"";
}

inline void write_body(std::ostream& os, const PortGraph& g, const std::string& prefix, const std::string& indent) {
    for (const auto& [id, info] : g.nodes()) {
        std::string ports;
        for (std::size_t p = 1; p <= info.degree; ++p) {
            if (p > 1)
                ports += "|";
            ports += "<p" + std::to_string(p) + "> " + escape_record(g.port_name({id, p}).text);
        }
        std::string label = escape_record(info.label) + "\\n" + escape_record(id.str());
        if (!ports.empty())
            label = "{" + label + "|{" + ports + "}}";
        os << indent << quoted(prefix + id.str()) << " [label=\"" << label << "\"";
        if (info.cls == NodeClass::ho)
            os << ", style=dashed";
        os << "];\n";
    }
    for (const auto& e : g.edges()) {
        os << indent << quoted(prefix + e.first().node.str()) << ":p" << e.first().port << " -- "
           << quoted(prefix + e.second().node.str()) << ":p" << e.second().port << ";\n";
    }
}

inline std::string to_dot(const PortGraph& g, const std::string& name = "G") {
    std::ostringstream os;
    os << "graph " << quoted(name) << " {\n  node [shape=record];\n";
    write_body(os, g, "", "  ");
    os << "}\n";
    return os.str();
}

/// lhs and rhs side by side as clusters; the interface map as dotted edges.
inline std::string to_dot(const Rule& r) {
    std::ostringstream os;
    os << "graph " << quoted(r.name) << " {\n  node [shape=record];\n";
    os << "  subgraph cluster_lhs {\n    label=\"lhs\";\n";
    write_body(os, r.lhs, "L.", "    ");
    os << "  }\n  subgraph cluster_rhs {\n    label=\"rhs\";\n";
    write_body(os, r.rhs, "R.", "    ");
    os << "  }\n";
    for (const auto& [from, to] : r.interface_map)
        for (const auto& t : to)
            os << "  " << quoted("L." + from.node.str()) << ":p" << from.port << " -- " << quoted("R." + t.node.str())
               << ":p" << t.port << " [style=dotted, constraint=false];\n";
    os << "}\n";
    return os.str();
}

} // namespace hopg::dot

#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hopg/error.hpp"
#include "hopg/signature.hpp"

namespace hopg {

/// Opaque node identifier. Ordered shortlex (length first) so that
/// generated ids like n2 < n10 sort the way people expect.
class NodeId {
public:
    NodeId() = default;
    explicit NodeId(std::string value) : value_(std::move(value)) {}

    const std::string& str() const { return value_; }

    friend bool operator==(const NodeId&, const NodeId&) = default;
    friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) {
        if (auto c = a.value_.size() <=> b.value_.size(); c != 0)
            return c;
        return a.value_.compare(b.value_) <=> 0;
    }

private:
    std::string value_;
};

inline NodeId operator""_id(const char* s, std::size_t n) { return NodeId(std::string(s, n)); }

/// A physical port v.i, 1-based.
struct PortRef {
    NodeId node;
    std::size_t port = 0;

    friend bool operator==(const PortRef&, const PortRef&) = default;
    friend std::strong_ordering operator<=>(const PortRef&, const PortRef&) = default;
};

/// Undirected edge; endpoints are kept sorted so that {a,b} == {b,a}.
class Edge {
public:
    Edge(PortRef a, PortRef b) : a_(std::move(a)), b_(std::move(b)) {
        if (b_ < a_)
            std::swap(a_, b_);
    }

    const PortRef& first() const { return a_; }
    const PortRef& second() const { return b_; }
    bool touches(const NodeId& n) const { return a_.node == n || b_.node == n; }

    friend bool operator==(const Edge&, const Edge&) = default;
    friend std::strong_ordering operator<=>(const Edge&, const Edge&) = default;

private:
    PortRef a_;
    PortRef b_;
};

enum class NodeClass { fo, ho };

constexpr std::string_view to_string(NodeClass c) { return c == NodeClass::fo ? "fo" : "ho"; }

struct NodeInfo {
    std::string label;
    NodeClass cls = NodeClass::fo;
    std::size_t degree = 0;

    friend bool operator==(const NodeInfo&, const NodeInfo&) = default;
};

/// A labelled higher-order port-graph over a p-signature.
///
/// Copying a PortGraph yields an independent snapshot; the mutating members
/// only ever leave the graph in a state satisfying the typing and linearity
/// invariants (they throw and leave *this unchanged otherwise). Port names are
/// never stored: they are always read back from the signature.
class PortGraph {
public:
    PortGraph() : sig_(std::make_shared<const PSignature>()) {}
    explicit PortGraph(std::shared_ptr<const PSignature> sig) : sig_(std::move(sig)) {}
    explicit PortGraph(PSignature sig) : sig_(std::make_shared<const PSignature>(std::move(sig))) {}

    const PSignature& signature() const { return *sig_; }
    const std::shared_ptr<const PSignature>& signature_ptr() const { return sig_; }

    bool same_signature(const PortGraph& other) const {
        return sig_ == other.sig_ || *sig_ == *other.sig_;
    }

    NodeId add_node(std::string_view label, NodeClass cls) {
        NodeId id = fresh_id();
        add_node(id, label, cls);
        return id;
    }

    void add_node(const NodeId& id, std::string_view label, NodeClass cls) {
        if (id.str().empty())
            throw error(errc::invalid_name, "node ids must be non-empty");
        if (nodes_.count(id))
            throw error(errc::duplicate_node, "node '" + id.str() + "' already exists");
        if (!sig_->contains(label))
            throw error(errc::unknown_label, "label '" + std::string(label) + "' is not declared");
        const auto& decl = sig_->at(label);
        const bool ho_label = decl.kind == NameKind::ho_variable;
        if (ho_label != (cls == NodeClass::ho))
            throw error(errc::class_mismatch, "label '" + std::string(label) + "' is " +
                                                  std::string(to_string(decl.kind)) + " but the node is " +
                                                  std::string(to_string(cls)));
        nodes_.emplace(id, NodeInfo{std::string(label), cls, decl.arity});
    }

    void add_edge(const PortRef& a, const PortRef& b) {
        check_port(a);
        check_port(b);
        if (a == b)
            throw error(errc::self_port, "cannot connect port " + describe(a) + " to itself");
        for (const auto* p : {&a, &b})
            if (links_.count(*p))
                throw error(errc::port_occupied, "port " + describe(*p) + " already has an edge");
        edges_.emplace(a, b);
        links_.emplace(a, b);
        links_.emplace(b, a);
    }

    void remove_edge(const Edge& e) {
        if (!edges_.erase(e))
            return;
        links_.erase(e.first());
        links_.erase(e.second());
    }

    /// Removes the node together with every incident edge.
    void remove_node(const NodeId& id) {
        auto it = nodes_.find(id);
        if (it == nodes_.end())
            throw error(errc::unknown_node, "no node '" + id.str() + "'");
        for (std::size_t p = 1; p <= it->second.degree; ++p)
            if (auto l = link({id, p}))
                remove_edge(Edge({id, p}, *l));
        nodes_.erase(it);
    }

    bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

    const NodeInfo& node(const NodeId& id) const {
        auto it = nodes_.find(id);
        if (it == nodes_.end())
            throw error(errc::unknown_node, "no node '" + id.str() + "'");
        return it->second;
    }

    const std::map<NodeId, NodeInfo>& nodes() const { return nodes_; }
    const std::set<Edge>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::vector<NodeId> node_ids() const {
        std::vector<NodeId> out;
        out.reserve(nodes_.size());
        for (const auto& [id, info] : nodes_)
            out.push_back(id);
        return out;
    }

    std::vector<NodeId> node_ids(NodeClass cls) const {
        std::vector<NodeId> out;
        for (const auto& [id, info] : nodes_)
            if (info.cls == cls)
                out.push_back(id);
        return out;
    }

    std::size_t degree(const NodeId& id) const { return node(id).degree; }

    /// The port at the other end of the edge on `p`, if any.
    std::optional<PortRef> link(const PortRef& p) const {
        auto it = links_.find(p);
        if (it == links_.end())
            return std::nullopt;
        return it->second;
    }

    bool has_edge(const Edge& e) const { return edges_.count(e) != 0; }

    const PortName& port_name(const PortRef& p) const {
        const auto& info = node(p.node);
        return sig_->at(info.label).interface.at(p.port - 1);
    }

    /// Smallest "n<k>" (k counting up from node_count()+1) not used here nor in `avoid`.
    NodeId fresh_id(const std::set<NodeId>& avoid = {}) const {
        for (std::size_t k = nodes_.size() + 1;; ++k) {
            NodeId id("n" + std::to_string(k));
            if (!nodes_.count(id) && !avoid.count(id))
                return id;
        }
    }

    static std::string describe(const PortRef& p) { return p.node.str() + "." + std::to_string(p.port); }

private:
    void check_port(const PortRef& p) const {
        auto it = nodes_.find(p.node);
        if (it == nodes_.end())
            throw error(errc::unknown_node, "no node '" + p.node.str() + "'");
        if (p.port < 1 || p.port > it->second.degree)
            throw error(errc::port_out_of_range, "port " + describe(p) + " outside 1.." +
                                                     std::to_string(it->second.degree));
    }

    std::shared_ptr<const PSignature> sig_;
    std::map<NodeId, NodeInfo> nodes_;
    std::set<Edge> edges_;
    std::map<PortRef, PortRef> links_;
};

/// Free ports of `g`, in PortRef order.
inline std::vector<PortRef> interface(const PortGraph& g) {
    std::vector<PortRef> out;
    for (const auto& [id, info] : g.nodes())
        for (std::size_t p = 1; p <= info.degree; ++p)
            if (!g.link({id, p}))
                out.push_back({id, p});
    return out;
}

inline bool is_subgraph(const PortGraph& g, const PortGraph& h) {
    if (!g.same_signature(h))
        return false;
    for (const auto& [id, info] : g.nodes()) {
        if (!h.contains(id) || h.node(id) != info)
            return false;
    }
    return std::all_of(g.edges().begin(), g.edges().end(), [&](const Edge& e) { return h.has_edge(e); });
}

/// Sub-graph that also contains every edge of `h` between its nodes.
inline bool is_full_subgraph(const PortGraph& g, const PortGraph& h) {
    if (!is_subgraph(g, h))
        return false;
    return std::all_of(h.edges().begin(), h.edges().end(), [&](const Edge& e) {
        const bool inside = g.contains(e.first().node) && g.contains(e.second().node);
        return !inside || g.has_edge(e);
    });
}

inline PortGraph induced_full_subgraph(const PortGraph& h, const std::set<NodeId>& nodes) {
    PortGraph out(h.signature_ptr());
    for (const auto& id : nodes) {
        const auto& info = h.node(id);
        out.add_node(id, info.label, info.cls);
    }
    for (const auto& e : h.edges())
        if (nodes.count(e.first().node) && nodes.count(e.second().node))
            out.add_edge(e.first(), e.second());
    return out;
}

/// Re-derives every PortGraph invariant from the raw node and edge sets.
/// Errors for typing/range/linearity violations; a warning for edges that
/// join two ports of the same node (allowed, but unusual).
inline std::vector<Diagnostic> validate(const PortGraph& g) {
    std::vector<Diagnostic> out;
    const auto& sig = g.signature();
    for (const auto& [id, info] : g.nodes()) {
        if (!sig.contains(info.label)) {
            out.push_back({"UnknownLabel", id.str(), "label '" + info.label + "' not declared"});
            continue;
        }
        const auto& decl = sig.at(info.label);
        if ((decl.kind == NameKind::ho_variable) != (info.cls == NodeClass::ho))
            out.push_back({"ClassMismatch", id.str(), "label '" + info.label + "' has the wrong class"});
        if (decl.arity != info.degree)
            out.push_back({"DegreeMismatch", id.str(), "degree differs from arity of '" + info.label + "'"});
    }
    std::map<PortRef, int> uses;
    for (const auto& e : g.edges()) {
        for (const auto* p : {&e.first(), &e.second()}) {
            if (!g.contains(p->node)) {
                out.push_back({"UnknownNode", PortGraph::describe(*p), "edge endpoint on a missing node"});
                continue;
            }
            if (p->port < 1 || p->port > g.node(p->node).degree)
                out.push_back({"PortOutOfRange", PortGraph::describe(*p), "edge endpoint outside the node's ports"});
            ++uses[*p];
        }
        if (e.first() == e.second())
            out.push_back({"SelfPort", PortGraph::describe(e.first()), "edge joins a port to itself"});
        else if (e.first().node == e.second().node)
            out.push_back({"SameNodeEdge", PortGraph::describe(e.first()),
                           "edge joins two ports of one node", Diagnostic::Severity::warning});
    }
    for (const auto& [p, n] : uses)
        if (n > 1)
            out.push_back({"PortOccupied", PortGraph::describe(p), "port occurs in " + std::to_string(n) + " edges"});
    return out;
}

} // namespace hopg

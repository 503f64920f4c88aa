#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hopg/port_graph.hpp"

namespace hopg {

namespace detail {

// FNV-1a, 64 bit. Used instead of std::hash so digests are stable across
// platforms and standard library versions.
struct Fnv64 {
    std::uint64_t state = 0xcbf29ce484222325ull;

    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= p[i];
            state *= 0x100000001b3ull;
        }
    }
    void word(std::uint64_t w) {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i)
            buf[i] = static_cast<unsigned char>(w >> (8 * i));
        bytes(buf, 8);
    }
    void text(std::string_view s) {
        word(s.size());
        bytes(s.data(), s.size());
    }
};

} // namespace detail

/// Stable colour refinement over port-graphs. Two nodes related by any
/// label- and edge-preserving bijection always receive the same colour, so
/// colours are a sound filter for equality search and the basis of digests.
inline std::map<NodeId, std::uint64_t> refine_colours(const PortGraph& g) {
    std::map<NodeId, std::uint64_t> colour;
    for (const auto& [id, info] : g.nodes()) {
        detail::Fnv64 h;
        h.word(info.cls == NodeClass::fo ? 1 : 2);
        h.text(info.label);
        h.word(info.degree);
        colour[id] = h.state;
    }
    auto classes = [](const std::map<NodeId, std::uint64_t>& c) {
        std::set<std::uint64_t> s;
        for (const auto& [id, v] : c)
            s.insert(v);
        return s.size();
    };
    std::size_t n_classes = classes(colour);
    for (std::size_t round = 0; round < g.node_count(); ++round) {
        std::map<NodeId, std::uint64_t> next;
        for (const auto& [id, info] : g.nodes()) {
            detail::Fnv64 h;
            h.word(colour[id]);
            for (std::size_t p = 1; p <= info.degree; ++p) {
                auto l = g.link({id, p});
                if (!l) {
                    h.word(0);
                    continue;
                }
                h.word(l->node == id ? 2 : 1);
                h.word(colour[l->node]);
                h.word(l->port);
            }
            next[id] = h.state;
        }
        colour = std::move(next);
        std::size_t n = classes(colour);
        if (n == n_classes)
            break;
        n_classes = n;
    }
    return colour;
}

/// Renaming-insensitive 64-bit digest (hex). Syntactically equal graphs
/// always share a digest; the converse is checked by syntactic_equal.
inline std::string graph_digest(const PortGraph& g) {
    auto colour = refine_colours(g);
    std::vector<std::uint64_t> sorted;
    for (const auto& [id, c] : colour)
        sorted.push_back(c);
    std::sort(sorted.begin(), sorted.end());
    detail::Fnv64 h;
    h.word(g.node_count());
    h.word(g.edge_count());
    for (auto c : sorted)
        h.word(c);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.state));
    return buf;
}

struct EqualityWitness {
    std::map<NodeId, NodeId> tr;    // first-order nodes
    std::map<NodeId, NodeId> ho_tr; // higher-order nodes

    friend bool operator==(const EqualityWitness&, const EqualityWitness&) = default;
};

namespace detail {

class EqualitySearch {
public:
    EqualitySearch(const PortGraph& g, const PortGraph& h) : g_(g), h_(h) {}

    std::optional<std::map<NodeId, NodeId>> run(const std::map<NodeId, NodeId>& seed) {
        if (g_.node_count() != h_.node_count() || g_.edge_count() != h_.edge_count())
            return std::nullopt;
        cg_ = refine_colours(g_);
        ch_ = refine_colours(h_);
        order_ = g_.node_ids();
        for (const auto& [a, b] : seed) {
            if (!g_.contains(a) || !h_.contains(b))
                return std::nullopt;
            auto it = fwd_.find(a);
            if (it != fwd_.end()) {
                if (it->second != b)
                    return std::nullopt;
                continue;
            }
            if (used_.count(b) || !compatible(a, b))
                return std::nullopt;
            fwd_[a] = b;
            used_.insert(b);
        }
        for (const auto& [a, b] : seed)
            if (!consistent(a, b))
                return std::nullopt;
        if (!extend(0))
            return std::nullopt;
        return fwd_;
    }

private:
    bool compatible(const NodeId& a, const NodeId& b) const {
        return g_.node(a) == h_.node(b) && cg_.at(a) == ch_.at(b);
    }

    // Local edge check for a freshly assigned pair; sufficient for a full
    // check once every node is assigned.
    bool consistent(const NodeId& a, const NodeId& b) const {
        const auto deg = g_.node(a).degree;
        for (std::size_t p = 1; p <= deg; ++p) {
            auto lg = g_.link({a, p});
            auto lh = h_.link({b, p});
            if (lg.has_value() != lh.has_value())
                return false;
            if (!lg)
                continue;
            if (lg->port != lh->port)
                return false;
            auto it = fwd_.find(lg->node);
            if (it != fwd_.end()) {
                if (it->second != lh->node)
                    return false;
            } else if (used_.count(lh->node)) {
                return false;
            }
        }
        return true;
    }

    bool extend(std::size_t i) {
        while (i < order_.size() && fwd_.count(order_[i]))
            ++i;
        if (i == order_.size())
            return true;
        const NodeId& a = order_[i];
        for (const auto& [b, info] : h_.nodes()) {
            if (used_.count(b) || !compatible(a, b))
                continue;
            fwd_[a] = b;
            used_.insert(b);
            if (consistent(a, b) && extend(i + 1))
                return true;
            fwd_.erase(a);
            used_.erase(b);
        }
        return false;
    }

    const PortGraph& g_;
    const PortGraph& h_;
    std::map<NodeId, std::uint64_t> cg_, ch_;
    std::vector<NodeId> order_;
    std::map<NodeId, NodeId> fwd_;
    std::set<NodeId> used_;
};

} // namespace detail

/// Label- and edge-preserving bijection g -> h that extends `seed`, choosing
/// the lexicographically least one (g's nodes in NodeId order, candidates in
/// h's NodeId order).
inline std::optional<EqualityWitness> find_equality_witness(const PortGraph& g, const PortGraph& h,
                                                            const std::map<NodeId, NodeId>& seed = {}) {
    if (!g.same_signature(h))
        return std::nullopt;
    detail::EqualitySearch search(g, h);
    auto m = search.run(seed);
    if (!m)
        return std::nullopt;
    EqualityWitness w;
    for (const auto& [a, b] : *m)
        (g.node(a).cls == NodeClass::fo ? w.tr : w.ho_tr)[a] = b;
    return w;
}

inline std::optional<EqualityWitness> syntactic_equal(const PortGraph& g, const PortGraph& h) {
    return find_equality_witness(g, h);
}

/// Whether two node sets of `subject` induce equal full sub-graphs by a
/// witness that carries port list `ports_a` onto `ports_b` position by position.
inline bool equal_images_with_ports(const PortGraph& subject, const std::set<NodeId>& a,
                                    const std::vector<PortRef>& ports_a, const std::set<NodeId>& b,
                                    const std::vector<PortRef>& ports_b) {
    if (a.size() != b.size() || ports_a.size() != ports_b.size())
        return false;
    std::map<NodeId, NodeId> seed;
    for (std::size_t i = 0; i < ports_a.size(); ++i) {
        if (ports_a[i].port != ports_b[i].port)
            return false;
        auto [it, inserted] = seed.emplace(ports_a[i].node, ports_b[i].node);
        if (!inserted && it->second != ports_b[i].node)
            return false;
    }
    auto ga = induced_full_subgraph(subject, a);
    auto gb = induced_full_subgraph(subject, b);
    return find_equality_witness(ga, gb, seed).has_value();
}

} // namespace hopg

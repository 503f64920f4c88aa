#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include "hopg/error.hpp"
#include "hopg/morphism.hpp"
#include "hopg/port_graph.hpp"

namespace hopg {

/// Reference matcher: enumerates every injective first-order node map,
/// every assignment of the remaining subject nodes to higher-order pattern
/// nodes (or to none) and every port bijection, and keeps what
/// check_morphism accepts. Shares no search code with the staged matcher.
inline std::vector<Morphism> brute_force_morphisms(const PortGraph& pattern, const PortGraph& subject,
                                                   std::size_t limit = 8) {
    if (subject.node_count() > limit)
        throw error(errc::subject_too_large, "subject has " + std::to_string(subject.node_count()) +
                                                 " nodes, oracle limit is " + std::to_string(limit));
    if (!pattern.same_signature(subject))
        throw error(errc::signature_mismatch, "pattern and subject are typed by different signatures");

    const auto fo_pat = pattern.node_ids(NodeClass::fo);
    const auto ho_pat = pattern.node_ids(NodeClass::ho);
    const auto all_subj = subject.node_ids();
    const auto& sig = pattern.signature();
    std::vector<Morphism> out;

    std::map<NodeId, NodeId> fo;
    std::set<NodeId> used;

    auto fo_consistent = [&](std::map<std::string, std::string>& sigma) {
        sigma.clear();
        for (const auto& [p, s] : fo) {
            const auto& pl = pattern.node(p).label;
            if (sig.at(pl).kind != NameKind::fo_variable)
                continue;
            auto [it, inserted] = sigma.emplace(pl, subject.node(s).label);
            if (!inserted && it->second != subject.node(s).label)
                return false;
        }
        return true;
    };

    // Per higher-order pattern node: the chosen node set, then every
    // ordering of its free ports.
    std::vector<std::set<NodeId>> images(ho_pat.size());
    std::vector<std::vector<PortRef>> ports(ho_pat.size());
    std::map<std::string, std::string> sigma;

    std::function<void(std::size_t)> permute = [&](std::size_t h) {
        if (h == ho_pat.size()) {
            Morphism m;
            m.fo = fo;
            m.sigma_n = sigma;
            for (std::size_t i = 0; i < ho_pat.size(); ++i) {
                m.ho[ho_pat[i]] = images[i];
                m.tr_ports[ho_pat[i]] = ports[i];
            }
            complete_derived_maps(m, pattern);
            if (check_morphism(m, pattern, subject).empty())
                out.push_back(std::move(m));
            return;
        }
        auto iface = interface(induced_full_subgraph(subject, images[h]));
        if (iface.size() != pattern.degree(ho_pat[h]))
            return;
        std::sort(iface.begin(), iface.end());
        do {
            ports[h] = iface;
            permute(h + 1);
        } while (std::next_permutation(iface.begin(), iface.end()));
    };

    std::vector<NodeId> rest;
    std::function<void(std::size_t)> assign = [&](std::size_t i) {
        if (i == rest.size()) {
            permute(0);
            return;
        }
        assign(i + 1); // in no image
        for (std::size_t h = 0; h < ho_pat.size(); ++h) {
            images[h].insert(rest[i]);
            assign(i + 1);
            images[h].erase(rest[i]);
        }
    };

    std::function<void(std::size_t)> map_fo = [&](std::size_t i) {
        if (i == fo_pat.size()) {
            if (!fo_consistent(sigma))
                return;
            rest.clear();
            for (const auto& s : all_subj)
                if (!used.count(s))
                    rest.push_back(s);
            assign(0);
            return;
        }
        for (const auto& s : all_subj) {
            if (used.count(s))
                continue;
            fo[fo_pat[i]] = s;
            used.insert(s);
            map_fo(i + 1);
            used.erase(s);
            fo.erase(fo_pat[i]);
        }
    };
    map_fo(0);

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// A morphism reduced to its node-level data.
struct NodeLevelSolution {
    std::vector<std::pair<NodeId, NodeId>> fo;
    std::vector<std::pair<NodeId, std::set<NodeId>>> ho;

    friend bool operator==(const NodeLevelSolution&, const NodeLevelSolution&) = default;
    friend auto operator<=>(const NodeLevelSolution&, const NodeLevelSolution&) = default;
};

/// Projects to node level, dedupes and sorts; two morphisms that differ
/// only in port bijections collapse to one entry.
inline std::vector<NodeLevelSolution> canonical_solution_set(const std::vector<Morphism>& ms) {
    std::vector<NodeLevelSolution> out;
    out.reserve(ms.size());
    for (const auto& m : ms) {
        NodeLevelSolution s;
        s.fo.assign(m.fo.begin(), m.fo.end());
        s.ho.assign(m.ho.begin(), m.ho.end());
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace hopg

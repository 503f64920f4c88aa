#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hopg/equality.hpp"
#include "hopg/error.hpp"
#include "hopg/morphism.hpp"
#include "hopg/port_graph.hpp"

namespace hopg {

struct MatchOptions {
    std::optional<std::size_t> max_solutions;
    /// When false, unanchored higher-order ports get one canonical
    /// assignment instead of every bijection onto the remaining free ports.
    bool enumerate_ho_port_bijections = true;
    std::optional<std::chrono::milliseconds> timeout;
};

struct MatchResult {
    std::vector<Morphism> morphisms;
    bool truncated = false;
    bool timed_out = false;
};

/// Search state shared by the matching stages: the partial first-order map,
/// the higher-order images under construction with their free-port counters,
/// and an availability state per subject node.
class MatchContext {
public:
    enum class State { free, used_fo, hidden };

    MatchContext(const PortGraph& pattern, const PortGraph& subject)
        : pattern_(pattern), subject_(subject), ho_nodes_(pattern.node_ids(NodeClass::ho)) {
        for (std::size_t i = 0; i < ho_nodes_.size(); ++i)
            ho_index_[ho_nodes_[i]] = i;
        images_.resize(ho_nodes_.size());
        free_ports_.assign(ho_nodes_.size(), 0);
    }

    const PortGraph& pattern() const { return pattern_; }
    const PortGraph& subject() const { return subject_; }
    const std::vector<NodeId>& ho_nodes() const { return ho_nodes_; }

    std::size_t ho_index(const NodeId& pattern_ho) const {
        auto it = ho_index_.find(pattern_ho);
        if (it == ho_index_.end())
            throw error(errc::unknown_node, "'" + pattern_ho.str() + "' is not a higher-order pattern node");
        return it->second;
    }

    State state(const NodeId& s) const {
        if (used_fo_.count(s))
            return State::used_fo;
        if (owner_.count(s))
            return State::hidden;
        return State::free;
    }

    bool can_join(std::size_t h, const NodeId& s) const {
        auto it = owner_.find(s);
        if (it != owner_.end())
            return it->second == h;
        return !used_fo_.count(s);
    }

    const std::set<NodeId>& image(std::size_t h) const { return images_.at(h); }

    /// Σ degree − 2·(edges internal to the image), kept up to date on every
    /// add/remove.
    std::size_t free_ports(std::size_t h) const { return free_ports_.at(h); }

    /// Change in the free-port count if `s` joined image `h` now.
    long gain(std::size_t h, const NodeId& s) const {
        const auto& img = images_[h];
        const auto deg = subject_.degree(s);
        long delta = static_cast<long>(deg);
        for (std::size_t p = 1; p <= deg; ++p) {
            auto l = subject_.link({s, p});
            if (!l)
                continue;
            if (l->node == s)
                delta -= 1;
            else if (img.count(l->node))
                delta -= 2;
        }
        return delta;
    }

    void add_to_image(std::size_t h, const NodeId& s) {
        if (!can_join(h, s) || images_[h].count(s))
            throw error(errc::stale_morphism, "node " + s.str() + " is not available for this image");
        free_ports_[h] = static_cast<std::size_t>(static_cast<long>(free_ports_[h]) + gain(h, s));
        images_[h].insert(s);
        owner_[s] = h;
    }

    void remove_from_image(std::size_t h, const NodeId& s) {
        if (!images_[h].erase(s))
            return;
        owner_.erase(s);
        free_ports_[h] = static_cast<std::size_t>(static_cast<long>(free_ports_[h]) - gain(h, s));
    }

    /// Free ports of image `h`, recomputed from scratch (ports not joined to
    /// another node of the image).
    std::vector<PortRef> image_interface(std::size_t h) const {
        std::vector<PortRef> out;
        const auto& img = images_[h];
        for (const auto& s : img) {
            for (std::size_t p = 1; p <= subject_.degree(s); ++p) {
                auto l = subject_.link({s, p});
                if (!l || !img.count(l->node))
                    out.push_back({s, p});
            }
        }
        return out;
    }

    std::optional<NodeId> fo_image(const NodeId& p) const {
        auto it = fo_.find(p);
        if (it == fo_.end())
            return std::nullopt;
        return it->second;
    }

    const std::map<NodeId, NodeId>& fo_map() const { return fo_; }

    /// Can pattern node `p` be sent to subject node `s` given the current
    /// bindings (label, σ_N consistency, arity, constant ports, availability)?
    bool compatible_fo(const NodeId& p, const NodeId& s) const {
        if (state(s) != State::free)
            return false;
        const auto& sinfo = subject_.node(s);
        if (sinfo.cls != NodeClass::fo)
            return false;
        const auto& plabel = pattern_.node(p).label;
        const auto& sig = pattern_.signature();
        const auto& pdecl = sig.at(plabel);
        if (pdecl.kind == NameKind::fo_constant)
            return sinfo.label == plabel;
        auto it = sigma_.find(plabel);
        if (it != sigma_.end())
            return it->second.first == sinfo.label;
        return instantiable(pdecl, sig.at(sinfo.label));
    }

    void map_fo(const NodeId& p, const NodeId& s) {
        fo_[p] = s;
        used_fo_.insert(s);
        const auto& plabel = pattern_.node(p).label;
        if (pattern_.signature().at(plabel).kind == NameKind::fo_variable) {
            auto [it, inserted] = sigma_.emplace(plabel, std::make_pair(subject_.node(s).label, 0));
            ++it->second.second;
        }
    }

    void unmap_fo(const NodeId& p) {
        auto it = fo_.find(p);
        if (it == fo_.end())
            return;
        used_fo_.erase(it->second);
        fo_.erase(it);
        const auto& plabel = pattern_.node(p).label;
        auto sit = sigma_.find(plabel);
        if (sit != sigma_.end() && --sit->second.second == 0)
            sigma_.erase(sit);
    }

    std::map<std::string, std::string> sigma_n() const {
        std::map<std::string, std::string> out;
        for (const auto& [var, bound] : sigma_)
            out[var] = bound.first;
        return out;
    }

    static bool instantiable(const NodeNameDecl& var, const NodeNameDecl& target) {
        if (!target.is_first_order() || target.arity != var.arity)
            return false;
        for (std::size_t i = 0; i < var.arity; ++i)
            if (var.interface[i].kind == PortKind::constant && var.interface[i] != target.interface[i])
                return false;
        return true;
    }

private:
    const PortGraph& pattern_;
    const PortGraph& subject_;
    std::vector<NodeId> ho_nodes_;
    std::map<NodeId, std::size_t> ho_index_;
    std::map<NodeId, NodeId> fo_;
    std::set<NodeId> used_fo_;
    std::map<NodeId, std::size_t> owner_;
    std::vector<std::set<NodeId>> images_;
    std::vector<std::size_t> free_ports_;
    std::map<std::string, std::pair<std::string, int>> sigma_;
};

inline std::size_t count_free_ports_incremental(const MatchContext& ctx, const NodeId& ho) {
    return ctx.free_ports(ctx.ho_index(ho));
}

namespace detail {

/// Staged edge-first search:
///   1. first-order/first-order edges, constant-named endpoints first;
///   2. remaining (edge-less) first-order nodes;
///   3. first-order/higher-order edges, anchoring interface ports of images;
///   4. higher-order/higher-order edges;
///   5. extension of each image with further nodes, then completion of the
///      unanchored port bijection;
///   6. interface-size check and the shared-instance check for repeated
///      higher-order variables.
class StagedSearch {
public:
    using Visitor = std::function<bool(const Morphism&)>;

    StagedSearch(const PortGraph& pattern, const PortGraph& subject, const MatchOptions& opts, Visitor visit)
        : p_(pattern), s_(subject), opts_(opts), visit_(std::move(visit)), ctx_(pattern, subject),
          start_(std::chrono::steady_clock::now()) {
        for (const auto& e : pattern.edges()) {
            const bool a_fo = pattern.node(e.first().node).cls == NodeClass::fo;
            const bool b_fo = pattern.node(e.second().node).cls == NodeClass::fo;
            if (a_fo && b_fo)
                fo_fo_.push_back(e);
            else if (a_fo || b_fo)
                fo_ho_.push_back(a_fo ? std::make_pair(e.first(), e.second()) : std::make_pair(e.second(), e.first()));
            else
                ho_ho_.push_back(e);
        }
        fo_fo_done_.assign(fo_fo_.size(), false);
        fo_ho_done_.assign(fo_ho_.size(), false);
        ho_ho_done_.assign(ho_ho_.size(), false);
        fo_nodes_ = pattern.node_ids(NodeClass::fo);
        subject_fo_ = subject.node_ids(NodeClass::fo);
        const auto n_ho = ctx_.ho_nodes().size();
        anchors_.resize(n_ho);
        anchored_.resize(n_ho);
        for (std::size_t h = 0; h < n_ho; ++h)
            anchors_[h].assign(pattern.degree(ctx_.ho_nodes()[h]), std::nullopt);
        tr_.resize(n_ho);
    }

    void run() { search(); }
    bool timed_out() const { return timed_out_; }

private:
    bool is_constant(const NodeId& p) const {
        return p_.signature().at(p_.node(p).label).kind == NameKind::fo_constant;
    }

    bool check_clock() {
        if (!opts_.timeout || (++ticks_ & 0xff) != 0)
            return false;
        if (std::chrono::steady_clock::now() - start_ > *opts_.timeout) {
            timed_out_ = true;
            stop_ = true;
        }
        return stop_;
    }

    void search() {
        if (stop_ || check_clock())
            return;
        if (auto i = pick_fo_fo()) {
            match_fo_fo(*i);
            return;
        }
        if (auto p = pick_unmapped_fo()) {
            match_isolated_fo(*p);
            return;
        }
        for (std::size_t i = 0; i < fo_ho_.size(); ++i) {
            if (!fo_ho_done_[i]) {
                match_fo_ho(i);
                return;
            }
        }
        if (auto i = pick_ho_ho()) {
            match_ho_ho(*i);
            return;
        }
        extend(0);
    }

    // -- stage 1 ----------------------------------------------------------

    std::optional<std::size_t> pick_fo_fo() const {
        std::optional<std::size_t> best;
        std::pair<int, int> best_key{-1, -1};
        for (std::size_t i = 0; i < fo_fo_.size(); ++i) {
            if (fo_fo_done_[i])
                continue;
            const auto& a = fo_fo_[i].first().node;
            const auto& b = fo_fo_[i].second().node;
            const int mapped = int(ctx_.fo_image(a).has_value()) + int(ctx_.fo_image(b).has_value());
            const int constant = int(is_constant(a)) + int(is_constant(b));
            std::pair<int, int> key{mapped, constant};
            if (key > best_key) {
                best_key = key;
                best = i;
            }
        }
        return best;
    }

    void match_fo_fo(std::size_t i) {
        fo_fo_done_[i] = true;
        PortRef a = fo_fo_[i].first();
        PortRef b = fo_fo_[i].second();
        auto fa = ctx_.fo_image(a.node);
        auto fb = ctx_.fo_image(b.node);
        if (!fa && fb) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        if (fa && fb) {
            auto l = s_.link({*fa, a.port});
            if (l && *l == PortRef{*fb, b.port})
                search();
        } else if (fa) {
            auto l = s_.link({*fa, a.port});
            if (l && l->port == b.port && ctx_.compatible_fo(b.node, l->node)) {
                ctx_.map_fo(b.node, l->node);
                search();
                ctx_.unmap_fo(b.node);
            }
        } else if (a.node == b.node) {
            for (const auto& s : subject_fo_) {
                if (stop_)
                    break;
                if (!ctx_.compatible_fo(a.node, s))
                    continue;
                auto l = s_.link({s, a.port});
                if (!l || *l != PortRef{s, b.port})
                    continue;
                ctx_.map_fo(a.node, s);
                search();
                ctx_.unmap_fo(a.node);
            }
        } else {
            for (const auto& s : subject_fo_) {
                if (stop_)
                    break;
                if (!ctx_.compatible_fo(a.node, s))
                    continue;
                auto l = s_.link({s, a.port});
                if (!l || l->port != b.port || l->node == s)
                    continue;
                ctx_.map_fo(a.node, s);
                if (ctx_.compatible_fo(b.node, l->node)) {
                    ctx_.map_fo(b.node, l->node);
                    search();
                    ctx_.unmap_fo(b.node);
                }
                ctx_.unmap_fo(a.node);
            }
        }
        fo_fo_done_[i] = false;
    }

    // -- stage 2 ----------------------------------------------------------

    std::optional<NodeId> pick_unmapped_fo() const {
        std::optional<NodeId> fallback;
        for (const auto& p : fo_nodes_) {
            if (ctx_.fo_image(p))
                continue;
            if (is_constant(p))
                return p;
            if (!fallback)
                fallback = p;
        }
        return fallback;
    }

    void match_isolated_fo(const NodeId& p) {
        for (const auto& s : subject_fo_) {
            if (stop_)
                break;
            if (!ctx_.compatible_fo(p, s))
                continue;
            ctx_.map_fo(p, s);
            search();
            ctx_.unmap_fo(p);
        }
    }

    // -- anchoring (stages 3 and 4) ----------------------------------------

    struct AnchorUndo {
        bool ok = false;
        bool set = false;
        std::size_t h = 0, q = 0;
        std::optional<NodeId> added;
    };

    // Fixes tr_ports(h)(q) = t, pulling t's node into the image.
    AnchorUndo anchor(std::size_t h, std::size_t q, const PortRef& t) {
        AnchorUndo u;
        u.h = h;
        u.q = q;
        if (anchors_[h][q]) {
            u.ok = *anchors_[h][q] == t;
            return u;
        }
        if (anchored_[h].count(t) || !ctx_.can_join(h, t.node))
            return u;
        if (!ctx_.image(h).count(t.node)) {
            ctx_.add_to_image(h, t.node);
            u.added = t.node;
        }
        anchors_[h][q] = t;
        anchored_[h].insert(t);
        u.set = true;
        u.ok = true;
        return u;
    }

    void undo(const AnchorUndo& u) {
        if (!u.set)
            return;
        anchored_[u.h].erase(*anchors_[u.h][u.q]);
        anchors_[u.h][u.q].reset();
        if (u.added)
            ctx_.remove_from_image(u.h, *u.added);
    }

    void match_fo_ho(std::size_t i) {
        fo_ho_done_[i] = true;
        const auto& [fo_end, ho_end] = fo_ho_[i];
        auto l = s_.link({*ctx_.fo_image(fo_end.node), fo_end.port});
        if (l) {
            auto u = anchor(ctx_.ho_index(ho_end.node), ho_end.port - 1, *l);
            if (u.ok)
                search();
            undo(u);
        }
        fo_ho_done_[i] = false;
    }

    bool anchored(const PortRef& ho_port) const {
        return anchors_[ctx_.ho_index(ho_port.node)][ho_port.port - 1].has_value();
    }

    std::optional<std::size_t> pick_ho_ho() const {
        std::optional<std::size_t> first;
        for (std::size_t i = 0; i < ho_ho_.size(); ++i) {
            if (ho_ho_done_[i])
                continue;
            if (anchored(ho_ho_[i].first()) || anchored(ho_ho_[i].second()))
                return i;
            if (!first)
                first = i;
        }
        return first;
    }

    void match_ho_ho(std::size_t i) {
        ho_ho_done_[i] = true;
        PortRef a = ho_ho_[i].first();
        PortRef b = ho_ho_[i].second();
        // Both ends on one higher-order node would make the edge internal to
        // its image, so the ports could not be interface ports.
        if (a.node != b.node) {
            if (!anchored(a) && anchored(b))
                std::swap(a, b);
            const auto h1 = ctx_.ho_index(a.node);
            const auto h2 = ctx_.ho_index(b.node);
            if (anchored(a)) {
                auto l = s_.link(*anchors_[h1][a.port - 1]);
                if (l) {
                    auto u = anchor(h2, b.port - 1, *l);
                    if (u.ok)
                        search();
                    undo(u);
                }
            } else {
                for (const auto& [sid, info] : s_.nodes()) {
                    if (stop_)
                        break;
                    if (!ctx_.can_join(h1, sid))
                        continue;
                    for (std::size_t sp = 1; sp <= info.degree && !stop_; ++sp) {
                        auto l = s_.link({sid, sp});
                        if (!l || l->node == sid || !ctx_.can_join(h2, l->node))
                            continue;
                        auto u1 = anchor(h1, a.port - 1, {sid, sp});
                        if (u1.ok) {
                            auto u2 = anchor(h2, b.port - 1, *l);
                            if (u2.ok)
                                search();
                            undo(u2);
                        }
                        undo(u1);
                    }
                }
            }
        }
        ho_ho_done_[i] = false;
    }

    // -- stage 5 ----------------------------------------------------------

    std::vector<NodeId> extension_candidates(std::size_t h) const {
        // Free nodes, nearest to the current image first.
        std::map<NodeId, std::size_t> dist;
        std::deque<NodeId> queue;
        for (const auto& n : ctx_.image(h)) {
            dist[n] = 0;
            queue.push_back(n);
        }
        while (!queue.empty()) {
            NodeId n = queue.front();
            queue.pop_front();
            for (std::size_t p = 1; p <= s_.degree(n); ++p) {
                auto l = s_.link({n, p});
                if (l && !dist.count(l->node) && ctx_.state(l->node) == MatchContext::State::free) {
                    dist[l->node] = dist[n] + 1;
                    queue.push_back(l->node);
                }
            }
        }
        std::vector<NodeId> out;
        for (const auto& [id, info] : s_.nodes())
            if (ctx_.state(id) == MatchContext::State::free)
                out.push_back(id);
        std::stable_sort(out.begin(), out.end(), [&](const NodeId& x, const NodeId& y) {
            auto dx = dist.count(x) ? dist.at(x) : SIZE_MAX;
            auto dy = dist.count(y) ? dist.at(y) : SIZE_MAX;
            return dx < dy;
        });
        return out;
    }

    void extend(std::size_t h) {
        if (stop_)
            return;
        if (h == ctx_.ho_nodes().size()) {
            finish();
            return;
        }
        auto cand = extension_candidates(h);
        std::map<NodeId, std::size_t> pos;
        for (std::size_t i = 0; i < cand.size(); ++i)
            pos[cand[i]] = i;
        choose(h, cand, pos, 0);
    }

    void choose(std::size_t h, const std::vector<NodeId>& cand, const std::map<NodeId, std::size_t>& pos,
                std::size_t idx) {
        if (stop_ || check_clock())
            return;
        const auto arity = p_.degree(ctx_.ho_nodes()[h]);

        // Upper bound: only nodes with positive gain can raise the count,
        // and edges among added nodes only lower it further.
        long upper = static_cast<long>(ctx_.free_ports(h));
        for (std::size_t j = idx; j < cand.size(); ++j)
            upper += std::max(0L, ctx_.gain(h, cand[j]));
        if (upper < static_cast<long>(arity))
            return;
        // Lower bound: free ports whose neighbour can no longer join stay free.
        std::size_t fixed = 0;
        for (const auto& n : ctx_.image(h)) {
            for (std::size_t p = 1; p <= s_.degree(n); ++p) {
                auto l = s_.link({n, p});
                if (l && ctx_.image(h).count(l->node))
                    continue;
                if (l) {
                    auto it = pos.find(l->node);
                    if (it != pos.end() && it->second >= idx)
                        continue;
                }
                ++fixed;
            }
        }
        if (fixed > arity)
            return;

        if (idx == cand.size()) {
            if (ctx_.free_ports(h) == arity)
                complete_ports(h);
            return;
        }
        choose(h, cand, pos, idx + 1);
        ctx_.add_to_image(h, cand[idx]);
        choose(h, cand, pos, idx + 1);
        ctx_.remove_from_image(h, cand[idx]);
    }

    void complete_ports(std::size_t h) {
        auto iface = ctx_.image_interface(h);
        std::vector<PortRef> spare;
        for (const auto& port : iface)
            if (!anchored_[h].count(port))
                spare.push_back(port);
        std::vector<std::size_t> open;
        for (std::size_t q = 0; q < anchors_[h].size(); ++q)
            if (!anchors_[h][q])
                open.push_back(q);
        if (spare.size() != open.size() || anchored_[h].size() + spare.size() != iface.size())
            return;
        std::vector<std::size_t> perm(spare.size());
        std::iota(perm.begin(), perm.end(), 0);
        do {
            tr_[h].assign(anchors_[h].size(), PortRef{});
            for (std::size_t q = 0; q < anchors_[h].size(); ++q)
                if (anchors_[h][q])
                    tr_[h][q] = *anchors_[h][q];
            for (std::size_t j = 0; j < open.size(); ++j)
                tr_[h][open[j]] = spare[perm[j]];
            extend(h + 1);
        } while (!stop_ && opts_.enumerate_ho_port_bijections && std::next_permutation(perm.begin(), perm.end()));
    }

    // -- stage 6 ----------------------------------------------------------

    void finish() {
        const auto& ho = ctx_.ho_nodes();
        std::map<std::string, std::size_t> first_of_label;
        for (std::size_t h = 0; h < ho.size(); ++h) {
            const auto& label = p_.node(ho[h]).label;
            auto [it, inserted] = first_of_label.emplace(label, h);
            if (inserted)
                continue;
            const auto f = it->second;
            if (!equal_images_with_ports(s_, ctx_.image(f), tr_[f], ctx_.image(h), tr_[h]))
                return;
        }
        Morphism m;
        m.fo = ctx_.fo_map();
        for (std::size_t h = 0; h < ho.size(); ++h) {
            m.ho[ho[h]] = ctx_.image(h);
            m.tr_ports[ho[h]] = tr_[h];
        }
        m.sigma_n = ctx_.sigma_n();
        complete_derived_maps(m, p_);
        if (!visit_(m))
            stop_ = true;
    }

    const PortGraph& p_;
    const PortGraph& s_;
    const MatchOptions& opts_;
    Visitor visit_;
    MatchContext ctx_;

    std::vector<Edge> fo_fo_;
    std::vector<std::pair<PortRef, PortRef>> fo_ho_; // (fo end, ho end)
    std::vector<Edge> ho_ho_;
    std::vector<bool> fo_fo_done_, fo_ho_done_, ho_ho_done_;
    std::vector<NodeId> fo_nodes_;
    std::vector<NodeId> subject_fo_;
    std::vector<std::vector<std::optional<PortRef>>> anchors_;
    std::vector<std::set<PortRef>> anchored_;
    std::vector<std::vector<PortRef>> tr_;

    std::chrono::steady_clock::time_point start_;
    std::size_t ticks_ = 0;
    bool stop_ = false;
    bool timed_out_ = false;
};

inline void require_same_signature(const PortGraph& pattern, const PortGraph& subject) {
    if (!pattern.same_signature(subject))
        throw error(errc::signature_mismatch, "pattern and subject are typed by different signatures");
}

} // namespace detail

/// Streams morphisms pattern -> subject to `visit` in search order; `visit`
/// returns false to stop. Returns true if the search ran to completion.
inline bool for_each_morphism(const PortGraph& pattern, const PortGraph& subject, const MatchOptions& opts,
                              const std::function<bool(const Morphism&)>& visit) {
    detail::require_same_signature(pattern, subject);
    bool stopped = false;
    detail::StagedSearch search(pattern, subject, opts, [&](const Morphism& m) {
        if (!visit(m)) {
            stopped = true;
            return false;
        }
        return true;
    });
    search.run();
    return !stopped && !search.timed_out();
}

/// All morphisms, sorted (f_v in pattern NodeId order, then higher-order
/// images, then port bijections). With max_solutions set, the search stops
/// after that many and `truncated` is raised.
inline MatchResult find_morphisms(const PortGraph& pattern, const PortGraph& subject, const MatchOptions& opts = {}) {
    detail::require_same_signature(pattern, subject);
    MatchResult result;
    detail::StagedSearch search(pattern, subject, opts, [&](const Morphism& m) {
        if (opts.max_solutions && result.morphisms.size() >= *opts.max_solutions) {
            result.truncated = true;
            return false;
        }
        result.morphisms.push_back(m);
        return true;
    });
    search.run();
    result.timed_out = search.timed_out();
    std::sort(result.morphisms.begin(), result.morphisms.end());
    result.morphisms.erase(std::unique(result.morphisms.begin(), result.morphisms.end()), result.morphisms.end());
    return result;
}

/// L ≪ G.
inline bool matches(const PortGraph& pattern, const PortGraph& subject) {
    bool found = false;
    for_each_morphism(pattern, subject, {}, [&](const Morphism&) {
        found = true;
        return false;
    });
    return found;
}

} // namespace hopg

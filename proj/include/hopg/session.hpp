#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "hopg/equality.hpp"
#include "hopg/json_io.hpp"
#include "hopg/rewrite.hpp"

// Interactive rewriting state behind the REST API. Everything here is plain
// C++ returning JSON values, so it is testable without a socket.
namespace hopg::session {

using json = nlohmann::json;

inline std::string message_of(const error& e) {
    const std::string what = e.what();
    const auto prefix = std::string(to_string(e.code())) + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

/// Node entries carry class, label and the signature's port names; "rank" is
/// the BFS depth from the smallest node of each component, a layout hint.
inline json annotated_graph(const PortGraph& g) {
    std::map<NodeId, std::size_t> rank;
    for (const auto& [root, info] : g.nodes()) {
        if (rank.count(root))
            continue;
        std::queue<NodeId> todo;
        todo.push(root);
        rank[root] = 0;
        while (!todo.empty()) {
            const auto cur = todo.front();
            todo.pop();
            for (std::size_t p = 1; p <= g.degree(cur); ++p)
                if (auto peer = g.link({cur, p}); peer && !rank.count(peer->node)) {
                    rank[peer->node] = rank[cur] + 1;
                    todo.push(peer->node);
                }
        }
    }
    json nodes = json::array();
    for (const auto& [id, info] : g.nodes()) {
        json ports = json::array();
        for (std::size_t p = 1; p <= info.degree; ++p) {
            const auto& name = g.port_name({id, p});
            const auto peer = g.link({id, p});
            ports.push_back({{"index", p},
                             {"name", name.text},
                             {"kind", std::string(to_string(name.kind))},
                             {"peer", peer ? json_io::to_json(*peer) : json(nullptr)}});
        }
        nodes.push_back({{"id", id.str()},
                         {"label", info.label},
                         {"class", std::string(to_string(info.cls))},
                         {"ports", ports},
                         {"rank", rank[id]}});
    }
    auto out = json_io::to_json(g);
    out["nodes"] = nodes;
    out["free_ports"] = json::array();
    for (const auto& p : interface(g))
        out["free_ports"].push_back(json_io::to_json(p));
    return out;
}

inline json redex_summary(std::size_t index, const Redex& r) {
    json fo = json::array();
    json ho = json::object();
    std::set<NodeId> nodes;
    for (const auto& [p, s] : r.morphism.fo) {
        fo.push_back(s.str());
        nodes.insert(s);
    }
    for (const auto& [p, set] : r.morphism.ho) {
        json image = json::array();
        for (const auto& s : set) {
            image.push_back(s.str());
            nodes.insert(s);
        }
        ho[p.str()] = image;
    }
    json all = json::array();
    for (const auto& n : nodes)
        all.push_back(n.str());
    return {{"index", index},
            {"rule", r.rule},
            {"nodes", all},
            {"highlight", {{"fo", fo}, {"ho", ho}}},
            {"morphism", json_io::to_json(r.morphism)}};
}

inline json diff_json(const RewriteResult& r) {
    json removed = json::array();
    for (const auto& n : r.removed)
        removed.push_back(n.str());
    json added = json::array();
    for (const auto& n : r.added)
        added.push_back(n.str());
    json rewired = json::array();
    for (const auto& [from, to] : r.rewired)
        rewired.push_back({{"from", json_io::to_json(from)}, {"to", to ? json_io::to_json(*to) : json(nullptr)}});
    return {{"removed", removed}, {"added", added}, {"rewired", rewired}};
}

class Session {
public:
    Session(std::string id, PortGraph initial, std::vector<Rule> rules)
        : id_(std::move(id)), initial_(initial), current_(std::move(initial)), rules_(std::move(rules)) {
        for (const auto& r : rules_)
            if (!r.lhs.same_signature(current_))
                throw error(errc::signature_mismatch, "rule '" + r.name + "' is over a different signature");
        initial_digest_ = graph_digest(current_);
        current_digest_ = initial_digest_;
    }

    const std::string& id() const { return id_; }

    /// Identifies the state a client has seen: the graph digest plus a
    /// version counter, so that steps which leave the digest unchanged still
    /// invalidate older tokens.
    std::string token() const {
        std::lock_guard lock(mu_);
        return token_locked();
    }

    json graph() const {
        std::lock_guard lock(mu_);
        return {{"session", id_},
                {"digest", token_locked()},
                {"graph", annotated_graph(current_)},
                {"steps", history_.size()}};
    }

    json redexes() {
        std::lock_guard lock(mu_);
        json list = json::array();
        const auto& rs = redexes_locked();
        for (std::size_t i = 0; i < rs.size(); ++i)
            list.push_back(redex_summary(i, rs[i]));
        return {{"session", id_}, {"digest", token_locked()}, {"redexes", list}};
    }

    /// Conflict when `token` is not the current one or `index` is outside the
    /// redex list that token refers to.
    json apply(std::size_t index, const std::string& token) {
        std::lock_guard lock(mu_);
        if (token != token_locked())
            throw error(errc::conflict, "stale digest '" + token + "', current is '" + token_locked() + "'");
        const auto& rs = redexes_locked();
        if (index >= rs.size())
            throw error(errc::conflict, "redex " + std::to_string(index) + " out of range (" +
                                            std::to_string(rs.size()) + " redexes)");
        const Redex redex = rs[index];
        auto result = apply_with_diff(rules_[redex.rule_index], redex.morphism, current_);
        const auto digest = graph_digest(result.graph);
        history_.push_back({current_, current_digest_, {redex.rule, redex.morphism, digest}});
        current_ = result.graph;
        current_digest_ = digest;
        ++version_;
        cached_.reset();
        return {{"session", id_},
                {"digest", token_locked()},
                {"rule", redex.rule},
                {"diff", diff_json(result)},
                {"graph", annotated_graph(current_)}};
    }

    json undo() {
        std::lock_guard lock(mu_);
        if (history_.empty())
            throw error(errc::conflict, "nothing to undo");
        current_ = history_.back().before;
        current_digest_ = history_.back().before_digest;
        history_.pop_back();
        ++version_;
        cached_.reset();
        return {{"session", id_}, {"digest", token_locked()}, {"graph", annotated_graph(current_)}};
    }

    Derivation derivation() const {
        std::lock_guard lock(mu_);
        Derivation d{initial_digest_, {}};
        for (const auto& h : history_)
            d.steps.push_back(h.step);
        return d;
    }

    /// Replays the history from the initial graph and compares digests.
    bool replay_consistent() const {
        std::lock_guard lock(mu_);
        Derivation d{initial_digest_, {}};
        for (const auto& h : history_)
            d.steps.push_back(h.step);
        try {
            return graph_digest(replay(rules_, initial_, d)) == current_digest_;
        } catch (const error&) {
            return false;
        }
    }

    PortGraph current() const {
        std::lock_guard lock(mu_);
        return current_;
    }

    json snapshot() const {
        json rules = json::array();
        for (const auto& r : rules_)
            rules.push_back(json_io::to_json(r));
        return {{"id", id_},
                {"initial", json_io::to_json(initial_, true)},
                {"rules", rules},
                {"derivation", json_io::to_json(derivation())}};
    }

    /// Rebuilds a session by replaying the recorded derivation.
    static std::unique_ptr<Session> from_snapshot(const json& j) {
        auto initial = json_io::graph_from_json(j.at("initial"));
        std::vector<Rule> rules;
        for (const auto& r : j.at("rules"))
            rules.push_back(json_io::rule_from_json(r, initial.signature_ptr()));
        auto s = std::make_unique<Session>(j.at("id").get<std::string>(), initial, rules);
        const auto d = json_io::derivation_from_json(j.at("derivation"), s->rules_);
        if (d.initial != s->initial_digest_)
            throw error(errc::digest_mismatch, "snapshot of session '" + s->id_ + "' does not match its graph");
        for (const auto& step : d.steps) {
            auto next = hopg::apply(find_rule(s->rules_, step.rule), step.morphism, s->current_);
            const auto digest = graph_digest(next);
            if (digest != step.digest)
                throw error(errc::digest_mismatch, "snapshot of session '" + s->id_ + "' does not replay");
            s->history_.push_back({s->current_, s->current_digest_, step});
            s->current_ = std::move(next);
            s->current_digest_ = digest;
            ++s->version_;
        }
        return s;
    }

private:
    struct Entry {
        PortGraph before;
        std::string before_digest;
        DerivationStep step;
    };

    std::string token_locked() const { return current_digest_ + ":" + std::to_string(version_); }

    const std::vector<Redex>& redexes_locked() {
        if (!cached_)
            cached_ = enumerate_redexes(rules_, current_);
        return *cached_;
    }

    mutable std::mutex mu_;
    std::string id_;
    PortGraph initial_;
    PortGraph current_;
    std::vector<Rule> rules_;
    std::string initial_digest_;
    std::string current_digest_;
    std::size_t version_ = 0;
    std::vector<Entry> history_;
    std::optional<std::vector<Redex>> cached_;
};

class SessionStore {
public:
    /// Body: {"graph": <graph>, "rules": [<rule>...], "signature": <sig>?}.
    /// Without a top-level signature the graph's embedded one is used and
    /// every rule must agree with it.
    std::shared_ptr<Session> create(const json& body) {
        if (!body.is_object() || !body.contains("graph") || !body.contains("rules") || !body.at("rules").is_array())
            throw error(errc::parse_error, "expected {\"graph\": ..., \"rules\": [...]}");
        std::shared_ptr<const PSignature> sig;
        if (body.contains("signature"))
            sig = std::make_shared<const PSignature>(json_io::signature_from_json(body.at("signature")));
        auto g = json_io::graph_from_json(body.at("graph"), sig);
        std::vector<Rule> rules;
        for (const auto& r : body.at("rules"))
            rules.push_back(json_io::rule_from_json(r, g.signature_ptr()));
        std::lock_guard lock(mu_);
        const auto id = "s" + std::to_string(++counter_);
        auto s = std::make_shared<Session>(id, std::move(g), std::move(rules));
        sessions_[id] = s;
        return s;
    }

    std::shared_ptr<Session> find(const std::string& id) const {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw error(errc::unknown_session, "no session '" + id + "'");
        return it->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return sessions_.size();
    }

    json snapshot() const {
        std::lock_guard lock(mu_);
        json list = json::array();
        for (const auto& [id, s] : sessions_)
            list.push_back(s->snapshot());
        return {{"counter", counter_}, {"sessions", list}};
    }

    void restore(const json& j) {
        std::map<std::string, std::shared_ptr<Session>> loaded;
        for (const auto& s : j.at("sessions")) {
            std::shared_ptr<Session> session = Session::from_snapshot(s);
            loaded[session->id()] = session;
        }
        std::lock_guard lock(mu_);
        sessions_ = std::move(loaded);
        counter_ = j.value("counter", std::size_t{sessions_.size()});
    }

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t counter_ = 0;
};

} // namespace hopg::session

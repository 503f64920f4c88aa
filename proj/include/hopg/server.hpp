#pragma once

#include <string>

#include <httplib.h>

#include "hopg/session.hpp"

// REST routes over a SessionStore.
//
//   POST /sessions                      {"graph","rules","signature"?}  -> 201 graph view
//   GET  /sessions/{id}/graph
//   GET  /sessions/{id}/redexes
//   POST /sessions/{id}/apply           {"index","digest"}  -> diff and new graph
//   POST /sessions/{id}/undo
//   GET  /sessions/{id}/derivation
//
// Failures are {"error": <code>, "message": <text>} with 400 for malformed
// input, 404 for unknown sessions, 409 for stale digests, out-of-range
// indices and empty undo, 422 when a rewrite step itself fails.
namespace hopg::server {

using json = nlohmann::json;

inline int status_for(errc code) {
    switch (code) {
    case errc::unknown_session: return 404;
    case errc::conflict: return 409;
    case errc::linearity_overflow:
    case errc::stale_morphism:
    case errc::unbound_variable:
        return 422;
    default: return 400;
    }
}

inline void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    reply(res, status, {{"error", code}, {"message", message}});
}

template <class F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const error& e) {
        reply_error(res, status_for(e.code()), std::string(to_string(e.code())), session::message_of(e));
    } catch (const nlohmann::json::exception& e) {
        reply_error(res, 400, "ParseError", e.what());
    } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what());
    }
}

inline json parse_body(const httplib::Request& req) { return json_io::parse(req.body); }

inline void mount(httplib::Server& http, session::SessionStore& store) {
    http.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    http.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 201, store.create(parse_body(req))->graph()); });
    });
    http.Get(R"(/sessions/([^/]+)/graph)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, store.find(req.matches[1])->graph()); });
    });
    http.Get(R"(/sessions/([^/]+)/redexes)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, store.find(req.matches[1])->redexes()); });
    });
    http.Post(R"(/sessions/([^/]+)/apply)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto s = store.find(req.matches[1]);
            const auto body = parse_body(req);
            if (!body.is_object() || !body.contains("index") || !body.at("index").is_number_unsigned() ||
                !body.contains("digest") || !body.at("digest").is_string())
                throw error(errc::parse_error, "expected {\"index\": <n>, \"digest\": <token>}");
            reply(res, 200, s->apply(body.at("index").get<std::size_t>(), body.at("digest").get<std::string>()));
        });
    });
    http.Post(R"(/sessions/([^/]+)/undo)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, store.find(req.matches[1])->undo()); });
    });
    http.Get(R"(/sessions/([^/]+)/derivation)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, json_io::to_json(store.find(req.matches[1])->derivation())); });
    });
}

} // namespace hopg::server

#include <thread>

#include <gtest/gtest.h>

#include "hopg/proofnets.hpp"
#include "hopg/server.hpp"

using namespace hopg;
namespace pn = hopg::proofnets;
using json_io::json;

namespace {

class ServerTest : public ::testing::Test {
protected:
    void SetUp() override {
        server::mount(http_, store_);
        port_ = http_.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { http_.listen_after_bind(); });
        http_.wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override {
        http_.stop();
        if (thread_.joinable())
            thread_.join();
    }

    std::pair<int, json> post(const std::string& path, const std::string& body) {
        auto res = client_->Post(path, body, "application/json");
        EXPECT_TRUE(res);
        return {res->status, json::parse(res->body)};
    }

    std::pair<int, json> post(const std::string& path, const json& body) { return post(path, body.dump()); }

    std::pair<int, json> get(const std::string& path) {
        auto res = client_->Get(path);
        EXPECT_TRUE(res);
        return {res->status, json::parse(res->body)};
    }

    std::string create(const PortGraph& g, const std::vector<Rule>& rules) {
        json rs = json::array();
        for (const auto& r : rules)
            rs.push_back(json_io::to_json(r, true));
        auto [status, body] = post("/sessions", json{{"graph", json_io::to_json(g, true)}, {"rules", rs}});
        EXPECT_EQ(status, 201) << body.dump();
        return body.value("session", "");
    }

    session::SessionStore store_;
    httplib::Server http_;
    int port_ = 0;
    std::thread thread_;
    std::unique_ptr<httplib::Client> client_;
};

} // namespace

TEST_F(ServerTest, Fig5Walkthrough) {
    const auto id = create(pn::fig5_subject(), {pn::beta_rule()});
    ASSERT_EQ(id, "s1");

    auto [gs, graph] = get("/sessions/s1/graph");
    EXPECT_EQ(gs, 200);
    EXPECT_EQ(graph["graph"]["nodes"].size(), 6u);

    auto [rs, redexes] = get("/sessions/s1/redexes");
    EXPECT_EQ(rs, 200);
    ASSERT_EQ(redexes["redexes"].size(), 1u);
    EXPECT_EQ(redexes["redexes"][0]["rule"], "beta");
    const auto token = redexes["digest"].get<std::string>();

    auto [as, step] = post("/sessions/s1/apply", json{{"index", 0}, {"digest", token}});
    EXPECT_EQ(as, 200) << step.dump();
    EXPECT_EQ(step["graph"]["nodes"].size(), 3u);
    EXPECT_EQ(step["diff"]["removed"].size(), 6u);
    EXPECT_EQ(get("/sessions/s1/redexes").second["redexes"].size(), 0u);

    auto [ss, stale] = post("/sessions/s1/apply", json{{"index", 0}, {"digest", token}});
    EXPECT_EQ(ss, 409);
    EXPECT_EQ(stale["error"], "Conflict");

    auto [ds, derivation] = get("/sessions/s1/derivation");
    EXPECT_EQ(ds, 200);
    EXPECT_EQ(derivation["steps"].size(), 1u);
    EXPECT_EQ(derivation["steps"][0]["rule"], "beta");

    auto [us, undone] = post("/sessions/s1/undo", std::string());
    EXPECT_EQ(us, 200);
    EXPECT_EQ(undone["graph"], graph["graph"]);
    EXPECT_EQ(post("/sessions/s1/undo", std::string()).first, 409);
}

TEST_F(ServerTest, CreateErrors) {
    auto [s1, b1] = post("/sessions", std::string("{not json"));
    EXPECT_EQ(s1, 400);
    EXPECT_EQ(b1["error"], "ParseError");
    EXPECT_FALSE(b1["message"].get<std::string>().empty());

    auto [s2, b2] = post("/sessions", json{{"graph", json_io::to_json(pn::example_proof(), true)},
                                           {"rules", json::array({json_io::to_json(pn::beta_rule(), true)})}});
    EXPECT_EQ(s2, 400);
    EXPECT_EQ(b2["error"], "SignatureMismatch");
}

TEST_F(ServerTest, UnknownSessionIs404) {
    for (const auto* path : {"/sessions/nope/graph", "/sessions/nope/redexes", "/sessions/nope/derivation"}) {
        auto [status, body] = get(path);
        EXPECT_EQ(status, 404) << path;
        EXPECT_EQ(body["error"], "UnknownSession");
    }
    EXPECT_EQ(post("/sessions/nope/undo", std::string()).first, 404);
}

TEST_F(ServerTest, ApplyValidation) {
    create(pn::fig5_doubled_subject(), {pn::beta_rule()});
    const auto token = get("/sessions/s1/redexes").second["digest"].get<std::string>();
    EXPECT_EQ(post("/sessions/s1/apply", json{{"index", 2}, {"digest", token}}).first, 409);
    EXPECT_EQ(post("/sessions/s1/apply", json{{"index", -1}, {"digest", token}}).first, 400);
    EXPECT_EQ(post("/sessions/s1/apply", json{{"digest", token}}).first, 400);
    EXPECT_EQ(post("/sessions/s1/apply", json{{"index", 1}, {"digest", token}}).first, 200);
    EXPECT_EQ(get("/sessions/s1/redexes").second["redexes"].size(), 1u);
}

TEST_F(ServerTest, ExampleProofGraph) {
    create(pn::example_proof(), {});
    auto [status, body] = get("/sessions/s1/graph");
    EXPECT_EQ(status, 200);
    EXPECT_EQ(body["graph"]["nodes"].size(), 5u);
    EXPECT_EQ(body["graph"]["edges"].size(), 6u);
    for (const auto& n : body["graph"]["nodes"]) {
        EXPECT_EQ(n["class"], "fo");
        EXPECT_TRUE(n.contains("ports"));
    }
}

#include <gtest/gtest.h>

#include "hopg/json_io.hpp"
#include "hopg/oracle.hpp"
#include "hopg/proofnets.hpp"
#include "hopg/rewrite.hpp"
#include "support/random_graphs.hpp"

using namespace hopg;
namespace pn = hopg::proofnets;
namespace ht = hopg::testing;

namespace {

errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return errc::parse_error;
}

PortGraph golden_beta() {
    return json_io::graph_from_json(json_io::read_file(std::string(HOPG_GOLDEN_DIR) + "/fig5_beta_normal_form.json"),
                                    pn::fig5_signature());
}

PortRef port(const char* n, std::size_t p) { return {NodeId(n), p}; }

} // namespace

TEST(CompileRule, FixtureRulesAreValid) {
    EXPECT_NO_THROW(pn::beta_rule());
    EXPECT_NO_THROW(pn::identity_rule());
    EXPECT_NO_THROW(pn::erasure_rule());
    EXPECT_NO_THROW(pn::duplication_rule());
    EXPECT_NO_THROW(pn::black_hole_rule());
}

TEST(CompileRule, Errors) {
    auto sig = pn::fig5_signature();
    PortGraph ax(sig);
    ax.add_node("a"_id, "ax", NodeClass::fo);
    EXPECT_EQ(code_of([&] { compile_rule(ax, ax, {{port("a", 1), {port("a", 1)}}}, "r"); }),
              errc::incomplete_interface_map);
    EXPECT_EQ(code_of([&] {
                  compile_rule(ax, ax, {{port("a", 1), {port("a", 1)}}, {port("a", 2), {port("a", 3)}}}, "r");
              }),
              errc::target_not_free);
    PortGraph closed(sig);
    closed.add_node("a"_id, "ax", NodeClass::fo);
    closed.add_node("b"_id, "imp_ic", NodeClass::fo);
    closed.add_edge(port("a", 1), port("b", 1));
    EXPECT_EQ(code_of([&] {
                  compile_rule(ax, closed, {{port("a", 1), {port("a", 1)}}, {port("a", 2), {port("a", 2)}}}, "r");
              }),
              errc::target_not_free);
    EXPECT_EQ(code_of([&] { compile_rule(closed, ax, {{port("a", 1), {}}}, "r"); }), errc::source_not_free);

    PortGraph var(sig);
    var.add_node("x"_id, "P", NodeClass::ho);
    EXPECT_EQ(code_of([&] { compile_rule(ax, var, {{port("a", 1), {}}, {port("a", 2), {}}}, "r"); }),
              errc::free_rhs_variable);
    PortGraph other(pn::proof_signature_ptr());
    other.add_node("a"_id, "ax", NodeClass::fo);
    EXPECT_EQ(code_of([&] { compile_rule(ax, other, {}, "r"); }), errc::signature_mismatch);
}

TEST(Redexes, Fig5MatchesMatcher) {
    auto beta = pn::beta_rule();
    auto g = pn::fig5_subject();
    auto rs = enumerate_redexes({beta}, g);
    auto ms = find_morphisms(pn::fig5_pattern(), g).morphisms;
    ASSERT_EQ(rs.size(), ms.size());
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].morphism, ms[0]);
    EXPECT_EQ(canonical_solution_set({rs[0].morphism}), canonical_solution_set(brute_force_morphisms(beta.lhs, g)));
}

TEST(Redexes, IrreducibleAndDoubled) {
    auto beta = pn::beta_rule();
    EXPECT_TRUE(enumerate_redexes({beta}, golden_beta()).empty());
    EXPECT_EQ(enumerate_redexes({beta}, pn::fig5_doubled_subject()).size(), 2u);
}

TEST(Redexes, RuleOrderThenMorphismOrder) {
    auto g = pn::fig5_doubled_subject();
    std::vector<Rule> rules{pn::identity_rule(), pn::beta_rule()};
    auto rs = enumerate_redexes(rules, g);
    ASSERT_EQ(rs.size(), 6u); // four ax nodes, two beta redexes
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_EQ(rs[i].rule, "identity");
    EXPECT_EQ(rs[4].rule, "beta");
    EXPECT_LT(rs[4].morphism, rs[5].morphism);
}

TEST(Apply, BetaMatchesGolden) {
    auto beta = pn::beta_rule();
    auto g = pn::fig5_subject();
    auto rs = enumerate_redexes({beta}, g);
    ASSERT_EQ(rs.size(), 1u);
    auto diff = apply_with_diff(beta, rs[0].morphism, g);
    EXPECT_EQ(diff.graph.node_count(), 3u);
    EXPECT_EQ(diff.removed.size(), 6u);
    EXPECT_EQ(diff.added.size(), 3u);
    EXPECT_TRUE(syntactic_equal(diff.graph, golden_beta()));
    EXPECT_TRUE(validate(diff.graph).empty());
}

TEST(Apply, IdentityIsNoOpUpToRenaming) {
    auto g = pn::fig5_subject();
    auto id = pn::identity_rule();
    for (const auto& r : enumerate_redexes({id}, g)) {
        auto h = apply(id, r.morphism, g);
        EXPECT_TRUE(syntactic_equal(g, h));
        EXPECT_NE(g.nodes(), h.nodes());
    }
}

TEST(Apply, BlackHoleLeavesContextPortFree) {
    auto rule = pn::black_hole_rule();
    auto g = pn::black_hole_subject();
    auto rs = enumerate_redexes({rule}, g);
    ASSERT_EQ(rs.size(), 1u);
    auto diff = apply_with_diff(rule, rs[0].morphism, g);
    EXPECT_EQ(diff.graph.node_count(), 1u);
    EXPECT_EQ(interface(diff.graph), (std::vector<PortRef>{port("n2", 1), port("n2", 2)}));
    ASSERT_EQ(diff.rewired.size(), 1u);
    EXPECT_EQ(diff.rewired[0].first, port("n2", 2));
    EXPECT_FALSE(diff.rewired[0].second);
}

TEST(Apply, DuplicationCopiesTheSubproofTwice) {
    auto rule = pn::duplication_rule();
    auto g = pn::duplication_subject();
    auto rs = enumerate_redexes({rule}, g);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].morphism.ho.at("sub"_id), (std::set<NodeId>{"n1"_id, "n2"_id}));
    auto inst = instantiate_rhs(rule, rs[0].morphism, g);
    EXPECT_EQ(inst.fragment.node_count(), 4u);
    EXPECT_EQ(inst.copies.at("s1"_id).size(), 2u);
    EXPECT_EQ(inst.copies.at("s2"_id).size(), 2u);

    auto h = apply(rule, rs[0].morphism, g);
    EXPECT_EQ(h.node_count(), 5u);
    EXPECT_EQ(h.edge_count(), 6u);
    EXPECT_TRUE(validate(h).empty());
    EXPECT_TRUE(interface(h) == (std::vector<PortRef>{port("n4", 3)}));
    // Each and_i premise now leads to its own {ax, imp_ic} copy.
    auto l1 = h.link(port("n4", 1));
    auto l2 = h.link(port("n4", 2));
    ASSERT_TRUE(l1 && l2);
    EXPECT_NE(l1->node, l2->node);
    EXPECT_EQ(h.node(l1->node).label, "imp_ic");
    EXPECT_EQ(h.node(l2->node).label, "imp_ic");
}

TEST(Apply, ErasureRemovesTheSubproof) {
    auto rule = pn::erasure_rule();
    auto g = pn::erasure_subject();
    auto rs = enumerate_redexes({rule}, g);
    ASSERT_EQ(rs.size(), 1u);
    auto inst = instantiate_rhs(rule, rs[0].morphism, g);
    EXPECT_EQ(inst.fragment.node_count(), 0u);
    auto h = apply(rule, rs[0].morphism, g);
    ASSERT_EQ(h.node_count(), 1u);
    EXPECT_TRUE(h.contains("n4"_id));
}

TEST(Apply, StaleMorphism) {
    auto beta = pn::beta_rule();
    auto g = pn::fig5_subject();
    auto m = enumerate_redexes({beta}, g).at(0).morphism;
    auto h = g;
    h.remove_edge(Edge(port("n3", 1), port("n4", 2)));
    EXPECT_EQ(code_of([&] { apply(beta, m, h); }), errc::stale_morphism);
}

TEST(Apply, FanOutIntoContextEdgeOverflows) {
    auto sig = pn::fig5_signature();
    PortGraph lhs(sig), rhs(sig);
    lhs.add_node("a"_id, "ax", NodeClass::fo);
    rhs.add_node("a"_id, "ax", NodeClass::fo);
    rhs.add_node("b"_id, "ax", NodeClass::fo);
    auto rule = compile_rule(lhs, rhs, {{port("a", 1), {port("a", 1), port("b", 1)}}, {port("a", 2), {port("a", 2)}}},
                             "fan");
    PortGraph g(sig);
    g.add_node("n1"_id, "ax", NodeClass::fo);
    g.add_node("n2"_id, "w", NodeClass::fo);
    // Free in-port: fan-out has nothing to reconnect.
    auto m = enumerate_redexes({rule}, g).at(0).morphism;
    EXPECT_EQ(apply(rule, m, g).node_count(), 3u);
    g.add_node("n3"_id, "imp_i", NodeClass::fo);
    g.add_edge(port("n1", 1), port("n3", 4));
    for (const auto& r : enumerate_redexes({rule}, g))
        EXPECT_EQ(code_of([&] { apply(rule, r.morphism, g); }), errc::linearity_overflow);
}

TEST(InstantiateRhs, GroundRhsIsCopied) {
    auto g = pn::black_hole_subject();
    auto sig = pn::fig5_signature();
    PortGraph lhs(sig), rhs(sig);
    lhs.add_node("e"_id, "w", NodeClass::fo);
    rhs.add_node("a"_id, "ax", NodeClass::fo);
    rhs.add_node("b"_id, "w", NodeClass::fo);
    rhs.add_edge(port("a", 2), port("b", 1));
    auto rule = compile_rule(lhs, rhs, {{port("e", 1), {port("a", 1)}}}, "r");
    auto m = enumerate_redexes({rule}, g).at(0).morphism;
    auto inst = instantiate_rhs(rule, m, g);
    EXPECT_TRUE(syntactic_equal(inst.fragment, rhs));
    for (const auto& [id, info] : inst.fragment.nodes())
        EXPECT_FALSE(g.contains(id));
}

TEST(InstantiateRhs, FirstOrderVariableUsesSigma) {
    auto sig = pn::fig5_signature();
    PortGraph lhs(sig), rhs(sig), g(sig);
    lhs.add_node("x"_id, "X", NodeClass::fo);
    rhs.add_node("y"_id, "X", NodeClass::fo);
    g.add_node("n1"_id, "and_el", NodeClass::fo);
    auto rule = compile_rule(lhs, rhs, {{port("x", 1), {port("y", 1)}}, {port("x", 2), {port("y", 2)}}}, "r");
    auto m = enumerate_redexes({rule}, g).at(0).morphism;
    auto inst = instantiate_rhs(rule, m, g);
    ASSERT_EQ(inst.fragment.node_count(), 1u);
    EXPECT_EQ(inst.fragment.nodes().begin()->second.label, "and_el");
    Morphism unbound = m;
    unbound.sigma_n.clear();
    EXPECT_EQ(code_of([&] { instantiate_rhs(rule, unbound, g); }), errc::unbound_variable);
}

TEST(Normalize, Irreducible) {
    auto g = golden_beta();
    auto r = normalize({pn::beta_rule()}, g, Strategy::leftmost_first, 10);
    ASSERT_EQ(r.results.size(), 1u);
    EXPECT_TRUE(r.results[0].derivation.steps.empty());
    EXPECT_FALSE(r.step_limit_reached);
    EXPECT_EQ(r.results[0].graph.nodes(), g.nodes());
}

TEST(Normalize, BetaInOneStep) {
    std::vector<Rule> rules{pn::beta_rule()};
    auto g = pn::fig5_subject();
    for (auto strategy : {Strategy::leftmost_first, Strategy::exhaustive_bfs}) {
        auto r = normalize(rules, g, strategy, 10);
        ASSERT_EQ(r.results.size(), 1u);
        EXPECT_FALSE(r.step_limit_reached);
        EXPECT_EQ(r.results[0].derivation.steps.size(), 1u);
        EXPECT_TRUE(syntactic_equal(r.results[0].graph, golden_beta()));
        auto replayed = replay(rules, g, r.results[0].derivation);
        EXPECT_EQ(graph_digest(replayed), r.results[0].derivation.steps.back().digest);
    }
}

TEST(Normalize, DoubledNeedsTwoStepsAndHasOneNormalForm) {
    std::vector<Rule> rules{pn::beta_rule()};
    auto r = normalize(rules, pn::fig5_doubled_subject(), Strategy::exhaustive_bfs, 10);
    ASSERT_EQ(r.results.size(), 1u);
    EXPECT_EQ(r.results[0].derivation.steps.size(), 2u);
    EXPECT_EQ(r.results[0].graph.node_count(), 6u);
}

TEST(Normalize, SelfReproducingRuleHitsStepLimit) {
    auto g = pn::black_hole_subject();
    auto r = normalize({pn::identity_rule()}, g, Strategy::leftmost_first, 5);
    EXPECT_TRUE(r.step_limit_reached);
    ASSERT_EQ(r.results.size(), 1u);
    EXPECT_EQ(r.results[0].derivation.steps.size(), 5u);
    auto b = normalize({pn::identity_rule()}, g, Strategy::exhaustive_bfs, 5);
    // Every rewrite reproduces the start graph up to renaming: a cycle.
    EXPECT_FALSE(b.step_limit_reached);
    EXPECT_TRUE(b.revisited);
    EXPECT_TRUE(b.results.empty());
}

TEST(Replay, DetectsTampering) {
    std::vector<Rule> rules{pn::beta_rule()};
    auto g = pn::fig5_subject();
    auto d = normalize(rules, g, Strategy::leftmost_first, 10).results[0].derivation;
    auto bad = d;
    bad.steps[0].digest = "0000000000000000";
    EXPECT_EQ(code_of([&] { replay(rules, g, bad); }), errc::digest_mismatch);
    bad = d;
    bad.steps[0].rule = "nope";
    EXPECT_EQ(code_of([&] { replay(rules, g, bad); }), errc::unknown_rule);
    EXPECT_EQ(code_of([&] { replay(rules, golden_beta(), d); }), errc::digest_mismatch);
}

// Random rules on random graphs: apply either raises LinearityOverflow or
// yields a valid graph that keeps the context intact; derivations replay.
TEST(Property, RewritingSoundness) {
    ht::Rng rng(ht::seed_from_env(31));
    MatchOptions opts;
    opts.max_solutions = 20;
    int applied = 0, overflow = 0;
    for (int i = 0; i < 400; ++i) {
        auto g = ht::random_subject(rng, 6);
        auto rule = ht::random_rule(rng, g, 3, 2);
        std::vector<Rule> rules{rule};
        Derivation d{graph_digest(g), {}};
        PortGraph cur = g;
        for (int step = 0; step < 3; ++step) {
            auto rs = enumerate_redexes(rules, cur, opts);
            if (rs.empty())
                break;
            const auto& r = rs[ht::pick(rng, rs.size())];
            try {
                auto diff = apply_with_diff(rule, r.morphism, cur);
                ++applied;
                EXPECT_FALSE(has_errors(validate(diff.graph)));
                const auto matched = r.morphism.image_nodes();
                for (const auto& [id, info] : cur.nodes())
                    if (!matched.count(id)) {
                        ASSERT_TRUE(diff.graph.contains(id));
                        EXPECT_EQ(diff.graph.node(id), info);
                    }
                // Free context ports stay free.
                for (const auto& p : interface(cur))
                    if (!matched.count(p.node))
                        EXPECT_FALSE(diff.graph.link(p));
                cur = diff.graph;
                d.steps.push_back({rule.name, r.morphism, graph_digest(cur)});
            } catch (const error& e) {
                ASSERT_EQ(e.code(), errc::linearity_overflow) << e.what();
                ++overflow;
                break;
            }
        }
        auto replayed = replay(rules, g, d);
        EXPECT_EQ(graph_digest(replayed), graph_digest(cur));
        EXPECT_EQ(replayed.nodes(), cur.nodes());
        EXPECT_EQ(replayed.edges(), cur.edges());
    }
    EXPECT_GT(applied, 200);
    EXPECT_GT(overflow, 0);
}

#pragma once

#include <initializer_list>
#include <memory>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "hopg/port_graph.hpp"
#include "hopg/rewrite.hpp"
#include "hopg/signature.hpp"

// Natural-deduction proofs as port-graphs: one constant node name per
// inference rule, plus the pattern and rule fixtures used throughout the tests.
namespace hopg::proofnets {

namespace detail {

inline NodeNameDecl constant(std::string name, std::initializer_list<const char*> ports) {
    NodeNameDecl d{std::move(name), NameKind::fo_constant, ports.size(), {}};
    for (const char* p : ports)
        d.interface.push_back(const_port(p));
    return d;
}

struct NodeSpec {
    const char* id;
    const char* label;
};

struct EdgeSpec {
    const char* a;
    std::size_t pa;
    const char* b;
    std::size_t pb;
};

inline PortGraph build(const std::shared_ptr<const PSignature>& sig, std::initializer_list<NodeSpec> nodes,
                       std::initializer_list<EdgeSpec> edges) {
    PortGraph g(sig);
    for (const auto& n : nodes) {
        const auto cls = sig->at(n.label).kind == NameKind::ho_variable ? NodeClass::ho : NodeClass::fo;
        g.add_node(NodeId(n.id), n.label, cls);
    }
    for (const auto& e : edges)
        g.add_edge({NodeId(e.a), e.pa}, {NodeId(e.b), e.pb});
    return g;
}

inline PortRef port(const char* id, std::size_t p) { return {NodeId(id), p}; }

} // namespace detail

/// Node names for the inference rules; s_n is the scope node with n
/// hypotheses in and out around a conclusion p.
inline PSignature proof_signature(std::size_t max_scope = 1) {
    using detail::constant;
    PSignature sig;
    sig.declare_in_place(constant("ax", {"in", "p"}));
    sig.declare_in_place(constant("w", {"p"}));
    sig.declare_in_place(constant("c", {"p", "out_l", "out_r"}));
    sig.declare_in_place(constant("imp_i", {"in_l", "in_r", "s", "p"}));
    sig.declare_in_place(constant("imp_ic", {"in_l", "in_r", "p"}));
    sig.declare_in_place(constant("imp_e", {"in_l", "in_r", "p"}));
    sig.declare_in_place(constant("and_i", {"in_l", "in_r", "p"}));
    sig.declare_in_place(constant("and_el", {"in", "p"}));
    sig.declare_in_place(constant("and_er", {"in", "p"}));
    for (std::size_t n = 1; n <= max_scope; ++n) {
        NodeNameDecl d{"s_" + std::to_string(n), NameKind::fo_constant, 2 * n + 1, {}};
        for (std::size_t i = 1; i <= n; ++i)
            d.interface.push_back(const_port("in_" + std::to_string(i)));
        d.interface.push_back(const_port("p"));
        for (std::size_t i = 1; i <= n; ++i)
            d.interface.push_back(const_port("out_" + std::to_string(i)));
        sig.declare_in_place(std::move(d));
    }
    return sig;
}

/// The proof signature plus the first-order variables X, Y, Z of the
/// four-pattern example. Their constant ports pin the instances: X only fits
/// s_1, Y the three-port nodes ending in p, Z the four-port ones.
inline std::shared_ptr<const PSignature> fig4_signature() {
    static const auto sig = [] {
        auto s = proof_signature(1);
        s.declare_in_place({"X", NameKind::fo_variable, 3, {var_port("y"), var_port("x"), const_port("out_1")}});
        s.declare_in_place({"Y", NameKind::fo_variable, 3, {var_port("y"), var_port("x"), const_port("p")}});
        s.declare_in_place(
            {"Z", NameKind::fo_variable, 4, {var_port("y"), var_port("x"), var_port("z"), const_port("p")}});
        return std::make_shared<const PSignature>(std::move(s));
    }();
    return sig;
}

/// The proof signature plus the variables of the beta-redex pattern:
/// X (any two-port node), X̂ with three ports, the two-port reading X̂2, and
/// P, a one-port subproof used by the duplication and erasure rules.
inline std::shared_ptr<const PSignature> fig5_signature() {
    static const auto sig = [] {
        auto s = proof_signature(1);
        s.declare_in_place({"X", NameKind::fo_variable, 2, {var_port("x"), var_port("y")}});
        s.declare_in_place({"Xhat", NameKind::ho_variable, 3, {var_port("x_1"), var_port("x_2"), var_port("y")}});
        s.declare_in_place({"Xhat2", NameKind::ho_variable, 2, {var_port("x_1"), var_port("y")}});
        s.declare_in_place({"P", NameKind::ho_variable, 1, {var_port("x")}});
        return std::make_shared<const PSignature>(std::move(s));
    }();
    return sig;
}

inline std::shared_ptr<const PSignature> proof_signature_ptr() {
    static const auto sig = std::make_shared<const PSignature>(proof_signature(1));
    return sig;
}

namespace detail {

inline PortGraph example_proof_over(const std::shared_ptr<const PSignature>& sig) {
    return build(sig,
                 {{"n1", "s_1"}, {"n2", "ax"}, {"n3", "w"}, {"n4", "imp_i"}, {"n5", "imp_ic"}},
                 {{"n1", 1, "n5", 2},
                  {"n1", 3, "n2", 1},
                  {"n1", 2, "n4", 3},
                  {"n2", 2, "n4", 1},
                  {"n3", 1, "n4", 2},
                  {"n4", 4, "n5", 1}});
}

} // namespace detail

/// The proof of A => B => A: axiom A inside a scope, weakening for B, ⇒I
/// discharging both, closed by ⇒Ic. The only free port is the conclusion.
inline PortGraph example_proof() { return detail::example_proof_over(proof_signature_ptr()); }

/// The same graph, typed by fig4_signature so that L1..L4 can be matched.
inline PortGraph fig4_subject() { return detail::example_proof_over(fig4_signature()); }

struct Fig4Patterns {
    PortGraph l1, l2, l3, l4;
};

inline Fig4Patterns fig4_patterns() {
    const auto sig = fig4_signature();
    using detail::build;
    return {
        build(sig, {{"a", "s_1"}, {"b", "Z"}}, {{"a", 1, "b", 2}}),
        build(sig, {{"a", "X"}, {"b", "X"}}, {{"a", 1, "b", 2}}),
        build(sig, {{"a", "X"}, {"b", "Y"}}, {}),
        build(sig, {{"a", "X"}, {"b", "Y"}}, {{"a", 1, "b", 2}}),
    };
}

namespace detail {

inline PortGraph fig5_subject_with_offset(PortGraph g, std::size_t offset) {
    auto id = [&](std::size_t k) { return NodeId("n" + std::to_string(k + offset)); };
    g.add_node(id(1), "s_1", NodeClass::fo);
    g.add_node(id(2), "ax", NodeClass::fo);
    g.add_node(id(3), "w", NodeClass::fo);
    g.add_node(id(4), "imp_i", NodeClass::fo);
    g.add_node(id(5), "ax", NodeClass::fo);
    g.add_node(id(6), "imp_e", NodeClass::fo);
    g.add_edge({id(1), 3}, {id(2), 1});
    g.add_edge({id(1), 2}, {id(4), 3});
    g.add_edge({id(2), 2}, {id(4), 1});
    g.add_edge({id(3), 1}, {id(4), 2});
    g.add_edge({id(4), 4}, {id(6), 1});
    g.add_edge({id(5), 2}, {id(6), 2});
    return g;
}

} // namespace detail

/// A ⇒I immediately eliminated by ⇒E: the body {ax, w} under a scope, and a
/// second ax as the argument. Free ports: n1.1, n5.1, n6.3.
inline PortGraph fig5_subject() { return detail::fig5_subject_with_offset(PortGraph(fig5_signature()), 0); }

/// Two disjoint copies of fig5_subject (n1..n6 and n7..n12).
inline PortGraph fig5_doubled_subject() {
    return detail::fig5_subject_with_offset(detail::fig5_subject_with_offset(PortGraph(fig5_signature()), 0), 6);
}

/// The beta-redex pattern: scope s, body X̂ (ports x_1, x_2, y), ⇒I lam,
/// argument X, ⇒E app.
inline PortGraph fig5_pattern() {
    return detail::build(fig5_signature(),
                         {{"s", "s_1"}, {"body", "Xhat"}, {"lam", "imp_i"}, {"arg", "X"}, {"app", "imp_e"}},
                         {{"s", 3, "body", 1},
                          {"s", 2, "lam", 3},
                          {"body", 3, "lam", 1},
                          {"body", 2, "lam", 2},
                          {"lam", 4, "app", 1},
                          {"arg", 2, "app", 2}});
}

/// Two-port reading of the body: x_1 from the scope, y into ⇒I.in_l; ⇒I.in_r
/// is left open.
inline PortGraph fig5_pattern_arity2() {
    return detail::build(fig5_signature(),
                         {{"s", "s_1"}, {"body", "Xhat2"}, {"lam", "imp_i"}, {"arg", "X"}, {"app", "imp_e"}},
                         {{"s", 3, "body", 1},
                          {"s", 2, "lam", 3},
                          {"body", 2, "lam", 1},
                          {"lam", 4, "app", 1},
                          {"arg", 2, "app", 2}});
}

/// Contracts the redex: the body survives with its x_2 hypothesis fed by the
/// argument's conclusion; the scope entry and the ⇒E output move onto the
/// body's x_1 and y ports.
inline Rule beta_rule() {
    using detail::port;
    auto rhs = detail::build(fig5_signature(), {{"body", "Xhat"}, {"arg", "X"}}, {{"body", 2, "arg", 2}});
    return compile_rule(fig5_pattern(), std::move(rhs),
                        {{port("s", 1), {port("body", 1)}},
                         {port("arg", 1), {port("arg", 1)}},
                         {port("app", 3), {port("body", 3)}}},
                        "beta");
}

/// Contraction c applied to a closed subproof P: P is copied once per output.
inline Rule duplication_rule() {
    using detail::port;
    auto lhs = detail::build(fig5_signature(), {{"d", "c"}, {"sub", "P"}}, {{"sub", 1, "d", 1}});
    auto rhs = detail::build(fig5_signature(), {{"s1", "P"}, {"s2", "P"}}, {});
    return compile_rule(std::move(lhs), std::move(rhs),
                        {{port("d", 2), {port("s1", 1)}}, {port("d", 3), {port("s2", 1)}}}, "duplicate");
}

/// {ax, imp_ic} (a closed proof of A ⇒ A) contracted into both premises of ∧I.
inline PortGraph duplication_subject() {
    return detail::build(fig5_signature(), {{"n1", "ax"}, {"n2", "imp_ic"}, {"n3", "c"}, {"n4", "and_i"}},
                         {{"n1", 2, "n2", 1}, {"n1", 1, "n2", 2}, {"n2", 3, "n3", 1}, {"n3", 2, "n4", 1},
                          {"n3", 3, "n4", 2}});
}

/// Weakening applied to a closed subproof P: both disappear.
inline Rule erasure_rule() {
    auto lhs = detail::build(fig5_signature(), {{"e", "w"}, {"sub", "P"}}, {{"sub", 1, "e", 1}});
    return compile_rule(std::move(lhs), PortGraph(fig5_signature()), {}, "erase");
}

/// A weakened closed subproof next to an unrelated axiom.
inline PortGraph erasure_subject() {
    return detail::build(fig5_signature(), {{"n1", "ax"}, {"n2", "imp_ic"}, {"n3", "w"}, {"n4", "ax"}},
                         {{"n1", 2, "n2", 1}, {"n1", 1, "n2", 2}, {"n2", 3, "n3", 1}});
}

/// Deletes a weakening node; its port goes to the black hole.
inline Rule black_hole_rule() {
    using detail::port;
    auto lhs = detail::build(fig5_signature(), {{"e", "w"}}, {});
    return compile_rule(std::move(lhs), PortGraph(fig5_signature()), {{port("e", 1), {}}}, "drop_weakening");
}

inline PortGraph black_hole_subject() {
    return detail::build(fig5_signature(), {{"n1", "w"}, {"n2", "ax"}}, {{"n1", 1, "n2", 2}});
}

/// ax => ax with ports carried across unchanged; always applicable again.
inline Rule identity_rule() {
    using detail::port;
    auto lhs = detail::build(fig5_signature(), {{"a", "ax"}}, {});
    auto rhs = detail::build(fig5_signature(), {{"a", "ax"}}, {});
    return compile_rule(std::move(lhs), std::move(rhs),
                        {{port("a", 1), {port("a", 1)}}, {port("a", 2), {port("a", 2)}}}, "identity");
}

} // namespace hopg::proofnets

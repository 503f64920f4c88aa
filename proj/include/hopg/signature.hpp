#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hopg/error.hpp"

namespace hopg {

enum class PortKind { constant, variable };

struct PortName {
    std::string text;
    PortKind kind = PortKind::constant;

    friend auto operator<=>(const PortName&, const PortName&) = default;
    friend bool operator==(const PortName&, const PortName&) = default;
};

inline PortName const_port(std::string text) { return {std::move(text), PortKind::constant}; }
inline PortName var_port(std::string text) { return {std::move(text), PortKind::variable}; }

enum class NameKind { fo_constant, fo_variable, ho_variable };

constexpr std::string_view to_string(PortKind k) {
    return k == PortKind::constant ? "constant" : "variable";
}

constexpr std::string_view to_string(NameKind k) {
    switch (k) {
    case NameKind::fo_constant: return "fo_constant";
    case NameKind::fo_variable: return "fo_variable";
    case NameKind::ho_variable: return "ho_variable";
    }
    return "?";
}

struct NodeNameDecl {
    std::string name;
    NameKind kind = NameKind::fo_constant;
    std::size_t arity = 0;
    std::vector<PortName> interface;

    bool is_first_order() const { return kind != NameKind::ho_variable; }
    bool is_variable() const { return kind != NameKind::fo_constant; }

    friend bool operator==(const NodeNameDecl&, const NodeNameDecl&) = default;
};

/// One well-formedness problem. `code` is stable (e.g. "NonInjectiveInterface"),
/// `subject` names the offending declaration, node or port.
struct Diagnostic {
    enum class Severity { error, warning };

    std::string code;
    std::string subject;
    std::string message;
    Severity severity = Severity::error;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline bool has_errors(const std::vector<Diagnostic>& ds) {
    return std::any_of(ds.begin(), ds.end(),
                       [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::error; });
}

/// Checks a single declaration against the three interface clauses of a
/// p-signature (injective interface, length = arity, port kinds per name class).
inline std::vector<Diagnostic> validate_decl(const NodeNameDecl& d) {
    std::vector<Diagnostic> out;
    if (d.name.empty())
        out.push_back({"EmptyName", d.name, "node name must be non-empty"});
    if (d.interface.size() != d.arity)
        out.push_back({"ArityMismatch", d.name,
                       "interface has " + std::to_string(d.interface.size()) + " ports, arity is " +
                           std::to_string(d.arity)});
    std::set<PortName> seen;
    for (const auto& p : d.interface) {
        if (p.text.empty())
            out.push_back({"EmptyPortName", d.name, "port names must be non-empty"});
        if (!seen.insert(p).second)
            out.push_back({"NonInjectiveInterface", d.name, "port '" + p.text + "' appears twice"});
        if (d.kind == NameKind::fo_constant && p.kind != PortKind::constant)
            out.push_back({"KindInterfaceMismatch", d.name,
                           "constant node name with variable port '" + p.text + "'"});
        if (d.kind == NameKind::ho_variable && p.kind != PortKind::variable)
            out.push_back({"KindInterfaceMismatch", d.name,
                           "higher-order name with constant port '" + p.text + "'"});
    }
    return out;
}

/// The typing environment: node names with their class, arity and ordered
/// port-name interface. Port names are scoped per node name.
class PSignature {
public:
    PSignature() = default;

    /// Checked extension; returns a new signature and leaves *this untouched.
    [[nodiscard]] PSignature declare(NodeNameDecl decl) const {
        PSignature out = *this;
        out.declare_in_place(std::move(decl));
        return out;
    }

    void declare_in_place(NodeNameDecl decl) {
        if (decls_.count(decl.name))
            throw error(errc::duplicate_name, "node name '" + decl.name + "' already declared");
        for (const auto& diag : validate_decl(decl)) {
            errc code = errc::invalid_name;
            if (diag.code == "ArityMismatch")
                code = errc::arity_mismatch;
            else if (diag.code == "KindInterfaceMismatch")
                code = errc::kind_interface_mismatch;
            else if (diag.code == "NonInjectiveInterface")
                code = errc::non_injective_interface;
            throw error(code, decl.name + ": " + diag.message);
        }
        decls_.emplace(decl.name, std::move(decl));
    }

    /// Inserts without checking, so that malformed input can still be
    /// reported through validate(). Duplicate names overwrite.
    void add_unchecked(NodeNameDecl decl) { decls_[decl.name] = std::move(decl); }

    bool contains(std::string_view name) const { return decls_.find(name) != decls_.end(); }

    const NodeNameDecl& at(std::string_view name) const {
        auto it = decls_.find(name);
        if (it == decls_.end())
            throw error(errc::unknown_name, "node name '" + std::string(name) + "' is not declared");
        return it->second;
    }

    std::size_t arity(std::string_view name) const { return at(name).arity; }

    const std::map<std::string, NodeNameDecl, std::less<>>& decls() const { return decls_; }
    std::size_t size() const { return decls_.size(); }

    friend bool operator==(const PSignature&, const PSignature&) = default;

private:
    std::map<std::string, NodeNameDecl, std::less<>> decls_;
};

inline std::vector<Diagnostic> validate(const PSignature& sig) {
    std::vector<Diagnostic> out;
    for (const auto& [name, decl] : sig.decls()) {
        auto ds = validate_decl(decl);
        out.insert(out.end(), ds.begin(), ds.end());
    }
    return out;
}

inline const std::vector<PortName>& interface_of(const PSignature& sig, std::string_view name) {
    return sig.at(name).interface;
}

} // namespace hopg

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hopg {

enum class errc {
    duplicate_name,
    kind_interface_mismatch,
    arity_mismatch,
    non_injective_interface,
    invalid_name,
    unknown_name,
    unknown_label,
    class_mismatch,
    duplicate_node,
    unknown_node,
    port_occupied,
    port_out_of_range,
    self_port,
    signature_mismatch,
    incomplete_interface_map,
    source_not_free,
    target_not_free,
    free_rhs_variable,
    linearity_overflow,
    stale_morphism,
    unbound_variable,
    subject_too_large,
    unknown_rule,
    parse_error,
    step_limit_reached,
    digest_mismatch,
    conflict,
    redex_out_of_range,
    unknown_session,
};

constexpr std::string_view to_string(errc code) {
    switch (code) {
    case errc::duplicate_name: return "DuplicateName";
    case errc::kind_interface_mismatch: return "KindInterfaceMismatch";
    case errc::arity_mismatch: return "ArityMismatch";
    case errc::non_injective_interface: return "NonInjectiveInterface";
    case errc::invalid_name: return "InvalidName";
    case errc::unknown_name: return "UnknownName";
    case errc::unknown_label: return "UnknownLabel";
    case errc::class_mismatch: return "ClassMismatch";
    case errc::duplicate_node: return "DuplicateNode";
    case errc::unknown_node: return "UnknownNode";
    case errc::port_occupied: return "PortOccupied";
    case errc::port_out_of_range: return "PortOutOfRange";
    case errc::self_port: return "SelfPort";
    case errc::signature_mismatch: return "SignatureMismatch";
    case errc::incomplete_interface_map: return "IncompleteInterfaceMap";
    case errc::source_not_free: return "SourceNotFree";
    case errc::target_not_free: return "TargetNotFree";
    case errc::free_rhs_variable: return "FreeRhsVariable";
    case errc::linearity_overflow: return "LinearityOverflow";
    case errc::stale_morphism: return "StaleMorphism";
    case errc::unbound_variable: return "UnboundVariable";
    case errc::subject_too_large: return "SubjectTooLarge";
    case errc::unknown_rule: return "UnknownRule";
    case errc::parse_error: return "ParseError";
    case errc::step_limit_reached: return "StepLimitReached";
    case errc::digest_mismatch: return "DigestMismatch";
    case errc::conflict: return "Conflict";
    case errc::redex_out_of_range: return "RedexOutOfRange";
    case errc::unknown_session: return "UnknownSession";
    }
    return "Unknown";
}

/// Every domain failure in the library is reported as this exception; the
/// code is the stable, machine-readable part.
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace hopg

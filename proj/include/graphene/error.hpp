#pragma once

#include <stdexcept>
#include <string>

namespace graphene {

enum class errc {
    duplicate_node,
    duplicate_edge,
    dangling_endpoint,
    empty_label,
    invalid_constant,
    syntax_error,
    duplicate_concept,
    not_rooted,
    disconnected,
    length_mismatch,
    id_mismatch,
    degenerate_variance,
    too_large,
    empty_collection,
    invalid_config,
    io_error,
};

/*
 * Single exception type for the whole library. The code() discriminates
 * failure classes so callers (and tests) do not have to parse messages.
 */
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::duplicate_node: return "duplicate_node";
        case errc::duplicate_edge: return "duplicate_edge";
        case errc::dangling_endpoint: return "dangling_endpoint";
        case errc::empty_label: return "empty_label";
        case errc::invalid_constant: return "invalid_constant";
        case errc::syntax_error: return "syntax_error";
        case errc::duplicate_concept: return "duplicate_concept";
        case errc::not_rooted: return "not_rooted";
        case errc::disconnected: return "disconnected";
        case errc::length_mismatch: return "length_mismatch";
        case errc::id_mismatch: return "id_mismatch";
        case errc::degenerate_variance: return "degenerate_variance";
        case errc::too_large: return "too_large";
        case errc::empty_collection: return "empty_collection";
        case errc::invalid_config: return "invalid_config";
        case errc::io_error: return "io_error";
    }
    return "unknown";
}

} // namespace graphene

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dagas {

enum class Errc {
    invalid_argument,
    parse_error,
    invalid_vertex,
    width_too_small,
    parity_mismatch,
    not_a_free_set,
    budget_exceeded,
    divergent_bound,
    zero_normalizer,
    zero_trace,
    dominance_violation,
    complex_dominant,
    invalid_family_parameter,
    width_too_large,
    inconsistent_source,
};

std::string_view to_string(Errc code) noexcept;

// Every failure raised by the library. `field()` names the offending input
// (a CLI flag, a parameter name, or a vertex) so callers can report it.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string field, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), field_(std::move(field))
    {
    }

    Errc code() const noexcept { return code_; }
    const std::string &field() const noexcept { return field_; }

private:
    Errc code_;
    std::string field_;
};

} // namespace dagas

#pragma once

#include <stdexcept>
#include <string>

namespace curvcone {

enum class ErrorCode {
    invalid_argument,
    dimension,
    non_invertible,
    not_orthogonal,
    invalid_section,
    imaginary_residual,
    budget_exhausted,
    no_active_constraints,
    parse,
    step_underflow,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace curvcone

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace affest {

enum class ErrorCode {
    InvalidParams,
    NotSubcritical,
    StepTooLarge,
    TruncationTooShort,
    InvalidGrid,
    NegativeY0,
    LengthMismatch,
    NonpositiveY,
    DegenerateDenominator,
    DegenerateMoments,
    Config,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (the CLI in
// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class NonpositiveYError : public Error {
public:
    NonpositiveYError(std::size_t index, double value);

    std::size_t index() const noexcept { return index_; }
    double value() const noexcept { return value_; }

private:
    std::size_t index_;
    double value_;
};

// True for the codes that signal degenerate input data rather than a usage
// or configuration problem.
bool is_degenerate_input(ErrorCode code);

}  // namespace affest

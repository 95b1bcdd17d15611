#include "affest/errors.hpp"

#include <sstream>

namespace affest {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NotSubcritical: return "NotSubcritical";
        case ErrorCode::StepTooLarge: return "StepTooLarge";
        case ErrorCode::TruncationTooShort: return "TruncationTooShort";
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::NegativeY0: return "NegativeY0";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::NonpositiveY: return "NonpositiveY";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::DegenerateMoments: return "DegenerateMoments";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

static std::string nonpositive_message(std::size_t index, double value) {
    std::ostringstream os;
    os.precision(17);
    os << "NonpositiveY: y[" << index << "] = " << value
       << " (1/Y integrands undefined; grid too coarse or a < 1/2)";
    return os.str();
}

NonpositiveYError::NonpositiveYError(std::size_t index, double value)
    : Error(ErrorCode::NonpositiveY, nonpositive_message(index, value)),
      index_(index),
      value_(value) {}

bool is_degenerate_input(ErrorCode code) {
    return code == ErrorCode::DegenerateDenominator || code == ErrorCode::NonpositiveY ||
           code == ErrorCode::DegenerateMoments;
}

}  // namespace affest

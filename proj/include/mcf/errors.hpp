#pragma once
#include <stdexcept>
#include <string>

namespace mcf {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularMetric : Error { using Error::Error; };
struct MissingGhost : Error { using Error::Error; };
struct StencilTooNarrow : Error { using Error::Error; };
struct NonpositiveProfile : Error { using Error::Error; };
struct WrongDimension : Error { using Error::Error; };
struct StepRejected : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct ContactAngleTooSteep : ValidationError { using ValidationError::ValidationError; };
struct DegenerateShape : ValidationError { using ValidationError::ValidationError; };

} // namespace mcf

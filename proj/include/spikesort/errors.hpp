#pragma once

#include <stdexcept>

namespace spikesort {

// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct SingularDenominatorError : Error { using Error::Error; };
struct InvalidBandError : Error { using Error::Error; };
struct TooShortError : Error { using Error::Error; };
struct EmptyClusterError : Error { using Error::Error; };
struct DegenerateDataError : Error { using Error::Error; };
struct LengthMismatchError : Error { using Error::Error; };
struct RangeTooLargeError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace spikesort

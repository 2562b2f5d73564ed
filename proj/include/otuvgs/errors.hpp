#pragma once

#include <stdexcept>
#include <string>

namespace otuvgs {

inline constexpr const char* kVersion = "0.1.0";

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// PLY ingestion
struct MalformedHeader : Error { using Error::Error; };
struct TruncatedBody : Error { using Error::Error; };
struct NonFiniteRecord : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };

// Mapping
struct DegenerateDirection : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct InvalidBins : Error { using Error::Error; };

// Packing
struct ChannelMissing : Error { using Error::Error; };

// Tensor container
struct BadMagic : Error { using Error::Error; };
struct UnsupportedVersion : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };

// Synthesis
struct InvalidSpec : Error { using Error::Error; };

}  // namespace otuvgs

#pragma once

#include <stdexcept>
#include <string>

namespace cits {

/// Base of every error raised by the simulator library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CITS_DEFINE_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Input and model loading.
CITS_DEFINE_ERROR(IoError);
CITS_DEFINE_ERROR(ParseError);
CITS_DEFINE_ERROR(ValidationError);
CITS_DEFINE_ERROR(UnknownNode);

// Codec.
CITS_DEFINE_ERROR(UnknownNodeIndex);
CITS_DEFINE_ERROR(PayloadTooLarge);
CITS_DEFINE_ERROR(NoInterfaceAvailable);

// Engine.
CITS_DEFINE_ERROR(PastTime);
CITS_DEFINE_ERROR(NoRoute);

// Services.
CITS_DEFINE_ERROR(UnknownLot);
CITS_DEFINE_ERROR(OccupancyOutOfRange);
CITS_DEFINE_ERROR(InvalidProof);
CITS_DEFINE_ERROR(UnknownIntersection);
CITS_DEFINE_ERROR(UnregisteredDevice);
CITS_DEFINE_ERROR(UnknownVehicle);
CITS_DEFINE_ERROR(UnknownSegment);
CITS_DEFINE_ERROR(NegativePenalty);
CITS_DEFINE_ERROR(NoInstance);
CITS_DEFINE_ERROR(UnknownApproach);

// Attack catalog and scenarios.
CITS_DEFINE_ERROR(DuplicateCve);
CITS_DEFINE_ERROR(UnknownCve);
CITS_DEFINE_ERROR(ScenarioError);

#undef CITS_DEFINE_ERROR

}  // namespace cits

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace darsan {

// Identifiers are plain integers with a total order; the order is load-bearing
// (deterministic tie-breaking in expert selection and endorsement choice).
using ReviewerId = std::uint32_t;
using AreaId = std::uint32_t;
using AssetId = std::uint64_t;

// Ratings, reviews, predictions and demand all live on [0,1].
using Rating = double;

enum class ErrorCode {
  InvalidArgument,   // bad value (out of range, negative where nonnegative required)
  WrongState,        // operation invoked in a state that does not allow it
  NotAuthorized,     // actor is not allowed to perform the operation
  Duplicate,         // a second submission where only one is allowed
  SelfEndorsement,   // endorser == endorsee
  MissingReview,     // endorsee has no recorded review
  Degenerate,        // degenerate input (e.g. all-zero weights)
  Config,            // invalid or inconsistent configuration
  Io,                // file read/write failure
  Corrupt,           // log corruption detected
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace darsan

#include "darsan/types.hpp"

namespace darsan {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::WrongState: return "wrong state";
    case ErrorCode::NotAuthorized: return "not authorized";
    case ErrorCode::Duplicate: return "duplicate";
    case ErrorCode::SelfEndorsement: return "self endorsement";
    case ErrorCode::MissingReview: return "missing review";
    case ErrorCode::Degenerate: return "degenerate input";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "io error";
    case ErrorCode::Corrupt: return "corrupt log";
  }
  return "unknown error";
}

}  // namespace darsan

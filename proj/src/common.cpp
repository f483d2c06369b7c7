#include "pg/common.hpp"

namespace pg {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidPresentation: return "InvalidPresentation";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorKind::UnmatchedBlocks: return "UnmatchedBlocks";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::NotAPrefix: return "NotAPrefix";
    case ErrorKind::BadDimensions: return "BadDimensions";
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::NotSolvable: return "NotSolvable";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::MismatchedGrid: return "MismatchedGrid";
    case ErrorKind::SingularH: return "SingularH";
    case ErrorKind::StepCollapse: return "StepCollapse";
    case ErrorKind::NoCandidate: return "NoCandidate";
    case ErrorKind::InsufficientRange: return "InsufficientRange";
    case ErrorKind::ZeroInput: return "ZeroInput";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::FrameMismatch: return "FrameMismatch";
  }
  return "Unknown";
}

void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, std::string(error_kind_name(kind)) + ": " + what);
}

}  // namespace pg

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pg {

using cd = std::complex<double>;

// Fibres are small; fixed maximum keeps temporaries on the stack.
inline constexpr int kMaxRank = 8;
using Mat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxRank, kMaxRank>;
using Vec = Eigen::Matrix<cd, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRank, 1>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxRank, 1>;

enum class ErrorKind {
  InvalidPresentation,
  NonConvergence,
  WeightOutOfRange,
  UnmatchedBlocks,
  RankMismatch,
  NotAPrefix,
  BadDimensions,
  NonPositive,
  NotSolvable,
  DomainError,
  MismatchedGrid,
  SingularH,
  StepCollapse,
  NoCandidate,
  InsufficientRange,
  ZeroInput,
  ParseError,
  ValidationError,
  IoError,
  InvalidArgument,
  FrameMismatch,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace pg

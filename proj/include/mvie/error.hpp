#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvie {

enum class ErrorCode {
  kNonSquare,
  kNotFinite,
  kConvergenceFailure,
  kBadRank,
  kBadDims,
  kDimMismatch,
  kTooFewPoints,
  kDegenerateCluster,
  kLibraryTooSmall,
  kInfeasiblePurity,
  kRejectionStall,
  kRankDeficientData,
  kDegenerateInput,
  kEmptyInterior,
  kDivergence,
  kTooFewContacts,
  kNoContacts,
  kWrongCount,
  kRankDeficientA,
  kZeroColumn,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 protected:
  Error(ErrorCode code, const std::string& what, const std::string& detail)
      : std::runtime_error(what), code_(code), detail_(detail) {}

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mvie

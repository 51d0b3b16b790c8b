#include "mvie/error.hpp"

namespace mvie {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kNotFinite: return "NotFinite";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kBadRank: return "BadRank";
    case ErrorCode::kBadDims: return "BadDims";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDegenerateCluster: return "DegenerateCluster";
    case ErrorCode::kLibraryTooSmall: return "LibraryTooSmall";
    case ErrorCode::kInfeasiblePurity: return "InfeasiblePurity";
    case ErrorCode::kRejectionStall: return "RejectionStall";
    case ErrorCode::kRankDeficientData: return "RankDeficientData";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kEmptyInterior: return "EmptyInterior";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kTooFewContacts: return "TooFewContacts";
    case ErrorCode::kNoContacts: return "NoContacts";
    case ErrorCode::kWrongCount: return "WrongCount";
    case ErrorCode::kRankDeficientA: return "RankDeficientA";
    case ErrorCode::kZeroColumn: return "ZeroColumn";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace mvie

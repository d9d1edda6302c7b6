#include "strongcorr/error.hpp"

namespace strongcorr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNotSymmetric: return "not_symmetric";
    case ErrorKind::kIndefinite: return "indefinite";
    case ErrorKind::kSignIndeterminate: return "sign_indeterminate";
    case ErrorKind::kSignInconsistent: return "sign_inconsistent";
    case ErrorKind::kDegenerateLimit: return "degenerate_limit";
    case ErrorKind::kIllConditioned: return "ill_conditioned";
    case ErrorKind::kRankDeficient: return "rank_deficient";
    case ErrorKind::kOutsideRegime: return "outside_regime";
    case ErrorKind::kUnderdetermined: return "underdetermined";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace strongcorr

#include "tg/errors.hpp"

namespace tg {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::format_error: return "FormatError";
    case Errc::non_finite: return "NonFiniteError";
    case Errc::layout_mismatch: return "LayoutMismatch";
    case Errc::congruence_error: return "CongruenceError";
    case Errc::weight_error: return "WeightError";
    case Errc::empty_trajectory: return "EmptyTrajectory";
    case Errc::insufficient_history: return "InsufficientHistory";
    case Errc::empty_history: return "EmptyHistory";
    case Errc::all_candidates_failed: return "AllCandidatesFailed";
    case Errc::empty_matrix: return "EmptyMatrix";
    case Errc::missing_row: return "MissingRow";
    case Errc::degenerate_trajectory: return "DegenerateTrajectory";
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::divergence: return "DivergenceError";
    case Errc::bad_permutation: return "BadPermutation";
    case Errc::io_error: return "IoError";
    case Errc::manifest_error: return "ManifestError";
  }
  return "UnknownError";
}

}  // namespace tg

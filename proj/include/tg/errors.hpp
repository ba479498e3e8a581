#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tg {

/// Error categories raised by the library. Stable codes; the C API maps
/// them one-to-one onto tg_status values.
enum class Errc {
  invalid_argument,
  format_error,
  non_finite,
  layout_mismatch,
  congruence_error,
  weight_error,
  empty_trajectory,
  insufficient_history,
  empty_history,
  all_candidates_failed,
  empty_matrix,
  missing_row,
  degenerate_trajectory,
  rank_deficient,
  divergence,
  bad_permutation,
  io_error,
  manifest_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tg

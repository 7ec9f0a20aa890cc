#pragma once

#include <stdexcept>
#include <string>

namespace hg {

// Error taxonomy for the whole library.  Every throwing path uses hg::error so
// callers (in particular the CLI) can map failures to stable categories.
enum class errc {
  validation_error,       // malformed input data / parameters out of range
  dimension_mismatch,     // point or measure dimensions disagree
  dimension_unsupported,  // operation only implemented for N in {1,2,3} (or N=1)
  index_too_small,        // growth index is zero where a positive one is required
  quadrature_failure,     // tolerance not reached within the node budget
  beyond_maximal_time,    // evaluation time past the lifespan of the solution
  at_maximal_time,        // evaluation exactly at the lifespan boundary
  insufficient_shells,    // shell-based classifier ran out of usable shells
  order_unsupported,      // derivative order outside the supported table
  signed_data_unsupported,// operation requires a nonnegative measure
  not_factored,           // measure lacks the structure the operation needs
  unsupported_restriction,// family is not closed under the requested transform
  tail_not_closed,        // series tail could not be certified below tolerance
  inconsistent_bound      // coefficient sequence violates its declared envelope
};

const char* errc_name(errc code) noexcept;

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what_arg)
      : std::runtime_error(what_arg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) {
  throw error(code, msg);
}

}  // namespace hg

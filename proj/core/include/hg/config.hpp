#pragma once

#include <cstdint>

namespace hg {

// Shared accuracy knobs for every quadrature-backed operation.  Defaults are
// deliberately tight; most closed-form paths ignore them entirely.
struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-14;
  int max_nodes_per_axis = 4096;  // per one-dimensional integral
  double tail_safety = 1.25;      // multiplier on computed truncation radii
  int angular_nodes = 64;         // trapezoid nodes for angular integrals

  // Escape hatches used by tests: force the generic quadrature path even when
  // a closed form exists, or disable per-family analytic classification rules.
  bool force_quadrature = false;
  bool analytic_rules = true;

  void validate() const;  // throws hg::error(errc::validation_error)
};

// Process-wide quadrature node counters (single-threaded bookkeeping).
namespace quad_stats {
std::uint64_t nodes_used() noexcept;
void reset() noexcept;
void add(std::uint64_t n) noexcept;
}  // namespace quad_stats

}  // namespace hg

#pragma once

#include <cstdint>
#include <vector>

#include "lsia/state.hpp"

namespace lsia {

/// Forbids reversing recent moves. A flip of p at step s with tenure t blocks
/// flipping p during steps s+1..s+t; an increase of x blocks decreases of x
/// for the same window, and vice versa.
class TabuTable {
 public:
  TabuTable() = default;
  TabuTable(std::size_t n_bool, std::size_t n_int) { resize(n_bool, n_int); }

  void resize(std::size_t n_bool, std::size_t n_int) {
    flip_until_.assign(n_bool, 0);
    inc_until_.assign(n_int, 0);
    dec_until_.assign(n_int, 0);
  }

  void clear() {
    std::fill(flip_until_.begin(), flip_until_.end(), 0);
    std::fill(inc_until_.begin(), inc_until_.end(), 0);
    std::fill(dec_until_.begin(), dec_until_.end(), 0);
  }

  /// Whether op would violate tabu if executed as step `step`.
  bool forbidden(const Operation& op, Int current, std::uint64_t step) const {
    if (op.is_flip()) return step <= flip_until_[op.var];
    if (op.value > current) return step <= inc_until_[op.var];
    if (op.value < current) return step <= dec_until_[op.var];
    return false;
  }

  /// Records op executed as step `step` (previous is the value before it).
  void record(const Operation& op, Int previous, std::uint64_t step, std::uint64_t tenure) {
    if (op.is_flip()) {
      flip_until_[op.var] = step + tenure;
    } else if (op.value > previous) {
      dec_until_[op.var] = step + tenure;
    } else if (op.value < previous) {
      inc_until_[op.var] = step + tenure;
    }
  }

 private:
  std::vector<std::uint64_t> flip_until_;
  std::vector<std::uint64_t> inc_until_;
  std::vector<std::uint64_t> dec_until_;
};

}  // namespace lsia

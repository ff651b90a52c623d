#pragma once

#include <cstdint>

namespace ebbiot {

/// Increment-only operation tally for one pipeline stage. Stages take a
/// nullable pointer; a null pointer means instrumentation is off.
struct StageCounters {
  std::uint64_t increments = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t writes = 0;      // memory writes, in words of the stage's width
  std::uint64_t arithmetic = 0;  // adds, multiplies, divides

  std::uint64_t total() const { return increments + comparisons + writes + arithmetic; }

  StageCounters& operator+=(const StageCounters& o) {
    increments += o.increments;
    comparisons += o.comparisons;
    writes += o.writes;
    arithmetic += o.arithmetic;
    return *this;
  }
};

}  // namespace ebbiot

#pragma once

#include <functional>
#include <vector>

#include "refform/model.hpp"

namespace refform {

// Per-FF tracked occurrence sets at a step boundary.
using FFContents = std::vector<RefSet>;

/// Computes the referring form of a circuit under one schedule by influence
/// propagation over the time-unrolled graph.
///
/// Step t, in order:
///   - the output reads the chosen alternative: FF sources contribute their
///     pre-update contents to past[t], data-port sources their name to
///     current[t];
///   - every latching FF simultaneously replaces its contents with
///     {(p, t) : p in data-port sources} united with the pre-update contents
///     of its FF sources; holding FFs keep their contents.
/// Initial contents are empty, so past[0] is always empty.
ReferringForm restriction_map(const Circuit& c, const Schedule& s);

// Contents of every FF after each step's update; index [t][ff].
std::vector<FFContents> ff_contents_trace(const Circuit& c, const Schedule& s);

/// Deterministic enumeration of the admissible schedule space: fixed clocks
/// contribute exactly their edge pattern, free clocks all 2^horizon latch
/// patterns, selected selectors all choice streams. Components are ordered
/// FF0..FFn latch patterns, FF selector choices, output choices; the last
/// component varies fastest and step 0 is the least significant digit within
/// a component.
class ScheduleSpace {
 public:
  ScheduleSpace(const Circuit& c, TimeStep horizon);

  // Saturates at ULLONG_MAX; exceeds() is exact even when saturated.
  unsigned long long cardinality() const { return card_; }
  bool saturated() const { return saturated_; }
  bool exceeds(unsigned long long budget) const {
    return saturated_ || card_ > budget;
  }
  Schedule at(unsigned long long code) const;

 private:
  struct Component {
    bool is_latch = false;  // else: selector choice digits
    int target = 0;         // ff index or selector index
    int base = 2;           // digit radix per step
    unsigned long long radix = 1;  // base^horizon
  };
  const Circuit* circuit_;
  TimeStep horizon_;
  Schedule proto_;
  std::vector<Component> components_;
  unsigned long long card_ = 1;
  bool saturated_ = false;
};

// Streams every admissible schedule in ScheduleSpace order. The callback
// returns false to stop early. Throws BudgetExceeded once more than `budget`
// schedules would have to be evaluated (the space cardinality is reported).
void for_each_schedule(const Circuit& c, TimeStep horizon,
                       unsigned long long budget,
                       const std::function<bool(unsigned long long code,
                                                const Schedule&)>& fn);

// All distinct referring forms over the admissible schedule space, sorted.
// Refuses up front when the space cardinality exceeds the budget.
std::vector<ReferringForm> all_referring_forms(
    const Circuit& c, TimeStep horizon,
    unsigned long long budget = kDefaultScheduleBudget);

}  // namespace refform

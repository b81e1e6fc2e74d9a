#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "refform/model.hpp"
#include "refform/order.hpp"

namespace refform {

/// Every circuit with one data input, `ff_count` free-clocked flip-flops, and
/// arbitrary connectivity: each FF's source set is a non-empty subset of
/// {input} ∪ FFs, as is the output's. Deterministic order: source masks count
/// up with the output mask varying fastest; bit 0 is the input, bit i+1 is
/// FF i. Self-feeding FFs are included (they model hold-through-latch).
std::vector<Circuit> enumerate_mcd_circuits(int ff_count, int max_ffs = 2);
unsigned long long mcd_circuit_count(int ff_count);

// Structural classifier for the guaranteed-preserving class: one data input
// and fixed (unselected) connections everywhere. Clocks may be anything.
bool in_single_input_class(const Circuit& c);

struct SweepOptions {
  unsigned long long budget = kDefaultScheduleBudget;
  int max_ffs = 2;
  int spot_check_pairs = 100;
  std::uint64_t spot_check_seed = 1;
  unsigned int threads = 0;  // 0 = hardware concurrency
};

struct SweepFailure {
  int circuit_index = -1;
  std::string circuit;  // emitted circuit text
  std::string detail;
};

struct SweepReport {
  std::string property;  // "time-preservation" | "reference-monotonicity"
  int ff_count = 0;
  TimeStep horizon = 0;
  unsigned long long circuits = 0;
  unsigned long long schedules_per_circuit = 0;
  unsigned long long checked = 0;  // circuit x schedule pairs
  unsigned long long closed_form = 0;
  unsigned long long self_loop_circuits = 0;
  int spot_pairs = 0;
  int spot_mismatches = 0;
  std::vector<SweepFailure> failures;

  std::string text() const;
  nlohmann::ordered_json json() const;
};

/// For every enumerated circuit, collects the referring forms of all
/// 2^(ffs*horizon) free-clock schedules and checks time preservation of the
/// set. Also cross-validates a seeded random sample of (circuit, schedule)
/// pairs against the perturbation oracle (exact equality under tupling).
SweepReport sweep_time_preservation(int ff_count, TimeStep horizon,
                                    const SweepOptions& options = {});

/// Same space; checks newest-reference monotonicity of every per-schedule
/// form.
SweepReport sweep_reference_monotonicity(int ff_count, TimeStep horizon,
                                         const SweepOptions& options = {});

// Two-input circuit with two independently clocked memories read through an
// output selector.
Circuit selective_memory_circuit();

/// A pair of schedules for the selective-memory circuit whose forms order two
/// distinct values in opposite directions at the fixed step pattern
/// (n, n+3) / (n+3, n+7): form1[n] = form2[n+7], form1[n+3] = form2[n+3],
/// form1[n] != form1[n+3]. Needs horizon >= 8 to be satisfiable.
struct SelectiveConflict {
  Schedule schedule1, schedule2;
  ReferringForm form1, form2;
  TimeStep n = 0;
};
std::optional<SelectiveConflict> find_selective_conflict(
    TimeStep horizon, unsigned long long budget = kDefaultScheduleBudget);

}  // namespace refform

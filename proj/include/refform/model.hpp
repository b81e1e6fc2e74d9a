#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace refform {

// Discrete clock tick, 0-based.
using TimeStep = int;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when an enumeration or simulation would exceed its configured budget.
struct BudgetExceeded : Error {
  unsigned long long cardinality;
  BudgetExceeded(const std::string& what, unsigned long long cardinality_)
      : Error(what), cardinality(cardinality_) {}
};

inline constexpr unsigned long long kDefaultScheduleBudget = 1ull << 24;
inline constexpr unsigned long long kDefaultStreamBudget = 1ull << 20;

enum class PortKind { Data, Control };

struct PortId {
  std::string name;
  PortKind kind = PortKind::Data;
  friend auto operator<=>(const PortId&, const PortId&) = default;
};

// One data-input port at one absolute time step.
struct InputOccurrence {
  std::string port;
  TimeStep time = 0;
  friend auto operator<=>(const InputOccurrence&, const InputOccurrence&) = default;
};

/// Finite set of input occurrences, kept sorted by (port, time) and
/// duplicate-free. Equality is extensional set equality; it does not depend
/// on the length of the stream the set was drawn from.
class RefSet {
 public:
  RefSet() = default;
  explicit RefSet(std::vector<InputOccurrence> occurrences)
      : occs_(std::move(occurrences)) {
    normalize();
  }
  RefSet(std::initializer_list<InputOccurrence> occurrences)
      : occs_(occurrences) {
    normalize();
  }

  const std::vector<InputOccurrence>& occurrences() const { return occs_; }
  bool empty() const { return occs_.empty(); }
  std::size_t size() const { return occs_.size(); }

  bool contains(const InputOccurrence& o) const {
    return std::binary_search(occs_.begin(), occs_.end(), o);
  }

  void insert(InputOccurrence o) {
    auto it = std::lower_bound(occs_.begin(), occs_.end(), o);
    if (it == occs_.end() || *it != o) occs_.insert(it, std::move(o));
  }

  void unite(const RefSet& other) {
    if (other.empty()) return;
    std::vector<InputOccurrence> merged;
    merged.reserve(occs_.size() + other.occs_.size());
    std::set_union(occs_.begin(), occs_.end(), other.occs_.begin(),
                   other.occs_.end(), std::back_inserter(merged));
    occs_ = std::move(merged);
  }

  // Largest referenced time, over all ports or for one port.
  std::optional<TimeStep> max_time() const {
    std::optional<TimeStep> best;
    for (const auto& o : occs_)
      if (!best || o.time > *best) best = o.time;
    return best;
  }
  std::optional<TimeStep> max_time(std::string_view port) const {
    std::optional<TimeStep> best;
    for (const auto& o : occs_)
      if (o.port == port && (!best || o.time > *best)) best = o.time;
    return best;
  }

  friend auto operator<=>(const RefSet&, const RefSet&) = default;

 private:
  void normalize() {
    std::sort(occs_.begin(), occs_.end());
    occs_.erase(std::unique(occs_.begin(), occs_.end()), occs_.end());
  }
  std::vector<InputOccurrence> occs_;
};

// Explicit canonicalization entry points. RefSet normalizes on construction,
// so the set overload is the identity; both are kept so callers holding raw
// occurrence lists have one obvious door.
inline RefSet canonicalize(RefSet s) { return s; }
inline RefSet canonicalize(std::vector<InputOccurrence> occurrences) {
  return RefSet(std::move(occurrences));
}

/// Horizon-indexed record of what the output can refer to: past[t] is the set
/// of strictly-past input occurrences reachable at step t, current[t] the
/// data ports feeding the output combinationally at t.
struct ReferringForm {
  TimeStep horizon = 0;
  std::vector<RefSet> past;
  std::vector<std::vector<std::string>> current;  // sorted port names
  friend auto operator<=>(const ReferringForm&, const ReferringForm&) = default;
};

// Throws Error if the form breaks an invariant (sizes, past[0] = {}, every
// occurrence strictly past, current arrays sorted/unique).
void validate_form(const ReferringForm& form);

std::size_t hash_value(const ReferringForm& form);
struct FormHash {
  std::size_t operator()(const ReferringForm& f) const { return hash_value(f); }
};

enum class SourceKind { DataPort, FF };

// A combinational source: either a data port or a flip-flop, by index into
// the owning circuit's data_ports / ffs lists. Ports order before FFs.
struct Source {
  SourceKind kind = SourceKind::DataPort;
  int index = 0;
  friend auto operator<=>(const Source&, const Source&) = default;
};

// Sorted, duplicate-free set of sources.
using SourceSet = std::vector<Source>;

SourceSet make_source_set(std::vector<Source> sources);

/// A control-driven choice between alternative source sets. A fixed
/// connection is the degenerate single-alternative selector (no control).
struct Selector {
  std::optional<int> control;  // control port index; required iff selected()
  std::vector<SourceSet> alternatives;
  bool selected() const { return alternatives.size() > 1; }
  friend bool operator==(const Selector&, const Selector&) = default;
};

struct Periodic {
  int period = 1;
  int offset = 0;  // edge at t iff t % period == offset
  friend bool operator==(const Periodic&, const Periodic&) = default;
};
struct ExplicitEdges {
  std::vector<TimeStep> edges;  // sorted, unique
  friend bool operator==(const ExplicitEdges&, const ExplicitEdges&) = default;
};
// Unconstrained clock: every latch/hold pattern is admissible.
struct Free {
  friend bool operator==(const Free&, const Free&) = default;
};
using ClockRef = std::variant<Periodic, ExplicitEdges, Free>;

inline bool is_free(const ClockRef& c) {
  return std::holds_alternative<Free>(c);
}
bool has_edge(const ClockRef& clock, TimeStep t);  // precondition: !is_free

struct FlipFlop {
  std::string name;
  ClockRef clock = Free{};
  Selector data_input;  // what it latches when its clock ticks
  friend bool operator==(const FlipFlop&, const FlipFlop&) = default;
};

struct Circuit {
  std::string name;
  std::vector<PortId> data_ports;
  std::vector<PortId> control_ports;
  std::vector<FlipFlop> ffs;
  Selector output;

  // Selectors are indexed 0..ffs-1 (per-FF data inputs) then ffs (output).
  int selector_count() const { return static_cast<int>(ffs.size()) + 1; }
  const Selector& selector(int i) const {
    return i == static_cast<int>(ffs.size()) ? output : ffs[i].data_input;
  }

  int data_port_index(std::string_view name) const;
  int control_port_index(std::string_view name) const;
  int ff_index(std::string_view name) const;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

// Structural validation; throws Error with a message on the first problem.
void validate(const Circuit& c);

bool has_self_loop(const Circuit& c);

/// One resolved control stream: per-FF latch/hold bits and per-selector
/// alternative choices over [0, horizon).
struct Schedule {
  TimeStep horizon = 0;
  std::vector<std::vector<std::uint8_t>> latch;   // [ff][t], 1 = latch
  std::vector<std::vector<std::uint8_t>> choice;  // [selector][t]
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Checks shape, choice ranges and clock consistency (latch[i][t] = 1 exactly
// at edges of non-free clocks). Throws Error.
void validate_schedule(const Circuit& c, const Schedule& s);

// Expands clock definitions into latch bits. Free clocks must be given an
// explicit pattern via free_latch (keyed by FF name); selectors with more
// than one alternative must be covered by selector_choices (indexed like
// Circuit::selector, empty rows mean all-zero and are only allowed for
// degenerate selectors).
Schedule schedule_from_clocks(
    const Circuit& c, TimeStep horizon,
    const std::vector<std::vector<std::uint8_t>>& selector_choices = {},
    const std::map<std::string, std::vector<std::uint8_t>>& free_latch = {});

// Canonical "F=1000;sel=0010" rendering of a schedule, and its inverse.
std::string schedule_spec(const Circuit& c, const Schedule& s);
Schedule schedule_from_spec(const Circuit& c, TimeStep horizon,
                            std::string_view spec);

bool is_valid_identifier(std::string_view s);

std::string to_string(const InputOccurrence& o);  // "(I,3)"
std::string to_string(const RefSet& s);           // "{}", "{(I,0),(I,2)}"

nlohmann::ordered_json to_json(const RefSet& s);
nlohmann::ordered_json to_json(const ReferringForm& form);

}  // namespace refform

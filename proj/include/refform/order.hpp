#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refform/model.hpp"

namespace refform {

// All distinct step-values attained by any form in the set, sorted.
std::vector<RefSet> unified_image(std::span<const ReferringForm> forms);

/// Directed relation over the unified image: an edge u -> v records that some
/// form takes value u and then, as its next distinct value, v. Transitive
/// closure of these edges yields every derived precedence pair, since each
/// form's timeline is totally ordered.
struct PrecedenceGraph {
  struct Evidence {
    int form = 0;  // index into the input form list
    TimeStep t1 = 0, t2 = 0;
  };
  struct Edge {
    int from = 0, to = 0;
    // First evidence seen, plus the first one from a different form value.
    std::vector<Evidence> evidence;
  };
  std::vector<RefSet> nodes;  // sorted, unique
  std::vector<Edge> edges;    // sorted by (from, to)

  int node_index(const RefSet& value) const;
  const Edge* find_edge(int from, int to) const;
};

PrecedenceGraph precedence_graph(std::span<const ReferringForm> forms);

struct WitnessEdge {
  RefSet from, to;
  int form = 0;
  TimeStep t1 = 0, t2 = 0;
};

struct PartialOrder {
  std::vector<RefSet> nodes;
  std::vector<std::vector<bool>> leq;  // reflexive-transitive closure
  bool holds(const RefSet& a, const RefSet& b) const;
};

struct TimePreservationVerdict {
  bool preserving = false;
  std::optional<PartialOrder> order;  // set iff preserving
  // Cycle through >= 2 distinct values: witness[i].to == witness[i+1].from,
  // wrapping around. Empty iff preserving.
  std::vector<WitnessEdge> witness;
};

/// Decides time preservation by the minimal candidate order: the input set is
/// preserving iff the precedence relation's transitive closure is
/// antisymmetric, i.e. the graph is acyclic (edges never join equal values,
/// so a repeated value at a later step is allowed). On failure the witness is
/// a shortest cycle; among 2-cycles one whose two edges come from two
/// distinct forms is preferred.
TimePreservationVerdict check_time_preservation(
    std::span<const ReferringForm> forms);

nlohmann::ordered_json to_json(const TimePreservationVerdict& verdict);

struct MonotonicityViolation {
  TimeStep t1 = 0, t2 = 0;
  std::string port;  // per-port variant only
};

/// Newest-reference monotonicity along a single form's timeline: once past[t]
/// is non-empty it stays non-empty, and its largest referenced time never
/// decreases. Returns the first violating step pair, or nullopt if the
/// property holds.
std::optional<MonotonicityViolation> reference_monotonicity_violation(
    const ReferringForm& form);
// Same check applied to each data port's occurrences separately.
std::optional<MonotonicityViolation> reference_monotonicity_violation_per_port(
    const ReferringForm& form);

/// Online variant of check_time_preservation for spaces too large to
/// materialize: feed forms one at a time; a cycle in a partial feed already
/// refutes preservation, while a "preserving" verdict needs the whole space.
/// add() returns true once a two-distinct-form 2-cycle witness is available,
/// at which point the caller may stop feeding.
class StreamingOrderChecker {
 public:
  struct RegisteredForm {
    ReferringForm form;
    std::string origin;  // schedule spec that produced the form
  };

  bool add(const ReferringForm& form, std::string origin);
  bool cycle_found() const { return cycle_found_; }
  bool two_form_witness_found() const { return two_form_witness_; }
  unsigned long long forms_seen() const { return forms_seen_; }

  // nullopt iff indeterminate (feed incomplete and no cycle seen).
  std::optional<TimePreservationVerdict> verdict(bool complete) const;
  const RegisteredForm& registered(int id) const { return registry_[id]; }

 private:
  int register_form(const ReferringForm& form, const std::string& origin);
  std::map<RefSet, int> node_ids_;
  std::vector<RefSet> nodes_;
  std::map<std::pair<int, int>, std::vector<PrecedenceGraph::Evidence>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<RegisteredForm> registry_;
  std::map<ReferringForm, int> registry_ids_;
  unsigned long long forms_seen_ = 0;
  bool cycle_found_ = false;
  bool two_form_witness_ = false;
  std::vector<WitnessEdge> two_form_cycle_;
};

}  // namespace refform

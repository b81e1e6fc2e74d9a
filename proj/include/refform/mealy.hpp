#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "refform/model.hpp"

namespace refform {

// Stored value of a flip-flop before its first latch.
inline const std::string kUninitialized = "\xe2\x8a\xa5";  // ⊥

/// A concrete, executable Mealy machine over a small finite input alphabet
/// (symbols 0..alphabet_size-1 per data port). The state is one stored value
/// per flip-flop; outputs and states are rendered as strings so that
/// machines with structured values compare by plain equality.
struct MealyMachine {
  using State = std::vector<std::string>;
  int data_port_count = 0;
  int alphabet_size = 2;
  State initial;
  // (previous state, inputs at t, schedule, t) -> (output at t, next state)
  std::function<std::pair<std::string, State>(
      const State&, std::span<const int>, const Schedule&, TimeStep)>
      step;
};

// Drives the machine over a finite input stream (inputs[t][port]); the
// stream length must equal the schedule horizon.
std::vector<std::string> run(const MealyMachine& m,
                             const std::vector<std::vector<int>>& inputs,
                             const Schedule& s);

enum class Instantiation {
  // Every node forwards the tuple of its sources; influence coincides with
  // connectivity reachability, so the oracle is exact.
  Tupling,
  // Every node sums its sources mod the alphabet size; reconvergent paths
  // can cancel, making semantic influence a strict subset of connectivity.
  Xor,
};

MealyMachine instantiate(const Circuit& c, Instantiation mode,
                         int alphabet_size = 2);
inline MealyMachine instantiate_tupling(const Circuit& c,
                                        int alphabet_size = 2) {
  return instantiate(c, Instantiation::Tupling, alphabet_size);
}

/// Ground-truth influence sets by exhaustive perturbation: occurrence (p, τ)
/// influences step t iff two input streams differing only at (p, τ) give
/// different outputs at t, quantified over every stream over the alphabet.
/// Returns the result in referring-form shape (past/current per step).
ReferringForm semantic_influence(const Circuit& c, const Schedule& s,
                                 int alphabet_size = 2,
                                 Instantiation mode = Instantiation::Tupling,
                                 unsigned long long budget = kDefaultStreamBudget);

// A fully applied stream function: complete input stream to output stream.
using StreamFunction =
    std::function<std::vector<std::string>(const std::vector<std::vector<int>>&)>;

// True iff outputs at each step agree across all pairs of input streams that
// share a prefix up to that step.
bool causality_check(const StreamFunction& fn, int data_port_count,
                     int alphabet_size, TimeStep horizon,
                     unsigned long long budget = kDefaultStreamBudget);
bool causality_check(const MealyMachine& m, const Schedule& s,
                     unsigned long long budget = kDefaultStreamBudget);

}  // namespace refform

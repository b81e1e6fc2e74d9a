#pragma once

#include <string>

#include "refform/model.hpp"

namespace refform {

// ASCII timeline of the unrolled circuit under one schedule: a latch/hold row
// per flip-flop, the per-step output sources, and the referring-form table.
std::string render_timeline(const Circuit& c, const Schedule& s);

// Graphviz digraph of the time-unrolled graph: one node per flip-flop per
// step (annotated latch/hold), per-step input and output nodes, and the
// resolved data-flow arrows.
std::string render_dot(const Circuit& c, const Schedule& s);

}  // namespace refform

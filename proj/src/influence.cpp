#include "refform/influence.hpp"

#include <climits>
#include <unordered_set>

namespace refform {

namespace {

const SourceSet& chosen_alternative(const Circuit& c, const Schedule& s,
                                    int selector_index, TimeStep t) {
  const Selector& sel = c.selector(selector_index);
  return sel.alternatives[s.choice[selector_index][t]];
}

struct Propagation {
  ReferringForm form;
  std::vector<FFContents> trace;
};

Propagation propagate(const Circuit& c, const Schedule& s, bool want_trace) {
  validate(c);
  validate_schedule(c, s);
  const TimeStep horizon = s.horizon;
  const int ff_count = static_cast<int>(c.ffs.size());
  const int output_selector = ff_count;

  FFContents contents(ff_count);
  Propagation result;
  result.form.horizon = horizon;
  result.form.past.resize(horizon);
  result.form.current.resize(horizon);
  if (want_trace) result.trace.reserve(horizon);

  std::vector<std::pair<int, RefSet>> updates;
  for (TimeStep t = 0; t < horizon; ++t) {
    const SourceSet& out = chosen_alternative(c, s, output_selector, t);
    RefSet past;
    std::vector<std::string>& cur = result.form.current[t];
    for (const Source& src : out) {
      if (src.kind == SourceKind::FF)
        past.unite(contents[src.index]);
      else
        cur.push_back(c.data_ports[src.index].name);
    }
    std::sort(cur.begin(), cur.end());
    result.form.past[t] = std::move(past);

    // Simultaneous update: every latching FF reads pre-update contents.
    updates.clear();
    for (int i = 0; i < ff_count; ++i) {
      if (!s.latch[i][t]) continue;
      const SourceSet& srcs = chosen_alternative(c, s, i, t);
      RefSet taken;
      for (const Source& src : srcs) {
        if (src.kind == SourceKind::FF)
          taken.unite(contents[src.index]);
        else
          taken.insert({c.data_ports[src.index].name, t});
      }
      updates.emplace_back(i, std::move(taken));
    }
    for (auto& [i, taken] : updates) contents[i] = std::move(taken);
    if (want_trace) result.trace.push_back(contents);
  }
  return result;
}

}  // namespace

ReferringForm restriction_map(const Circuit& c, const Schedule& s) {
  return propagate(c, s, false).form;
}

std::vector<FFContents> ff_contents_trace(const Circuit& c,
                                          const Schedule& s) {
  return propagate(c, s, true).trace;
}

ScheduleSpace::ScheduleSpace(const Circuit& c, TimeStep horizon)
    : circuit_(&c), horizon_(horizon) {
  validate(c);
  if (horizon < 1) throw Error("horizon must be positive");
  proto_.horizon = horizon;
  proto_.latch.resize(c.ffs.size());
  proto_.choice.assign(c.selector_count(),
                       std::vector<std::uint8_t>(horizon, 0));

  auto push = [this](Component comp) {
    for (TimeStep t = 0; t < horizon_; ++t) {
      unsigned long long next = comp.radix * comp.base;
      if (next / comp.base != comp.radix) {
        saturated_ = true;
        comp.radix = ULLONG_MAX;
        break;
      }
      comp.radix = next;
    }
    unsigned long long next_card = card_ * comp.radix;
    if (comp.radix != 0 && next_card / comp.radix != card_) saturated_ = true;
    card_ = saturated_ ? ULLONG_MAX : next_card;
    components_.push_back(comp);
  };

  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    auto& row = proto_.latch[i];
    row.assign(horizon, 0);
    if (is_free(c.ffs[i].clock)) {
      push({.is_latch = true, .target = static_cast<int>(i), .base = 2});
    } else {
      for (TimeStep t = 0; t < horizon; ++t)
        row[t] = has_edge(c.ffs[i].clock, t) ? 1 : 0;
    }
  }
  for (int i = 0; i < c.selector_count(); ++i) {
    const Selector& sel = c.selector(i);
    if (sel.selected())
      push({.is_latch = false,
            .target = i,
            .base = static_cast<int>(sel.alternatives.size())});
  }
}

Schedule ScheduleSpace::at(unsigned long long code) const {
  if (saturated_)
    throw Error("schedule space is too large to index");
  if (code >= card_) throw Error("schedule code out of range");
  Schedule s = proto_;
  for (auto it = components_.rbegin(); it != components_.rend(); ++it) {
    unsigned long long value = code % it->radix;
    code /= it->radix;
    auto& row = it->is_latch ? s.latch[it->target] : s.choice[it->target];
    for (TimeStep t = 0; t < horizon_; ++t) {
      row[t] = static_cast<std::uint8_t>(value % it->base);
      value /= it->base;
    }
  }
  return s;
}

void for_each_schedule(const Circuit& c, TimeStep horizon,
                       unsigned long long budget,
                       const std::function<bool(unsigned long long,
                                                const Schedule&)>& fn) {
  ScheduleSpace space(c, horizon);
  unsigned long long n = space.cardinality();
  for (unsigned long long code = 0; code < n; ++code) {
    if (code >= budget)
      throw BudgetExceeded(
          "schedule space has " + std::to_string(n) +
              " schedules, budget is " + std::to_string(budget),
          n);
    if (!fn(code, space.at(code))) return;
  }
}

std::vector<ReferringForm> all_referring_forms(const Circuit& c,
                                               TimeStep horizon,
                                               unsigned long long budget) {
  ScheduleSpace space(c, horizon);
  if (space.exceeds(budget))
    throw BudgetExceeded(
        "schedule space has " +
            (space.saturated() ? std::string("more than 2^64")
                               : std::to_string(space.cardinality())) +
            " schedules, budget is " + std::to_string(budget),
        space.cardinality());
  std::unordered_set<ReferringForm, FormHash> seen;
  for (unsigned long long code = 0; code < space.cardinality(); ++code)
    seen.insert(restriction_map(c, space.at(code)));
  std::vector<ReferringForm> forms(seen.begin(), seen.end());
  std::sort(forms.begin(), forms.end());
  return forms;
}

}  // namespace refform

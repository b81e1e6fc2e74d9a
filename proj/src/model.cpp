#include "refform/model.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace refform {

namespace {

const char* const kKeywords[] = {"circuit", "input",  "control", "clock",
                                 "ff",      "output", "from",    "select",
                                 "period",  "offset", "edges",   "free"};

bool is_keyword(std::string_view s) {
  for (const char* k : kKeywords)
    if (s == k) return true;
  return false;
}

}  // namespace

bool is_valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return !is_keyword(s);
}

void validate_form(const ReferringForm& form) {
  if (form.horizon < 1) throw Error("referring form horizon must be positive");
  if (static_cast<TimeStep>(form.past.size()) != form.horizon ||
      static_cast<TimeStep>(form.current.size()) != form.horizon)
    throw Error("referring form sequences must have length = horizon");
  if (!form.past[0].empty())
    throw Error("referring form must refer to nothing at step 0");
  for (TimeStep t = 0; t < form.horizon; ++t) {
    for (const auto& occ : form.past[t].occurrences()) {
      if (occ.time < 0 || occ.time >= t)
        throw Error("past occurrence " + to_string(occ) + " at step " +
                    std::to_string(t) + " is not strictly past");
    }
    const auto& cur = form.current[t];
    if (!std::is_sorted(cur.begin(), cur.end()) ||
        std::adjacent_find(cur.begin(), cur.end()) != cur.end())
      throw Error("current port list at step " + std::to_string(t) +
                  " is not sorted/unique");
  }
}

std::size_t hash_value(const ReferringForm& form) {
  std::size_t h = std::hash<TimeStep>{}(form.horizon);
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  std::hash<std::string> hs;
  for (const auto& rs : form.past) {
    mix(rs.size());
    for (const auto& o : rs.occurrences()) {
      mix(hs(o.port));
      mix(static_cast<std::size_t>(o.time));
    }
  }
  for (const auto& cur : form.current) {
    mix(cur.size());
    for (const auto& p : cur) mix(hs(p));
  }
  return h;
}

SourceSet make_source_set(std::vector<Source> sources) {
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  return sources;
}

bool has_edge(const ClockRef& clock, TimeStep t) {
  if (const auto* p = std::get_if<Periodic>(&clock))
    return t >= 0 && t % p->period == p->offset;
  if (const auto* e = std::get_if<ExplicitEdges>(&clock))
    return std::binary_search(e->edges.begin(), e->edges.end(), t);
  throw Error("free clock has no fixed edge pattern");
}

int Circuit::data_port_index(std::string_view name) const {
  for (std::size_t i = 0; i < data_ports.size(); ++i)
    if (data_ports[i].name == name) return static_cast<int>(i);
  return -1;
}

int Circuit::control_port_index(std::string_view name) const {
  for (std::size_t i = 0; i < control_ports.size(); ++i)
    if (control_ports[i].name == name) return static_cast<int>(i);
  return -1;
}

int Circuit::ff_index(std::string_view name) const {
  for (std::size_t i = 0; i < ffs.size(); ++i)
    if (ffs[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

void validate_selector(const Circuit& c, const Selector& sel,
                       const std::string& where) {
  if (sel.alternatives.empty())
    throw Error(where + ": selector needs at least one alternative");
  if (sel.selected()) {
    if (!sel.control)
      throw Error(where + ": selected alternatives need a control port");
    if (*sel.control < 0 ||
        *sel.control >= static_cast<int>(c.control_ports.size()))
      throw Error(where + ": control port index out of range");
  }
  for (const auto& alt : sel.alternatives) {
    if (alt.empty()) throw Error(where + ": empty source set");
    if (!std::is_sorted(alt.begin(), alt.end()) ||
        std::adjacent_find(alt.begin(), alt.end()) != alt.end())
      throw Error(where + ": source set is not canonical");
    for (const Source& s : alt) {
      if (s.kind == SourceKind::DataPort) {
        if (s.index < 0 || s.index >= static_cast<int>(c.data_ports.size()))
          throw Error(where + ": data port index out of range");
      } else {
        if (s.index < 0 || s.index >= static_cast<int>(c.ffs.size()))
          throw Error(where + ": flip-flop index out of range");
      }
    }
  }
}

}  // namespace

void validate(const Circuit& c) {
  if (!is_valid_identifier(c.name))
    throw Error("circuit name '" + c.name + "' is not a valid identifier");
  if (c.data_ports.empty()) throw Error("circuit needs at least one data port");
  std::set<std::string> names;
  auto claim = [&names](const std::string& n, const char* what) {
    if (!is_valid_identifier(n))
      throw Error(std::string(what) + " name '" + n +
                  "' is not a valid identifier");
    if (!names.insert(n).second) throw Error("duplicate name '" + n + "'");
  };
  for (const auto& p : c.data_ports) {
    if (p.kind != PortKind::Data) throw Error("data port with control kind");
    claim(p.name, "data port");
  }
  for (const auto& p : c.control_ports) {
    if (p.kind != PortKind::Control) throw Error("control port with data kind");
    claim(p.name, "control port");
  }
  for (const auto& ff : c.ffs) claim(ff.name, "flip-flop");

  for (const auto& ff : c.ffs) {
    if (const auto* p = std::get_if<Periodic>(&ff.clock)) {
      if (p->period < 1)
        throw Error("flip-flop " + ff.name + ": clock period must be positive");
      if (p->offset < 0 || p->offset >= p->period)
        throw Error("flip-flop " + ff.name + ": clock offset out of range");
    } else if (const auto* e = std::get_if<ExplicitEdges>(&ff.clock)) {
      if (!std::is_sorted(e->edges.begin(), e->edges.end()) ||
          std::adjacent_find(e->edges.begin(), e->edges.end()) != e->edges.end())
        throw Error("flip-flop " + ff.name + ": edge list is not canonical");
      if (!e->edges.empty() && e->edges.front() < 0)
        throw Error("flip-flop " + ff.name + ": negative clock edge");
    }
    validate_selector(c, ff.data_input, "flip-flop " + ff.name);
  }
  validate_selector(c, c.output, "output");
}

bool has_self_loop(const Circuit& c) {
  for (std::size_t i = 0; i < c.ffs.size(); ++i)
    for (const auto& alt : c.ffs[i].data_input.alternatives)
      for (const Source& s : alt)
        if (s.kind == SourceKind::FF && s.index == static_cast<int>(i))
          return true;
  return false;
}

void validate_schedule(const Circuit& c, const Schedule& s) {
  if (s.horizon < 1) throw Error("schedule horizon must be positive");
  if (s.latch.size() != c.ffs.size())
    throw Error("schedule has " + std::to_string(s.latch.size()) +
                " latch rows for " + std::to_string(c.ffs.size()) +
                " flip-flops");
  if (static_cast<int>(s.choice.size()) != c.selector_count())
    throw Error("schedule has " + std::to_string(s.choice.size()) +
                " choice rows for " + std::to_string(c.selector_count()) +
                " selectors");
  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    if (static_cast<TimeStep>(s.latch[i].size()) != s.horizon)
      throw Error("latch row for " + c.ffs[i].name + " has wrong length");
    if (!is_free(c.ffs[i].clock)) {
      for (TimeStep t = 0; t < s.horizon; ++t) {
        bool edge = has_edge(c.ffs[i].clock, t);
        if ((s.latch[i][t] != 0) != edge)
          throw Error("latch bits for " + c.ffs[i].name +
                      " disagree with its clock at step " + std::to_string(t));
      }
    }
  }
  for (int i = 0; i < c.selector_count(); ++i) {
    if (static_cast<TimeStep>(s.choice[i].size()) != s.horizon)
      throw Error("choice row " + std::to_string(i) + " has wrong length");
    int alts = static_cast<int>(c.selector(i).alternatives.size());
    for (TimeStep t = 0; t < s.horizon; ++t)
      if (s.choice[i][t] >= alts)
        throw Error("choice index out of range at selector " +
                    std::to_string(i) + ", step " + std::to_string(t));
  }
}

Schedule schedule_from_clocks(
    const Circuit& c, TimeStep horizon,
    const std::vector<std::vector<std::uint8_t>>& selector_choices,
    const std::map<std::string, std::vector<std::uint8_t>>& free_latch) {
  if (horizon < 1) throw Error("horizon must be positive");
  Schedule s;
  s.horizon = horizon;
  s.latch.resize(c.ffs.size());
  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    auto& row = s.latch[i];
    if (is_free(c.ffs[i].clock)) {
      auto it = free_latch.find(c.ffs[i].name);
      if (it == free_latch.end())
        throw Error("flip-flop " + c.ffs[i].name +
                    " has a free clock; supply its latch pattern explicitly");
      if (static_cast<TimeStep>(it->second.size()) != horizon)
        throw Error("latch pattern for " + c.ffs[i].name +
                    " must have length " + std::to_string(horizon));
      row = it->second;
    } else {
      row.resize(horizon);
      for (TimeStep t = 0; t < horizon; ++t)
        row[t] = has_edge(c.ffs[i].clock, t) ? 1 : 0;
    }
  }
  if (!selector_choices.empty() &&
      static_cast<int>(selector_choices.size()) != c.selector_count())
    throw Error("selector choices must cover all " +
                std::to_string(c.selector_count()) + " selectors");
  s.choice.resize(c.selector_count());
  for (int i = 0; i < c.selector_count(); ++i) {
    const std::vector<std::uint8_t>* row =
        selector_choices.empty() ? nullptr : &selector_choices[i];
    if (row && !row->empty()) {
      if (static_cast<TimeStep>(row->size()) != horizon)
        throw Error("choice row " + std::to_string(i) + " must have length " +
                    std::to_string(horizon));
      s.choice[i] = *row;
    } else {
      if (c.selector(i).selected())
        throw Error("selector " + std::to_string(i) +
                    " has multiple alternatives; supply its choices");
      s.choice[i].assign(horizon, 0);
    }
  }
  validate_schedule(c, s);
  return s;
}

std::string schedule_spec(const Circuit& c, const Schedule& s) {
  std::ostringstream out;
  bool first = true;
  auto sep = [&] {
    if (!first) out << ';';
    first = false;
  };
  for (std::size_t i = 0; i < c.ffs.size(); ++i) {
    sep();
    out << c.ffs[i].name << '=';
    for (TimeStep t = 0; t < s.horizon; ++t) out << (s.latch[i][t] ? '1' : '0');
  }
  // Emit one entry per control port when every selector it drives agrees;
  // otherwise fall back to per-selector entries ("name#index").
  std::vector<bool> emitted(c.selector_count(), false);
  for (std::size_t p = 0; p < c.control_ports.size(); ++p) {
    std::vector<int> driven;
    for (int i = 0; i < c.selector_count(); ++i) {
      const Selector& sel = c.selector(i);
      if (sel.selected() && sel.control && *sel.control == static_cast<int>(p))
        driven.push_back(i);
    }
    if (driven.empty()) continue;
    bool agree = true;
    for (std::size_t k = 1; k < driven.size(); ++k)
      if (s.choice[driven[k]] != s.choice[driven[0]]) agree = false;
    if (agree) {
      sep();
      out << c.control_ports[p].name << '=';
      for (TimeStep t = 0; t < s.horizon; ++t)
        out << static_cast<int>(s.choice[driven[0]][t]);
      for (int i : driven) emitted[i] = true;
    } else {
      for (int i : driven) {
        sep();
        out << c.control_ports[p].name << '#' << i << '=';
        for (TimeStep t = 0; t < s.horizon; ++t)
          out << static_cast<int>(s.choice[i][t]);
        emitted[i] = true;
      }
    }
  }
  return out.str();
}

Schedule schedule_from_spec(const Circuit& c, TimeStep horizon,
                            std::string_view spec) {
  if (horizon < 1) throw Error("horizon must be positive");
  std::map<std::string, std::vector<std::uint8_t>> free_latch;
  std::vector<std::vector<std::uint8_t>> choices(c.selector_count());
  std::map<std::string, std::string> entries;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t end = spec.find(';', pos);
    if (end == std::string_view::npos) end = spec.size();
    std::string_view item = spec.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) {
      if (end == spec.size()) break;
      continue;
    }
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error("schedule entry '" + std::string(item) +
                  "' is missing '='");
    std::string name(item.substr(0, eq));
    std::string digits(item.substr(eq + 1));
    if (!entries.emplace(name, digits).second)
      throw Error("duplicate schedule entry for '" + name + "'");
    if (end == spec.size()) break;
  }
  auto parse_digits = [&](const std::string& name, const std::string& digits,
                          int radix) {
    if (static_cast<TimeStep>(digits.size()) != horizon)
      throw Error("schedule entry for '" + name + "' must have length " +
                  std::to_string(horizon));
    std::vector<std::uint8_t> row(horizon);
    for (TimeStep t = 0; t < horizon; ++t) {
      char ch = digits[t];
      if (ch < '0' || ch >= '0' + radix)
        throw Error("schedule entry for '" + name + "' has invalid digit '" +
                    std::string(1, ch) + "'");
      row[t] = static_cast<std::uint8_t>(ch - '0');
    }
    return row;
  };
  for (const auto& [name, digits] : entries) {
    std::string base = name;
    int only_selector = -1;
    if (std::size_t hash = name.find('#'); hash != std::string::npos) {
      base = name.substr(0, hash);
      try {
        only_selector = std::stoi(name.substr(hash + 1));
      } catch (const std::exception&) {
        throw Error("bad selector index in schedule entry '" + name + "'");
      }
    }
    if (int ff = c.ff_index(base); ff >= 0) {
      if (only_selector >= 0)
        throw Error("'" + name + "' names a flip-flop, not a selector");
      auto row = parse_digits(name, digits, 2);
      if (!is_free(c.ffs[ff].clock)) {
        for (TimeStep t = 0; t < horizon; ++t)
          if ((row[t] != 0) != has_edge(c.ffs[ff].clock, t))
            throw Error("latch bits for " + base +
                        " disagree with its clock at step " +
                        std::to_string(t));
      }
      free_latch[base] = std::move(row);
      continue;
    }
    if (int cp = c.control_port_index(base); cp >= 0) {
      bool any = false;
      for (int i = 0; i < c.selector_count(); ++i) {
        const Selector& sel = c.selector(i);
        if (!sel.selected() || !sel.control || *sel.control != cp) continue;
        if (only_selector >= 0 && only_selector != i) continue;
        choices[i] = parse_digits(
            name, digits, static_cast<int>(sel.alternatives.size()));
        any = true;
      }
      if (!any)
        throw Error("control port '" + base + "' drives no matching selector");
      continue;
    }
    throw Error("schedule entry '" + base +
                "' names no flip-flop or control port");
  }
  return schedule_from_clocks(c, horizon, choices, free_latch);
}

std::string to_string(const InputOccurrence& o) {
  return "(" + o.port + "," + std::to_string(o.time) + ")";
}

std::string to_string(const RefSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& o : s.occurrences()) {
    if (!first) out += ',';
    first = false;
    out += to_string(o);
  }
  out += '}';
  return out;
}

nlohmann::ordered_json to_json(const RefSet& s) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& o : s.occurrences())
    arr.push_back({{"port", o.port}, {"time", o.time}});
  return arr;
}

nlohmann::ordered_json to_json(const ReferringForm& form) {
  nlohmann::ordered_json j;
  j["horizon"] = form.horizon;
  auto steps = nlohmann::ordered_json::array();
  for (TimeStep t = 0; t < form.horizon; ++t) {
    nlohmann::ordered_json step;
    step["t"] = t;
    step["past"] = to_json(form.past[t]);
    step["current"] = form.current[t];
    steps.push_back(std::move(step));
  }
  j["steps"] = std::move(steps);
  return j;
}

}  // namespace refform

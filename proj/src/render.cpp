#include "refform/render.hpp"

#include <sstream>

#include "refform/influence.hpp"

namespace refform {

namespace {

const SourceSet& chosen_alternative(const Circuit& c, const Schedule& s,
                                    int selector_index, TimeStep t) {
  const Selector& sel = c.selector(selector_index);
  return sel.alternatives[s.choice[selector_index][t]];
}

std::string source_name(const Circuit& c, const Source& s) {
  return s.kind == SourceKind::DataPort ? c.data_ports[s.index].name
                                        : c.ffs[s.index].name;
}

}  // namespace

std::string render_timeline(const Circuit& c, const Schedule& s) {
  validate_schedule(c, s);
  const TimeStep horizon = s.horizon;
  ReferringForm form = restriction_map(c, s);

  std::vector<std::vector<std::string>> columns;
  {
    std::vector<std::string> head{"t"};
    for (const auto& ff : c.ffs) head.push_back(ff.name);
    head.push_back("out<-");
    head.push_back("past");
    columns.push_back(std::move(head));
  }
  for (TimeStep t = 0; t < horizon; ++t) {
    std::vector<std::string> col{std::to_string(t)};
    for (std::size_t i = 0; i < c.ffs.size(); ++i)
      col.push_back(s.latch[i][t] ? "L" : "h");
    std::string reads;
    for (const Source& src : chosen_alternative(c, s, c.selector_count() - 1, t)) {
      if (!reads.empty()) reads += ',';
      reads += source_name(c, src);
    }
    col.push_back(reads);
    col.push_back(to_string(form.past[t]));
    columns.push_back(std::move(col));
  }

  const std::size_t rows = columns[0].size();
  std::vector<std::size_t> widths(columns.size(), 0);
  for (std::size_t i = 0; i < columns.size(); ++i)
    for (const auto& cell : columns[i])
      widths[i] = std::max(widths[i], cell.size());

  std::ostringstream out;
  out << "circuit " << c.name << "  horizon " << horizon << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const std::string& cell = columns[i][r];
      out << cell;
      if (i + 1 < columns.size())
        out << std::string(widths[i] - cell.size(), ' ') << "  ";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_dot(const Circuit& c, const Schedule& s) {
  validate_schedule(c, s);
  const TimeStep horizon = s.horizon;
  std::ostringstream out;
  out << "digraph \"" << c.name << "\" {\n";
  out << "  rankdir=LR;\n  node [shape=box];\n";

  auto ff_node = [&](int i, TimeStep t) {
    return "ff_" + c.ffs[i].name + "_" + std::to_string(t);
  };
  auto in_node = [&](int p, TimeStep t) {
    return "in_" + c.data_ports[p].name + "_" + std::to_string(t);
  };

  for (int p = 0; p < static_cast<int>(c.data_ports.size()); ++p)
    for (TimeStep t = 0; t < horizon; ++t)
      out << "  " << in_node(p, t) << " [label=\"" << c.data_ports[p].name
          << "@" << t << "\", shape=ellipse];\n";
  for (int i = 0; i < static_cast<int>(c.ffs.size()); ++i) {
    out << "  ff_" << c.ffs[i].name << "_init [label=\"" << c.ffs[i].name
        << "@init\"];\n";
    for (TimeStep t = 0; t < horizon; ++t)
      out << "  " << ff_node(i, t) << " [label=\"" << c.ffs[i].name << "@" << t
          << " " << (s.latch[i][t] ? "latch" : "hold") << "\"];\n";
  }
  for (TimeStep t = 0; t < horizon; ++t)
    out << "  out_" << t << " [label=\"out@" << t
        << "\", shape=ellipse];\n";

  auto ff_state_before = [&](int i, TimeStep t) {
    return t == 0 ? "ff_" + c.ffs[i].name + "_init" : ff_node(i, t - 1);
  };
  for (TimeStep t = 0; t < horizon; ++t) {
    for (int i = 0; i < static_cast<int>(c.ffs.size()); ++i) {
      if (s.latch[i][t]) {
        for (const Source& src : chosen_alternative(c, s, i, t)) {
          if (src.kind == SourceKind::DataPort)
            out << "  " << in_node(src.index, t) << " -> " << ff_node(i, t)
                << ";\n";
          else
            out << "  " << ff_state_before(src.index, t) << " -> "
                << ff_node(i, t) << ";\n";
        }
      } else {
        out << "  " << ff_state_before(i, t) << " -> " << ff_node(i, t)
            << ";\n";
      }
    }
    for (const Source& src :
         chosen_alternative(c, s, c.selector_count() - 1, t)) {
      if (src.kind == SourceKind::DataPort)
        out << "  " << in_node(src.index, t) << " -> out_" << t << ";\n";
      else
        out << "  " << ff_state_before(src.index, t) << " -> out_" << t
            << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace refform

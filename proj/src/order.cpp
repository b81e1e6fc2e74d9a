#include "refform/order.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>

namespace refform {

namespace {

using Evidence = PrecedenceGraph::Evidence;
using EdgeMap = std::map<std::pair<int, int>, std::vector<Evidence>>;

// Run-compressed timeline: one entry per maximal run of equal values,
// carrying the run's first and last step.
struct Run {
  const RefSet* value;
  TimeStep first, last;
};

std::vector<Run> runs_of(const ReferringForm& form) {
  std::vector<Run> runs;
  for (TimeStep t = 0; t < form.horizon; ++t) {
    if (!runs.empty() && *runs.back().value == form.past[t])
      runs.back().last = t;
    else
      runs.push_back({&form.past[t], t, t});
  }
  return runs;
}

struct GraphView {
  const std::vector<RefSet>* nodes;
  const EdgeMap* edges;
  std::function<const ReferringForm&(int)> form_of;
};

std::vector<std::vector<int>> adjacency_of(const GraphView& g) {
  std::vector<std::vector<int>> adj(g.nodes->size());
  for (const auto& [key, ev] : *g.edges) adj[key.first].push_back(key.second);
  return adj;
}

// Tarjan's strongly connected components, iterative.
std::vector<int> scc_of(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
  struct Frame {
    int node;
    std::size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < adj[f.node].size()) {
        int next = adj[f.node][f.child++];
        if (index[next] == -1) {
          index[next] = low[next] = next_index++;
          stack.push_back(next);
          on_stack[next] = true;
          frames.push_back({next, 0});
        } else if (on_stack[next]) {
          low[f.node] = std::min(low[f.node], index[next]);
        }
      } else {
        if (low[f.node] == index[f.node]) {
          int v;
          do {
            v = stack.back();
            stack.pop_back();
            on_stack[v] = false;
            comp[v] = next_comp;
          } while (v != f.node);
          ++next_comp;
        }
        int done = f.node;
        frames.pop_back();
        if (!frames.empty())
          low[frames.back().node] =
              std::min(low[frames.back().node], low[done]);
      }
    }
  }
  return comp;
}

WitnessEdge make_witness_edge(const GraphView& g, int from, int to,
                              const Evidence& ev) {
  return {(*g.nodes)[from], (*g.nodes)[to], ev.form, ev.t1, ev.t2};
}

// Shortest cycle in the graph, preferring 2-cycles whose two edges come from
// two distinct forms (by value). Deterministic: candidates scanned in node
// order.
std::vector<WitnessEdge> shortest_cycle_witness(const GraphView& g) {
  const auto adj = adjacency_of(g);
  const auto comp = scc_of(adj);

  // Two-cycles first.
  const EdgeMap& edges = *g.edges;
  std::vector<WitnessEdge> plain_two_cycle;
  for (const auto& [key, forward] : edges) {
    if (key.first >= key.second) continue;
    auto rev = edges.find({key.second, key.first});
    if (rev == edges.end()) continue;
    for (const Evidence& e1 : forward) {
      for (const Evidence& e2 : rev->second) {
        if (!(g.form_of(e1.form) == g.form_of(e2.form)))
          return {make_witness_edge(g, key.first, key.second, e1),
                  make_witness_edge(g, key.second, key.first, e2)};
      }
    }
    if (plain_two_cycle.empty())
      plain_two_cycle = {
          make_witness_edge(g, key.first, key.second, forward.front()),
          make_witness_edge(g, key.second, key.first, rev->second.front())};
  }
  if (!plain_two_cycle.empty()) return plain_two_cycle;

  // General shortest cycle by BFS inside each non-trivial component.
  std::vector<int> best_cycle;
  const int n = static_cast<int>(adj.size());
  for (int start = 0; start < n; ++start) {
    bool trivial = true;
    for (int other = 0; other < n && trivial; ++other)
      if (other != start && comp[other] == comp[start]) trivial = false;
    if (trivial) continue;
    std::vector<int> parent(n, -2);
    std::deque<int> queue{start};
    parent[start] = -1;
    std::optional<int> closer;
    while (!queue.empty() && !closer) {
      int u = queue.front();
      queue.pop_front();
      for (int v : adj[u]) {
        if (comp[v] != comp[start]) continue;
        if (v == start) {
          closer = u;
          break;
        }
        if (parent[v] == -2) {
          parent[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (!closer) continue;
    // Path start -> ... -> closer plus the closing edge back to start.
    std::vector<int> cycle;
    for (int v = *closer; v != -1; v = parent[v]) cycle.push_back(v);
    std::reverse(cycle.begin(), cycle.end());
    if (best_cycle.empty() || cycle.size() < best_cycle.size())
      best_cycle = cycle;
  }
  std::vector<WitnessEdge> witness;
  for (std::size_t i = 0; i < best_cycle.size(); ++i) {
    int from = best_cycle[i];
    int to = best_cycle[(i + 1) % best_cycle.size()];
    witness.push_back(
        make_witness_edge(g, from, to, g.edges->at({from, to}).front()));
  }
  return witness;
}

TimePreservationVerdict analyze(const GraphView& g) {
  const auto adj = adjacency_of(g);
  const auto comp = scc_of(adj);
  const int n = static_cast<int>(adj.size());
  bool acyclic = true;
  for (int u = 0; u < n && acyclic; ++u)
    for (int v = 0; v < n && acyclic; ++v)
      if (u != v && comp[u] == comp[v]) acyclic = false;

  TimePreservationVerdict verdict;
  verdict.preserving = acyclic;
  if (!acyclic) {
    verdict.witness = shortest_cycle_witness(g);
    return verdict;
  }
  PartialOrder order;
  order.nodes = *g.nodes;
  order.leq.assign(n, std::vector<bool>(n, false));
  for (int u = 0; u < n; ++u) {
    std::vector<int> todo{u};
    order.leq[u][u] = true;
    while (!todo.empty()) {
      int v = todo.back();
      todo.pop_back();
      for (int w : adj[v])
        if (!order.leq[u][w]) {
          order.leq[u][w] = true;
          todo.push_back(w);
        }
    }
  }
  verdict.order = std::move(order);
  return verdict;
}

// Record an edge's evidence: keep the first one, plus the first whose form
// differs in value (that pair is what a two-form witness needs).
void record_evidence(std::vector<Evidence>& list, const Evidence& ev,
                     const std::function<const ReferringForm&(int)>& form_of) {
  if (list.empty()) {
    list.push_back(ev);
    return;
  }
  if (list.size() == 1 && !(form_of(list[0].form) == form_of(ev.form)))
    list.push_back(ev);
}

}  // namespace

std::vector<RefSet> unified_image(std::span<const ReferringForm> forms) {
  if (forms.empty()) throw Error("unified image of an empty form set");
  std::set<RefSet> values;
  for (const auto& form : forms) {
    validate_form(form);
    for (const auto& v : form.past) values.insert(v);
  }
  return {values.begin(), values.end()};
}

int PrecedenceGraph::node_index(const RefSet& value) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), value);
  if (it == nodes.end() || !(*it == value)) return -1;
  return static_cast<int>(it - nodes.begin());
}

const PrecedenceGraph::Edge* PrecedenceGraph::find_edge(int from,
                                                        int to) const {
  for (const Edge& e : edges)
    if (e.from == from && e.to == to) return &e;
  return nullptr;
}

PrecedenceGraph precedence_graph(std::span<const ReferringForm> forms) {
  PrecedenceGraph g;
  g.nodes = unified_image(forms);
  EdgeMap edges;
  auto form_of = [&forms](int id) -> const ReferringForm& {
    return forms[id];
  };
  for (std::size_t f = 0; f < forms.size(); ++f) {
    const auto runs = runs_of(forms[f]);
    for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
      int u = g.node_index(*runs[r].value);
      int v = g.node_index(*runs[r + 1].value);
      record_evidence(edges[{u, v}],
                      {static_cast<int>(f), runs[r].last, runs[r + 1].first},
                      form_of);
    }
  }
  for (auto& [key, ev] : edges)
    g.edges.push_back({key.first, key.second, std::move(ev)});
  return g;
}

bool PartialOrder::holds(const RefSet& a, const RefSet& b) const {
  auto find = [this](const RefSet& v) -> int {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), v);
    if (it == nodes.end() || !(*it == v)) return -1;
    return static_cast<int>(it - nodes.begin());
  };
  int i = find(a), j = find(b);
  if (i < 0 || j < 0) return false;
  return leq[i][j];
}

TimePreservationVerdict check_time_preservation(
    std::span<const ReferringForm> forms) {
  PrecedenceGraph g = precedence_graph(forms);
  EdgeMap edges;
  for (const auto& e : g.edges) edges[{e.from, e.to}] = e.evidence;
  GraphView view{&g.nodes, &edges, [&forms](int id) -> const ReferringForm& {
                   return forms[id];
                 }};
  return analyze(view);
}

nlohmann::ordered_json to_json(const TimePreservationVerdict& verdict) {
  nlohmann::ordered_json j;
  j["preserving"] = verdict.preserving;
  if (verdict.preserving) {
    j["witness"] = nullptr;
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : verdict.witness) {
      nlohmann::ordered_json edge;
      edge["from"] = to_json(e.from);
      edge["to"] = to_json(e.to);
      edge["form"] = e.form;
      edge["t1"] = e.t1;
      edge["t2"] = e.t2;
      arr.push_back(std::move(edge));
    }
    j["witness"] = std::move(arr);
  }
  return j;
}

std::optional<MonotonicityViolation> reference_monotonicity_violation(
    const ReferringForm& form) {
  std::optional<TimeStep> running;
  TimeStep attained = 0;
  for (TimeStep t = 0; t < form.horizon; ++t) {
    auto mx = form.past[t].max_time();
    if (!mx) {
      if (running) return MonotonicityViolation{attained, t, ""};
      continue;
    }
    if (running && *mx < *running) return MonotonicityViolation{attained, t, ""};
    if (!running || *mx >= *running) {
      running = *mx;
      attained = t;
    }
  }
  return std::nullopt;
}

std::optional<MonotonicityViolation> reference_monotonicity_violation_per_port(
    const ReferringForm& form) {
  std::set<std::string> ports;
  for (const auto& rs : form.past)
    for (const auto& o : rs.occurrences()) ports.insert(o.port);
  struct State {
    std::optional<TimeStep> running;
    TimeStep attained = 0;
  };
  std::map<std::string, State> states;
  for (TimeStep t = 0; t < form.horizon; ++t) {
    for (const auto& port : ports) {
      State& st = states[port];
      auto mx = form.past[t].max_time(port);
      if (!mx) {
        if (st.running) return MonotonicityViolation{st.attained, t, port};
        continue;
      }
      if (st.running && *mx < *st.running)
        return MonotonicityViolation{st.attained, t, port};
      if (!st.running || *mx >= *st.running) {
        st.running = *mx;
        st.attained = t;
      }
    }
  }
  return std::nullopt;
}

int StreamingOrderChecker::register_form(const ReferringForm& form,
                                         const std::string& origin) {
  auto it = registry_ids_.find(form);
  if (it != registry_ids_.end()) return it->second;
  int id = static_cast<int>(registry_.size());
  registry_.push_back({form, origin});
  registry_ids_.emplace(form, id);
  return id;
}

bool StreamingOrderChecker::add(const ReferringForm& form, std::string origin) {
  ++forms_seen_;
  const auto runs = runs_of(form);
  auto form_of = [this](int id) -> const ReferringForm& {
    return registry_[id].form;
  };
  std::vector<std::pair<int, int>> touched;
  for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
    auto node_of = [this](const RefSet& value) {
      auto [it, inserted] = node_ids_.emplace(value, nodes_.size());
      if (inserted) {
        nodes_.push_back(value);
        adjacency_.emplace_back();
      }
      return it->second;
    };
    int u = node_of(*runs[r].value);
    int v = node_of(*runs[r + 1].value);
    auto& list = edges_[{u, v}];
    bool fresh = list.empty();
    std::size_t before = list.size();
    // Register lazily: only forms that actually extend some evidence list
    // are retained.
    if (list.empty() || (list.size() == 1 && !(form_of(list[0].form) == form))) {
      Evidence ev{register_form(form, origin), runs[r].last, runs[r + 1].first};
      record_evidence(list, ev, form_of);
    }
    if (list.size() != before) touched.push_back({u, v});
    if (fresh) {
      adjacency_[u].push_back(v);
      if (!cycle_found_) {
        // New edge u -> v closes a cycle iff u is reachable from v.
        std::vector<int> todo{v};
        std::vector<bool> seen(nodes_.size(), false);
        seen[v] = true;
        while (!todo.empty()) {
          int w = todo.back();
          todo.pop_back();
          if (w == u) {
            cycle_found_ = true;
            break;
          }
          for (int x : adjacency_[w])
            if (!seen[x]) {
              seen[x] = true;
              todo.push_back(x);
            }
        }
      }
    }
  }
  if (!two_form_witness_) {
    for (const auto& [u, v] : touched) {
      auto rev = edges_.find({v, u});
      if (rev == edges_.end()) continue;
      for (const Evidence& e1 : edges_[{u, v}]) {
        for (const Evidence& e2 : rev->second) {
          if (!(registry_[e1.form].form == registry_[e2.form].form)) {
            two_form_witness_ = true;
            two_form_cycle_ = {
                {nodes_[u], nodes_[v], e1.form, e1.t1, e1.t2},
                {nodes_[v], nodes_[u], e2.form, e2.t1, e2.t2}};
            return true;
          }
        }
      }
    }
  }
  return two_form_witness_;
}

std::optional<TimePreservationVerdict> StreamingOrderChecker::verdict(
    bool complete) const {
  if (two_form_witness_) {
    TimePreservationVerdict v;
    v.preserving = false;
    v.witness = two_form_cycle_;
    return v;
  }
  if (!cycle_found_ && !complete) return std::nullopt;
  GraphView view{&nodes_, &edges_, [this](int id) -> const ReferringForm& {
                   return registry_[id].form;
                 }};
  return analyze(view);
}

}  // namespace refform

#include "refform/mealy.hpp"

#include <set>
#include <unordered_map>

namespace refform {

namespace {

unsigned long long pow_saturating(unsigned long long base,
                                  unsigned long long exp) {
  unsigned long long r = 1;
  while (exp--) {
    unsigned long long next = r * base;
    if (base != 0 && next / base != r) return ~0ull;
    r = next;
  }
  return r;
}

const SourceSet& chosen_alternative(const Circuit& c, const Schedule& s,
                                    int selector_index, TimeStep t) {
  const Selector& sel = c.selector(selector_index);
  return sel.alternatives[s.choice[selector_index][t]];
}

std::string tuple_value(const MealyMachine::State& state,
                        std::span<const int> inputs, const SourceSet& srcs) {
  std::string v;
  bool wrap = srcs.size() != 1;
  if (wrap) v += '(';
  bool first = true;
  for (const Source& src : srcs) {
    if (!first) v += ',';
    first = false;
    if (src.kind == SourceKind::DataPort)
      v += std::to_string(inputs[src.index]);
    else
      v += state[src.index];
  }
  if (wrap) v += ')';
  return v;
}

std::string xor_value(const MealyMachine::State& state,
                      std::span<const int> inputs, const SourceSet& srcs,
                      int alphabet_size) {
  long long sum = 0;
  for (const Source& src : srcs) {
    if (src.kind == SourceKind::DataPort) {
      sum += inputs[src.index];
    } else {
      const std::string& sv = state[src.index];
      if (sv == kUninitialized) return kUninitialized;
      sum += std::stoll(sv);
    }
  }
  return std::to_string(sum % alphabet_size);
}

}  // namespace

std::vector<std::string> run(const MealyMachine& m,
                             const std::vector<std::vector<int>>& inputs,
                             const Schedule& s) {
  if (static_cast<TimeStep>(inputs.size()) != s.horizon)
    throw Error("input stream length " + std::to_string(inputs.size()) +
                " does not match schedule horizon " +
                std::to_string(s.horizon));
  std::vector<std::string> outputs;
  outputs.reserve(inputs.size());
  MealyMachine::State state = m.initial;
  for (TimeStep t = 0; t < s.horizon; ++t) {
    const auto& in = inputs[t];
    if (static_cast<int>(in.size()) != m.data_port_count)
      throw Error("input vector at step " + std::to_string(t) +
                  " has wrong width");
    for (int v : in)
      if (v < 0 || v >= m.alphabet_size)
        throw Error("input symbol out of alphabet at step " +
                    std::to_string(t));
    auto [out, next] = m.step(state, in, s, t);
    outputs.push_back(std::move(out));
    state = std::move(next);
  }
  return outputs;
}

MealyMachine instantiate(const Circuit& c, Instantiation mode,
                         int alphabet_size) {
  validate(c);
  if (alphabet_size < 1) throw Error("alphabet must be non-empty");
  MealyMachine m;
  m.data_port_count = static_cast<int>(c.data_ports.size());
  m.alphabet_size = alphabet_size;
  m.initial.assign(c.ffs.size(), kUninitialized);
  m.step = [c, mode, alphabet_size](const MealyMachine::State& state,
                                    std::span<const int> inputs,
                                    const Schedule& s, TimeStep t)
      -> std::pair<std::string, MealyMachine::State> {
    auto value_of = [&](const SourceSet& srcs) {
      return mode == Instantiation::Tupling
                 ? tuple_value(state, inputs, srcs)
                 : xor_value(state, inputs, srcs, alphabet_size);
    };
    const int ff_count = static_cast<int>(c.ffs.size());
    std::string out = value_of(chosen_alternative(c, s, ff_count, t));
    MealyMachine::State next = state;
    for (int i = 0; i < ff_count; ++i)
      if (s.latch[i][t]) next[i] = value_of(chosen_alternative(c, s, i, t));
    return {std::move(out), std::move(next)};
  };
  return m;
}

ReferringForm semantic_influence(const Circuit& c, const Schedule& s,
                                 int alphabet_size, Instantiation mode,
                                 unsigned long long budget) {
  validate_schedule(c, s);
  MealyMachine m = instantiate(c, mode, alphabet_size);
  const TimeStep horizon = s.horizon;
  const int ports = m.data_port_count;
  const unsigned long long streams =
      pow_saturating(alphabet_size,
                     static_cast<unsigned long long>(ports) * horizon);
  if (streams > budget)
    throw BudgetExceeded("perturbation sweep needs " + std::to_string(streams) +
                             " base streams, budget is " +
                             std::to_string(budget),
                         streams);

  std::vector<std::set<InputOccurrence>> past(horizon);
  std::vector<std::set<std::string>> current(horizon);

  std::vector<std::vector<int>> inputs(horizon, std::vector<int>(ports, 0));
  auto decode = [&](unsigned long long code) {
    for (TimeStep t = 0; t < horizon; ++t)
      for (int p = 0; p < ports; ++p) {
        inputs[t][p] = static_cast<int>(code % alphabet_size);
        code /= alphabet_size;
      }
  };

  for (unsigned long long code = 0; code < streams; ++code) {
    decode(code);
    const std::vector<std::string> base = run(m, inputs, s);
    for (TimeStep tau = 0; tau < horizon; ++tau) {
      for (int p = 0; p < ports; ++p) {
        const int original = inputs[tau][p];
        for (int v = 0; v < alphabet_size; ++v) {
          if (v == original) continue;
          inputs[tau][p] = v;
          const std::vector<std::string> perturbed = run(m, inputs, s);
          for (TimeStep t = 0; t < horizon; ++t) {
            if (perturbed[t] == base[t]) continue;
            if (tau > t)
              throw Error("oracle machine is acausal: input at " +
                          std::to_string(tau) + " changed output at " +
                          std::to_string(t));
            if (tau == t)
              current[t].insert(c.data_ports[p].name);
            else
              past[t].insert({c.data_ports[p].name, tau});
          }
        }
        inputs[tau][p] = original;
      }
    }
  }

  ReferringForm form;
  form.horizon = horizon;
  form.past.reserve(horizon);
  form.current.reserve(horizon);
  for (TimeStep t = 0; t < horizon; ++t) {
    form.past.emplace_back(
        std::vector<InputOccurrence>(past[t].begin(), past[t].end()));
    form.current.emplace_back(current[t].begin(), current[t].end());
  }
  return form;
}

bool causality_check(const StreamFunction& fn, int data_port_count,
                     int alphabet_size, TimeStep horizon,
                     unsigned long long budget) {
  if (horizon < 1) throw Error("horizon must be positive");
  if (alphabet_size < 1) throw Error("alphabet must be non-empty");
  const unsigned long long streams = pow_saturating(
      alphabet_size, static_cast<unsigned long long>(data_port_count) * horizon);
  if (streams > budget)
    throw BudgetExceeded("causality check needs " + std::to_string(streams) +
                             " streams, budget is " + std::to_string(budget),
                         streams);
  // Group streams by their prefix: within a prefix class the output at the
  // prefix's last step must be constant.
  std::unordered_map<unsigned long long, std::string> expected;
  std::vector<std::vector<int>> inputs(horizon,
                                       std::vector<int>(data_port_count, 0));
  for (unsigned long long code = 0; code < streams; ++code) {
    unsigned long long rest = code;
    for (TimeStep t = 0; t < horizon; ++t)
      for (int p = 0; p < data_port_count; ++p) {
        inputs[t][p] = static_cast<int>(rest % alphabet_size);
        rest /= alphabet_size;
      }
    const std::vector<std::string> out = fn(inputs);
    if (static_cast<TimeStep>(out.size()) != horizon)
      throw Error("stream function returned wrong output length");
    for (TimeStep t = 0; t < horizon; ++t) {
      const unsigned long long prefix =
          code % pow_saturating(alphabet_size,
                                static_cast<unsigned long long>(
                                    data_port_count) *
                                    (t + 1));
      const unsigned long long key =
          static_cast<unsigned long long>(t) * streams + prefix;
      auto [it, inserted] = expected.emplace(key, out[t]);
      if (!inserted && it->second != out[t]) return false;
    }
  }
  return true;
}

bool causality_check(const MealyMachine& m, const Schedule& s,
                     unsigned long long budget) {
  StreamFunction fn = [&m, &s](const std::vector<std::vector<int>>& inputs) {
    return run(m, inputs, s);
  };
  return causality_check(fn, m.data_port_count, m.alphabet_size, s.horizon,
                         budget);
}

}  // namespace refform

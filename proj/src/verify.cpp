#include "refform/verify.hpp"

#include <atomic>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "refform/dsl.hpp"
#include "refform/influence.hpp"
#include "refform/mealy.hpp"

namespace refform {

namespace {

// Deterministic 64-bit generator (splitmix64); kept local so reports are
// byte-identical across standard libraries.
struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }
};

SourceSet sources_from_mask(int mask) {
  std::vector<Source> sources;
  for (int bit = 0; mask >> bit; ++bit) {
    if (!((mask >> bit) & 1)) continue;
    if (bit == 0)
      sources.push_back({SourceKind::DataPort, 0});
    else
      sources.push_back({SourceKind::FF, bit - 1});
  }
  return make_source_set(std::move(sources));
}

void run_indexed(unsigned int threads, std::size_t count,
                 const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  unsigned int n = std::min<std::size_t>(threads, count);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned int w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string describe_witness(const std::vector<WitnessEdge>& witness) {
  std::ostringstream out;
  out << "cycle:";
  for (const auto& e : witness)
    out << ' ' << to_string(e.from) << "->" << to_string(e.to) << " [form "
        << e.form << ", t " << e.t1 << "<" << e.t2 << "]";
  return out.str();
}

struct CircuitResult {
  bool self_loop = false;
  std::vector<SweepFailure> failures;
};

SweepReport sweep(const std::string& property, int ff_count, TimeStep horizon,
                  const SweepOptions& options) {
  if (horizon < 1) throw Error("horizon must be positive");
  const std::vector<Circuit> circuits =
      enumerate_mcd_circuits(ff_count, options.max_ffs);

  SweepReport report;
  report.property = property;
  report.ff_count = ff_count;
  report.horizon = horizon;
  report.circuits = circuits.size();
  report.closed_form = mcd_circuit_count(ff_count);
  if (ff_count * horizon >= 63)
    throw BudgetExceeded("per-circuit schedule space exceeds budget", ~0ull);
  report.schedules_per_circuit = 1ull << (ff_count * horizon);
  if (report.schedules_per_circuit > options.budget)
    throw BudgetExceeded("per-circuit schedule space exceeds budget",
                         report.schedules_per_circuit);

  const bool monotonicity = property == "reference-monotonicity";
  std::vector<CircuitResult> results(circuits.size());
  run_indexed(options.threads, circuits.size(), [&](std::size_t i) {
    const Circuit& c = circuits[i];
    CircuitResult& r = results[i];
    r.self_loop = has_self_loop(c);
    if (monotonicity) {
      for_each_schedule(
          c, horizon, options.budget,
          [&](unsigned long long, const Schedule& s) {
            ReferringForm form = restriction_map(c, s);
            if (auto v = reference_monotonicity_violation(form)) {
              if (r.failures.size() < 16)  // cap the listing, not the scan
                r.failures.push_back(
                    {static_cast<int>(i), emit(c),
                     "schedule " + schedule_spec(c, s) +
                         ": newest reference not monotone between steps " +
                         std::to_string(v->t1) + " and " +
                         std::to_string(v->t2)});
            }
            return true;
          });
    } else {
      std::vector<ReferringForm> forms =
          all_referring_forms(c, horizon, options.budget);
      TimePreservationVerdict verdict = check_time_preservation(forms);
      if (!verdict.preserving)
        r.failures.push_back({static_cast<int>(i), emit(c),
                              describe_witness(verdict.witness)});
    }
  });

  for (const auto& r : results) {
    report.self_loop_circuits += r.self_loop ? 1 : 0;
    for (const auto& f : r.failures) report.failures.push_back(f);
  }
  report.checked = report.circuits * report.schedules_per_circuit;

  // Oracle spot-check: seeded sample of (circuit, schedule) pairs, exact
  // agreement between the perturbation oracle and the influence analysis.
  Rng rng{options.spot_check_seed};
  for (int k = 0; k < options.spot_check_pairs; ++k) {
    const Circuit& c = circuits[rng.below(circuits.size())];
    ScheduleSpace space(c, horizon);
    Schedule s = space.at(rng.below(space.cardinality()));
    ReferringForm symbolic = restriction_map(c, s);
    ReferringForm semantic = semantic_influence(c, s);
    ++report.spot_pairs;
    if (!(symbolic == semantic)) {
      ++report.spot_mismatches;
      report.failures.push_back(
          {-1, emit(c),
           "oracle mismatch under schedule " + schedule_spec(c, s)});
    }
  }
  return report;
}

}  // namespace

bool in_single_input_class(const Circuit& c) {
  if (c.data_ports.size() != 1) return false;
  for (int i = 0; i < c.selector_count(); ++i)
    if (c.selector(i).selected()) return false;
  return true;
}

unsigned long long mcd_circuit_count(int ff_count) {
  unsigned long long masks = (1ull << (ff_count + 1)) - 1;
  unsigned long long total = 1;
  for (int i = 0; i < ff_count + 1; ++i) total *= masks;
  return total;
}

std::vector<Circuit> enumerate_mcd_circuits(int ff_count, int max_ffs) {
  if (ff_count < 0) throw Error("flip-flop count must be non-negative");
  if (ff_count > max_ffs)
    throw Error("flip-flop count " + std::to_string(ff_count) +
                " exceeds the configured bound " + std::to_string(max_ffs));
  const int mask_limit = 1 << (ff_count + 1);
  std::vector<Circuit> out;
  out.reserve(mcd_circuit_count(ff_count));
  std::vector<int> masks(ff_count + 1, 1);  // ff masks then output mask
  for (;;) {
    Circuit c;
    c.name = "mcd" + std::to_string(ff_count) + "_" +
             std::to_string(out.size());
    c.data_ports.push_back({"I", PortKind::Data});
    for (int i = 0; i < ff_count; ++i) {
      FlipFlop ff;
      ff.name = "F" + std::to_string(i + 1);
      ff.clock = Free{};
      ff.data_input.alternatives.push_back(sources_from_mask(masks[i]));
      c.ffs.push_back(std::move(ff));
    }
    c.output.alternatives.push_back(sources_from_mask(masks[ff_count]));
    validate(c);
    out.push_back(std::move(c));

    int pos = ff_count;  // output mask varies fastest
    while (pos >= 0) {
      if (++masks[pos] < mask_limit) break;
      masks[pos] = 1;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

SweepReport sweep_time_preservation(int ff_count, TimeStep horizon,
                                    const SweepOptions& options) {
  return sweep("time-preservation", ff_count, horizon, options);
}

SweepReport sweep_reference_monotonicity(int ff_count, TimeStep horizon,
                                         const SweepOptions& options) {
  return sweep("reference-monotonicity", ff_count, horizon, options);
}

std::string SweepReport::text() const {
  std::ostringstream out;
  const char* noun =
      property == "time-preservation" ? "failures" : "violations";
  out << "checked " << circuits << " circuits \xc3\x97 "
      << schedules_per_circuit << " schedules: " << failures.size() << ' '
      << noun << '\n';
  out << "property: " << property << "  (ffs " << ff_count << ", horizon "
      << horizon << ")\n";
  out << "pairs checked: " << checked << " (closed form "
      << closed_form * schedules_per_circuit << ")\n";
  out << "self-loop circuits included: " << self_loop_circuits << '\n';
  if (spot_pairs > 0)
    out << "oracle spot-check: " << spot_pairs << " pairs, "
        << spot_mismatches << " mismatches\n";
  for (const auto& f : failures) {
    out << "FAILURE circuit " << f.circuit_index << ": " << f.detail << '\n';
    out << f.circuit;
  }
  return out.str();
}

nlohmann::ordered_json SweepReport::json() const {
  nlohmann::ordered_json j;
  j["checked"] = checked;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& f : failures) {
    nlohmann::ordered_json entry;
    entry["circuit_index"] = f.circuit_index;
    entry["circuit"] = f.circuit;
    entry["detail"] = f.detail;
    arr.push_back(std::move(entry));
  }
  j["failures"] = std::move(arr);
  j["property"] = property;
  j["ff_count"] = ff_count;
  j["horizon"] = horizon;
  j["circuits"] = circuits;
  j["schedules_per_circuit"] = schedules_per_circuit;
  j["self_loop_circuits"] = self_loop_circuits;
  j["oracle_spot_check"] = {{"pairs", spot_pairs},
                            {"mismatches", spot_mismatches}};
  return j;
}

Circuit selective_memory_circuit() {
  Circuit c;
  c.name = "selmem";
  c.data_ports = {{"I1", PortKind::Data}, {"I2", PortKind::Data}};
  c.control_ports = {{"sel", PortKind::Control}};
  FlipFlop m1;
  m1.name = "M1";
  m1.clock = Free{};
  m1.data_input.alternatives.push_back({{SourceKind::DataPort, 0}});
  FlipFlop m2;
  m2.name = "M2";
  m2.clock = Free{};
  m2.data_input.alternatives.push_back({{SourceKind::DataPort, 1}});
  c.ffs = {std::move(m1), std::move(m2)};
  c.output.control = 0;
  c.output.alternatives.push_back({{SourceKind::FF, 0}});
  c.output.alternatives.push_back({{SourceKind::FF, 1}});
  validate(c);
  return c;
}

std::optional<SelectiveConflict> find_selective_conflict(
    TimeStep horizon, unsigned long long budget) {
  if (horizon < 1) throw Error("horizon must be positive");
  const Circuit c = selective_memory_circuit();
  // The step pattern needs n + 7 < horizon to fit at all.
  if (horizon < 8) return std::nullopt;

  struct Entry {
    ReferringForm form;
    Schedule schedule;
  };
  // key (n, value at n, value at n+3) -> forms seen in the "earlier" role;
  // key (n, value at n+3, value at n+7) -> forms seen in the "later" role.
  std::map<std::tuple<TimeStep, RefSet, RefSet>, std::vector<Entry>> early,
      late;
  std::optional<SelectiveConflict> found;

  auto remember = [](std::vector<Entry>& list, const ReferringForm& form,
                     const Schedule& s) {
    if (list.size() >= 2) return;
    for (const Entry& e : list)
      if (e.form == form) return;
    list.push_back({form, s});
  };

  for_each_schedule(
      c, horizon, budget,
      [&](unsigned long long, const Schedule& s) {
        ReferringForm form = restriction_map(c, s);
        for (TimeStep n = 0; n + 7 < horizon; ++n) {
          const RefSet& at_n = form.past[n];
          const RefSet& at_n3 = form.past[n + 3];
          const RefSet& at_n7 = form.past[n + 7];
          if (!(at_n == at_n3)) {
            // This form can play the earlier role: look for a partner whose
            // step n+3 and n+7 values mirror ours.
            auto it = late.find({n, at_n3, at_n});
            if (it != late.end()) {
              for (const Entry& e : it->second) {
                if (e.form == form) continue;
                found = SelectiveConflict{s, e.schedule, form, e.form, n};
                return false;
              }
            }
            remember(early[{n, at_n, at_n3}], form, s);
          }
          if (!(at_n3 == at_n7)) {
            auto it = early.find({n, at_n7, at_n3});
            if (it != early.end()) {
              for (const Entry& e : it->second) {
                if (e.form == form) continue;
                found = SelectiveConflict{e.schedule, s, e.form, form, n};
                return false;
              }
            }
            remember(late[{n, at_n3, at_n7}], form, s);
          }
        }
        return true;
      });
  return found;
}

}  // namespace refform

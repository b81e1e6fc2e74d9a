#include "refform/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "refform/dsl.hpp"
#include "refform/influence.hpp"
#include "refform/mealy.hpp"
#include "refform/model.hpp"
#include "refform/order.hpp"
#include "refform/render.hpp"
#include "refform/verify.hpp"

namespace refform {

namespace {

struct Budgets {
  unsigned long long schedules = kDefaultScheduleBudget;
  unsigned long long streams = kDefaultStreamBudget;
};

Budgets budgets_from_env() {
  Budgets b;
  if (const char* env = std::getenv("REFFORM_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
      throw Error("REFFORM_BUDGET must be a positive integer");
    b.schedules = v;
    b.streams = v;
  }
  return b;
}

Circuit load_circuit(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  ParseResult result = parse(buffer.str());
  if (!result.ok())
    throw Error(format_diagnostics(result.diagnostics, path));
  return *result.circuit;
}

Schedule resolve_schedule(const Circuit& c, TimeStep horizon,
                          const std::string& spec) {
  if (!spec.empty()) return schedule_from_spec(c, horizon, spec);
  for (const auto& ff : c.ffs)
    if (is_free(ff.clock))
      throw Error("flip-flop " + ff.name +
                  " has a free clock; pass --schedule or --all-schedules");
  for (int i = 0; i < c.selector_count(); ++i)
    if (c.selector(i).selected())
      throw Error(
          "circuit has a selected connection; pass --schedule or "
          "--all-schedules");
  return schedule_from_clocks(c, horizon);
}

void print_form_rows(std::ostream& out, const ReferringForm& form) {
  out << "   t | past | current\n";
  for (TimeStep t = 0; t < form.horizon; ++t) {
    out << std::setw(4) << t << " | " << to_string(form.past[t]) << " | {";
    bool first = true;
    for (const auto& p : form.current[t]) {
      if (!first) out << ',';
      first = false;
      out << p;
    }
    out << "}\n";
  }
}

int do_analyze(std::ostream& out, const std::string& file, TimeStep horizon,
               const std::string& schedule, bool all_schedules,
               const std::string& format, const Budgets& budgets) {
  Circuit c = load_circuit(file);
  if (all_schedules) {
    std::vector<ReferringForm> forms =
        all_referring_forms(c, horizon, budgets.schedules);
    if (format == "json") {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& f : forms) arr.push_back(to_json(f));
      out << arr.dump(2) << '\n';
    } else {
      out << "circuit " << c.name << "  horizon " << horizon << "  forms "
          << forms.size() << '\n';
      for (std::size_t i = 0; i < forms.size(); ++i) {
        out << "form " << i << ":\n";
        print_form_rows(out, forms[i]);
      }
    }
    return kExitOk;
  }
  Schedule s = resolve_schedule(c, horizon, schedule);
  ReferringForm form = restriction_map(c, s);
  if (format == "json") {
    out << to_json(form).dump(2) << '\n';
  } else {
    out << "circuit " << c.name << "  horizon " << horizon << '\n';
    print_form_rows(out, form);
  }
  return kExitOk;
}

void print_verdict_text(std::ostream& out, const Circuit& c,
                        const TimePreservationVerdict& v,
                        const std::function<std::string(int)>& origin_of) {
  if (v.preserving) {
    out << "time-preserving (image: " << v.order->nodes.size()
        << " values)\n";
    out << (in_single_input_class(c)
                ? "class: single-input multi-clock (preservation guaranteed)\n"
                : "class: general (no structural guarantee)\n");
    return;
  }
  out << "NOT time-preserving\n";
  out << "cycle through " << v.witness.size() << " distinct values:\n";
  for (const auto& e : v.witness)
    out << "  " << to_string(e.from) << " -> " << to_string(e.to) << "  [form "
        << e.form << ", t1=" << e.t1 << ", t2=" << e.t2 << "]\n";
  std::set<int> ids;
  for (const auto& e : v.witness) ids.insert(e.form);
  out << "forms:\n";
  for (int id : ids) out << "  form " << id << ": schedule " << origin_of(id)
                         << '\n';
}

nlohmann::ordered_json verdict_json(
    const TimePreservationVerdict& v,
    const std::function<std::string(int)>& origin_of,
    const std::function<const ReferringForm&(int)>& form_of) {
  nlohmann::ordered_json j = to_json(v);
  if (!v.preserving) {
    std::set<int> ids;
    for (const auto& e : v.witness) ids.insert(e.form);
    nlohmann::ordered_json forms = nlohmann::ordered_json::object();
    for (int id : ids) {
      nlohmann::ordered_json entry;
      entry["schedule"] = origin_of(id);
      entry["form"] = to_json(form_of(id));
      forms[std::to_string(id)] = std::move(entry);
    }
    j["witness_forms"] = std::move(forms);
  }
  return j;
}

int do_check(std::ostream& out, const std::string& file, TimeStep horizon,
             const std::string& schedule, bool all_schedules,
             const std::string& format, const Budgets& budgets) {
  Circuit c = load_circuit(file);
  if (!all_schedules) {
    Schedule s = resolve_schedule(c, horizon, schedule);
    std::vector<ReferringForm> forms{restriction_map(c, s)};
    TimePreservationVerdict v = check_time_preservation(forms);
    auto origin = [&](int) { return schedule_spec(c, s); };
    auto form_of = [&forms](int id) -> const ReferringForm& {
      return forms[id];
    };
    if (format == "json")
      out << verdict_json(v, origin, form_of).dump(2) << '\n';
    else
      print_verdict_text(out, c, v, origin);
    return v.preserving ? kExitOk : kExitNotPreserving;
  }

  // Stream the schedule space: a cycle in a prefix already refutes
  // preservation, so the budget only caps how far we search for a verdict,
  // and the scan stops as soon as a two-form witness is available.
  ScheduleSpace space(c, horizon);
  StreamingOrderChecker checker;
  bool complete = false;
  if (!space.saturated()) {
    complete = true;
    for (unsigned long long code = 0; code < space.cardinality(); ++code) {
      if (code >= budgets.schedules) {
        complete = false;
        break;
      }
      Schedule s = space.at(code);
      if (checker.add(restriction_map(c, s), schedule_spec(c, s))) {
        complete = false;
        break;
      }
    }
  }
  std::optional<TimePreservationVerdict> verdict = checker.verdict(complete);
  if (!verdict)
    throw BudgetExceeded(
        "schedule space has " + std::to_string(space.cardinality()) +
            " schedules, budget is " + std::to_string(budgets.schedules) +
            "; no verdict after " + std::to_string(checker.forms_seen()) +
            " schedules",
        space.cardinality());
  auto origin = [&checker](int id) { return checker.registered(id).origin; };
  auto form_of = [&checker](int id) -> const ReferringForm& {
    return checker.registered(id).form;
  };
  if (format == "json")
    out << verdict_json(*verdict, origin, form_of).dump(2) << '\n';
  else
    print_verdict_text(out, c, *verdict, origin);
  return verdict->preserving ? kExitOk : kExitNotPreserving;
}

int do_verify(std::ostream& out, int ffs, TimeStep horizon, bool theorem,
              bool lemma, const std::string& format, const SweepOptions& opts) {
  if (!theorem && !lemma) theorem = lemma = true;
  std::vector<SweepReport> reports;
  if (theorem) reports.push_back(sweep_time_preservation(ffs, horizon, opts));
  if (lemma)
    reports.push_back(sweep_reference_monotonicity(ffs, horizon, opts));
  bool failed = false;
  if (format == "json") {
    if (reports.size() == 1) {
      out << reports[0].json().dump(2) << '\n';
    } else {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : reports) arr.push_back(r.json());
      out << arr.dump(2) << '\n';
    }
  } else {
    for (const auto& r : reports) out << r.text();
  }
  for (const auto& r : reports)
    if (!r.failures.empty()) failed = true;
  return failed ? kExitNotPreserving : kExitOk;
}

int do_oracle_diff(std::ostream& out, const std::string& file,
                   TimeStep horizon, const std::string& schedule,
                   int alphabet, const Budgets& budgets) {
  Circuit c = load_circuit(file);
  Schedule s = resolve_schedule(c, horizon, schedule);
  ReferringForm symbolic = restriction_map(c, s);
  ReferringForm semantic = semantic_influence(
      c, s, alphabet, Instantiation::Tupling, budgets.streams);
  if (symbolic == semantic) {
    out << "no differences\n";
    return kExitOk;
  }
  for (TimeStep t = 0; t < horizon; ++t) {
    if (symbolic.past[t] == semantic.past[t] &&
        symbolic.current[t] == semantic.current[t])
      continue;
    out << "step " << t << ": analysis past " << to_string(symbolic.past[t])
        << ", oracle past " << to_string(semantic.past[t]);
    auto join = [](const std::vector<std::string>& v) {
      std::string s = "{";
      for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + v[i];
      return s + "}";
    };
    out << "; analysis current " << join(symbolic.current[t])
        << ", oracle current " << join(semantic.current[t]) << '\n';
  }
  return kExitOracleMismatch;
}

int do_render(std::ostream& out, const std::string& file, TimeStep horizon,
              const std::string& schedule, const std::string& format) {
  Circuit c = load_circuit(file);
  Schedule s = resolve_schedule(c, horizon, schedule);
  out << (format == "dot" ? render_dot(c, s) : render_timeline(c, s));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"referring-form analysis for sequential circuits"};
  app.name("refform");
  app.require_subcommand(1);

  std::string file, schedule, format;
  TimeStep horizon = 0;
  bool all_schedules = false;

  auto* analyze = app.add_subcommand(
      "analyze", "print the referring form of a circuit");
  analyze->add_option("file", file, "circuit file (.rfc)")->required();
  analyze->add_option("--horizon", horizon, "number of steps")->required();
  analyze->add_option("--schedule", schedule,
                      "latch bits / selector digits, e.g. \"F=1000;sel=0110\"");
  analyze->add_flag("--all-schedules", all_schedules,
                    "enumerate every admissible schedule");
  analyze->add_option("--format", format, "table|json")
      ->default_val("table")
      ->check(CLI::IsMember({"table", "json"}));

  auto* check = app.add_subcommand(
      "check", "decide time preservation of the referring forms");
  check->add_option("file", file, "circuit file (.rfc)")->required();
  check->add_option("--horizon", horizon, "number of steps")->required();
  check->add_option("--schedule", schedule, "single schedule to check");
  check->add_flag("--all-schedules", all_schedules,
                  "check over every admissible schedule");
  check->add_option("--format", format, "text|json")
      ->default_val("text")
      ->check(CLI::IsMember({"text", "json"}));

  int ffs = 1;
  bool theorem = false, lemma = false;
  SweepOptions sweep_opts;
  auto* verify = app.add_subcommand(
      "verify", "sweep all small single-input circuits with free clocks");
  verify->add_option("--ffs", ffs, "flip-flop count")->required();
  verify->add_option("--horizon", horizon, "number of steps")->required();
  verify->add_flag("--theorem", theorem,
                   "check time preservation of every circuit's form set");
  verify->add_flag("--lemma", lemma,
                   "check newest-reference monotonicity of every form");
  verify->add_option("--format", format, "text|json")
      ->default_val("text")
      ->check(CLI::IsMember({"text", "json"}));
  verify->add_option("--max-ffs", sweep_opts.max_ffs,
                     "raise the flip-flop count bound");
  verify->add_option("--seed", sweep_opts.spot_check_seed,
                     "seed for the oracle spot-check sample");
  verify->add_option("--spot-pairs", sweep_opts.spot_check_pairs,
                     "oracle spot-check sample size");
  verify->add_option("--threads", sweep_opts.threads,
                     "worker threads (0 = hardware)");

  int alphabet = 2;
  auto* oracle = app.add_subcommand(
      "oracle-diff",
      "compare the influence analysis against the simulation oracle");
  oracle->add_option("file", file, "circuit file (.rfc)")->required();
  oracle->add_option("--horizon", horizon, "number of steps")->required();
  oracle->add_option("--schedule", schedule, "schedule to compare under");
  oracle->add_option("--alphabet", alphabet, "alphabet size per data port")
      ->default_val(2);

  auto* render = app.add_subcommand(
      "render", "emit the time-unrolled graph for one schedule");
  render->add_option("file", file, "circuit file (.rfc)")->required();
  render->add_option("--horizon", horizon, "number of steps")->required();
  render->add_option("--schedule", schedule, "schedule to render");
  render->add_option("--format", format, "ascii|dot")
      ->default_val("ascii")
      ->check(CLI::IsMember({"ascii", "dot"}));

  std::vector<const char*> argv;
  argv.push_back("refform");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (horizon < 1) throw Error("horizon must be positive");
    Budgets budgets = budgets_from_env();
    sweep_opts.budget = budgets.schedules;
    if (*analyze)
      return do_analyze(out, file, horizon, schedule, all_schedules, format,
                        budgets);
    if (*check)
      return do_check(out, file, horizon, schedule, all_schedules, format,
                      budgets);
    if (*verify)
      return do_verify(out, ffs, horizon, theorem, lemma, format, sweep_opts);
    if (*oracle)
      return do_oracle_diff(out, file, horizon, schedule, alphabet, budgets);
    if (*render) return do_render(out, file, horizon, schedule, format);
    err << "error: no command\n";
    return kExitInputError;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace refform

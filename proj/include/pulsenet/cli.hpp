#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pulsenet/analysis.hpp"
#include "pulsenet/config.hpp"
#include "pulsenet/engine.hpp"
#include "pulsenet/errors.hpp"
#include "pulsenet/network.hpp"
#include "pulsenet/random.hpp"
#include "pulsenet/trace_io.hpp"

namespace pulsenet {

enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,
  kExitUsage = 2,
  kExitNumeric = 3,
};

enum class Command { Simulate, Verify, Sweep };

struct RunSpec {
  Command command = Command::Simulate;
  std::filesystem::path config_path;
  std::optional<double> max_time;
  std::optional<std::size_t> max_events;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::optional<double> sample;
  std::filesystem::path out_dir = ".";
  // verify / sweep
  std::size_t min_recurrences = 10;
  // verify: check an existing events.csv instead of simulating
  std::optional<std::filesystem::path> events_path;

  StopCondition stop() const { return {max_time, max_events}; }
};

inline void validate(const RunSpec &spec) {
  if (spec.max_time.has_value() == spec.max_events.has_value() &&
      !(spec.command == Command::Verify && spec.events_path))
    throw ConfigError("exactly one of --max-time and --max-events is required");
  if (spec.max_time && !(*spec.max_time > 0.0))
    throw ConfigError("--max-time must be positive");
  if (spec.max_events && *spec.max_events == 0)
    throw ConfigError("--max-events must be positive");
  if (spec.trials == 0)
    throw ConfigError("--trials must be at least 1");
  if (spec.sample && !(*spec.sample > 0.0))
    throw ConfigError("--sample must be positive");
  if (spec.min_recurrences == 0)
    throw ConfigError("--min-recurrences must be at least 1");
}

inline std::filesystem::path trial_dir(const RunSpec &spec, std::size_t trial) {
  char name[32];
  std::snprintf(name, sizeof name, "trial_%04zu", trial);
  return spec.out_dir / name;
}

inline void print_histogram(std::ostream &out,
                            const std::map<std::size_t, std::size_t> &hist) {
  out << "coalition size histogram:\n";
  for (const auto &[size, count] : hist)
    out << "  " << size << ": " << count << '\n';
}

// One trace per trial; trial k draws its random initial states from
// trial_seed(seed, k). Writes <out>/trial_NNNN/events.csv (and samples.csv).
inline int cmd_simulate(const RunSpec &spec, std::ostream &out) {
  validate(spec);
  const ConfigDocument doc = read_config_file(spec.config_path);
  std::map<std::size_t, std::size_t> hist;
  bool numeric_failure = false;
  for (std::size_t k = 0; k < spec.trials; ++k) {
    const NetworkConfig cfg = instantiate(doc, trial_seed(spec.seed, k));
    const Trace trace = run(cfg, spec.stop(), spec.sample);
    const auto dir = trial_dir(spec, k);
    write_events_csv(dir / "events.csv", trace);
    if (spec.sample)
      write_samples_csv(dir / "samples.csv", trace);
    for (const auto &[size, count] : coalition_histogram(trace))
      hist[size] += count;
    out << "trial " << k << ": " << trace.events.size() << " events, "
        << grand_coalition_count(trace) << " grand coalitions";
    if (const auto first = first_grand_coalition(trace))
      out << ", first at t=" << format_double(*first);
    out << '\n';
    if (trace.error) {
      out << "trial " << k << ": numeric failure: " << *trace.error << '\n';
      numeric_failure = true;
    }
  }
  print_histogram(out, hist);
  return numeric_failure ? kExitNumeric : kExitOk;
}

inline const char *report_header() {
  return "trial,seed,m,is_complete,is_cooperative,is_large,is_weak,is_similar,"
         "similarity_estimated,r_value,similarity_lhs,similarity_rhs,"
         "waiting_bound,first_grand_coalition,grand_coalitions,events,"
         "post_gc_pure,theorem1,waiting_time,theorem2,assertion_a,assertion_b,"
         "runtime_b_agrees,notes";
}

inline void write_report_row(std::ostream &os, std::size_t trial,
                             std::uint64_t seed, const PredicateValues &p,
                             const TraceResult &r) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string notes;
  for (const Verdict *v : {&r.theorem1, &r.waiting_time, &r.theorem2,
                           &r.assertion_a, &r.assertion_b}) {
    if (v->reason.empty())
      continue;
    if (!notes.empty())
      notes += " | ";
    notes += v->reason;
  }
  if (r.error)
    notes += (notes.empty() ? "" : " | ") + ("numeric failure: " + *r.error);
  std::replace(notes.begin(), notes.end(), ',', ';');
  std::replace(notes.begin(), notes.end(), '"', '\'');
  os << trial << ',' << seed << ',' << p.m << ',' << b(p.is_complete) << ','
     << b(p.is_cooperative) << ',' << b(p.is_large) << ',' << b(p.is_weak) << ','
     << b(p.is_similar) << ',' << b(p.similarity_estimated) << ','
     << (p.r_value ? std::to_string(*p.r_value) : "") << ','
     << format_double(p.similarity_lhs) << ',' << format_double(p.similarity_rhs)
     << ',' << format_double(p.waiting_bound) << ','
     << (r.first_grand_coalition ? format_double(*r.first_grand_coalition) : "")
     << ',' << r.grand_coalitions << ',' << r.events << ',' << b(r.post_gc_pure)
     << ',' << to_string(r.theorem1.outcome) << ','
     << to_string(r.waiting_time.outcome) << ','
     << to_string(r.theorem2.outcome) << ','
     << to_string(r.assertion_a.outcome) << ','
     << to_string(r.assertion_b.outcome) << ',' << b(r.runtime_b_agrees) << ",\""
     << notes << "\"\n";
}

struct VerifyTally {
  std::map<std::string, std::map<Outcome, std::size_t>> by_check;
  std::size_t violations = 0;
  bool numeric_failure = false;

  void add(const TraceResult &r) {
    by_check["theorem1"][r.theorem1.outcome]++;
    by_check["waiting_time"][r.waiting_time.outcome]++;
    by_check["theorem2"][r.theorem2.outcome]++;
    by_check["assertion_a"][r.assertion_a.outcome]++;
    by_check["assertion_b"][r.assertion_b.outcome]++;
    violations += r.violations();
    numeric_failure |= r.error.has_value();
  }
};

inline void print_predicates(std::ostream &out, const PredicateValues &p) {
  auto b = [](bool v) { return v ? "yes" : "no"; };
  out << "m = " << p.m << '\n'
      << "complete: " << b(p.is_complete) << ", cooperative: "
      << b(p.is_cooperative) << ", large: " << b(p.is_large)
      << ", weak: " << b(p.is_weak) << '\n'
      << "r = " << (p.r_value ? std::to_string(*p.r_value) : "n/a") << '\n'
      << "similarity: " << format_double(p.similarity_lhs)
      << (p.is_similar ? " >= " : " < ") << format_double(p.similarity_rhs)
      << (p.similarity_estimated ? " (estimated)" : "") << '\n'
      << "waiting-time bound: " << format_double(p.waiting_bound) << '\n';
}

// Runs the trials (or reads --events), verifies every trace and writes
// <out>/report.csv. Exit 1 on any VIOLATED verdict.
inline int cmd_verify(const RunSpec &spec, std::ostream &out) {
  validate(spec);
  const ConfigDocument doc = read_config_file(spec.config_path);
  const VerifyOptions opt{spec.min_recurrences, 1e-9};
  std::filesystem::create_directories(spec.out_dir);
  auto os = detail::open_output(spec.out_dir / "report.csv");
  os << report_header() << '\n';

  VerifyTally tally;
  std::optional<PredicateValues> preds;
  const std::size_t trials = spec.events_path ? 1 : spec.trials;
  for (std::size_t k = 0; k < trials; ++k) {
    const std::uint64_t seed = trial_seed(spec.seed, k);
    const NetworkConfig cfg = instantiate(doc, seed);
    Trace trace;
    if (spec.events_path) {
      trace = read_events_csv(*spec.events_path, cfg.size());
      if (spec.max_time)
        trace.t_end = std::max(trace.t_end, *spec.max_time);
    } else {
      trace = run(cfg, spec.stop());
    }
    if (!preds)
      preds = predicates(cfg);
    const TraceResult r = verify_trace(cfg, trace, opt);
    write_report_row(os, k, seed, *preds, r);
    tally.add(r);
  }

  print_predicates(out, *preds);
  for (const auto &[check, counts] : tally.by_check) {
    out << check << ':';
    for (const auto &[outcome, n] : counts)
      out << ' ' << to_string(outcome) << '=' << n;
    out << '\n';
  }
  out << "violations: " << tally.violations << '\n';
  if (tally.violations > 0)
    return kExitViolation;
  return tally.numeric_failure ? kExitNumeric : kExitOk;
}

// A sweep cell network: m copies of the base model with goal theta, the
// velocity of unit i scaled by 1 - spread * i / (m - 1), uniform weight delta.
inline NetworkConfig sweep_cell_network(const Model &base, std::size_t m,
                                        double delta, double theta,
                                        double spread, std::uint64_t seed) {
  std::vector<Model> units;
  units.reserve(m);
  const Model at_theta = base.with_theta(theta);
  for (std::size_t i = 0; i < m; ++i) {
    const double factor =
        m > 1 ? 1.0 - spread * static_cast<double>(i) / static_cast<double>(m - 1)
              : 1.0;
    units.push_back(factor == 1.0 ? at_theta : at_theta.time_scaled(factor));
  }
  Rng rng(seed);
  auto states = random_initial_states(units, rng);
  return NetworkConfig(std::move(units), WeightMatrix::uniform(m, delta),
                       std::move(states));
}

// Grid over the sweep axes of the config; per cell, predicates plus waiting
// time statistics over `trials` random starts. Writes <out>/sweep.csv.
inline int cmd_sweep(const RunSpec &spec, std::ostream &out) {
  validate(spec);
  const ConfigDocument doc = read_config_file(spec.config_path);
  if (!doc.sweep)
    throw ConfigError("sweep: config has no 'sweep' section");
  SweepAxes axes = *doc.sweep;
  const Model &base = doc.units.front();
  if (axes.m.empty())
    axes.m = {doc.units.size()};
  if (axes.theta.empty())
    axes.theta = {base.theta()};
  if (axes.spread.empty())
    axes.spread = {0.0};
  if (axes.delta.empty()) {
    if (!doc.uniform_weight)
      throw ConfigError("sweep: no 'delta' axis and the weights are not uniform");
    axes.delta = {*doc.uniform_weight};
  }

  auto os = detail::open_output(spec.out_dir / "sweep.csv");
  os << "m,delta,theta,spread,is_complete,is_large,is_similar,r_value,"
        "similarity_lhs,waiting_bound,trials,trials_with_gc,mean_waiting_time,"
        "max_waiting_time,pure_fraction,violations\n";
  const VerifyOptions opt{spec.min_recurrences, 1e-9};
  std::size_t cell = 0, total_violations = 0;
  bool numeric_failure = false;
  for (std::size_t m : axes.m)
    for (double delta : axes.delta)
      for (double theta : axes.theta)
        for (double spread : axes.spread) {
          const std::uint64_t cell_seed = trial_seed(spec.seed, cell++);
          std::optional<PredicateValues> p;
          std::size_t with_gc = 0, pure = 0, violations = 0;
          double sum_wait = 0.0, max_wait = 0.0;
          for (std::size_t k = 0; k < spec.trials; ++k) {
            NetworkConfig cfg = [&] {
              try {
                return sweep_cell_network(base, m, delta, theta, spread,
                                          trial_seed(cell_seed, k));
              } catch (const std::invalid_argument &e) {
                throw ConfigError(std::string("sweep cell: ") + e.what());
              }
            }();
            if (!p)
              p = predicates(cfg);
            const Trace trace = run(cfg, spec.stop());
            const TraceResult r = verify_trace(cfg, trace, opt);
            numeric_failure |= r.error.has_value();
            violations += r.violations();
            if (r.first_grand_coalition) {
              ++with_gc;
              sum_wait += *r.first_grand_coalition;
              max_wait = std::max(max_wait, *r.first_grand_coalition);
              pure += r.post_gc_pure;
            }
          }
          total_violations += violations;
          auto b = [](bool v) { return v ? "true" : "false"; };
          os << m << ',' << format_double(delta) << ',' << format_double(theta)
             << ',' << format_double(spread) << ',' << b(p->is_complete) << ','
             << b(p->is_large) << ',' << b(p->is_similar) << ','
             << (p->r_value ? std::to_string(*p->r_value) : "") << ','
             << format_double(p->similarity_lhs) << ','
             << format_double(p->waiting_bound) << ',' << spec.trials << ','
             << with_gc << ','
             << (with_gc ? format_double(sum_wait / static_cast<double>(with_gc)) : "")
             << ',' << (with_gc ? format_double(max_wait) : "") << ','
             << (with_gc ? format_double(static_cast<double>(pure) /
                                         static_cast<double>(with_gc))
                         : "")
             << ',' << violations << '\n';
          out << "m=" << m << " delta=" << format_double(delta)
              << " theta=" << format_double(theta)
              << " spread=" << format_double(spread)
              << " large=" << b(p->is_large) << " gc=" << with_gc << '/'
              << spec.trials << " violations=" << violations << '\n';
        }
  if (total_violations > 0)
    return kExitViolation;
  return numeric_failure ? kExitNumeric : kExitOk;
}

// Runs a command and maps errors onto exit codes.
inline int dispatch(const RunSpec &spec, std::ostream &out, std::ostream &err) {
  try {
    switch (spec.command) {
    case Command::Simulate:
      return cmd_simulate(spec, out);
    case Command::Verify:
      return cmd_verify(spec, out);
    case Command::Sweep:
      return cmd_sweep(spec, out);
    }
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const StepTooCoarse &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericFailure &e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ModelContractViolation &e) {
    err << "model contract violation: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

} // namespace pulsenet

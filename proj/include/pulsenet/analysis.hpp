#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulsenet/engine.hpp"
#include "pulsenet/network.hpp"

namespace pulsenet {

enum class Outcome { Confirmed, Vacuous, Violated };

inline const char *to_string(Outcome o) {
  switch (o) {
  case Outcome::Confirmed:
    return "CONFIRMED";
  case Outcome::Vacuous:
    return "VACUOUS";
  case Outcome::Violated:
    return "VIOLATED";
  }
  return "UNKNOWN";
}

// VIOLATED is only emitted when every hypothesis holds and the trace
// contradicts the conclusion. VACUOUS covers unmet hypotheses and traces too
// short to decide; `reason` says which.
struct Verdict {
  Outcome outcome = Outcome::Vacuous;
  std::string reason;

  static Verdict confirmed() { return {Outcome::Confirmed, {}}; }
  static Verdict vacuous(std::string why) { return {Outcome::Vacuous, std::move(why)}; }
  static Verdict violated(std::string why) { return {Outcome::Violated, std::move(why)}; }
};

struct VerifyOptions {
  // Grand coalitions a trace must show to confirm recurrence.
  std::size_t min_recurrences = 10;
  // Slack on the waiting-time bound.
  double waiting_tolerance = 1e-9;
};

// Earliest event whose coalition holds all units.
inline std::optional<double> first_grand_coalition(const Trace &trace) {
  for (const auto &ev : trace.events)
    if (ev.is_grand(trace.units))
      return ev.t;
  return std::nullopt;
}

inline std::size_t grand_coalition_count(const Trace &trace) {
  return static_cast<std::size_t>(
      std::count_if(trace.events.begin(), trace.events.end(),
                    [&](const SpikeEvent &ev) { return ev.is_grand(trace.units); }));
}

inline std::map<std::size_t, std::size_t> coalition_histogram(const Trace &trace) {
  std::map<std::size_t, std::size_t> out;
  for (const auto &ev : trace.events)
    ++out[ev.coalition.size()];
  return out;
}

// True when every event from the first grand coalition on is grand. Also
// true when there is no grand coalition.
inline bool post_first_gc_pure(const Trace &trace) {
  bool seen = false;
  for (const auto &ev : trace.events) {
    seen |= ev.is_grand(trace.units);
    if (seen && !ev.is_grand(trace.units))
      return false;
  }
  return true;
}

struct PredicateValues {
  std::size_t m = 0;
  bool is_complete = false;
  bool is_cooperative = false;
  bool is_large = false;
  bool is_weak = false;
  bool is_similar = false;
  bool similarity_estimated = false;
  std::optional<std::size_t> r_value;
  double similarity_lhs = 0.0;
  double similarity_rhs = 0.0;
  double waiting_bound = 0.0;
};

inline PredicateValues predicates(const NetworkConfig &cfg) {
  PredicateValues p;
  p.m = cfg.size();
  p.is_complete = is_complete(cfg.weights());
  p.is_cooperative = is_cooperative(cfg);
  p.is_large = p.is_cooperative && is_large(cfg);
  p.is_weak = is_weak(cfg);
  p.similarity_lhs = similarity_lhs(cfg);
  p.similarity_rhs = similarity_rhs(cfg);
  p.is_similar = is_similar(cfg);
  p.similarity_estimated = similarity_estimated(cfg);
  p.waiting_bound = waiting_bound(cfg);
  const auto min_w = min_off_diagonal(cfg.weights());
  if (p.is_cooperative && min_w && *min_w > 0.0)
    p.r_value = r_value(cfg);
  return p;
}

namespace detail {

inline std::optional<std::string> unmet_large_cooperative(const NetworkConfig &cfg) {
  if (cfg.size() < 2)
    return "hypotheses unmet: fewer than two units";
  if (!is_cooperative(cfg))
    return "hypotheses unmet: network is not cooperative";
  if (!is_large(cfg))
    return "hypotheses unmet: network is not large";
  return std::nullopt;
}

} // namespace detail

// Recurrence of the grand coalition, operationalized as at least
// `min_recurrences` grand coalitions in a window of at least
// min_recurrences * waiting_bound.
inline Verdict verify_theorem1(const NetworkConfig &cfg, const Trace &trace,
                               std::size_t min_recurrences = 10) {
  if (auto why = detail::unmet_large_cooperative(cfg))
    return Verdict::vacuous(*why);
  const double needed = static_cast<double>(min_recurrences) * waiting_bound(cfg);
  const std::size_t count = grand_coalition_count(trace);
  if (count >= min_recurrences)
    return Verdict::confirmed();
  if (trace.t_end < needed)
    return Verdict::vacuous("inconclusive-horizon: window " +
                            std::to_string(trace.t_end) + " < " +
                            std::to_string(needed));
  return Verdict::violated(std::to_string(count) + " grand coalitions in [0, " +
                           std::to_string(trace.t_end) + "], expected at least " +
                           std::to_string(min_recurrences));
}

// First grand coalition no later than max_i theta_i / v_min_i.
inline Verdict verify_waiting_bound(const NetworkConfig &cfg, const Trace &trace,
                                    double tol = 1e-9) {
  if (auto why = detail::unmet_large_cooperative(cfg))
    return Verdict::vacuous(*why);
  const double bound = waiting_bound(cfg);
  const auto first = first_grand_coalition(trace);
  if (first && *first <= bound + tol)
    return Verdict::confirmed();
  if (!first && trace.t_end < bound + tol)
    return Verdict::vacuous("inconclusive-horizon: no grand coalition before " +
                            std::to_string(trace.t_end));
  return Verdict::violated(
      first ? "first grand coalition at " + std::to_string(*first) +
                  " exceeds bound " + std::to_string(bound)
            : "no grand coalition within bound " + std::to_string(bound));
}

// For similar cells, every event from the first grand coalition on is grand.
inline Verdict verify_theorem2(const NetworkConfig &cfg, const Trace &trace,
                               double tol = 1e-9) {
  if (auto why = detail::unmet_large_cooperative(cfg))
    return Verdict::vacuous(*why);
  if (!is_similar(cfg))
    return Verdict::vacuous("hypotheses unmet: cells are not similar");
  if (similarity_estimated(cfg))
    return Verdict::vacuous("hypotheses unverified: similarity uses estimated "
                            "velocity bounds");
  const auto first = first_grand_coalition(trace);
  if (!first) {
    if (trace.t_end < waiting_bound(cfg) + tol)
      return Verdict::vacuous("inconclusive-horizon: no grand coalition yet");
    return Verdict::violated("no grand coalition in the trace");
  }
  for (const auto &ev : trace.events)
    if (ev.t >= *first && !ev.is_grand(trace.units))
      return Verdict::violated("event " + std::to_string(ev.n) + " at t=" +
                               std::to_string(ev.t) + " has coalition size " +
                               std::to_string(ev.coalition.size()));
  return Verdict::confirmed();
}

// Every unit spikes within the first r events.
inline Verdict verify_assertion_A(const NetworkConfig &cfg, const Trace &trace) {
  const std::size_t m = cfg.size();
  if (m == 1)
    return trace.events.empty()
               ? Verdict::vacuous("inconclusive: trace has no events")
               : Verdict::confirmed();
  if (auto why = detail::unmet_large_cooperative(cfg))
    return Verdict::vacuous(*why);
  const std::size_t r = r_value(cfg);
  if (trace.events.size() < r)
    return Verdict::vacuous("inconclusive: trace has fewer than r=" +
                            std::to_string(r) + " events");
  std::vector<char> spiked(m, 0);
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i : trace.events[k].coalition)
      spiked[i] = 1;
  for (std::size_t i = 0; i < m; ++i)
    if (!spiked[i])
      return Verdict::violated("unit " + std::to_string(i + 1) +
                               " did not spike in the first " +
                               std::to_string(r) + " events");
  return Verdict::confirmed();
}

// No coalition of size in [r, m). Needs only cooperativity and a positive
// minimum weight.
inline Verdict verify_assertion_B(const NetworkConfig &cfg, const Trace &trace) {
  const std::size_t m = cfg.size();
  if (m == 1)
    return Verdict::confirmed();
  const auto min_w = min_off_diagonal(cfg.weights());
  if (!is_cooperative(cfg) || !min_w || *min_w <= 0.0)
    return Verdict::vacuous(
        "hypotheses unmet: requires cooperative cells and a positive minimum "
        "weight");
  const std::size_t r = r_value(cfg);
  for (const auto &ev : trace.events) {
    const std::size_t size = ev.coalition.size();
    if (size >= r && size < m)
      return Verdict::violated("event " + std::to_string(ev.n) +
                               " has coalition size " + std::to_string(size) +
                               " with r=" + std::to_string(r));
  }
  return Verdict::confirmed();
}

struct TraceResult {
  std::optional<double> first_grand_coalition;
  std::size_t grand_coalitions = 0;
  std::size_t events = 0;
  bool post_gc_pure = true;
  Verdict theorem1;
  Verdict waiting_time;
  Verdict theorem2;
  Verdict assertion_a;
  Verdict assertion_b;
  // The engine's runtime assertion-B record matches the post hoc check.
  bool runtime_b_agrees = true;
  std::optional<std::string> error;

  std::size_t violations() const {
    std::size_t n = 0;
    for (const Verdict *v :
         {&theorem1, &waiting_time, &theorem2, &assertion_a, &assertion_b})
      n += v->outcome == Outcome::Violated;
    return n;
  }
};

struct VerificationReport {
  PredicateValues predicates;
  std::vector<TraceResult> traces;

  std::size_t violations() const {
    std::size_t n = 0;
    for (const auto &t : traces)
      n += t.violations();
    return n;
  }
};

inline TraceResult verify_trace(const NetworkConfig &cfg, const Trace &trace,
                                const VerifyOptions &opt = {}) {
  TraceResult r;
  r.first_grand_coalition = first_grand_coalition(trace);
  r.grand_coalitions = grand_coalition_count(trace);
  r.events = trace.events.size();
  r.post_gc_pure = post_first_gc_pure(trace);
  r.theorem1 = verify_theorem1(cfg, trace, opt.min_recurrences);
  r.waiting_time = verify_waiting_bound(cfg, trace, opt.waiting_tolerance);
  r.theorem2 = verify_theorem2(cfg, trace, opt.waiting_tolerance);
  r.assertion_a = verify_assertion_A(cfg, trace);
  r.assertion_b = verify_assertion_B(cfg, trace);
  if (trace.assertion_b_r) {
    const bool runtime_ok = trace.assertion_b_violations.empty();
    r.runtime_b_agrees =
        runtime_ok == (r.assertion_b.outcome != Outcome::Violated);
  }
  r.error = trace.error;
  return r;
}

inline VerificationReport verify(const NetworkConfig &cfg,
                                 std::span<const Trace> traces,
                                 const VerifyOptions &opt = {}) {
  VerificationReport report;
  report.predicates = predicates(cfg);
  for (const auto &t : traces)
    report.traces.push_back(verify_trace(cfg, t, opt));
  return report;
}

} // namespace pulsenet

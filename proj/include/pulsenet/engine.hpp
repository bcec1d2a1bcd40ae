#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pulsenet/errors.hpp"
#include "pulsenet/model.hpp"
#include "pulsenet/network.hpp"

namespace pulsenet {

// Sorted, duplicate-free list of 0-based unit indices.
using UnitSet = std::vector<std::size_t>;

struct SimState {
  double t = 0.0;
  std::vector<State> states;
  // Index of the next spiking instant.
  std::size_t event_count = 0;
};

inline SimState initial_sim_state(const NetworkConfig &cfg) {
  return SimState{0.0, cfg.initial_states(), 0};
}

// One spiking instant and the avalanche that produced its coalition.
struct SpikeEvent {
  std::size_t n = 0;
  double t = 0.0;
  UnitSet coalition;
  // waves[0] are the units that reached their goal by free flow; waves[p]
  // are recruited by the pulses of waves[0..p-1].
  std::vector<UnitSet> waves;
  std::vector<double> pre_satisfactions;
  std::vector<double> post_satisfactions;

  bool is_grand(std::size_t m) const { return coalition.size() == m; }
};

struct Sample {
  double t = 0.0;
  std::vector<double> satisfactions;
};

struct Trace {
  std::size_t units = 0;
  std::vector<SpikeEvent> events;
  std::vector<Sample> samples;
  // End of the simulated window: the time horizon, or the last event time
  // for event-count stops.
  double t_end = 0.0;
  // Set when the run stopped early on a numeric failure; events up to the
  // failure are kept.
  std::optional<std::string> error;
  // Runtime check that coalitions of size >= r are grand. Enabled (r set)
  // for cooperative networks with a positive minimum weight.
  std::optional<std::size_t> assertion_b_r;
  std::vector<std::size_t> assertion_b_violations;
};

struct StopCondition {
  std::optional<double> max_time;
  std::optional<std::size_t> max_events;

  static StopCondition at_time(double t) { return {t, std::nullopt}; }
  static StopCondition after_events(std::size_t k) { return {std::nullopt, k}; }
};

struct NextSpike {
  double t = 0.0;
  UnitSet initiators;
};

// Earliest free threshold crossing over all units. Units whose crossing
// falls within the tie window of the earliest one are initiators too.
inline NextSpike next_spiking_instant(const NetworkConfig &cfg,
                                      const SimState &s) {
  const std::size_t m = cfg.size();
  std::vector<double> tau(m);
  double tau_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    try {
      tau[i] = cfg.unit(i).time_to_threshold(s.states[i]);
    } catch (const ModelContractViolation &e) {
      throw ModelContractViolation("unit " + std::to_string(i + 1) + " at t=" +
                                   std::to_string(s.t) + ": " + e.what());
    } catch (const NumericFailure &e) {
      throw NumericFailure("unit " + std::to_string(i + 1) + " at t=" +
                           std::to_string(s.t) + ": " + e.what());
    }
    tau_min = std::min(tau_min, tau[i]);
  }
  NextSpike out;
  out.t = s.t + tau_min;
  if (!(out.t > s.t) || !std::isfinite(out.t))
    throw NumericFailure("spiking instant does not advance past t=" +
                         std::to_string(s.t));
  for (std::size_t i = 0; i < m; ++i) {
    const auto &u = cfg.unit(i);
    if (tau[i] - tau_min <=
        tolerance::tie(u.theta(), u.velocity_bounds().v_min))
      out.initiators.push_back(i);
  }
  return out;
}

namespace detail {

struct Cascade {
  SpikeEvent event;
  // Total pulse received by each unit from the coalition.
  std::vector<double> received;
};

inline Cascade cascade(const NetworkConfig &cfg, std::span<const double> pre,
                       const UnitSet &initiators) {
  const std::size_t m = cfg.size();
  if (pre.size() != m)
    throw std::invalid_argument("resolve_cascade: expected " +
                                std::to_string(m) + " satisfactions");
  if (initiators.empty())
    throw std::invalid_argument("resolve_cascade: no initiators");
  std::vector<char> member(m, 0);
  for (std::size_t i : initiators) {
    if (i >= m)
      throw std::invalid_argument("resolve_cascade: initiator out of range");
    if (pre[i] < cfg.theta(i) - 1e-6 * cfg.theta(i))
      throw std::invalid_argument("resolve_cascade: initiator " +
                                  std::to_string(i + 1) +
                                  " is not at its goal");
    member[i] = 1;
  }

  const auto &w = cfg.weights();
  Cascade out;
  out.received.assign(m, 0.0);
  UnitSet wave;
  for (std::size_t i = 0; i < m; ++i)
    if (member[i])
      wave.push_back(i);

  // Membership of a wave is decided from the pulses of earlier waves only,
  // so evaluation order inside a wave does not matter.
  while (!wave.empty()) {
    if (out.event.waves.size() == m)
      throw std::logic_error("resolve_cascade: more waves than units");
    for (std::size_t i : wave)
      for (std::size_t j = 0; j < m; ++j)
        if (j != i)
          out.received[j] += w(i, j);
    out.event.waves.push_back(wave);
    UnitSet next;
    for (std::size_t j = 0; j < m; ++j)
      if (!member[j] && pre[j] + out.received[j] >= cfg.theta(j))
        next.push_back(j);
    for (std::size_t j : next)
      member[j] = 1;
    wave = std::move(next);
  }

  auto &ev = out.event;
  ev.pre_satisfactions.assign(pre.begin(), pre.end());
  ev.post_satisfactions.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (member[j]) {
      ev.coalition.push_back(j);
      ev.post_satisfactions[j] = 0.0;
    } else {
      ev.post_satisfactions[j] = pre[j] + out.received[j];
    }
  }
  return out;
}

// Applies the cascade at time t to states already flowed to t^-.
inline SpikeEvent fire(const NetworkConfig &cfg, SimState &s, double t,
                       std::vector<State> pre_states,
                       const UnitSet &initiators) {
  const std::size_t m = cfg.size();
  std::vector<double> pre(m);
  for (std::size_t i = 0; i < m; ++i)
    pre[i] = cfg.unit(i).satisfaction(pre_states[i]);
  Cascade c = cascade(cfg, pre, initiators);
  SpikeEvent &ev = c.event;
  ev.n = s.event_count;
  ev.t = t;
  std::size_t k = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const auto &u = cfg.unit(j);
    if (k < ev.coalition.size() && ev.coalition[k] == j) {
      pre_states[j] = u.reset(pre_states[j]);
      ++k;
    } else {
      pre_states[j] = u.perturb(pre_states[j], c.received[j]);
      ev.post_satisfactions[j] = u.satisfaction(pre_states[j]);
    }
  }
  s.t = t;
  s.states = std::move(pre_states);
  ++s.event_count;
  return std::move(c.event);
}

inline std::vector<State> flow_all(const NetworkConfig &cfg,
                                   const std::vector<State> &states, double t0,
                                   double dt) {
  std::vector<State> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    try {
      out[i] = cfg.unit(i).flow(states[i], dt);
    } catch (const NumericFailure &e) {
      throw NumericFailure("unit " + std::to_string(i + 1) + " at t=" +
                           std::to_string(t0 + dt) + ": " + e.what());
    }
  }
  return out;
}

inline std::optional<std::size_t> assertion_b_threshold(const NetworkConfig &cfg) {
  const auto min_w = min_off_diagonal(cfg.weights());
  if (!min_w || *min_w <= 0.0 || !is_cooperative(cfg))
    return std::nullopt;
  return r_value(cfg);
}

inline void record(Trace &trace, SpikeEvent ev) {
  const std::size_t size = ev.coalition.size();
  if (trace.assertion_b_r && size >= *trace.assertion_b_r && size < trace.units)
    trace.assertion_b_violations.push_back(ev.n);
  trace.events.push_back(std::move(ev));
}

inline void check_stop(const StopCondition &stop) {
  if (!stop.max_time && !stop.max_events)
    throw std::invalid_argument("run: a time or event horizon is required");
  if (stop.max_time && !(*stop.max_time >= 0.0))
    throw std::invalid_argument("run: max_time must be non-negative");
}

} // namespace detail

// Wave decomposition of the coalition started by `initiators`, given the
// satisfactions just before the instant. Non-members receive the signed sum
// of all coalition pulses; members end at 0. n and t are left at 0.
inline SpikeEvent resolve_cascade(const NetworkConfig &cfg,
                                  std::span<const double> pre_satisfactions,
                                  const UnitSet &initiators) {
  return detail::cascade(cfg, pre_satisfactions, initiators).event;
}

// Advances to the next spiking instant and applies it.
inline std::pair<SpikeEvent, SimState> step(const NetworkConfig &cfg,
                                            const SimState &s) {
  const NextSpike next = next_spiking_instant(cfg, s);
  SimState out = s;
  auto pre = detail::flow_all(cfg, s.states, s.t, next.t - s.t);
  SpikeEvent ev = detail::fire(cfg, out, next.t, std::move(pre), next.initiators);
  return {std::move(ev), std::move(out)};
}

// Event-driven simulation from the configured initial states. With
// `sampling`, satisfactions are also recorded at every multiple of the
// sampling step inside the simulated window.
inline Trace run(const NetworkConfig &cfg, const StopCondition &stop,
                 std::optional<double> sampling = std::nullopt) {
  detail::check_stop(stop);
  if (sampling && !(*sampling > 0.0))
    throw std::invalid_argument("run: sampling step must be positive");
  const std::size_t m = cfg.size();
  Trace trace;
  trace.units = m;
  trace.assertion_b_r = detail::assertion_b_threshold(cfg);

  SimState s = initial_sim_state(cfg);
  std::size_t next_sample = 0;
  auto emit_samples = [&](double until, bool inclusive) {
    if (!sampling)
      return;
    for (;; ++next_sample) {
      const double ts = static_cast<double>(next_sample) * *sampling;
      if (inclusive ? ts > until : ts >= until)
        break;
      auto states = detail::flow_all(cfg, s.states, s.t, ts - s.t);
      Sample row{ts, std::vector<double>(m)};
      for (std::size_t i = 0; i < m; ++i)
        row.satisfactions[i] = cfg.unit(i).satisfaction(states[i]);
      trace.samples.push_back(std::move(row));
    }
  };

  try {
    while (true) {
      if (stop.max_events && trace.events.size() >= *stop.max_events) {
        trace.t_end = s.t;
        emit_samples(s.t, true);
        break;
      }
      const NextSpike next = next_spiking_instant(cfg, s);
      if (stop.max_time && next.t > *stop.max_time) {
        trace.t_end = *stop.max_time;
        emit_samples(*stop.max_time, true);
        break;
      }
      emit_samples(next.t, false);
      auto pre = detail::flow_all(cfg, s.states, s.t, next.t - s.t);
      detail::record(trace, detail::fire(cfg, s, next.t, std::move(pre),
                                         next.initiators));
    }
  } catch (const NumericFailure &e) {
    trace.error = e.what();
    trace.t_end = s.t;
  } catch (const ModelContractViolation &e) {
    trace.error = e.what();
    trace.t_end = s.t;
  }
  return trace;
}

// Fixed-step reference simulation. Every unit is flowed in steps of dt and
// checked against its goal after each step; inside a step where some unit
// crosses, the crossing instant is placed by linear interpolation of the
// satisfaction and all units are flowed to it. Cascades are resolved as in
// run(). Independent of time_to_threshold.
inline Trace run_oracle(const NetworkConfig &cfg, const StopCondition &stop,
                        double dt) {
  detail::check_stop(stop);
  if (!(dt > 0.0))
    throw std::invalid_argument("run_oracle: dt must be positive");
  const std::size_t m = cfg.size();
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto &u : cfg.units())
    shortest = std::min(shortest, u.theta() / u.velocity_bounds().v_max);
  if (dt >= shortest)
    throw StepTooCoarse("run_oracle: step " + std::to_string(dt) +
                        " is not below the shortest inter-spike interval " +
                        std::to_string(shortest));

  Trace trace;
  trace.units = m;
  trace.assertion_b_r = detail::assertion_b_threshold(cfg);
  SimState s = initial_sim_state(cfg);
  std::vector<State> x = s.states;
  std::size_t k = 0; // steps since the last event
  std::vector<double> frac(m);

  try {
    while (!(stop.max_events && trace.events.size() >= *stop.max_events)) {
      const double t = s.t + static_cast<double>(k) * dt;
      auto y = detail::flow_all(cfg, x, t, dt);
      double f_min = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const auto &u = cfg.unit(i);
        const double sy = u.satisfaction(y[i]);
        frac[i] = std::numeric_limits<double>::infinity();
        if (sy >= u.theta()) {
          const double sx = u.satisfaction(x[i]);
          frac[i] = sx >= u.theta() ? 0.0 : (u.theta() - sx) / (sy - sx);
          f_min = std::min(f_min, frac[i]);
        }
      }
      if (!std::isfinite(f_min)) {
        if (stop.max_time && t + dt > *stop.max_time) {
          trace.t_end = *stop.max_time;
          return trace;
        }
        x = std::move(y);
        ++k;
        continue;
      }
      const double tc = t + f_min * dt;
      if (stop.max_time && tc > *stop.max_time) {
        trace.t_end = *stop.max_time;
        return trace;
      }
      UnitSet initiators;
      for (std::size_t i = 0; i < m; ++i) {
        const auto &u = cfg.unit(i);
        if ((frac[i] - f_min) * dt <=
            tolerance::tie(u.theta(), u.velocity_bounds().v_min))
          initiators.push_back(i);
      }
      auto pre = detail::flow_all(cfg, x, t, f_min * dt);
      detail::record(trace,
                     detail::fire(cfg, s, tc, std::move(pre), initiators));
      x = s.states;
      k = 0;
    }
    trace.t_end = s.t;
  } catch (const NumericFailure &e) {
    trace.error = e.what();
    trace.t_end = s.t;
  }
  return trace;
}

} // namespace pulsenet

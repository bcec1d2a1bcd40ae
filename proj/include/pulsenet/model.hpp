#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pulsenet/errors.hpp"

namespace pulsenet {

// State vector of a single unit. Built-in models use one or two coordinates;
// general ODE models may use any dimension.
using State = std::vector<double>;

namespace tolerance {

// Absolute time tolerance of threshold detection for a bracket of the given
// width.
constexpr double time(double bracket_width) {
  return 1e-12 * (1.0 + bracket_width);
}

// Satisfaction tolerance at a threshold crossing.
constexpr double satisfaction(double theta) { return 1e-9 * theta; }

// Crossings this close (in time) to the earliest one are treated as
// simultaneous.
constexpr double tie(double theta, double v_min) {
  return 1e-9 * (theta / v_min);
}

} // namespace tolerance

// Bounds of the satisfaction velocity (gradient of S along the flow) over
// states with satisfaction in [0, theta].
struct VelocityBounds {
  double v_min = 0.0;
  double v_max = 0.0;
  // True when the bounds were sampled along trajectories rather than derived
  // in closed form.
  bool estimated = false;
  std::size_t samples = 0;
};

enum class ModelKind { Linear, Saturating, Planar, GeneralOde };

constexpr std::string_view to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Linear:
    return "linear";
  case ModelKind::Saturating:
    return "saturating";
  case ModelKind::Planar:
    return "planar";
  case ModelKind::GeneralOde:
    return "general_ode";
  }
  return "unknown";
}

// dS/dt = velocity.
struct LinearParams {
  double velocity = 1.0;
};

// dS/dt = rate * (saturation - S), saturation > theta.
struct SaturatingParams {
  double rate = 1.0;
  double saturation = 2.0;
};

// State (a, b): da/dt = drift + wobble * sin(b), db/dt = angular_speed,
// S = a. Requires drift > wobble >= 0.
struct PlanarParams {
  double drift = 1.0;
  double wobble = 0.0;
  double angular_speed = 1.0;
};

// User-supplied dynamics, integrated numerically.
struct GeneralOdeSpec {
  std::size_t dim = 1;
  std::function<State(const State &)> rhs;
  std::function<double(const State &)> satisfaction;
  std::function<State(const State &)> reset;
  std::function<State(const State &, double)> perturb;
  // Optional closed form of grad(S).f; central differences along f otherwise.
  std::function<double(const State &)> velocity;
  // Starting states for velocity sampling. Defaults to the reset of the zero
  // state.
  std::vector<State> seeds;
  std::size_t velocity_samples = 10000;
};

// Fills satisfaction, reset and perturb for the common case S(x) = x[k].
inline GeneralOdeSpec with_coordinate_satisfaction(GeneralOdeSpec spec,
                                                   std::size_t k) {
  spec.satisfaction = [k](const State &x) { return x.at(k); };
  spec.reset = [k](const State &x) {
    State y = x;
    y.at(k) = 0.0;
    return y;
  };
  spec.perturb = [k](const State &x, double delta) {
    State y = x;
    y.at(k) += delta;
    return y;
  };
  return spec;
}

namespace detail {

inline bool all_finite(const State &x) {
  return std::all_of(x.begin(), x.end(),
                     [](double v) { return std::isfinite(v); });
}

struct GeneralOdeModel {
  GeneralOdeSpec spec;
  double step = 1e-3;
  std::optional<VelocityBounds> bounds;
  std::string failure;

  State rk4(const State &x, double h) const {
    const auto &f = spec.rhs;
    const std::size_t n = x.size();
    State tmp(n);
    const State k1 = f(x);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + 0.5 * h * k1[i];
    const State k2 = f(tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + 0.5 * h * k2[i];
    const State k3 = f(tmp);
    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = x[i] + h * k3[i];
    const State k4 = f(tmp);
    State y(n);
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return y;
  }

  State integrate(const State &x, double dt) const {
    if (dt == 0.0)
      return x;
    const auto n = static_cast<std::size_t>(std::ceil(dt / step));
    const double h = dt / static_cast<double>(std::max<std::size_t>(n, 1));
    State y = x;
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i)
      y = rk4(y, h);
    return y;
  }

  double velocity(const State &x) const {
    if (spec.velocity)
      return spec.velocity(x);
    const State f = spec.rhs(x);
    double scale = 1.0;
    for (double v : f)
      scale = std::max(scale, std::abs(v));
    const double eta = 1e-6 / scale;
    State plus = x, minus = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      plus[i] += eta * f[i];
      minus[i] -= eta * f[i];
    }
    return (spec.satisfaction(plus) - spec.satisfaction(minus)) / (2.0 * eta);
  }

  // Samples the velocity along free trajectories from every seed up to the
  // goal. Sets `bounds` on success, `failure` otherwise.
  void sample_bounds(double theta) {
    double pilot = 0.0;
    for (const auto &seed : spec.seeds)
      pilot = std::max(pilot, std::abs(velocity(seed)));
    step = pilot > 0.0 ? std::min(1e-3, 0.01 * theta / pilot) : 1e-3;

    const std::size_t per_seed =
        (spec.velocity_samples + spec.seeds.size() - 1) / spec.seeds.size();
    constexpr std::size_t max_steps = 10'000'000;
    VelocityBounds vb{std::numeric_limits<double>::infinity(), 0.0, true, 0};
    for (const auto &seed : spec.seeds) {
      if (!(spec.satisfaction(seed) < theta)) {
        failure = "velocity sampling seed is not below the goal";
        return;
      }
      // First pass: time to reach the goal on the integration grid. Gives up
      // when S stops increasing or after 1000 pilot crossing times.
      State x = seed;
      std::size_t steps = 0;
      const double give_up = pilot > 0.0 ? 1e3 * theta / pilot : 1e3;
      for (double s = spec.satisfaction(x); s < theta;) {
        x = rk4(x, step);
        const double next = spec.satisfaction(x);
        if (!all_finite(x) || !(next > s) || ++steps > max_steps ||
            static_cast<double>(steps) * step > give_up) {
          failure = "free trajectory does not reach the goal";
          return;
        }
        s = next;
      }
      // Last grid time still below the goal.
      const double horizon = static_cast<double>(steps - 1) * step;
      // Second pass: evenly spaced samples over [0, horizon).
      const double dt = horizon / static_cast<double>(per_seed);
      x = seed;
      for (std::size_t k = 0; k < per_seed; ++k) {
        if (spec.satisfaction(x) >= 0.0 && spec.satisfaction(x) <= theta) {
          const double v = velocity(x);
          vb.v_min = std::min(vb.v_min, v);
          vb.v_max = std::max(vb.v_max, v);
          ++vb.samples;
        }
        x = integrate(x, dt);
      }
    }
    if (vb.samples == 0) {
      failure = "no sampled state has satisfaction in [0, theta]";
      return;
    }
    if (!(vb.v_min > 0.0)) {
      failure = "sampled satisfaction velocity is not positive (min " +
                std::to_string(vb.v_min) + ")";
      return;
    }
    bounds = vb;
  }
};

} // namespace detail

// Free dynamics of a single unit: relaxation flow, satisfaction observable,
// reset and pulse maps, and threshold-crossing detection.
//
// Instances are immutable and safe to share between concurrent runs.
class Model {
public:
  static Model linear(double theta, double velocity) {
    check_theta(theta);
    if (!(velocity > 0.0) || !std::isfinite(velocity))
      throw std::invalid_argument("linear model: velocity must be positive");
    return Model(theta, LinearParams{velocity});
  }

  static Model saturating(double theta, double rate, double saturation) {
    check_theta(theta);
    if (!(rate > 0.0) || !std::isfinite(rate))
      throw std::invalid_argument("saturating model: rate must be positive");
    if (!(saturation > theta) || !std::isfinite(saturation))
      throw std::invalid_argument(
          "saturating model: saturation must exceed theta");
    return Model(theta, SaturatingParams{rate, saturation});
  }

  static Model planar(double theta, double drift, double wobble,
                      double angular_speed) {
    check_theta(theta);
    if (!(wobble >= 0.0) || !(drift > wobble) || !std::isfinite(drift) ||
        !std::isfinite(angular_speed))
      throw std::invalid_argument(
          "planar model: requires drift > wobble >= 0 and finite parameters");
    return Model(theta, PlanarParams{drift, wobble, angular_speed});
  }

  // Samples velocity bounds at construction; a model whose sampled minimum
  // velocity is not positive is constructed but reports the failure from
  // velocity_bounds() and time_to_threshold().
  static Model general_ode(double theta, GeneralOdeSpec spec) {
    check_theta(theta);
    if (spec.dim == 0 || !spec.rhs || !spec.satisfaction || !spec.reset ||
        !spec.perturb)
      throw std::invalid_argument(
          "general ODE model: dim, rhs, satisfaction, reset and perturb are "
          "required");
    if (spec.velocity_samples == 0)
      throw std::invalid_argument("general ODE model: velocity_samples is 0");
    if (spec.seeds.empty())
      spec.seeds.push_back(spec.reset(State(spec.dim, 0.0)));
    auto data = std::make_shared<detail::GeneralOdeModel>();
    data->spec = std::move(spec);
    data->sample_bounds(theta);
    return Model(theta,
                 std::shared_ptr<const detail::GeneralOdeModel>(std::move(data)));
  }

  ModelKind kind() const { return static_cast<ModelKind>(params_.index()); }
  double theta() const { return theta_; }

  std::size_t state_dim() const {
    switch (kind()) {
    case ModelKind::Linear:
    case ModelKind::Saturating:
      return 1;
    case ModelKind::Planar:
      return 2;
    case ModelKind::GeneralOde:
      return general().spec.dim;
    }
    return 0;
  }

  const LinearParams *as_linear() const {
    return std::get_if<LinearParams>(&params_);
  }
  const SaturatingParams *as_saturating() const {
    return std::get_if<SaturatingParams>(&params_);
  }
  const PlanarParams *as_planar() const {
    return std::get_if<PlanarParams>(&params_);
  }

  // State after `dt` time units of free evolution. Never applies the reset.
  State flow(const State &x, double dt) const {
    if (!(dt >= 0.0))
      throw std::invalid_argument("flow: dt must be non-negative");
    if (dt == 0.0)
      return x;
    State y = x;
    switch (kind()) {
    case ModelKind::Linear:
      y[0] += std::get<LinearParams>(params_).velocity * dt;
      break;
    case ModelKind::Saturating: {
      const auto &p = std::get<SaturatingParams>(params_);
      y[0] += (p.saturation - x[0]) * -std::expm1(-p.rate * dt);
      break;
    }
    case ModelKind::Planar: {
      const auto &p = std::get<PlanarParams>(params_);
      const double b = x[1];
      if (p.angular_speed == 0.0) {
        y[0] += (p.drift + p.wobble * std::sin(b)) * dt;
      } else {
        // cos(b) - cos(b + w dt) written without cancellation
        const double half = 0.5 * p.angular_speed * dt;
        y[0] += p.drift * dt + (p.wobble / p.angular_speed) * 2.0 *
                                   std::sin(b + half) * std::sin(half);
      }
      y[1] = b + p.angular_speed * dt;
      break;
    }
    case ModelKind::GeneralOde:
      y = general().integrate(x, dt);
      break;
    }
    if (!detail::all_finite(y))
      throw NumericFailure("flow produced a non-finite state");
    return y;
  }

  double satisfaction(const State &x) const {
    if (kind() == ModelKind::GeneralOde)
      return general().spec.satisfaction(x);
    return x[0];
  }

  // grad(S).f at x.
  double satisfaction_velocity(const State &x) const {
    switch (kind()) {
    case ModelKind::Linear:
      return std::get<LinearParams>(params_).velocity;
    case ModelKind::Saturating: {
      const auto &p = std::get<SaturatingParams>(params_);
      return p.rate * (p.saturation - x[0]);
    }
    case ModelKind::Planar: {
      const auto &p = std::get<PlanarParams>(params_);
      return p.drift + p.wobble * std::sin(x[1]);
    }
    case ModelKind::GeneralOde:
      return general().velocity(x);
    }
    return 0.0;
  }

  VelocityBounds velocity_bounds() const {
    switch (kind()) {
    case ModelKind::Linear: {
      const double v = std::get<LinearParams>(params_).velocity;
      return {v, v};
    }
    case ModelKind::Saturating: {
      const auto &p = std::get<SaturatingParams>(params_);
      return {p.rate * (p.saturation - theta_), p.rate * p.saturation};
    }
    case ModelKind::Planar: {
      const auto &p = std::get<PlanarParams>(params_);
      return {p.drift - p.wobble, p.drift + p.wobble};
    }
    case ModelKind::GeneralOde: {
      const auto &g = general();
      if (!g.bounds)
        throw ModelContractViolation("general ODE model: " + g.failure);
      return *g.bounds;
    }
    }
    return {};
  }

  // Time until the free flow from x first reaches theta. Bisection on the
  // monotone map dt -> S(flow(x, dt)), bracketed by the velocity bounds.
  // Returns the upper end of the final bracket, so S(flow(x, t)) >= theta
  // up to rounding.
  double time_to_threshold(const State &x) const {
    const double s = satisfaction(x);
    if (!(s < theta_))
      throw std::invalid_argument(
          "time_to_threshold: satisfaction is already at the goal");
    const VelocityBounds vb = velocity_bounds();
    const double gap = theta_ - s;
    const double tol_s = tolerance::satisfaction(theta_);
    auto excess = [&](double t) { return satisfaction(flow(x, t)) - theta_; };

    double lo = gap / vb.v_max;
    double hi = gap / vb.v_min;
    // Below S = 0 the velocity is not covered by the bounds and may exceed
    // v_max.
    if (excess(lo) > 0.0)
      lo = 0.0;
    for (int inflations = 0; excess(hi) < -tol_s; ++inflations) {
      if (inflations == 64)
        throw ModelContractViolation(
            "threshold not bracketed: satisfaction velocity is not bounded "
            "away from zero");
      lo = hi;
      hi *= 2.0;
    }
    const double tol_t = tolerance::time(hi - lo);
    for (int it = 0; hi - lo > tol_t && it < 256; ++it) {
      const double mid = lo + 0.5 * (hi - lo);
      if (excess(mid) >= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  // Satisfaction set to exactly 0. Planar keeps its angle.
  State reset(const State &x) const {
    if (kind() == ModelKind::GeneralOde)
      return general().spec.reset(x);
    State y = x;
    y[0] = 0.0;
    return y;
  }

  // Adds `delta` to the satisfaction; other coordinates are untouched. No
  // floor is applied, so antagonist pulses may push S below 0.
  State perturb(const State &x, double delta) const {
    if (kind() == ModelKind::GeneralOde)
      return general().spec.perturb(x, delta);
    State y = x;
    y[0] += delta;
    return y;
  }

  // A state with the given satisfaction, built from the reset of the zero
  // state.
  State state_at(double satisfaction_value) const {
    return perturb(reset(State(state_dim(), 0.0)), satisfaction_value);
  }

  // The same dynamics with a different goal.
  Model with_theta(double theta) const {
    switch (kind()) {
    case ModelKind::Linear:
      return linear(theta, std::get<LinearParams>(params_).velocity);
    case ModelKind::Saturating: {
      const auto &p = std::get<SaturatingParams>(params_);
      return saturating(theta, p.rate, p.saturation);
    }
    case ModelKind::Planar: {
      const auto &p = std::get<PlanarParams>(params_);
      return planar(theta, p.drift, p.wobble, p.angular_speed);
    }
    case ModelKind::GeneralOde:
      return general_ode(theta, general().spec);
    }
    return *this;
  }

  // The same model with every velocity multiplied by `factor`.
  Model time_scaled(double factor) const {
    if (!(factor > 0.0))
      throw std::invalid_argument("time_scaled: factor must be positive");
    switch (kind()) {
    case ModelKind::Linear:
      return linear(theta_, std::get<LinearParams>(params_).velocity * factor);
    case ModelKind::Saturating: {
      const auto &p = std::get<SaturatingParams>(params_);
      return saturating(theta_, p.rate * factor, p.saturation);
    }
    case ModelKind::Planar: {
      const auto &p = std::get<PlanarParams>(params_);
      return planar(theta_, p.drift * factor, p.wobble * factor,
                    p.angular_speed * factor);
    }
    case ModelKind::GeneralOde: {
      GeneralOdeSpec spec = general().spec;
      spec.rhs = [rhs = spec.rhs, factor](const State &x) {
        State f = rhs(x);
        for (double &v : f)
          v *= factor;
        return f;
      };
      if (spec.velocity)
        spec.velocity = [vel = spec.velocity, factor](const State &x) {
          return factor * vel(x);
        };
      return general_ode(theta_, std::move(spec));
    }
    }
    return *this;
  }

private:
  using Params =
      std::variant<LinearParams, SaturatingParams, PlanarParams,
                   std::shared_ptr<const detail::GeneralOdeModel>>;

  Model(double theta, Params params)
      : theta_(theta), params_(std::move(params)) {}

  static void check_theta(double theta) {
    if (!(theta > 0.0) || !std::isfinite(theta))
      throw std::invalid_argument("model: theta must be positive and finite");
  }

  const detail::GeneralOdeModel &general() const {
    return *std::get<std::shared_ptr<const detail::GeneralOdeModel>>(params_);
  }

  double theta_;
  Params params_;
};

} // namespace pulsenet

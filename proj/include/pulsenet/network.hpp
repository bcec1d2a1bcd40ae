#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pulsenet/errors.hpp"
#include "pulsenet/model.hpp"

namespace pulsenet {

// m x m interaction weights. Entry (i, j) is the pulse that unit j receives
// when unit i spikes. The diagonal is identically zero.
class WeightMatrix {
public:
  explicit WeightMatrix(std::size_t m) : m_(m), w_(m * m, 0.0) {}

  WeightMatrix(std::size_t m, std::vector<double> row_major)
      : m_(m), w_(std::move(row_major)) {
    if (w_.size() != m_ * m_)
      throw ConfigError("weight matrix: expected " + std::to_string(m_ * m_) +
                        " entries, got " + std::to_string(w_.size()));
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < m_; ++j)
        check_entry(i, j, w_[i * m_ + j]);
  }

  // All off-diagonal entries equal to `w`.
  static WeightMatrix uniform(std::size_t m, double w) {
    WeightMatrix out(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j)
          out.set(i, j, w);
    return out;
  }

  std::size_t size() const { return m_; }

  double operator()(std::size_t i, std::size_t j) const {
    return w_[i * m_ + j];
  }

  void set(std::size_t i, std::size_t j, double w) {
    if (i >= m_ || j >= m_)
      throw std::out_of_range("weight matrix: index out of range");
    check_entry(i, j, w);
    w_[i * m_ + j] = w;
  }

  // Outgoing weights of unit i.
  std::span<const double> row(std::size_t i) const {
    return {w_.data() + i * m_, m_};
  }

  friend bool operator==(const WeightMatrix &, const WeightMatrix &) = default;

private:
  static void check_entry(std::size_t i, std::size_t j, double w) {
    if (!std::isfinite(w))
      throw ConfigError("weight matrix: non-finite entry at (" +
                        std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                        ")");
    if (i == j && w != 0.0)
      throw ConfigError("weight matrix: nonzero diagonal at unit " +
                        std::to_string(i + 1));
  }

  std::size_t m_;
  std::vector<double> w_;
};

enum class CellClass { Cooperative, Antagonist, Mixed };

inline const char *to_string(CellClass c) {
  switch (c) {
  case CellClass::Cooperative:
    return "cooperative";
  case CellClass::Antagonist:
    return "antagonist";
  case CellClass::Mixed:
    return "mixed";
  }
  return "unknown";
}

// A row of zeros satisfies both the cooperative and the antagonist
// inequality; it is reported as cooperative.
inline CellClass classify_cell(const WeightMatrix &w, std::size_t i) {
  if (i >= w.size())
    throw std::out_of_range("classify_cell: unit index out of range");
  bool any_pos = false, any_neg = false;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (j == i)
      continue;
    any_pos |= w(i, j) > 0.0;
    any_neg |= w(i, j) < 0.0;
  }
  if (!any_neg)
    return CellClass::Cooperative;
  if (!any_pos)
    return CellClass::Antagonist;
  return CellClass::Mixed;
}

inline bool is_zero_row(const WeightMatrix &w, std::size_t i) {
  if (i >= w.size())
    throw std::out_of_range("is_zero_row: unit index out of range");
  for (std::size_t j = 0; j < w.size(); ++j)
    if (j != i && w(i, j) != 0.0)
      return false;
  return true;
}

inline bool all_cooperative(const WeightMatrix &w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (classify_cell(w, i) != CellClass::Cooperative)
      return false;
  return true;
}

inline bool is_complete(const WeightMatrix &w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (i != j && w(i, j) == 0.0)
        return false;
  return true;
}

// Minimum over i != j of the weights; empty for m < 2.
inline std::optional<double> min_off_diagonal(const WeightMatrix &w) {
  if (w.size() < 2)
    return std::nullopt;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (i != j)
        lo = std::min(lo, w(i, j));
  return lo;
}

inline double max_abs_off_diagonal(const WeightMatrix &w) {
  double hi = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (i != j)
        hi = std::max(hi, std::abs(w(i, j)));
  return hi;
}

// Units, weights and initial states of a network. Validated on
// construction and immutable afterwards.
class NetworkConfig {
public:
  NetworkConfig(std::vector<Model> units, WeightMatrix weights,
                std::vector<State> initial_states)
      : units_(std::move(units)), weights_(std::move(weights)),
        initial_(std::move(initial_states)) {
    const std::size_t m = units_.size();
    if (m == 0)
      throw ConfigError("network: at least one unit is required");
    if (weights_.size() != m)
      throw ConfigError("network: " + std::to_string(m) +
                        " units but weight matrix of size " +
                        std::to_string(weights_.size()));
    if (initial_.size() != m)
      throw ConfigError("network: " + std::to_string(m) + " units but " +
                        std::to_string(initial_.size()) + " initial states");
    for (std::size_t i = 0; i < m; ++i) {
      const auto &model = units_[i];
      if (initial_[i].size() != model.state_dim())
        throw ConfigError("network: initial state of unit " +
                          std::to_string(i + 1) + " has dimension " +
                          std::to_string(initial_[i].size()) + ", expected " +
                          std::to_string(model.state_dim()));
      if (!detail::all_finite(initial_[i]))
        throw ConfigError("network: initial state of unit " +
                          std::to_string(i + 1) + " is not finite");
      const double s = model.satisfaction(initial_[i]);
      if (!(s >= 0.0 && s < model.theta()))
        throw ConfigError("initial state not in Q: unit " +
                          std::to_string(i + 1) + " has satisfaction " +
                          std::to_string(s) + ", goal " +
                          std::to_string(model.theta()));
    }
  }

  std::size_t size() const { return units_.size(); }
  const std::vector<Model> &units() const { return units_; }
  const Model &unit(std::size_t i) const { return units_.at(i); }
  const WeightMatrix &weights() const { return weights_; }
  const std::vector<State> &initial_states() const { return initial_; }

  double theta(std::size_t i) const { return units_.at(i).theta(); }

  double max_theta() const {
    double hi = 0.0;
    for (const auto &u : units_)
      hi = std::max(hi, u.theta());
    return hi;
  }

  double min_theta() const {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto &u : units_)
      lo = std::min(lo, u.theta());
    return lo;
  }

private:
  std::vector<Model> units_;
  WeightMatrix weights_;
  std::vector<State> initial_;
};

inline bool is_cooperative(const NetworkConfig &cfg) {
  return all_cooperative(cfg.weights());
}

// max |weight| / min theta below `ratio_threshold`.
inline bool is_weak(const NetworkConfig &cfg, double ratio_threshold = 1e-3) {
  if (!(ratio_threshold > 0.0))
    throw std::invalid_argument("is_weak: ratio threshold must be positive");
  return max_abs_off_diagonal(cfg.weights()) / cfg.min_theta() <
         ratio_threshold;
}

// sqrt(m) >= 1 + max theta / min weight. False when the minimum weight is 0
// (or m = 1), since no finite m can satisfy it then.
inline bool is_large(const NetworkConfig &cfg) {
  if (!is_cooperative(cfg))
    throw std::invalid_argument(
        "is_large: defined only for networks of cooperative cells");
  const auto min_w = min_off_diagonal(cfg.weights());
  if (!min_w || *min_w <= 0.0)
    return false;
  return std::sqrt(static_cast<double>(cfg.size())) >=
         1.0 + cfg.max_theta() / *min_w;
}

// 1 + floor(max theta / min weight): the coalition size from which every
// coalition of a cooperative network is the grand coalition.
inline std::size_t r_value(const NetworkConfig &cfg) {
  const auto min_w = min_off_diagonal(cfg.weights());
  if (!min_w || *min_w <= 0.0)
    throw std::domain_error(
        "r_value: requires at least two units and a positive minimum weight");
  if (!is_cooperative(cfg))
    throw std::domain_error("r_value: requires a cooperative network");
  return 1 + static_cast<std::size_t>(std::floor(cfg.max_theta() / *min_w));
}

// max_i theta_i / v_min_i: upper bound of the free time any unit needs to
// climb from 0 to its goal.
inline double waiting_bound(const NetworkConfig &cfg) {
  double hi = 0.0;
  for (const auto &u : cfg.units())
    hi = std::max(hi, u.theta() / u.velocity_bounds().v_min);
  return hi;
}

// [min_i theta_i / v_max_i] / [max_i theta_i / v_min_i]. At most 1.
inline double similarity_lhs(const NetworkConfig &cfg) {
  double fastest = std::numeric_limits<double>::infinity();
  double slowest = 0.0;
  for (const auto &u : cfg.units()) {
    const auto vb = u.velocity_bounds();
    fastest = std::min(fastest, u.theta() / vb.v_max);
    slowest = std::max(slowest, u.theta() / vb.v_min);
  }
  return fastest / slowest;
}

// 1 - min weight / max theta; -inf when there is no pair of units.
inline double similarity_rhs(const NetworkConfig &cfg) {
  const auto min_w = min_off_diagonal(cfg.weights());
  if (!min_w)
    return -std::numeric_limits<double>::infinity();
  return 1.0 - *min_w / cfg.max_theta();
}

inline bool is_similar(const NetworkConfig &cfg) {
  return similarity_lhs(cfg) >= similarity_rhs(cfg);
}

// True when any unit's velocity bounds are sampled estimates, in which case
// is_similar is indicative only.
inline bool similarity_estimated(const NetworkConfig &cfg) {
  return std::any_of(cfg.units().begin(), cfg.units().end(), [](const Model &u) {
    return u.velocity_bounds().estimated;
  });
}

} // namespace pulsenet

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pulsenet/errors.hpp"
#include "pulsenet/model.hpp"
#include "pulsenet/network.hpp"
#include "pulsenet/random.hpp"

// Network config files are JSON:
//
//   {
//     "theta": 1.0,                       // default goal, per-unit override
//     "units": [ {"model": "linear", "velocity": 1.0, "count": 19} ],
//     "weights": 0.3,                     // or full matrix, or
//                                         // {"default": 0, "entries": [[i, j, w]]}
//     "initial": "random",                // or "zero", or one entry per unit
//     "sweep": {"m": [10, 25], "delta": [0.3], "theta": [1], "spread": [0]}
//   }
//
// Unit indices in files are 1-based.

namespace pulsenet {

using json = nlohmann::json;

enum class InitialKind { Random, Zero, Explicit };

// Grid axes of a sweep. Empty axes fall back to the base config.
struct SweepAxes {
  std::vector<std::size_t> m;
  std::vector<double> delta;
  std::vector<double> theta;
  std::vector<double> spread;
};

// A parsed config file, before initial states are drawn.
struct ConfigDocument {
  std::vector<Model> units;
  WeightMatrix weights{0};
  InitialKind initial = InitialKind::Random;
  std::vector<State> initial_states;
  std::optional<SweepAxes> sweep;
  std::optional<double> uniform_weight;
};

namespace detail {

inline double number_field(const json &j, const char *key, const std::string &where) {
  if (!j.contains(key))
    throw ConfigError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number())
    throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline void reject_unknown(const json &j, const std::set<std::string> &allowed,
                           const std::string &where) {
  for (const auto &[key, _] : j.items())
    if (!allowed.count(key))
      throw ConfigError(where + ": unknown key '" + key + "'");
}

inline Model parse_model(const json &j, std::optional<double> default_theta,
                         const std::string &where) {
  if (!j.is_object())
    throw ConfigError(where + ": expected an object");
  if (!j.contains("model") || !j.at("model").is_string())
    throw ConfigError(where + ": missing 'model'");
  const auto kind = j.at("model").get<std::string>();
  double theta = 0.0;
  if (j.contains("theta"))
    theta = number_field(j, "theta", where);
  else if (default_theta)
    theta = *default_theta;
  else
    throw ConfigError(where + ": missing 'theta' (no top-level default)");
  try {
    if (kind == "linear") {
      reject_unknown(j, {"model", "theta", "count", "velocity"}, where);
      return Model::linear(theta, number_field(j, "velocity", where));
    }
    if (kind == "saturating") {
      reject_unknown(j, {"model", "theta", "count", "rate", "saturation"}, where);
      return Model::saturating(theta, number_field(j, "rate", where),
                               number_field(j, "saturation", where));
    }
    if (kind == "planar") {
      reject_unknown(j, {"model", "theta", "count", "drift", "wobble", "angular_speed"},
                     where);
      return Model::planar(theta, number_field(j, "drift", where),
                           number_field(j, "wobble", where),
                           number_field(j, "angular_speed", where));
    }
  } catch (const std::invalid_argument &e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown model '" + kind + "'");
}

inline WeightMatrix parse_weights(const json &j, std::size_t m) {
  if (j.is_number())
    return WeightMatrix::uniform(m, j.get<double>());
  if (j.is_array()) {
    if (j.size() != m)
      throw ConfigError("weights: expected " + std::to_string(m) + " rows, got " +
                        std::to_string(j.size()));
    std::vector<double> flat;
    flat.reserve(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto &row = j.at(i);
      if (!row.is_array() || row.size() != m)
        throw ConfigError("weights: row " + std::to_string(i + 1) +
                          " must have " + std::to_string(m) + " entries");
      for (const auto &v : row) {
        if (!v.is_number())
          throw ConfigError("weights: row " + std::to_string(i + 1) +
                            " has a non-numeric entry");
        flat.push_back(v.get<double>());
      }
    }
    return WeightMatrix(m, std::move(flat));
  }
  if (j.is_object()) {
    reject_unknown(j, {"default", "entries"}, "weights");
    const double base = j.contains("default") ? number_field(j, "default", "weights") : 0.0;
    WeightMatrix w = WeightMatrix::uniform(m, base);
    if (j.contains("entries")) {
      for (const auto &e : j.at("entries")) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_unsigned() ||
            !e[1].is_number_unsigned() || !e[2].is_number())
          throw ConfigError("weights: entries must be [i, j, weight] triples");
        const auto i = e[0].get<std::size_t>(), k = e[1].get<std::size_t>();
        if (i == 0 || k == 0 || i > m || k > m)
          throw ConfigError("weights: entry index out of range 1.." +
                            std::to_string(m));
        w.set(i - 1, k - 1, e[2].get<double>());
      }
    }
    return w;
  }
  throw ConfigError("weights: expected a number, a matrix or an object");
}

inline std::vector<double> parse_axis(const json &j, const char *name) {
  if (!j.is_array())
    throw ConfigError(std::string("sweep: axis '") + name + "' must be a list");
  if (j.empty())
    throw ConfigError(std::string("sweep: axis '") + name + "' is empty");
  std::vector<double> out;
  for (const auto &v : j) {
    if (!v.is_number())
      throw ConfigError(std::string("sweep: axis '") + name + "' has a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

inline SweepAxes parse_sweep(const json &j) {
  if (!j.is_object())
    throw ConfigError("sweep: expected an object");
  reject_unknown(j, {"m", "delta", "theta", "spread"}, "sweep");
  if (j.empty())
    throw ConfigError("sweep: no axes declared");
  SweepAxes axes;
  if (j.contains("m"))
    for (double v : parse_axis(j.at("m"), "m")) {
      if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw ConfigError("sweep: axis 'm' must hold positive integers");
      axes.m.push_back(static_cast<std::size_t>(v));
    }
  if (j.contains("delta"))
    axes.delta = parse_axis(j.at("delta"), "delta");
  if (j.contains("theta"))
    axes.theta = parse_axis(j.at("theta"), "theta");
  if (j.contains("spread")) {
    axes.spread = parse_axis(j.at("spread"), "spread");
    for (double s : axes.spread)
      if (!(s >= 0.0 && s < 1.0))
        throw ConfigError("sweep: spread must lie in [0, 1)");
  }
  return axes;
}

} // namespace detail

inline ConfigDocument parse_config(const json &root) {
  if (!root.is_object())
    throw ConfigError("config: top level must be an object");
  detail::reject_unknown(root, {"theta", "units", "weights", "initial", "sweep"},
                         "config");
  std::optional<double> default_theta;
  if (root.contains("theta"))
    default_theta = detail::number_field(root, "theta", "config");

  ConfigDocument doc;
  if (!root.contains("units") || !root.at("units").is_array() ||
      root.at("units").empty())
    throw ConfigError("config: 'units' must be a non-empty list");
  std::size_t k = 0;
  for (const auto &u : root.at("units")) {
    const std::string where = "units[" + std::to_string(k++) + "]";
    const Model model = detail::parse_model(u, default_theta, where);
    std::size_t count = 1;
    if (u.contains("count")) {
      if (!u.at("count").is_number_unsigned() || u.at("count").get<std::size_t>() == 0)
        throw ConfigError(where + ": 'count' must be a positive integer");
      count = u.at("count").get<std::size_t>();
    }
    doc.units.insert(doc.units.end(), count, model);
  }
  const std::size_t m = doc.units.size();

  if (!root.contains("weights"))
    throw ConfigError("config: missing 'weights'");
  doc.weights = detail::parse_weights(root.at("weights"), m);
  if (root.at("weights").is_number())
    doc.uniform_weight = root.at("weights").get<double>();

  const json initial = root.value("initial", json("random"));
  if (initial.is_string()) {
    const auto s = initial.get<std::string>();
    if (s == "random")
      doc.initial = InitialKind::Random;
    else if (s == "zero")
      doc.initial = InitialKind::Zero;
    else
      throw ConfigError("initial: expected \"random\", \"zero\" or a list");
  } else if (initial.is_array()) {
    if (initial.size() != m)
      throw ConfigError("initial: expected " + std::to_string(m) +
                        " entries, got " + std::to_string(initial.size()));
    doc.initial = InitialKind::Explicit;
    for (std::size_t i = 0; i < m; ++i) {
      const auto &e = initial.at(i);
      if (e.is_number()) {
        doc.initial_states.push_back(doc.units[i].state_at(e.get<double>()));
      } else if (e.is_array()) {
        State x;
        for (const auto &v : e) {
          if (!v.is_number())
            throw ConfigError("initial: entry " + std::to_string(i + 1) +
                              " has a non-number");
          x.push_back(v.get<double>());
        }
        doc.initial_states.push_back(std::move(x));
      } else {
        throw ConfigError("initial: entry " + std::to_string(i + 1) +
                          " must be a number or a state vector");
      }
    }
  } else {
    throw ConfigError("initial: expected \"random\", \"zero\" or a list");
  }

  if (root.contains("sweep"))
    doc.sweep = detail::parse_sweep(root.at("sweep"));
  return doc;
}

inline ConfigDocument parse_config_text(const std::string &text,
                                        const std::string &origin = "config") {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return parse_config(root);
}

inline ConfigDocument read_config_file(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

// Satisfactions uniform in [0, theta_i), drawn unit by unit. Planar units
// also draw their angle uniformly in [0, 2 pi).
inline std::vector<State> random_initial_states(const std::vector<Model> &units,
                                                Rng &rng) {
  std::vector<State> out;
  out.reserve(units.size());
  for (const auto &u : units) {
    State x = u.state_at(uniform01(rng) * u.theta());
    if (u.kind() == ModelKind::Planar)
      x[1] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    out.push_back(std::move(x));
  }
  return out;
}

// Draws initial states (when random) from `seed` and validates the result.
inline NetworkConfig instantiate(const ConfigDocument &doc, std::uint64_t seed) {
  std::vector<State> states;
  switch (doc.initial) {
  case InitialKind::Random: {
    Rng rng(seed);
    states = random_initial_states(doc.units, rng);
    break;
  }
  case InitialKind::Zero:
    for (const auto &u : doc.units)
      states.push_back(u.state_at(0.0));
    break;
  case InitialKind::Explicit:
    states = doc.initial_states;
    break;
  }
  return NetworkConfig(doc.units, doc.weights, std::move(states));
}

inline NetworkConfig load_config(const std::filesystem::path &path,
                                 std::uint64_t seed = 0) {
  return instantiate(read_config_file(path), seed);
}

// Explicit form of a network: one unit object each, full weight matrix,
// full initial state vectors.
inline json to_json(const NetworkConfig &cfg) {
  json units = json::array();
  for (const auto &u : cfg.units()) {
    json j;
    j["model"] = std::string(to_string(u.kind()));
    j["theta"] = u.theta();
    if (const auto *p = u.as_linear()) {
      j["velocity"] = p->velocity;
    } else if (const auto *p = u.as_saturating()) {
      j["rate"] = p->rate;
      j["saturation"] = p->saturation;
    } else if (const auto *p = u.as_planar()) {
      j["drift"] = p->drift;
      j["wobble"] = p->wobble;
      j["angular_speed"] = p->angular_speed;
    } else {
      throw ConfigError("general ODE models cannot be written to a config file");
    }
    units.push_back(std::move(j));
  }
  json weights = json::array();
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto row = cfg.weights().row(i);
    weights.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  json initial = json::array();
  for (const auto &x : cfg.initial_states())
    initial.push_back(json(x));
  return json{{"units", units}, {"weights", weights}, {"initial", initial}};
}

} // namespace pulsenet

#pragma once

// Reference computations used only by the tests. Nothing here calls into
// Model::flow or Model::time_to_threshold.

#include <cmath>
#include <cstddef>
#include <functional>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

inline double linear_crossing(double s, double theta, double v) {
  return (theta - s) / v;
}

inline double saturating_crossing(double s, double theta, double rate,
                                  double saturation) {
  return std::log((saturation - s) / (saturation - theta)) / rate;
}

inline double saturating_flow(double s, double rate, double saturation,
                              double t) {
  return saturation - (saturation - s) * std::exp(-rate * t);
}

// Fixed-step RK4 on da/dt = drift + wobble sin(b), db/dt = w, stepped until a
// reaches theta; the crossing is placed by linear interpolation inside the
// final step.
inline double planar_crossing(double a, double b, double theta, double drift,
                              double wobble, double w, double h) {
  auto da = [&](double bb) { return drift + wobble * std::sin(bb); };
  double t = 0.0;
  while (true) {
    // b is linear in t, so the stages only need b at t, t+h/2, t+h.
    const double k1 = da(b);
    const double k2 = da(b + 0.5 * h * w);
    const double k4 = da(b + h * w);
    const double a_next = a + h / 6.0 * (k1 + 4.0 * k2 + k4);
    if (a_next >= theta)
      return t + h * (theta - a) / (a_next - a);
    a = a_next;
    b += h * w;
    t += h;
  }
}

// Closed-loop brute force of one cascade: repeatedly scan all units and
// add any unit whose accumulated input reaches its goal, until nothing
// changes. Returns the coalition.
inline std::set<std::size_t>
cascade_fixpoint(const std::vector<double> &pre, const std::vector<double> &theta,
                 const std::function<double(std::size_t, std::size_t)> &w,
                 const std::set<std::size_t> &initiators) {
  std::set<std::size_t> in = initiators;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t j = 0; j < pre.size(); ++j) {
      if (in.count(j))
        continue;
      double s = pre[j];
      for (std::size_t i : in)
        s += w(i, j);
      if (s >= theta[j]) {
        in.insert(j);
        changed = true;
      }
    }
  }
  return in;
}

} // namespace oracle

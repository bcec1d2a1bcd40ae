#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pulsenet/network.hpp"
#include "pulsenet/random.hpp"

using namespace pulsenet;
using Catch::Approx;

namespace {

NetworkConfig uniform_linear(std::size_t m, double theta, double delta,
                             double v = 1.0) {
  std::vector<Model> units(m, Model::linear(theta, v));
  std::vector<State> init(m, State{0.0});
  return NetworkConfig(units, WeightMatrix::uniform(m, delta), init);
}

NetworkConfig linear_with_velocities(const std::vector<double> &vs, double delta) {
  std::vector<Model> units;
  for (double v : vs)
    units.push_back(Model::linear(1.0, v));
  return NetworkConfig(units, WeightMatrix::uniform(vs.size(), delta),
                       std::vector<State>(vs.size(), State{0.0}));
}

WeightMatrix from_rows(std::vector<std::vector<double>> rows) {
  std::vector<double> flat;
  for (auto &r : rows)
    flat.insert(flat.end(), r.begin(), r.end());
  return WeightMatrix(rows.size(), flat);
}

} // namespace

TEST_CASE("weight matrix invariants", "[network]") {
  CHECK_THROWS_WITH(from_rows({{0.2, 0.3}, {0.3, 0.0}}),
                    Catch::Matchers::ContainsSubstring("nonzero diagonal"));
  CHECK_THROWS_AS(from_rows({{0.0, NAN}, {0.3, 0.0}}), ConfigError);
  CHECK_THROWS_AS(WeightMatrix(2, {0.0, 0.1, 0.1}), ConfigError);
  WeightMatrix w(3);
  CHECK_THROWS_AS(w.set(1, 1, 0.5), ConfigError);
  CHECK_THROWS_AS(w.set(3, 0, 0.5), std::out_of_range);
}

TEST_CASE("classify_cell", "[network]") {
  const auto w = from_rows({{0, 0.3, 0.1}, {-0.2, 0, -0.5}, {0.3, -0.1, 0}});
  CHECK(classify_cell(w, 0) == CellClass::Cooperative);
  CHECK(classify_cell(w, 1) == CellClass::Antagonist);
  CHECK(classify_cell(w, 2) == CellClass::Mixed);
  CHECK_THROWS_AS(classify_cell(w, 3), std::out_of_range);

  const WeightMatrix zero(3);
  CHECK(classify_cell(zero, 1) == CellClass::Cooperative);
  CHECK(is_zero_row(zero, 1));
  CHECK_FALSE(is_zero_row(w, 0));
}

TEST_CASE("is_complete", "[network]") {
  CHECK(is_complete(WeightMatrix::uniform(4, 0.3)));
  auto w = WeightMatrix::uniform(4, 0.3);
  w.set(2, 1, 0.0);
  CHECK_FALSE(is_complete(w));
  CHECK(is_complete(WeightMatrix(1)));
}

TEST_CASE("is_weak", "[network]") {
  CHECK_FALSE(is_weak(uniform_linear(3, 1.0, 0.3), 1e-3));
  CHECK(is_weak(uniform_linear(3, 1.0, 5e-4), 1e-3));
  CHECK(is_weak(uniform_linear(3, 1.0, 0.0), 1e-12));
  // Negative weights count by magnitude.
  std::vector<Model> units(2, Model::linear(1.0, 1.0));
  NetworkConfig anti(units, from_rows({{0, -0.3}, {-0.3, 0}}),
                     std::vector<State>(2, State{0.0}));
  CHECK_FALSE(is_weak(anti));
  CHECK_THROWS_AS(is_weak(anti, 0.0), std::invalid_argument);
}

TEST_CASE("is_large", "[network]") {
  CHECK(is_large(uniform_linear(19, 1.0, 0.3)));
  CHECK_FALSE(is_large(uniform_linear(18, 1.0, 0.3)));
  CHECK_FALSE(is_large(uniform_linear(100, 1.0, 0.0)));
  CHECK_FALSE(is_large(uniform_linear(1, 1.0, 0.0)));

  auto w = WeightMatrix::uniform(30, 0.3);
  w.set(4, 7, 0.0);
  NetworkConfig sparse(std::vector<Model>(30, Model::linear(1.0, 1.0)), w,
                       std::vector<State>(30, State{0.0}));
  CHECK_FALSE(is_large(sparse));

  std::vector<Model> units(3, Model::linear(1.0, 1.0));
  NetworkConfig mixed(units, from_rows({{0, 0.3, -0.1}, {0.3, 0, 0.3}, {0.3, 0.3, 0}}),
                      std::vector<State>(3, State{0.0}));
  CHECK_THROWS_AS(is_large(mixed), std::invalid_argument);
}

TEST_CASE("r_value", "[network]") {
  CHECK(r_value(uniform_linear(5, 1.0, 0.3)) == 4);
  CHECK(r_value(uniform_linear(5, 1.0, 1.0)) == 2);
  CHECK(r_value(uniform_linear(5, 1.0, 0.5)) == 3);
  CHECK_THROWS_AS(r_value(uniform_linear(5, 1.0, 0.0)), std::domain_error);
  CHECK_THROWS_AS(r_value(uniform_linear(1, 1.0, 0.0)), std::domain_error);
}

TEST_CASE("similarity", "[network]") {
  const auto identical = uniform_linear(19, 1.0, 0.3);
  CHECK(similarity_lhs(identical) == 1.0);
  CHECK(similarity_rhs(identical) == Approx(0.7));
  CHECK(is_similar(identical));

  std::vector<double> classes(19, 1.0);
  for (std::size_t i = 10; i < 19; ++i)
    classes[i] = 0.5;
  const auto two = linear_with_velocities(classes, 0.3);
  CHECK(similarity_lhs(two) == 0.5);
  CHECK_FALSE(is_similar(two));

  std::vector<double> spread;
  for (int i = 0; i < 19; ++i)
    spread.push_back(1.0 - 0.05 * i / 18.0);
  const auto hetero = linear_with_velocities(spread, 0.3);
  CHECK(similarity_lhs(hetero) == Approx(0.95).margin(1e-15));
  CHECK(is_similar(hetero));
  CHECK_FALSE(similarity_estimated(hetero));

  // Saturating cells are never similar enough at delta = 0.3: lhs = 1/2.
  std::vector<Model> sat(19, Model::saturating(1.0, 1.0, 2.0));
  NetworkConfig s(sat, WeightMatrix::uniform(19, 0.3),
                  std::vector<State>(19, State{0.0}));
  CHECK(similarity_lhs(s) == 0.5);
  CHECK(waiting_bound(s) == 1.0);
}

TEST_CASE("waiting bound", "[network]") {
  CHECK(waiting_bound(uniform_linear(19, 1.0, 0.3)) == 1.0);
  std::vector<Model> planar(3, Model::planar(1.0, 1.0, 0.2, 1.0));
  NetworkConfig p(planar, WeightMatrix::uniform(3, 0.3),
                  std::vector<State>(3, State{0.0, 0.0}));
  CHECK(waiting_bound(p) == Approx(1.25));
}

TEST_CASE("network config validation", "[network]") {
  std::vector<Model> units(2, Model::linear(1.0, 1.0));
  CHECK_THROWS_WITH(NetworkConfig(units, WeightMatrix::uniform(2, 0.1),
                                  {State{1.0}, State{0.0}}),
                    Catch::Matchers::ContainsSubstring("initial state not in Q"));
  CHECK_THROWS_AS(NetworkConfig(units, WeightMatrix::uniform(2, 0.1),
                                {State{-0.1}, State{0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NetworkConfig(units, WeightMatrix::uniform(3, 0.1),
                                {State{0.0}, State{0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NetworkConfig(units, WeightMatrix::uniform(2, 0.1), {State{0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NetworkConfig(units, WeightMatrix::uniform(2, 0.1),
                                {State{0.0, 1.0}, State{0.0}}),
                  ConfigError);
  CHECK_THROWS_AS(NetworkConfig({}, WeightMatrix(0), {}), ConfigError);
}

TEST_CASE("predicate properties", "[network][property]") {
  Rng rng(77);
  int large_seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = static_cast<std::size_t>(2 + rng() % 60);
    std::vector<Model> units;
    for (std::size_t i = 0; i < m; ++i)
      units.push_back(Model::linear(uniform(rng, 0.5, 1.0), uniform(rng, 0.5, 2.0)));
    WeightMatrix w(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j)
          w.set(i, j, uniform(rng, 0.3, 1.5));
    NetworkConfig cfg(units, w, std::vector<State>(m, State{0.0}));

    CHECK(similarity_lhs(cfg) <= 1.0);
    CHECK(is_large(cfg) == is_large(cfg));
    CHECK(r_value(cfg) == r_value(cfg));
    if (is_large(cfg)) {
      ++large_seen;
      CHECK(is_complete(cfg.weights()));
      const std::size_t r = r_value(cfg);
      CHECK(r * r <= m);
      CHECK(r <= static_cast<std::size_t>(std::ceil(std::sqrt(double(m)))));
    }
  }
  CHECK(large_seen > 20);
}

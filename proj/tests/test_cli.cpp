#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pulsenet/cli.hpp"

using namespace pulsenet;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::filesystem::path kConfigs = PULSENET_CONFIG_DIR;

std::filesystem::path scratch(const std::string &name) {
  const auto dir = std::filesystem::temp_directory_path() / "pulsenet_cli_test" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
      cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t column(const std::vector<std::string> &header, const std::string &name) {
  const auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  return static_cast<std::size_t>(it - header.begin());
}

RunSpec spec_for(Command c, const std::string &config, const std::string &out) {
  RunSpec s;
  s.command = c;
  s.config_path = kConfigs / config;
  s.out_dir = scratch(out);
  return s;
}

int dispatch_quiet(const RunSpec &s, std::string *err_text = nullptr) {
  std::stringstream out, err;
  const int code = dispatch(s, out, err);
  if (err_text)
    *err_text = err.str();
  return code;
}

} // namespace

TEST_CASE("simulate writes one events.csv per trial", "[cli]") {
  auto s = spec_for(Command::Simulate, "e1.json", "simulate");
  s.max_time = 20.0;
  s.trials = 3;
  s.sample = 0.1;
  std::stringstream out, err;
  REQUIRE(dispatch(s, out, err) == kExitOk);
  CHECK_THAT(out.str(), ContainsSubstring("coalition size histogram"));
  for (const char *t : {"trial_0000", "trial_0001", "trial_0002"}) {
    const auto rows = read_csv(s.out_dir / t / "events.csv");
    REQUIRE(rows.size() > 10);
    CHECK(rows[0] == std::vector<std::string>{"n", "t", "coalition_size", "members"});
    const auto samples = read_csv(s.out_dir / t / "samples.csv");
    CHECK(samples[0].size() == 20);
    CHECK(samples.size() == 202);
  }
}

TEST_CASE("simulate on the symmetric network", "[cli]") {
  auto s = spec_for(Command::Simulate, "e1.json", "symmetric");
  // Zero initial state through an explicit config.
  const auto path = s.out_dir / "e1_zero.json";
  std::filesystem::create_directories(s.out_dir);
  std::ofstream(path) << R"({"theta": 1, "units": [{"model": "linear", "velocity": 1,
      "count": 19}], "weights": 0.3, "initial": "zero"})";
  s.config_path = path;
  s.max_time = 20.0;
  REQUIRE(dispatch_quiet(s) == kExitOk);
  const auto rows = read_csv(s.out_dir / "trial_0000" / "events.csv");
  REQUIRE(rows.size() == 21);
  for (std::size_t k = 1; k < rows.size(); ++k)
    CHECK(rows[k][2] == "19");

  auto one = spec_for(Command::Simulate, "single.json", "single");
  one.max_events = 4;
  REQUIRE(dispatch_quiet(one) == kExitOk);
  const auto single = read_csv(one.out_dir / "trial_0000" / "events.csv");
  REQUIRE(single.size() == 5);
  for (std::size_t k = 1; k < single.size(); ++k)
    CHECK(single[k][3] == "1");
}

TEST_CASE("identical seeds give byte-identical events", "[cli]") {
  auto a = spec_for(Command::Simulate, "planar.json", "det_a");
  a.max_time = 15.0;
  a.seed = 2024;
  a.trials = 2;
  auto b = a;
  b.out_dir = scratch("det_b");
  auto c = a;
  c.out_dir = scratch("det_c");
  c.seed = 2025;
  REQUIRE(dispatch_quiet(a) == kExitOk);
  REQUIRE(dispatch_quiet(b) == kExitOk);
  REQUIRE(dispatch_quiet(c) == kExitOk);
  for (const char *t : {"trial_0000", "trial_0001"}) {
    const auto ea = slurp(a.out_dir / t / "events.csv");
    CHECK(!ea.empty());
    CHECK(ea == slurp(b.out_dir / t / "events.csv"));
    CHECK(ea != slurp(c.out_dir / t / "events.csv"));
  }
  CHECK(slurp(a.out_dir / "trial_0000" / "events.csv") !=
        slurp(a.out_dir / "trial_0001" / "events.csv"));
}

TEST_CASE("verify reports", "[cli]") {
  auto s = spec_for(Command::Verify, "e1.json", "verify");
  s.max_time = 20.0;
  s.trials = 10;
  std::stringstream out, err;
  REQUIRE(dispatch(s, out, err) == kExitOk);
  CHECK_THAT(out.str(), ContainsSubstring("violations: 0"));
  const auto rows = read_csv(s.out_dir / "report.csv");
  REQUIRE(rows.size() == 11);
  const auto &h = rows[0];
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k][column(h, "theorem1")] == "CONFIRMED");
    CHECK(rows[k][column(h, "waiting_time")] == "CONFIRMED");
    CHECK(rows[k][column(h, "theorem2")] == "CONFIRMED");
    CHECK(rows[k][column(h, "assertion_a")] == "CONFIRMED");
    CHECK(rows[k][column(h, "assertion_b")] == "CONFIRMED");
  }

  // Hypotheses unmet: vacuous everywhere, still exit 0.
  auto small = spec_for(Command::Verify, "e1.json", "verify_small");
  std::filesystem::create_directories(small.out_dir);
  const auto path = small.out_dir / "small.json";
  std::ofstream(path) << R"({"theta": 1, "units": [{"model": "linear", "velocity": 1,
      "count": 4}], "weights": 0.3})";
  small.config_path = path;
  small.max_time = 20.0;
  small.trials = 3;
  REQUIRE(dispatch_quiet(small) == kExitOk);
  const auto srows = read_csv(small.out_dir / "report.csv");
  for (std::size_t k = 1; k < srows.size(); ++k)
    CHECK(srows[k][column(srows[0], "theorem1")] == "VACUOUS");
}

TEST_CASE("verify flags an injected violating trace", "[cli]") {
  auto s = spec_for(Command::Verify, "e1.json", "violating");
  s.events_path = std::filesystem::path(PULSENET_CONFIG_DIR) / ".." / "tests" /
                  "data" / "violating_events.csv";
  s.max_time = 20.0;
  std::stringstream out, err;
  CHECK(dispatch(s, out, err) == kExitViolation);
  CHECK_THAT(out.str(), ContainsSubstring("VIOLATED"));
}

TEST_CASE("usage errors exit 2", "[cli]") {
  auto none = spec_for(Command::Simulate, "e1.json", "usage");
  std::string err;
  CHECK(dispatch_quiet(none, &err) == kExitUsage);
  CHECK_THAT(err, ContainsSubstring("--max-time"));

  auto both = none;
  both.max_time = 1.0;
  both.max_events = 3;
  CHECK(dispatch_quiet(both) == kExitUsage);

  auto zero_trials = none;
  zero_trials.max_time = 1.0;
  zero_trials.trials = 0;
  CHECK(dispatch_quiet(zero_trials) == kExitUsage);

  auto missing = none;
  missing.max_time = 1.0;
  missing.config_path = kConfigs / "nope.json";
  CHECK(dispatch_quiet(missing) == kExitUsage);

  auto empty_axis = spec_for(Command::Sweep, "e1.json", "empty_axis");
  std::filesystem::create_directories(empty_axis.out_dir);
  const auto path = empty_axis.out_dir / "empty.json";
  std::ofstream(path) << R"({"theta": 1, "units": [{"model": "linear", "velocity": 1}],
      "weights": 0.3, "sweep": {"m": [10], "delta": []}})";
  empty_axis.config_path = path;
  empty_axis.max_time = 5.0;
  CHECK(dispatch_quiet(empty_axis, &err) == kExitUsage);
  CHECK_THAT(err, ContainsSubstring("empty"));

  auto no_sweep = spec_for(Command::Sweep, "e1.json", "no_sweep");
  no_sweep.max_time = 5.0;
  CHECK(dispatch_quiet(no_sweep) == kExitUsage);
}

TEST_CASE("sweep over m flips largeness at 19", "[cli]") {
  auto s = spec_for(Command::Sweep, "sweep_m.json", "sweep_m");
  s.max_time = 12.0;
  s.trials = 2;
  REQUIRE(dispatch_quiet(s) == kExitOk);
  const auto rows = read_csv(s.out_dir / "sweep.csv");
  REQUIRE(rows.size() == 17);
  const auto &h = rows[0];
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const int m = std::stoi(rows[k][column(h, "m")]);
    CHECK(rows[k][column(h, "is_large")] == (m >= 19 ? "true" : "false"));
    CHECK(rows[k][column(h, "r_value")] == "4");
    CHECK(rows[k][column(h, "violations")] == "0");
    if (m >= 19)
      CHECK(rows[k][column(h, "trials_with_gc")] == "2");
  }
}

TEST_CASE("sweep over delta steps r down", "[cli]") {
  auto s = spec_for(Command::Sweep, "sweep_delta.json", "sweep_delta");
  s.max_time = 8.0;
  s.trials = 1;
  REQUIRE(dispatch_quiet(s) == kExitOk);
  const auto rows = read_csv(s.out_dir / "sweep.csv");
  const auto &h = rows[0];
  std::map<double, int> r_by_delta;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double delta = std::stod(rows[k][column(h, "delta")]);
    const int r = std::stoi(rows[k][column(h, "r_value")]);
    CHECK(r == 1 + static_cast<int>(std::floor(1.0 / delta)));
    r_by_delta[delta] = r;
  }
  REQUIRE(r_by_delta.size() >= 3);
  int prev = 1 << 30;
  for (const auto &[delta, r] : r_by_delta) {
    CHECK(r <= prev);
    prev = r;
  }
  CHECK(r_by_delta.begin()->second > r_by_delta.rbegin()->second);
}

TEST_CASE("sweep cells scale velocities", "[cli]") {
  const auto cfg = sweep_cell_network(Model::linear(1.0, 1.0), 5, 0.3, 2.0, 0.5, 9);
  CHECK(cfg.size() == 5);
  CHECK(cfg.theta(0) == 2.0);
  CHECK(cfg.unit(0).velocity_bounds().v_min == 1.0);
  CHECK(cfg.unit(4).velocity_bounds().v_min == Catch::Approx(0.5));
  CHECK(similarity_lhs(cfg) == Catch::Approx(0.5));
}

#include <doctest.h>

#include <set>
#include <sstream>
#include <string>

#include "crossflow/config.hpp"
#include "crossflow/errors.hpp"

using namespace crossflow;

namespace {

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults survive an empty file") {
  const auto spec = parse("# nothing\n\n");
  CHECK(spec.base.limits.v_f == 15.0);
  CHECK(spec.base.strategy.kind == StrategyKind::fifo);
  CHECK(spec.strategies == std::vector<StrategyKind>{StrategyKind::fifo});
  CHECK(spec.base.geometry.lane_length(3) == 250.0);
  CHECK(spec.seeds() == std::vector<std::uint64_t>{1});
}

TEST_CASE("sections prefix keys and rates arrive in veh/h") {
  const auto spec = parse(
      "seed = 7\n"
      "[scenario]\n"
      "id = demo   # trailing comment\n"
      "rates = 360, 0, 720, 90\n"
      "duration = 300\n"
      "[strategy]\n"
      "period = 1.5\n"
      "[mcts]\n"
      "iterations = 123\n"
      "[experiment]\n"
      "replications = 3\n"
      "strategies = dr, mcts\n");
  CHECK(spec.base.id == "demo");
  CHECK(spec.base.rates[0] == doctest::Approx(0.1));
  CHECK(spec.base.rates[1] == 0.0);
  CHECK(spec.base.rates[2] == doctest::Approx(0.2));
  CHECK(spec.base.duration == 300.0);
  CHECK(spec.base.strategy.period == 1.5);
  CHECK(spec.base.strategy.mcts.iterations == 123);
  CHECK(spec.seeds() == std::vector<std::uint64_t>{7, 8, 9});
  CHECK(spec.strategies == std::vector<StrategyKind>{StrategyKind::dr, StrategyKind::mcts});
}

TEST_CASE("geometry keys rebuild the intersection") {
  const auto spec = parse(
      "geometry.lane_lengths = 150, 250, 250, 250\n"
      "geometry.subzone_side = 4\n"
      "limits.v_f = 12\n");
  const auto& g = spec.base.geometry;
  CHECK(g.lane_length(1) == 150.0);
  CHECK(g.lane_length(2) == 250.0);
  CHECK(g.subzone_side() == 4.0);
  CHECK(g.conflict_zone_speed() == 12.0);
  CHECK(g.route(1, Movement::straight).entry_distance[1] == doctest::Approx(4.0));
}

TEST_CASE("route overrides replace one table entry") {
  const auto spec = parse(
      "geometry.route.3.straight = 1, 4\n"
      "geometry.offsets.3.straight = 0, 3.5\n"
      "geometry.clear.3.straight = 7\n");
  const auto& r = spec.base.geometry.route(3, Movement::straight);
  CHECK(r.subzones == std::vector<SubzoneId>{1, 4});
  CHECK(r.clear_distance == 7.0);
  CHECK_THROWS_AS(parse("geometry.route.1.straight = 3, 1\n"), ConfigError);
}

TEST_CASE("errors name the source line and key") {
  const auto unknown = error_of("scenario.id = x\nscenario.speed = 3\n");
  CHECK(unknown.find("test.cfg:2") != std::string::npos);
  CHECK(unknown.find("unknown key 'scenario.speed'") != std::string::npos);

  const auto bad_number = error_of("mcts.iterations = lots\n");
  CHECK(bad_number.find("mcts.iterations") != std::string::npos);
  CHECK(bad_number.find("test.cfg:1") != std::string::npos);

  CHECK(error_of("no equals sign\n").find("expected key = value") != std::string::npos);
  CHECK(error_of("[scenario\n").find("section") != std::string::npos);
  CHECK_FALSE(error_of("strategy = greedy\n").empty());
  CHECK_FALSE(error_of("limits.v_f = 40\n").empty());
  CHECK_FALSE(error_of("scenario.rate = -5\n").empty());
  CHECK_FALSE(error_of("experiment.replications = 0\n").empty());
  CHECK_FALSE(error_of("experiment.strategies = dr, dr\n").empty());
  CHECK_THROWS_AS(load_experiment("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("rate sets sweep several demand levels") {
  const auto spec = parse("experiment.rate_sets = 90,90,90,90; 90,180,270,360\n");
  REQUIRE(spec.rate_sweep.size() == 2);
  CHECK(spec.rate_sweep[1][3] == doctest::Approx(0.1));
}

TEST_CASE("unit conversion") {
  CHECK(per_hour_to_per_second(1800.0) == doctest::Approx(0.5));
  CHECK(per_second_to_per_hour(0.125) == doctest::Approx(450.0));
}

TEST_CASE("reference lists every key once with parseable defaults") {
  const auto keys = config_reference();
  std::set<std::string> seen;
  for (const auto& k : keys) {
    CHECK(seen.insert(k.key).second);
    CHECK_FALSE(k.description.empty());
  }
  for (const char* key : {"scenario.rate", "scenario.duration", "strategy", "dr.alpha",
                          "mcts.iterations", "mcts.exploration_c", "mcts.beta", "limits.gap",
                          "headway.left", "seed", "experiment.strategies", "report.traces"}) {
    CHECK_MESSAGE(seen.count(key) == 1, key);
  }
  ExperimentSpec spec;
  for (const auto& k : keys) {
    if (k.key.find('<') != std::string::npos || k.default_value == "-") continue;
    CHECK_NOTHROW(apply_setting(spec, k.key, k.default_value));
  }
  std::ostringstream os;
  print_config_reference(os);
  CHECK(os.str().find("mcts.iterations") != std::string::npos);
}

TEST_CASE("shipped scenario files parse") {
  for (const char* name : {"table1.cfg", "table2.cfg", "table3.cfg", "fairness.cfg", "smoke.cfg"}) {
    CHECK_NOTHROW(load_experiment(std::string(CROSSFLOW_SCENARIO_DIR) + "/" + name));
  }
}

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "crossflow/config.hpp"
#include "crossflow/errors.hpp"
#include "crossflow/experiment.hpp"

using namespace crossflow;

namespace {

ExperimentSpec parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in, "test.cfg");
}

std::string csv_of(const ExperimentReport& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

const char* kShort =
    "scenario.id = short\n"
    "scenario.duration = 90\n"
    "experiment.rates = 180, 360\n"
    "experiment.strategies = fifo, modified_fifo, dr, mcts\n"
    "experiment.replications = 2\n"
    "mcts.iterations = 100\n";

}  // namespace

TEST_CASE("table layout runs strategies within each rate") {
  const auto spec = load_experiment(std::string(CROSSFLOW_SCENARIO_DIR) + "/table1.cfg");
  const auto cells = expand_cells(spec);
  REQUIRE(cells.size() == 20);
  const StrategyKind order[] = {StrategyKind::mcts, StrategyKind::dr, StrategyKind::modified_fifo,
                                StrategyKind::fifo};
  const double rates[] = {90, 180, 270, 360, 450};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].config.strategy.kind == order[i % 4]);
    CHECK(cells[i].rates_per_hour[0] == doctest::Approx(rates[i / 4]));
    CHECK(cells[i].config.rates[2] == doctest::Approx(rates[i / 4] / 3600.0));
  }
  CHECK(cells[4].config.id == "sym-180");
}

TEST_CASE("empty traffic reports zeros") {
  const auto report = run_experiment(parse(
      "scenario.duration = 30\nexperiment.strategies = fifo, modified_fifo, dr, mcts\n"));
  REQUIRE(report.cells.size() == 4);
  for (const auto& cell : report.cells) {
    REQUIRE(cell.runs.size() == 1);
    const auto& r = cell.runs[0];
    CHECK(r.vehicle_count == 0);
    CHECK(r.mean_delay == 0.0);
    CHECK(r.mean_energy == 0.0);
    CHECK(r.mean_travel_time == 0.0);
  }
  CHECK(report.safety_violations() == 0);
}

TEST_CASE("csv header and one row per run") {
  const auto report = run_experiment(parse(kShort));
  const auto csv = csv_of(report);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "scenario_id,strategy,seed,mean_delay,mean_energy,mean_travel_time,std_travel_time,"
        "mean_compute_time,mean_sequences_considered,vehicle_count");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 16);
  CHECK(report.cells[0].runs[1].seed == 2);
  CHECK(report.safety_violations() == 0);
}

TEST_CASE("reruns are byte-identical and json round-trips") {
  auto spec = parse(kShort);
  spec.threads = 2;
  const auto a = run_experiment(spec);
  spec.threads = 1;
  const auto b = run_experiment(spec);
  CHECK(csv_of(a) == csv_of(b));
  CHECK(a == b);

  const auto j = to_json(a);
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back == a);
  CHECK(j["cells"].size() == a.cells.size());
  CHECK(j["cells"][0].contains("summary"));
}

TEST_CASE("reports land on disk") {
  const auto dir = std::filesystem::temp_directory_path() / "crossflow_experiment_test";
  std::filesystem::remove_all(dir);
  const auto report = run_experiment(parse("scenario.rate = 180\nscenario.duration = 40\n"),
                                     dir / "traces");
  write_reports(report, dir);
  CHECK(std::filesystem::exists(dir / "results.csv"));
  std::ifstream json(dir / "results.json");
  CHECK(report_from_json(nlohmann::json::parse(json)) == report);
  std::size_t traces = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "traces")) {
    (void)e;
    ++traces;
  }
  CHECK(traces == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("a single-vehicle snapshot has no gap") {
  OracleCheckOptions opt;
  opt.n = 1;
  opt.count = 10;
  const auto r = oracle_check(opt);
  REQUIRE(r.gaps.size() == 4);
  for (const auto& g : r.gaps) {
    CHECK(g.mean_gap == 0.0);
    CHECK(g.max_gap == 0.0);
  }
  REQUIRE(r.oracle_disagreement.has_value());
  CHECK(*r.oracle_disagreement == 0.0);
}

TEST_CASE("oracle check refuses oversize snapshots") {
  OracleCheckOptions opt;
  opt.n = 15;
  opt.count = 1;
  CHECK_THROWS_AS(oracle_check(opt), OracleCapError);
}

TEST_CASE("alpha sweep emits one row per alpha and alpha 0 equals plain DR") {
  auto spec = parse(
      "scenario.id = sweep\nscenario.rate = 720\nscenario.duration = 120\n"
      "experiment.replications = 2\nstrategy = dr\n");
  const auto rows = sweep_alpha(spec, {0.0, 0.005, 0.01, 0.03});
  REQUIRE(rows.size() == 4);
  CHECK(rows[2].alpha == 0.01);
  CHECK(rows[0].runs == 2);

  const auto plain = run_experiment(spec);
  double mean = 0.0;
  for (const auto& r : plain.cells[0].runs) mean += r.mean_travel_time / 2.0;
  CHECK(rows[0].mean_travel_time == doctest::Approx(mean).epsilon(1e-12));

  std::ostringstream os;
  write_alpha_csv(rows, os);
  CHECK(os.str().rfind("alpha,", 0) == 0);
}

TEST_CASE("run ids are stable") {
  CHECK(run_id("sym-90", StrategyKind::dr, 3) == "sym-90/dr/seed3");
}

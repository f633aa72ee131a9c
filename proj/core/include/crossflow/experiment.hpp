#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crossflow/config.hpp"
#include "crossflow/mcts.hpp"
#include "crossflow/simulator.hpp"

namespace crossflow {

/// One (cell, seed) run. The first ten fields are the results.csv columns, in order.
struct RunReport {
  std::string scenario_id;
  StrategyKind strategy = StrategyKind::fifo;
  std::uint64_t seed = 0;
  double mean_delay = 0.0;
  double mean_energy = 0.0;
  double mean_travel_time = 0.0;
  double std_travel_time = 0.0;
  double mean_compute_time = 0.0;
  double mean_sequences_considered = 0.0;
  std::size_t vehicle_count = 0;

  double std_delay = 0.0;
  std::size_t generated = 0;
  std::size_t queued_at_end = 0;
  std::size_t excluded_in_system = 0;
  std::size_t invocations = 0;
  std::size_t rejected_commits = 0;
  std::size_t lateral_violations = 0;
  std::size_t rear_end_violations = 0;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct CellReport {
  std::string scenario_id;
  StrategyKind strategy = StrategyKind::fifo;
  std::array<double, kLaneCount> rates{};  // veh/h/lane
  std::vector<RunReport> runs;              // seed order

  friend bool operator==(const CellReport&, const CellReport&) = default;
};

struct ExperimentReport {
  std::string name;
  std::vector<CellReport> cells;  // strategy-within-rate order

  [[nodiscard]] std::size_t safety_violations() const;
  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

struct Cell {
  ScenarioConfig config;  // seed unset
  std::array<double, kLaneCount> rates_per_hour{};
};

/// Rate sets crossed with strategies, strategies varying fastest.
std::vector<Cell> expand_cells(const ExperimentSpec& spec);

/// Metrics and safety audit of one finished run. Compute time is zeroed unless `timing`.
RunReport summarize_run(const History& history, bool timing);

/// Runs every (cell, seed) pair on up to spec.threads workers. Report order does not depend on
/// scheduling. With `trace_dir` set, one trace file per run is written there. A run that fails
/// rethrows as SimulationError prefixed with the run id.
ExperimentReport run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& trace_dir = {});

void write_csv(const ExperimentReport& report, std::ostream& out);
nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
/// results.csv and results.json under `dir`, created if missing.
void write_reports(const ExperimentReport& report, const std::filesystem::path& dir);

/// id,lane,movement,time,position,speed,control on the simulation grid, entry to exit.
void write_trace(const History& history, std::ostream& out);
std::string run_id(const std::string& scenario_id, StrategyKind strategy, std::uint64_t seed);

/// Crossing order a strategy produces on a static snapshot. DR inserts the vehicles one at a
/// time in id order; MCTS starts from the entry order.
CrossingSequence static_sequence(const IntersectionGeometry& geometry,
                                 const SchedulingProblem& problem, const StrategyConfig& config,
                                 std::uint64_t seed);

struct OracleCheckOptions {
  std::size_t n = 8;
  std::size_t count = 100;
  std::uint64_t seed = 1;
  MctsConfig mcts{5000};
};

struct StrategyGap {
  StrategyKind strategy = StrategyKind::fifo;
  double mean_gap = 0.0;
  double max_gap = 0.0;
};

struct OracleCheckReport {
  std::size_t n = 0;
  std::size_t count = 0;
  std::vector<StrategyGap> gaps;  // fifo, modified_fifo, dr, mcts
  /// Largest |J_exhaustive - J_bnb|; empty above the exhaustive cap.
  std::optional<double> oracle_disagreement;
  double oracle_seconds = 0.0;
};

/// Relative gaps (J - J*) / max(J*, 1e-9) of each strategy against the exact optimum on
/// `count` random snapshots. Throws OracleCapError when n exceeds the branch-and-bound cap.
OracleCheckReport oracle_check(const OracleCheckOptions& options);
void print_oracle_check(const OracleCheckReport& report, std::ostream& out);

struct AlphaRow {
  double alpha = 0.0;
  double mean_travel_time = 0.0;  // seed average of run means
  double std_travel_time = 0.0;   // seed average of run standard deviations
  double mean_travel_se = 0.0;    // standard error of the above across seeds
  double std_travel_se = 0.0;
  std::size_t runs = 0;
};

/// DR over the first rate set of `spec` for every alpha, each averaged over spec.seeds().
std::vector<AlphaRow> sweep_alpha(const ExperimentSpec& spec, const std::vector<double>& alphas);
void write_alpha_csv(const std::vector<AlphaRow>& rows, std::ostream& out);

}  // namespace crossflow

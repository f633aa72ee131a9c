#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossflow/simulator.hpp"
#include "crossflow/strategies.hpp"

namespace crossflow {

/// Replacement for one entry of the default route table; unset fields keep the default.
struct RouteOverride {
  LaneId lane = 1;
  Movement movement = Movement::straight;
  std::optional<std::vector<SubzoneId>> subzones;
  std::optional<std::vector<double>> entry_distance;
  std::optional<double> clear_distance;
};

/// One batch of runs: every rate set crossed with every strategy, each over the same seeds.
struct ExperimentSpec {
  std::string name = "experiment";
  ScenarioConfig base;  // geometry is rebuilt by finalize()
  std::array<double, kLaneCount> lane_lengths{250.0, 250.0, 250.0, 250.0};
  double subzone_side = 3.5;
  std::vector<RouteOverride> routes;
  /// Per-lane rate sets (veh/s) to sweep; empty runs `base.rates` as a single cell.
  std::vector<std::array<double, kLaneCount>> rate_sweep;
  std::vector<StrategyKind> strategies;  // empty: base.strategy.kind only
  std::size_t replications = 1;  // seeds base.seed, base.seed + 1, ...
  std::vector<double> alphas;    // for sweep-alpha
  std::size_t threads = 0;       // 0 = hardware concurrency
  bool timing = false;           // report measured compute time instead of 0
  bool traces = false;
  std::string output_dir = "results";

  [[nodiscard]] std::vector<std::uint64_t> seeds() const;
  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// Parses `key = value` lines. `#` starts a comment, `[section]` prefixes the keys that follow
/// with `section.`. Throws ConfigError naming the offending key or line.
ExperimentSpec parse_experiment(std::istream& in, std::string_view source = "<input>");
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Applies one key to `spec`. Rates are given in veh/h/lane.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Fills derived fields (conflict-zone speed from limits.v_f) and validates.
void finalize(ExperimentSpec& spec);

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string description;
};

/// Every recognised key with its default, in file order.
std::vector<ConfigKey> config_reference();
void print_config_reference(std::ostream& out);

double per_hour_to_per_second(double veh_per_hour);
double per_second_to_per_hour(double veh_per_second);

}  // namespace crossflow

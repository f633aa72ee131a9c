#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossflow/config.hpp"
#include "crossflow/errors.hpp"
#include "crossflow/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;
constexpr int kSafetyError = 4;

crossflow::ExperimentSpec load(const std::string& path) {
  crossflow::ExperimentSpec spec = crossflow::load_experiment(path);
  if (const char* seed = std::getenv("CROSSFLOW_SEED"); seed && *seed) {
    try {
      crossflow::apply_setting(spec, "seed", seed);
    } catch (const crossflow::ConfigError& e) {
      throw crossflow::ConfigError(std::string("CROSSFLOW_SEED: ") + e.what());
    }
  }
  return spec;
}

void print_summary(const crossflow::ExperimentReport& report) {
  std::printf("%-24s %-14s %6s %10s %10s %10s %10s\n", "scenario", "strategy", "runs", "delay",
              "energy", "travel", "travel_sd");
  for (const auto& cell : report.cells) {
    double delay = 0.0, energy = 0.0, travel = 0.0, sd = 0.0;
    for (const auto& r : cell.runs) {
      delay += r.mean_delay;
      energy += r.mean_energy;
      travel += r.mean_travel_time;
      sd += r.std_travel_time;
    }
    const double n = cell.runs.empty() ? 1.0 : static_cast<double>(cell.runs.size());
    std::printf("%-24s %-14s %6zu %10.4f %10.4f %10.3f %10.3f\n", cell.scenario_id.c_str(),
                std::string(crossflow::to_string(cell.strategy)).c_str(), cell.runs.size(),
                delay / n, energy / n, travel / n, sd / n);
  }
}

std::vector<double> parse_alphas(const std::string& list) {
  crossflow::ExperimentSpec scratch;
  crossflow::apply_setting(scratch, "experiment.alphas", list);
  return scratch.alphas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal-free intersection scheduling experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<std::string> out_dir;
  bool traces = false;
  auto* run = app.add_subcommand("run", "run every cell of an experiment file");
  run->add_option("spec-file", spec_path, "experiment file")->required();
  run->add_option("--out", out_dir, "report directory");
  run->add_flag("--traces", traces, "write per-run trajectory traces");

  crossflow::OracleCheckOptions oracle;
  auto* check = app.add_subcommand("oracle-check", "compare strategies with the exact optimum");
  check->add_option("--n", oracle.n, "vehicles per snapshot")->required();
  check->add_option("--count", oracle.count, "number of snapshots")->required();
  check->add_option("--seed", oracle.seed, "instance seed")->required();
  check->add_option("--iterations", oracle.mcts.iterations, "MCTS iteration budget")
      ->capture_default_str();

  std::string alphas_arg;
  auto* sweep = app.add_subcommand("sweep-alpha", "DR travel-time trade-off over alpha");
  sweep->add_option("spec-file", spec_path, "experiment file")->required();
  sweep->add_option("--alphas", alphas_arg, "comma-separated balancing factors")->required();

  app.add_subcommand("print-config-reference", "list every configuration key and default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (app.got_subcommand("print-config-reference")) {
      crossflow::print_config_reference(std::cout);
      return kOk;
    }
    if (app.got_subcommand(check)) {
      const auto report = crossflow::oracle_check(oracle);
      crossflow::print_oracle_check(report, std::cout);
      return kOk;
    }
    if (app.got_subcommand(sweep)) {
      const auto spec = load(spec_path);
      const auto rows = crossflow::sweep_alpha(spec, parse_alphas(alphas_arg));
      crossflow::write_alpha_csv(rows, std::cout);
      return kOk;
    }

    auto spec = load(spec_path);
    if (traces) spec.traces = true;
    const std::filesystem::path dir = out_dir ? std::filesystem::path(*out_dir)
                                              : std::filesystem::path(spec.output_dir);
    std::optional<std::filesystem::path> trace_dir;
    if (spec.traces) trace_dir = dir / "traces";
    const auto report = crossflow::run_experiment(spec, trace_dir);
    crossflow::write_reports(report, dir);
    print_summary(report);
    std::cerr << "wrote " << (dir / "results.csv").string() << " and "
              << (dir / "results.json").string() << '\n';
    if (const auto bad = report.safety_violations(); bad > 0) {
      std::cerr << "safety audit failed: " << bad << " violation(s)\n";
      return kSafetyError;
    }
    return kOk;
  } catch (const crossflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const crossflow::OracleCapError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const crossflow::SimulationError& e) {
    std::cerr << "runtime infeasibility: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const crossflow::InfeasibleError& e) {
    std::cerr << "runtime infeasibility: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

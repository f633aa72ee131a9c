#include "crossflow/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "crossflow/audit.hpp"
#include "crossflow/errors.hpp"
#include "crossflow/metrics.hpp"
#include "crossflow/oracles.hpp"

namespace crossflow {

namespace {

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // Lowest failing index, whatever order the workers finished in.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string rate_label(double veh_per_hour) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", veh_per_hour);
  return buf;
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Sample standard error of the mean.
double standard_error(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1)) /
         std::sqrt(static_cast<double>(xs.size()));
}

}  // namespace

std::size_t ExperimentReport::safety_violations() const {
  std::size_t n = 0;
  for (const auto& cell : cells) {
    for (const auto& run : cell.runs) n += run.lateral_violations + run.rear_end_violations;
  }
  return n;
}

std::string run_id(const std::string& scenario_id, StrategyKind strategy, std::uint64_t seed) {
  return scenario_id + "/" + std::string(to_string(strategy)) + "/seed" + std::to_string(seed);
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<std::array<double, kLaneCount>> rate_sets;
  if (spec.rate_sweep.empty()) {
    rate_sets.push_back(spec.base.rates);
  } else {
    rate_sets = spec.rate_sweep;
  }
  const std::vector<StrategyKind> strategies =
      spec.strategies.empty() ? std::vector<StrategyKind>{spec.base.strategy.kind} : spec.strategies;

  std::vector<Cell> cells;
  for (const auto& rates : rate_sets) {
    for (StrategyKind kind : strategies) {
      Cell cell;
      cell.config = spec.base;
      cell.config.rates = rates;
      cell.config.strategy.kind = kind;
      for (std::size_t l = 0; l < kLaneCount; ++l) {
        cell.rates_per_hour[l] = per_second_to_per_hour(rates[l]);
      }
      if (!spec.rate_sweep.empty()) {
        cell.config.id = spec.base.id + "-" + rate_label(cell.rates_per_hour[0]);
        for (std::size_t l = 1; l < kLaneCount; ++l) {
          if (cell.rates_per_hour[l] != cell.rates_per_hour[0]) {
            cell.config.id = spec.base.id + "-" + rate_label(cell.rates_per_hour[0]) + "_" +
                             rate_label(cell.rates_per_hour[1]) + "_" +
                             rate_label(cell.rates_per_hour[2]) + "_" +
                             rate_label(cell.rates_per_hour[3]);
            break;
          }
        }
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

RunReport summarize_run(const History& history, bool timing) {
  const MetricsReport m = collect_metrics(history);
  const AuditReport audit = audit_safety(history);
  RunReport r;
  r.scenario_id = history.scenario_id;
  r.strategy = history.strategy;
  r.seed = history.seed;
  r.mean_delay = m.mean_delay;
  r.mean_energy = m.mean_energy;
  r.mean_travel_time = m.mean_travel_time;
  r.std_travel_time = m.std_travel_time;
  r.mean_compute_time = timing ? m.mean_compute_time : 0.0;
  r.mean_sequences_considered = m.mean_sequences_considered;
  r.vehicle_count = m.vehicle_count;
  r.std_delay = m.std_delay;
  r.generated = m.generated;
  r.queued_at_end = m.queued_at_end;
  r.excluded_in_system = m.excluded_in_system;
  r.invocations = m.invocations;
  r.rejected_commits = history.rejected_commits;
  r.lateral_violations = audit.lateral;
  r.rear_end_violations = audit.rear_end;
  return r;
}

ExperimentReport run_experiment(const ExperimentSpec& spec,
                                const std::optional<std::filesystem::path>& trace_dir) {
  const std::vector<Cell> cells = expand_cells(spec);
  const std::vector<std::uint64_t> seeds = spec.seeds();
  if (trace_dir) std::filesystem::create_directories(*trace_dir);

  ExperimentReport report;
  report.name = spec.name;
  for (const auto& cell : cells) {
    CellReport c;
    c.scenario_id = cell.config.id;
    c.strategy = cell.config.strategy.kind;
    c.rates = cell.rates_per_hour;
    c.runs.resize(seeds.size());
    report.cells.push_back(std::move(c));
  }

  parallel_for(cells.size() * seeds.size(), spec.threads, [&](std::size_t job) {
    const std::size_t ci = job / seeds.size();
    const std::size_t si = job % seeds.size();
    ScenarioConfig config = cells[ci].config;
    config.seed = seeds[si];
    const std::string id = run_id(config.id, config.strategy.kind, config.seed);
    History history;
    try {
      history = simulate(config);
    } catch (const SimulationError& e) {
      throw SimulationError(id + ": " + e.what());
    } catch (const InfeasibleError& e) {
      throw SimulationError(id + ": " + e.what());
    }
    if (trace_dir) {
      std::string file = id;
      std::replace(file.begin(), file.end(), '/', '_');
      std::ofstream out(*trace_dir / (file + ".csv"));
      write_trace(history, out);
    }
    report.cells[ci].runs[si] = summarize_run(history, spec.timing);
  });
  return report;
}

void write_csv(const ExperimentReport& report, std::ostream& out) {
  out << "scenario_id,strategy,seed,mean_delay,mean_energy,mean_travel_time,std_travel_time,"
         "mean_compute_time,mean_sequences_considered,vehicle_count\n";
  for (const auto& cell : report.cells) {
    for (const auto& r : cell.runs) {
      out << r.scenario_id << ',' << to_string(r.strategy) << ',' << r.seed << ','
          << fixed(r.mean_delay, 6) << ',' << fixed(r.mean_energy, 6) << ','
          << fixed(r.mean_travel_time, 6) << ',' << fixed(r.std_travel_time, 6) << ','
          << fixed(r.mean_compute_time, 9) << ',' << fixed(r.mean_sequences_considered, 6) << ','
          << r.vehicle_count << '\n';
    }
  }
}

nlohmann::json to_json(const ExperimentReport& report) {
  using nlohmann::json;
  json cells = json::array();
  for (const auto& cell : report.cells) {
    json runs = json::array();
    std::vector<double> delay, energy, travel;
    for (const auto& r : cell.runs) {
      runs.push_back({{"seed", r.seed},
                      {"mean_delay", r.mean_delay},
                      {"mean_energy", r.mean_energy},
                      {"mean_travel_time", r.mean_travel_time},
                      {"std_travel_time", r.std_travel_time},
                      {"mean_compute_time", r.mean_compute_time},
                      {"mean_sequences_considered", r.mean_sequences_considered},
                      {"vehicle_count", r.vehicle_count},
                      {"std_delay", r.std_delay},
                      {"generated", r.generated},
                      {"queued_at_end", r.queued_at_end},
                      {"excluded_in_system", r.excluded_in_system},
                      {"invocations", r.invocations},
                      {"rejected_commits", r.rejected_commits},
                      {"audit", {{"lateral", r.lateral_violations}, {"rear_end", r.rear_end_violations}}}});
      delay.push_back(r.mean_delay);
      energy.push_back(r.mean_energy);
      travel.push_back(r.mean_travel_time);
    }
    cells.push_back({{"scenario_id", cell.scenario_id},
                     {"strategy", std::string(to_string(cell.strategy))},
                     {"rates_veh_per_hour", cell.rates},
                     {"runs", std::move(runs)},
                     {"summary",
                      {{"mean_delay", mean_of(delay)},
                       {"mean_energy", mean_of(energy)},
                       {"mean_travel_time", mean_of(travel)}}}});
  }
  return {{"experiment", report.name}, {"cells", std::move(cells)}};
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  report.name = j.at("experiment").get<std::string>();
  for (const auto& jc : j.at("cells")) {
    CellReport cell;
    cell.scenario_id = jc.at("scenario_id").get<std::string>();
    cell.strategy = parse_strategy(jc.at("strategy").get<std::string>());
    cell.rates = jc.at("rates_veh_per_hour").get<std::array<double, kLaneCount>>();
    for (const auto& jr : jc.at("runs")) {
      RunReport r;
      r.scenario_id = cell.scenario_id;
      r.strategy = cell.strategy;
      r.seed = jr.at("seed").get<std::uint64_t>();
      r.mean_delay = jr.at("mean_delay").get<double>();
      r.mean_energy = jr.at("mean_energy").get<double>();
      r.mean_travel_time = jr.at("mean_travel_time").get<double>();
      r.std_travel_time = jr.at("std_travel_time").get<double>();
      r.mean_compute_time = jr.at("mean_compute_time").get<double>();
      r.mean_sequences_considered = jr.at("mean_sequences_considered").get<double>();
      r.vehicle_count = jr.at("vehicle_count").get<std::size_t>();
      r.std_delay = jr.at("std_delay").get<double>();
      r.generated = jr.at("generated").get<std::size_t>();
      r.queued_at_end = jr.at("queued_at_end").get<std::size_t>();
      r.excluded_in_system = jr.at("excluded_in_system").get<std::size_t>();
      r.invocations = jr.at("invocations").get<std::size_t>();
      r.rejected_commits = jr.at("rejected_commits").get<std::size_t>();
      r.lateral_violations = jr.at("audit").at("lateral").get<std::size_t>();
      r.rear_end_violations = jr.at("audit").at("rear_end").get<std::size_t>();
      cell.runs.push_back(std::move(r));
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

void write_reports(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "results.csv");
    write_csv(report, csv);
  }
  std::ofstream json(dir / "results.json");
  json << to_json(report).dump(2) << '\n';
}

void write_trace(const History& history, std::ostream& out) {
  out << "id,lane,movement,time,position,speed,control\n";
  for (const auto& r : history.vehicles) {
    const double last = std::min(r.exit_time, history.end_time);
    const auto first_step = static_cast<long>(std::ceil(r.t0 / history.dt - 1e-9));
    const auto last_step = static_cast<long>(std::floor(last / history.dt + 1e-9));
    for (long k = first_step; k <= last_step; ++k) {
      const double t = static_cast<double>(k) * history.dt;
      out << r.id << ',' << r.lane << ',' << to_string(r.movement) << ',' << fixed(t, 2) << ','
          << fixed(r.trajectory.position(t), 4) << ',' << fixed(r.trajectory.velocity(t), 4) << ','
          << fixed(r.trajectory.control(t), 4) << '\n';
    }
  }
}

CrossingSequence static_sequence(const IntersectionGeometry& geometry,
                                 const SchedulingProblem& problem, const StrategyConfig& config,
                                 std::uint64_t seed) {
  const auto vehicles = problem.vehicles();
  switch (config.kind) {
    case StrategyKind::fifo:
      return fifo({}, vehicles);
    case StrategyKind::modified_fifo:
      return modified_fifo(vehicles);
    case StrategyKind::dr: {
      std::vector<Vehicle> ordered(vehicles.begin(), vehicles.end());
      std::sort(ordered.begin(), ordered.end(),
                [](const Vehicle& a, const Vehicle& b) { return a.id < b.id; });
      CrossingSequence sequence;
      std::vector<Vehicle> present;
      for (const auto& v : ordered) {
        present.push_back(v);
        const SchedulingProblem sub(geometry, problem.headways(), present,
                                    problem.seed());
        sequence = dynamic_resequencing(sub, sequence, v.id, config.alpha).sequence;
      }
      return sequence;
    }
    case StrategyKind::mcts:
      return mcts_search(problem, fifo({}, vehicles), config.mcts, seed).sequence;
  }
  return {};
}

OracleCheckReport oracle_check(const OracleCheckOptions& options) {
  if (options.n > kBranchAndBoundCap) {
    throw OracleCapError("oracle-check supports n <= " + std::to_string(kBranchAndBoundCap));
  }
  OracleCheckReport report;
  report.n = options.n;
  report.count = options.count;
  constexpr std::array<StrategyKind, 4> kinds{StrategyKind::fifo, StrategyKind::modified_fifo,
                                              StrategyKind::dr, StrategyKind::mcts};
  std::array<std::vector<double>, 4> gaps;
  const bool compare = options.n <= kExhaustiveCap;
  double disagreement = 0.0;
  double oracle_seconds = 0.0;
  for (std::size_t k = 0; k < options.count; ++k) {
    Rng rng(options.seed, k);
    const IntersectionGeometry geometry = IntersectionGeometry::symmetric();
    const SchedulingProblem problem = random_instance(options.n, rng, geometry);
    const auto start = std::chrono::steady_clock::now();
    const OracleResult best = branch_and_bound_oracle(problem);
    if (compare) {
      const OracleResult full = exhaustive_oracle(problem);
      disagreement = std::max(disagreement, std::abs(full.schedule.objective - best.schedule.objective));
    }
    oracle_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double j_star = best.schedule.objective;
    for (std::size_t s = 0; s < kinds.size(); ++s) {
      StrategyConfig config;
      config.kind = kinds[s];
      config.mcts = options.mcts;
      const CrossingSequence sequence = static_sequence(geometry, problem, config, options.seed * 1000003ULL + k);
      const double j = problem.objective(sequence);
      gaps[s].push_back((j - j_star) / std::max(j_star, 1e-9));
    }
  }
  for (std::size_t s = 0; s < kinds.size(); ++s) {
    StrategyGap g;
    g.strategy = kinds[s];
    g.mean_gap = mean_of(gaps[s]);
    g.max_gap = gaps[s].empty() ? 0.0 : *std::max_element(gaps[s].begin(), gaps[s].end());
    report.gaps.push_back(g);
  }
  if (compare) report.oracle_disagreement = disagreement;
  report.oracle_seconds = oracle_seconds;
  return report;
}

void print_oracle_check(const OracleCheckReport& report, std::ostream& out) {
  out << "instances " << report.count << ", n = " << report.n << '\n';
  out << "strategy,mean_gap,max_gap\n";
  for (const auto& g : report.gaps) {
    out << to_string(g.strategy) << ',' << fixed(g.mean_gap, 6) << ',' << fixed(g.max_gap, 6) << '\n';
  }
  if (report.oracle_disagreement) {
    out << "exhaustive vs branch-and-bound max |dJ| = " << *report.oracle_disagreement << '\n';
  } else {
    out << "exhaustive oracle skipped above n = " << kExhaustiveCap << '\n';
  }
}

std::vector<AlphaRow> sweep_alpha(const ExperimentSpec& spec, const std::vector<double>& alphas) {
  ExperimentSpec dr = spec;
  dr.strategies = {StrategyKind::dr};
  if (dr.rate_sweep.size() > 1) dr.rate_sweep.resize(1);
  const Cell cell = expand_cells(dr).front();
  const std::vector<std::uint64_t> seeds = spec.seeds();

  std::vector<RunReport> runs(alphas.size() * seeds.size());
  parallel_for(runs.size(), spec.threads, [&](std::size_t job) {
    ScenarioConfig config = cell.config;
    config.strategy.alpha = alphas[job / seeds.size()];
    config.seed = seeds[job % seeds.size()];
    try {
      runs[job] = summarize_run(simulate(config), false);
    } catch (const SimulationError& e) {
      throw SimulationError(run_id(config.id, config.strategy.kind, config.seed) + ": " + e.what());
    } catch (const InfeasibleError& e) {
      throw SimulationError(run_id(config.id, config.strategy.kind, config.seed) + ": " + e.what());
    }
  });

  std::vector<AlphaRow> rows;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    std::vector<double> means;
    std::vector<double> stds;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      means.push_back(runs[a * seeds.size() + s].mean_travel_time);
      stds.push_back(runs[a * seeds.size() + s].std_travel_time);
    }
    AlphaRow row;
    row.alpha = alphas[a];
    row.mean_travel_time = mean_of(means);
    row.std_travel_time = mean_of(stds);
    row.mean_travel_se = standard_error(means);
    row.std_travel_se = standard_error(stds);
    row.runs = seeds.size();
    rows.push_back(row);
  }
  return rows;
}

void write_alpha_csv(const std::vector<AlphaRow>& rows, std::ostream& out) {
  out << "alpha,mean_travel_time,std_travel_time,mean_travel_se,std_travel_se,runs\n";
  for (const auto& r : rows) {
    out << r.alpha << ',' << fixed(r.mean_travel_time, 6) << ',' << fixed(r.std_travel_time, 6)
        << ',' << fixed(r.mean_travel_se, 6) << ',' << fixed(r.std_travel_se, 6) << ','
        << r.runs << '\n';
  }
}

}  // namespace crossflow

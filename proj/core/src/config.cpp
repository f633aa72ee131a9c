#include "crossflow/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "crossflow/errors.hpp"

namespace crossflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("key '" + std::string(key) + "': expected " + std::string(want) + ", got '" +
                    std::string(value) + "'");
}

double to_double(std::string_view key, std::string_view value) {
  value = trim(value);
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, value, "a number");
  return out;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value) {
  value = trim(value);
  std::uint64_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    bad_value(key, value, "a non-negative integer");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  value = trim(value);
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  value = trim(value);
  if (value.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = value.find(',', start);
    out.push_back(trim(value.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> to_doubles(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (auto item : split_list(value)) out.push_back(to_double(key, item));
  return out;
}

template <std::size_t N>
std::array<double, N> to_array(std::string_view key, std::string_view value) {
  const auto xs = to_doubles(key, value);
  if (xs.size() != N) bad_value(key, value, std::to_string(N) + " comma-separated numbers");
  std::array<double, N> out{};
  std::copy(xs.begin(), xs.end(), out.begin());
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

template <class Range, class F>
std::string join(const Range& xs, F&& f) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ",";
    out += f(x);
  }
  return out;
}

std::array<double, kLaneCount> per_lane(double veh_per_hour) {
  const double r = per_hour_to_per_second(veh_per_hour);
  return {r, r, r, r};
}

struct Entry {
  std::string key;
  std::string description;
  std::function<std::string(const ExperimentSpec&)> get;
  std::function<void(ExperimentSpec&, std::string_view, std::string_view)> set;
};

std::vector<Entry> make_entries() {
  using S = ExperimentSpec;
  using V = std::string_view;
  std::vector<Entry> e;
  auto number = [&e](std::string key, std::string description, double& (*field)(S&)) {
    e.push_back({key, std::move(description),
                 [field](const S& s) { return num(field(const_cast<S&>(s))); },
                 [field](S& s, V k, V v) { field(s) = to_double(k, v); }});
  };

  e.push_back({"experiment.name", "label written into results.json",
               [](const S& s) { return s.name; }, [](S& s, V, V v) { s.name = trim(v); }});
  e.push_back({"experiment.rates", "uniform arrival rates to sweep (veh/h/lane); empty = scenario.rates",
               [](const S& s) {
                 std::string out;
                 for (const auto& set : s.rate_sweep) {
                   if (!out.empty()) out += ",";
                   out += num(per_second_to_per_hour(set[0]));
                 }
                 return out;
               },
               [](S& s, V k, V v) {
                 s.rate_sweep.clear();
                 for (double r : to_doubles(k, v)) s.rate_sweep.push_back(per_lane(r));
               }});
  e.push_back({"experiment.rate_sets", "per-lane rate sets to sweep, ';' between sets (veh/h/lane)",
               [](const S& s) {
                 std::string out;
                 for (const auto& set : s.rate_sweep) {
                   if (!out.empty()) out += ";";
                   out += join(set, [](double r) { return num(per_second_to_per_hour(r)); });
                 }
                 return out;
               },
               [](S& s, V k, V v) {
                 s.rate_sweep.clear();
                 std::size_t start = 0;
                 for (;;) {
                   const std::size_t semi = v.find(';', start);
                   const auto group = trim(v.substr(start, semi - start));
                   if (!group.empty()) {
                     auto set = to_array<kLaneCount>(k, group);
                     for (double& r : set) r = per_hour_to_per_second(r);
                     s.rate_sweep.push_back(set);
                   }
                   if (semi == std::string_view::npos) break;
                   start = semi + 1;
                 }
               }});
  e.push_back({"experiment.strategies", "strategies per rate, in report order; empty = strategy",
               [](const S& s) { return join(s.strategies, [](StrategyKind k) { return std::string(to_string(k)); }); },
               [](S& s, V, V v) {
                 s.strategies.clear();
                 for (auto item : split_list(v)) s.strategies.push_back(parse_strategy(item));
               }});
  e.push_back({"experiment.replications", "seeds per cell, counting up from seed",
               [](const S& s) { return std::to_string(s.replications); },
               [](S& s, V k, V v) { s.replications = to_unsigned(k, v); }});
  e.push_back({"experiment.alphas", "DR balancing factors for sweep-alpha",
               [](const S& s) { return join(s.alphas, num); },
               [](S& s, V k, V v) { s.alphas = to_doubles(k, v); }});
  e.push_back({"experiment.threads", "worker threads; 0 = one per core",
               [](const S& s) { return std::to_string(s.threads); },
               [](S& s, V k, V v) { s.threads = to_unsigned(k, v); }});
  e.push_back({"experiment.output_dir", "report directory (overridden by --out)",
               [](const S& s) { return s.output_dir; },
               [](S& s, V, V v) { s.output_dir = trim(v); }});
  e.push_back({"seed", "master seed (CROSSFLOW_SEED overrides)",
               [](const S& s) { return std::to_string(s.base.seed); },
               [](S& s, V k, V v) { s.base.seed = to_unsigned(k, v); }});

  e.push_back({"scenario.id", "scenario label in reports", [](const S& s) { return s.base.id; },
               [](S& s, V, V v) { s.base.id = trim(v); }});
  e.push_back({"scenario.rate", "arrival rate on every lane (veh/h/lane)",
               [](const S& s) { return num(per_second_to_per_hour(s.base.rates[0])); },
               [](S& s, V k, V v) { s.base.rates.fill(per_hour_to_per_second(to_double(k, v))); }});
  e.push_back({"scenario.rates", "arrival rate per lane 1..4 (veh/h/lane)",
               [](const S& s) {
                 return join(s.base.rates, [](double r) { return num(per_second_to_per_hour(r)); });
               },
               [](S& s, V k, V v) {
                 const auto r = to_array<kLaneCount>(k, v);
                 for (std::size_t l = 0; l < kLaneCount; ++l) s.base.rates[l] = per_hour_to_per_second(r[l]);
               }});
  number("scenario.duration", "arrival window (s)", [](S& s) -> double& { return s.base.duration; });
  number("scenario.dt", "simulation step (s)", [](S& s) -> double& { return s.base.dt; });
  e.push_back({"scenario.drain", "keep stepping after the window until the zone is empty",
               [](const S& s) { return std::string(s.base.drain ? "true" : "false"); },
               [](S& s, V k, V v) { s.base.drain = to_bool(k, v); }});
  number("scenario.drain_limit", "longest drain after the window (s)",
         [](S& s) -> double& { return s.base.drain_limit; });
  e.push_back({"scenario.movement_mix", "left,straight,right weights",
               [](const S& s) { return join(s.base.movement_mix, num); },
               [](S& s, V k, V v) { s.base.movement_mix = to_array<3>(k, v); }});
  number("simulation.freeze_horizon", "time before the conflict zone at which a plan is final (s)",
         [](S& s) -> double& { return s.base.freeze_horizon; });

  e.push_back({"geometry.lane_length", "control-zone length of every lane (m)",
               [](const S& s) { return num(s.lane_lengths[0]); },
               [](S& s, V k, V v) { s.lane_lengths.fill(to_double(k, v)); }});
  e.push_back({"geometry.lane_lengths", "control-zone length per lane 1..4 (m)",
               [](const S& s) { return join(s.lane_lengths, num); },
               [](S& s, V k, V v) { s.lane_lengths = to_array<kLaneCount>(k, v); }});
  number("geometry.subzone_side", "conflict subzone side (m)", [](S& s) -> double& { return s.subzone_side; });

  number("limits.v_min", "minimum speed (m/s)", [](S& s) -> double& { return s.base.limits.v_min; });
  number("limits.v_max", "maximum speed (m/s)", [](S& s) -> double& { return s.base.limits.v_max; });
  number("limits.a_min", "maximum braking (m/s^2, negative)", [](S& s) -> double& { return s.base.limits.a_min; });
  number("limits.a_max", "maximum acceleration (m/s^2)", [](S& s) -> double& { return s.base.limits.a_max; });
  number("limits.gap", "same-lane safety distance (m)", [](S& s) -> double& { return s.base.limits.gap; });
  number("limits.v_f", "entry, terminal and conflict-zone speed (m/s)", [](S& s) -> double& { return s.base.limits.v_f; });

  e.push_back({"headway.all", "sets headway.left, headway.straight and headway.right (s)",
               [](const S& s) { return num(s.base.headways.max()); },
               [](S& s, V k, V v) {
                 const double h = to_double(k, v);
                 s.base.headways.left = s.base.headways.straight = s.base.headways.right = h;
               }});
  number("headway.left", "subzone headway of left turns (s)", [](S& s) -> double& { return s.base.headways.left; });
  number("headway.straight", "subzone headway of straight movements (s)", [](S& s) -> double& { return s.base.headways.straight; });
  number("headway.right", "subzone headway of right turns (s)", [](S& s) -> double& { return s.base.headways.right; });

  e.push_back({"strategy", "fifo | modified_fifo | dr | mcts",
               [](const S& s) { return std::string(to_string(s.base.strategy.kind)); },
               [](S& s, V, V v) { s.base.strategy.kind = parse_strategy(trim(v)); }});
  number("strategy.period", "invocation period of modified_fifo and mcts (s)",
         [](S& s) -> double& { return s.base.strategy.period; });
  number("dr.alpha", "DR balancing factor", [](S& s) -> double& { return s.base.strategy.alpha; });
  e.push_back({"mcts.iterations", "iteration budget per invocation; 0 with no wall clock = entry order",
               [](const S& s) { return std::to_string(s.base.strategy.mcts.iterations); },
               [](S& s, V k, V v) { s.base.strategy.mcts.iterations = to_unsigned(k, v); }});
  number("mcts.wall_clock_ms", "wall-clock budget per invocation (ms); 0 = off",
         [](S& s) -> double& { return s.base.strategy.mcts.wall_clock_ms; });
  number("mcts.exploration_c", "UCB exploration constant", [](S& s) -> double& { return s.base.strategy.mcts.exploration_c; });
  number("mcts.beta", "order-distance penalty weight (<= 0)", [](S& s) -> double& { return s.base.strategy.mcts.beta; });
  e.push_back({"mcts.rollouts", "rollouts per expansion",
               [](const S& s) { return std::to_string(s.base.strategy.mcts.rollouts); },
               [](S& s, V k, V v) { s.base.strategy.mcts.rollouts = to_unsigned(k, v); }});
  number("mcts.epsilon", "random-step probability in rollouts", [](S& s) -> double& { return s.base.strategy.mcts.epsilon; });

  e.push_back({"report.timing", "write measured compute time (breaks byte-identical reruns)",
               [](const S& s) { return std::string(s.timing ? "true" : "false"); },
               [](S& s, V k, V v) { s.timing = to_bool(k, v); }});
  e.push_back({"report.traces", "write per-run trajectory traces (same as --traces)",
               [](const S& s) { return std::string(s.traces ? "true" : "false"); },
               [](S& s, V k, V v) { s.traces = to_bool(k, v); }});
  return e;
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = make_entries();
  return table;
}

RouteOverride& override_for(ExperimentSpec& spec, LaneId lane, Movement movement) {
  for (auto& r : spec.routes) {
    if (r.lane == lane && r.movement == movement) return r;
  }
  spec.routes.push_back({lane, movement, {}, {}, {}});
  return spec.routes.back();
}

// geometry.route.<lane>.<movement>, geometry.offsets.<lane>.<movement>,
// geometry.clear.<lane>.<movement>
bool apply_route_key(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  static constexpr std::string_view kinds[] = {"geometry.route.", "geometry.offsets.",
                                               "geometry.clear."};
  for (std::size_t kind = 0; kind < 3; ++kind) {
    if (!key.starts_with(kinds[kind])) continue;
    const std::string_view rest = key.substr(kinds[kind].size());
    const std::size_t dot = rest.find('.');
    if (dot == std::string_view::npos) break;
    const auto lane = to_unsigned(key, rest.substr(0, dot));
    if (lane < 1 || lane > kLaneCount) throw ConfigError("key '" + std::string(key) + "': lane must be 1..4");
    Movement movement;
    try {
      movement = parse_movement(rest.substr(dot + 1));
    } catch (const ConfigError&) {
      throw ConfigError("unknown key '" + std::string(key) + "'");
    }
    RouteOverride& r = override_for(spec, static_cast<LaneId>(lane), movement);
    if (kind == 0) {
      std::vector<SubzoneId> zones;
      for (auto item : split_list(value)) zones.push_back(static_cast<SubzoneId>(to_unsigned(key, item)));
      r.subzones = std::move(zones);
    } else if (kind == 1) {
      r.entry_distance = to_doubles(key, value);
    } else {
      r.clear_distance = to_double(key, value);
    }
    return true;
  }
  return false;
}

}  // namespace

double per_hour_to_per_second(double veh_per_hour) { return veh_per_hour / 3600.0; }
double per_second_to_per_hour(double veh_per_second) { return veh_per_second * 3600.0; }

std::vector<std::uint64_t> ExperimentSpec::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::size_t k = 0; k < replications; ++k) out.push_back(base.seed + k);
  return out;
}

void ExperimentSpec::validate() const {
  if (replications == 0) throw ConfigError("experiment.replications must be >= 1");
  for (const auto& set : rate_sweep) {
    for (double r : set) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("experiment rates must be >= 0");
    }
  }
  for (double a : alphas) {
    if (!(a >= 0.0)) throw ConfigError("experiment.alphas must be >= 0");
  }
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (strategies[i] == strategies[j]) {
        throw ConfigError("experiment.strategies lists '" + std::string(to_string(strategies[i])) +
                          "' twice");
      }
    }
  }
  base.validate();
}

void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  key = trim(key);
  for (const auto& entry : entries()) {
    if (entry.key == key) {
      entry.set(spec, key, value);
      return;
    }
  }
  if (apply_route_key(spec, key, value)) return;
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void finalize(ExperimentSpec& spec) {
  RouteTable table = default_route_table(spec.subzone_side);
  for (const auto& o : spec.routes) {
    Route& r = table[static_cast<std::size_t>(o.lane - 1)][static_cast<std::size_t>(o.movement)];
    if (o.subzones) r.subzones = *o.subzones;
    if (o.entry_distance) r.entry_distance = *o.entry_distance;
    if (o.clear_distance) r.clear_distance = *o.clear_distance;
  }
  spec.base.geometry =
      IntersectionGeometry(spec.lane_lengths, spec.subzone_side, spec.base.limits.v_f, table);
  if (spec.strategies.empty()) spec.strategies.push_back(spec.base.strategy.kind);
  spec.validate();
}

ExperimentSpec parse_experiment(std::istream& in, std::string_view source) {
  ExperimentSpec spec;
  std::string section;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(number);
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    std::string key(trim(text.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (!section.empty()) key = section + "." + key;
    try {
      apply_setting(spec, key, text.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  finalize(spec);
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return parse_experiment(in, path.string());
}

std::vector<ConfigKey> config_reference() {
  const ExperimentSpec defaults;
  std::vector<ConfigKey> out;
  for (const auto& entry : entries()) out.push_back({entry.key, entry.get(defaults), entry.description});
  out.push_back({"geometry.route.<lane>.<movement>", "built in",
                 "subzones visited, e.g. 1,2 (movement = left | straight | right)"});
  out.push_back({"geometry.offsets.<lane>.<movement>", "built in",
                 "distance from the conflict-zone entry to each subzone entry (m)"});
  out.push_back({"geometry.clear.<lane>.<movement>", "built in",
                 "distance from the conflict-zone entry until the route is cleared (m)"});
  return out;
}

void print_config_reference(std::ostream& out) {
  const auto keys = config_reference();
  std::size_t key_width = 3;
  std::size_t default_width = 7;
  for (const auto& k : keys) {
    key_width = std::max(key_width, k.key.size());
    default_width = std::max(default_width, k.default_value.size());
  }
  auto row = [&](const std::string& a, const std::string& b, const std::string& c) {
    out << a << std::string(key_width - a.size() + 2, ' ') << b
        << std::string(default_width - b.size() + 2, ' ') << c << '\n';
  };
  row("key", "default", "meaning");
  for (const auto& k : keys) row(k.key, k.default_value.empty() ? "-" : k.default_value, k.description);
}

}  // namespace crossflow

#include "crossflow/mcts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "crossflow/random.hpp"

namespace crossflow {

double ucb_score(double q, double penalty, double exploration_c, std::size_t parent_visits,
                 std::size_t visits) {
  if (visits == 0) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(std::max<std::size_t>(parent_visits, 1));
  return q + penalty + exploration_c * std::sqrt(std::log(n) / static_cast<double>(visits));
}

std::size_t select_child(std::span<const double> q, std::span<const double> penalty,
                         std::span<const std::size_t> visits, std::size_t parent_visits,
                         double exploration_c) {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double s = ucb_score(q[i], penalty.empty() ? 0.0 : penalty[i], exploration_c,
                               parent_visits, visits[i]);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

double normalized_score(double mean_j, double best_j, double worst_j) {
  const double range = worst_j - best_j;
  if (!(range > 0.0)) return 1.0;
  return std::clamp((worst_j - mean_j) / range, 0.0, 1.0);
}

namespace {

constexpr std::int32_t kNoChild = -1;

struct TreeNode {
  std::int32_t parent = kNoChild;
  std::array<std::int32_t, kLaneCount> child{kNoChild, kNoChild, kNoChild, kNoChild};
  std::size_t visits = 0;
  double sum_j = 0.0;
  std::size_t distance = 0;  // order distance of the partial sequence to the reference
  std::uint8_t open_lanes = 0;  // bitmask of lanes with an unplaced vehicle
  bool solved = false;
};

// Incremental state of a partial sequence while walking down the tree.
struct Partial {
  OccupancyState state;
  std::array<std::size_t, kLaneCount> next{};
  std::vector<char> placed;
  CrossingSequence sequence;
  double j = 0.0;
  std::size_t distance = 0;
};

class Searcher {
 public:
  Searcher(const SchedulingProblem& problem, const CrossingSequence& reference,
           const MctsConfig& config, std::uint64_t seed)
      : problem_(problem), config_(config), rng_(seed, 0x6d637473u) {
    const std::size_t n = problem.size();
    // Reference positions; vehicles it does not mention follow in id order.
    std::vector<std::size_t> ref_pos(n, std::numeric_limits<std::size_t>::max());
    std::size_t p = 0;
    for (VehicleId id : reference) {
      for (std::size_t k = 0; k < n; ++k) {
        if (problem.vehicle(k).id == id) ref_pos[k] = p++;
      }
    }
    std::vector<std::size_t> by_id(n);
    for (std::size_t k = 0; k < n; ++k) by_id[k] = k;
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
      return problem.vehicle(a).id < problem.vehicle(b).id;
    });
    for (std::size_t k : by_id) {
      if (ref_pos[k] == std::numeric_limits<std::size_t>::max()) ref_pos[k] = p++;
    }
    ahead_in_reference_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (ref_pos[b] < ref_pos[a] && conflicting(problem.vehicle(a), problem.vehicle(b))) {
          ahead_in_reference_[a].push_back(b);
        }
      }
    }
    seed_sequence_.resize(n);
    for (std::size_t k = 0; k < n; ++k) seed_sequence_[ref_pos[k]] = problem.vehicle(k).id;
  }

  StrategyResult run(MctsStats* stats) {
    StrategyResult result;
    const bool has_budget = config_.iterations > 0 || config_.wall_clock_ms > 0.0;
    if (!has_budget || problem_.size() == 0) {
      result.sequence = fifo({}, problem_.vehicles());
      result.schedule = problem_.propagate(result.sequence);
      result.stats.sequences_considered = 1;
      if (stats) *stats = {};
      return result;
    }

    best_sequence_ = is_feasible_sequence(seed_sequence_, problem_.vehicles())
                         ? seed_sequence_
                         : fifo({}, problem_.vehicles());
    best_j_ = problem_.objective(best_sequence_);
    worst_j_ = best_j_;
    considered_ = 1;

    nodes_.clear();
    nodes_.push_back(TreeNode{});
    nodes_[0].open_lanes = open_lanes(initial().next);

    const auto start = std::chrono::steady_clock::now();
    std::size_t iterations = 0;
    while (!nodes_[0].solved) {
      if (config_.iterations > 0 && iterations >= config_.iterations) break;
      if (config_.wall_clock_ms > 0.0) {
        const std::chrono::duration<double, std::milli> elapsed =
            std::chrono::steady_clock::now() - start;
        if (elapsed.count() >= config_.wall_clock_ms) break;
      }
      iterate();
      ++iterations;
    }

    result.sequence = best_sequence_;
    result.schedule = problem_.propagate(result.sequence);
    result.stats.sequences_considered = considered_;
    if (stats) {
      stats->iterations = iterations;
      stats->tree_nodes = nodes_.size();
      stats->exhausted = nodes_[0].solved;
    }
    return result;
  }

 private:
  [[nodiscard]] Partial initial() const {
    Partial p;
    p.state = problem_.seed();
    p.placed.assign(problem_.size(), 0);
    p.sequence.reserve(problem_.size());
    return p;
  }

  [[nodiscard]] std::uint8_t open_lanes(const std::array<std::size_t, kLaneCount>& next) const {
    std::uint8_t mask = 0;
    for (std::size_t l = 0; l < kLaneCount; ++l) {
      if (next[l] < problem_.lanes()[l].size()) mask |= static_cast<std::uint8_t>(1u << l);
    }
    return mask;
  }

  [[nodiscard]] std::size_t front(const Partial& p, std::size_t lane) const {
    return problem_.lanes()[lane][p.next[lane]];
  }

  void place(Partial& p, std::size_t lane) const {
    const std::size_t k = front(p, lane);
    const double first = problem_.first_arrival(k, p.state);
    problem_.occupy(k, first, p.state);
    p.j += problem_.delay(k, first);
    if (config_.beta != 0.0) {
      for (std::size_t b : ahead_in_reference_[k]) {
        if (!p.placed[b]) ++p.distance;
      }
    }
    p.placed[k] = 1;
    p.sequence.push_back(problem_.vehicle(k).id);
    ++p.next[lane];
  }

  // Open lanes ordered by the id of their front vehicle.
  [[nodiscard]] std::vector<std::size_t> candidate_lanes(const Partial& p) const {
    std::vector<std::size_t> lanes;
    for (std::size_t l = 0; l < kLaneCount; ++l) {
      if (p.next[l] < problem_.lanes()[l].size()) lanes.push_back(l);
    }
    std::sort(lanes.begin(), lanes.end(), [&](std::size_t a, std::size_t b) {
      return problem_.vehicle(front(p, a)).id < problem_.vehicle(front(p, b)).id;
    });
    return lanes;
  }

  std::size_t rollout_choice(const Partial& p, const std::vector<std::size_t>& lanes) {
    const bool explore = rng_.uniform() < config_.epsilon;
    if (lanes.size() == 1) return lanes.front();
    if (explore) return lanes[rng_.index(lanes.size())];
    std::size_t best = lanes.front();
    double best_delay = std::numeric_limits<double>::infinity();
    for (std::size_t l : lanes) {
      const std::size_t k = front(p, l);
      const double d = problem_.delay(k, problem_.first_arrival(k, p.state));
      if (d < best_delay) {
        best_delay = d;
        best = l;
      }
    }
    return best;
  }

  std::int32_t add_child(std::int32_t parent, std::size_t lane, const Partial& after) {
    TreeNode node;
    node.parent = parent;
    node.distance = after.distance;
    node.open_lanes = open_lanes(after.next);
    node.solved = node.open_lanes == 0;
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    nodes_[static_cast<std::size_t>(parent)].child[lane] = id;
    return id;
  }

  void record(const Partial& complete) {
    ++considered_;
    worst_j_ = std::max(worst_j_, complete.j);
    if (complete.j < best_j_ ||
        (complete.j == best_j_ && complete.sequence < best_sequence_)) {
      best_j_ = complete.j;
      best_sequence_ = complete.sequence;
    }
  }

  [[nodiscard]] double q_of(const TreeNode& node) const {
    return normalized_score(node.sum_j / static_cast<double>(node.visits), best_j_, worst_j_);
  }

  void iterate() {
    Partial p = initial();
    std::int32_t current = 0;

    // Selection down to a node with an untried child.
    for (;;) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(current)];
      const auto lanes = candidate_lanes(p);
      std::vector<std::size_t> untried;
      for (std::size_t l : lanes) {
        if (node.child[l] == kNoChild) untried.push_back(l);
      }
      if (!untried.empty()) {
        const std::size_t lane = untried[rng_.index(untried.size())];
        place(p, lane);
        current = add_child(current, lane, p);
        break;
      }
      std::size_t chosen = lanes.front();
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t l : lanes) {
        const TreeNode& c = nodes_[static_cast<std::size_t>(node.child[l])];
        if (c.solved) continue;
        const double s = ucb_score(q_of(c), order_penalty(config_.beta, c.distance),
                                   config_.exploration_c, node.visits, c.visits);
        if (s > best_score) {
          best_score = s;
          chosen = l;
        }
      }
      place(p, chosen);
      current = node.child[chosen];
    }
    const std::int32_t expanded = current;

    // Rollout; its path joins the tree.
    Partial first_rollout = p;
    for (;;) {
      const auto lanes = candidate_lanes(first_rollout);
      if (lanes.empty()) break;
      const std::size_t lane = rollout_choice(first_rollout, lanes);
      place(first_rollout, lane);
      current = add_child(current, lane, first_rollout);
    }
    record(first_rollout);
    double value = first_rollout.j;

    // Extra rollouts from the expanded node only sharpen its value estimate.
    for (std::size_t r = 1; r < config_.rollouts; ++r) {
      Partial extra = p;
      for (;;) {
        const auto lanes = candidate_lanes(extra);
        if (lanes.empty()) break;
        place(extra, rollout_choice(extra, lanes));
      }
      record(extra);
      value += extra.j;
    }
    const double mean_value = value / static_cast<double>(config_.rollouts);

    // Backpropagation; nodes below the expanded one carry the first rollout's value.
    bool above_expanded = false;
    for (std::int32_t n = current; n != kNoChild; n = nodes_[static_cast<std::size_t>(n)].parent) {
      auto& node = nodes_[static_cast<std::size_t>(n)];
      above_expanded = above_expanded || n == expanded;
      ++node.visits;
      node.sum_j += above_expanded ? mean_value : first_rollout.j;
    }

    // Mark fully explored subtrees.
    for (std::int32_t n = nodes_[static_cast<std::size_t>(current)].parent; n != kNoChild;
         n = nodes_[static_cast<std::size_t>(n)].parent) {
      auto& node = nodes_[static_cast<std::size_t>(n)];
      bool solved = true;
      for (std::size_t l = 0; l < kLaneCount && solved; ++l) {
        if (!(node.open_lanes & (1u << l))) continue;
        solved = node.child[l] != kNoChild &&
                 nodes_[static_cast<std::size_t>(node.child[l])].solved;
      }
      if (!solved) break;
      node.solved = true;
    }
  }

  const SchedulingProblem& problem_;
  const MctsConfig& config_;
  Rng rng_;
  std::vector<std::vector<std::size_t>> ahead_in_reference_;
  CrossingSequence seed_sequence_;
  std::vector<TreeNode> nodes_;
  CrossingSequence best_sequence_;
  double best_j_ = 0.0;
  double worst_j_ = 0.0;
  std::size_t considered_ = 0;
};

}  // namespace

StrategyResult mcts_search(const SchedulingProblem& problem, const CrossingSequence& reference,
                           const MctsConfig& config, std::uint64_t seed, MctsStats* stats) {
  Searcher searcher(problem, reference, config, seed);
  return searcher.run(stats);
}

}  // namespace crossflow

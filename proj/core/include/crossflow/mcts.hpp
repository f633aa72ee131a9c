#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "crossflow/scheduling.hpp"
#include "crossflow/strategies.hpp"

namespace crossflow {

/// Q + P + C * sqrt(ln n / n_i).
double ucb_score(double q, double penalty, double exploration_c, std::size_t parent_visits,
                 std::size_t visits);

/// P = beta * D.
inline double order_penalty(double beta, std::size_t distance) {
  return beta * static_cast<double>(distance);
}

/// Index of the child maximising ucb_score; the first index wins ties.
std::size_t select_child(std::span<const double> q, std::span<const double> penalty,
                         std::span<const std::size_t> visits, std::size_t parent_visits,
                         double exploration_c);

/// Maps a mean objective into [0, 1] against the best and worst objective seen so far. A
/// degenerate window scores 1.
double normalized_score(double mean_j, double best_j, double worst_j);

struct MctsStats {
  std::size_t iterations = 0;
  std::size_t tree_nodes = 0;
  bool exhausted = false;  // every feasible sequence was evaluated
};

/// Tree search over crossing sequences. The root is the empty sequence; each child appends
/// the front vehicle of one lane. Every iteration descends by the penalised UCB rule, expands
/// one untried child at random and completes it with an epsilon-greedy minimal-delay rollout.
/// The whole rollout path joins the tree and fully explored subtrees are skipped, so each
/// iteration evaluates a sequence not seen before. `reference` seeds the best-so-far and
/// anchors the order-distance penalty. With no budget the result is the entry order.
StrategyResult mcts_search(const SchedulingProblem& problem, const CrossingSequence& reference,
                           const MctsConfig& config, std::uint64_t seed,
                           MctsStats* stats = nullptr);

}  // namespace crossflow

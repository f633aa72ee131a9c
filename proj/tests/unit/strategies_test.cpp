#include <doctest.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "crossflow/errors.hpp"
#include "crossflow/experiment.hpp"
#include "crossflow/oracles.hpp"
#include "crossflow/strategies.hpp"
#include "support/brute.hpp"
#include "support/builders.hpp"

using namespace crossflow;
using crossflow::testing::make_vehicle;
using crossflow::testing::reference_objective;

TEST_CASE("fifo appends newcomers") {
  const auto g = IntersectionGeometry::symmetric();
  const std::vector<Vehicle> vs{make_vehicle(g, 1, 1, Movement::straight, 10.0),
                                make_vehicle(g, 2, 2, Movement::straight, 11.0),
                                make_vehicle(g, 3, 3, Movement::left, 12.0)};
  CHECK(fifo({1, 2}, vs) == CrossingSequence{1, 2, 3});
  CHECK(fifo({}, vs) == CrossingSequence{1, 2, 3});
}

TEST_CASE("fifo drops departed vehicles") {
  const auto g = IntersectionGeometry::symmetric();
  const std::vector<Vehicle> vs{make_vehicle(g, 2, 2, Movement::straight, 11.0),
                                make_vehicle(g, 3, 3, Movement::left, 12.0)};
  CHECK(fifo({1, 2, 3}, vs) == CrossingSequence{2, 3});
}

TEST_CASE("fifo output is always in entry order") {
  const auto g = IntersectionGeometry::symmetric();
  std::vector<Vehicle> active;
  CrossingSequence seq;
  for (VehicleId id = 1; id <= 30; ++id) {
    active.push_back(make_vehicle(g, id, 1 + id % 4, Movement::straight, id));
    if (id % 3 == 0) active.erase(active.begin());
    seq = fifo(seq, active);
    CHECK(std::is_sorted(seq.begin(), seq.end()));
    CHECK(seq.size() == active.size());
  }
}

TEST_CASE("modified fifo sorts by remaining distance") {
  const auto g = IntersectionGeometry::symmetric();
  const std::vector<Vehicle> vs{make_vehicle(g, 1, 1, Movement::straight, 10.0, 50.0),
                                make_vehicle(g, 2, 2, Movement::straight, 11.0, 80.0),
                                make_vehicle(g, 3, 3, Movement::straight, 12.0, 30.0)};
  CHECK(modified_fifo(vs) == CrossingSequence{3, 1, 2});
}

TEST_CASE("modified fifo equals fifo under homogeneous kinematics") {
  const auto g = IntersectionGeometry::symmetric();
  const double now = 20.0, v = 15.0;
  std::vector<Vehicle> vs;
  for (VehicleId id = 1; id <= 8; ++id) {
    const double t0 = 1.0 * id;
    auto veh = make_vehicle(g, id, 1 + id % 4, kMovements[id % 3], t0 + 250.0 / v,
                            250.0 - v * (now - t0));
    veh.t0 = t0;
    vs.push_back(veh);
  }
  CHECK(modified_fifo(vs) == fifo({}, vs));
}

TEST_CASE("shorter lane goes first on simultaneous entries") {
  const auto g = IntersectionGeometry::symmetric().with_lane_length(2, 150.0);
  const std::vector<Vehicle> vs{
      make_vehicle(g, 1, 1, Movement::straight, 250.0 / 15.0, g.lane_length(1)),
      make_vehicle(g, 2, 2, Movement::straight, 150.0 / 15.0, g.lane_length(2))};
  CHECK(modified_fifo(vs) == CrossingSequence{2, 1});
  CHECK(fifo({}, vs) == CrossingSequence{1, 2});
}

TEST_CASE("resequencing into an empty sequence") {
  const auto g = IntersectionGeometry::symmetric();
  const SchedulingProblem p(g, HeadwayConfig{}, {make_vehicle(g, 1, 1, Movement::left, 14.0)});
  const auto r = dynamic_resequencing(p, {}, 1, 0.0);
  CHECK(r.sequence == CrossingSequence{1});
  CHECK(r.schedule.first_arrival(1) == 14.0);
  CHECK(r.schedule.objective == 0.0);
  CHECK(r.stats.sequences_considered == 1);
}

TEST_CASE("balancing factor acceptance arithmetic") {
  CHECK(improves_enough(9.9, 10.0, 0.005));
  CHECK_FALSE(improves_enough(9.96, 10.0, 0.005));
  CHECK_FALSE(improves_enough(10.0, 10.0, 0.0));
  CHECK(improves_enough(9.999, 10.0, 0.0));
}

TEST_CASE("insertion candidates start after the same-lane predecessor") {
  const auto g = IntersectionGeometry::symmetric();
  const std::vector<Vehicle> vs{make_vehicle(g, 1, 1, Movement::straight, 10.0),
                                make_vehicle(g, 2, 2, Movement::straight, 11.0),
                                make_vehicle(g, 3, 3, Movement::straight, 12.0),
                                make_vehicle(g, 4, 2, Movement::straight, 13.0)};
  const auto c = insertion_candidates({1, 2, 3}, 4, vs);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == CrossingSequence{1, 2, 3, 4});
  CHECK(c[1] == CrossingSequence{1, 2, 4, 3});
  CHECK(insertion_candidates({1, 3}, 4, std::vector<Vehicle>{vs[0], vs[2], vs[3]}).size() == 3);
}

TEST_CASE("resequencing finds the best insertion and never beats the optimum") {
  Rng rng(31, 0);
  const auto g = IntersectionGeometry::symmetric();
  for (int i = 0; i < 100; ++i) {
    const auto p = random_instance(2 + i % 7, rng, g);
    const VehicleId newcomer = p.vehicle(p.size() - 1).id;
    // previous order: optimum over the others
    std::vector<Vehicle> rest(p.vehicles().begin(), p.vehicles().end() - 1);
    const SchedulingProblem q(g, p.headways(), rest);
    const auto prev = exhaustive_oracle(q).sequence;

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t pos = 0; pos <= prev.size(); ++pos) {
      CrossingSequence c = prev;
      c.insert(c.begin() + static_cast<std::ptrdiff_t>(pos), newcomer);
      if (!crossflow::testing::lane_order_ok(c, p.vehicles())) continue;
      best = std::min(best, reference_objective(c, p.vehicles(), g, p.headways()));
    }
    const auto r = dynamic_resequencing(p, prev, newcomer, 0.0);
    CHECK(r.schedule.objective == doctest::Approx(best).epsilon(1e-12));
    CHECK(r.schedule.objective >= exhaustive_oracle(p).schedule.objective - 1e-9);
    CrossingSequence tail = prev;
    tail.push_back(newcomer);
    CHECK(r.schedule.objective <= p.objective(tail) + 1e-12);
  }
}

TEST_CASE("a larger balancing factor only keeps the sequence closer to the tail") {
  Rng rng(32, 0);
  const auto g = IntersectionGeometry::symmetric();
  for (int i = 0; i < 50; ++i) {
    const auto p = random_instance(7, rng, g);
    CrossingSequence prev;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) prev.push_back(p.vehicle(k).id);
    const VehicleId newcomer = p.vehicle(p.size() - 1).id;
    const auto plain = dynamic_resequencing(p, prev, newcomer, 0.0);
    const auto damped = dynamic_resequencing(p, prev, newcomer, 0.5);
    CHECK(damped.schedule.objective >= plain.schedule.objective - 1e-12);
    CHECK(plain.stats.sequences_considered == damped.stats.sequences_considered);
  }
}

TEST_CASE("static strategies on snapshots") {
  Rng rng(33, 0);
  const auto g = IntersectionGeometry::symmetric();
  for (int i = 0; i < 20; ++i) {
    const auto p = random_instance(8, rng, g);
    const double opt = exhaustive_oracle(p).schedule.objective;
    for (auto kind : {StrategyKind::fifo, StrategyKind::modified_fifo, StrategyKind::dr,
                      StrategyKind::mcts}) {
      StrategyConfig cfg;
      cfg.kind = kind;
      cfg.mcts.iterations = 200;
      const auto seq = static_sequence(g, p, cfg, 1);
      CHECK(is_feasible_sequence(seq, p.vehicles()));
      CHECK(p.objective(seq) >= opt - 1e-9);
    }
  }
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("modified_fifo") == StrategyKind::modified_fifo);
  CHECK(to_string(StrategyKind::mcts) == "mcts");
  CHECK_THROWS_AS(parse_strategy("random"), ConfigError);
  CHECK(is_event_driven(StrategyKind::dr));
  CHECK_FALSE(is_event_driven(StrategyKind::mcts));
  StrategyConfig cfg;
  cfg.alpha = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.mcts.beta = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

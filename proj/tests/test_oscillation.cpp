#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "predlearn/oscillation.hpp"

using namespace predlearn;

namespace {

FiringTrace synthetic(long steps, std::vector<std::string> ids) {
  FiringTrace t;
  t.unit_ids = std::move(ids);
  t.activations = Eigen::MatrixXd::Zero(steps, static_cast<Eigen::Index>(t.unit_ids.size()));
  return t;
}

void pulse(FiringTrace& t, std::string_view unit, long from, long to_inclusive, double value = 1.0) {
  t.activations.col(t.column(unit)).segment(from, to_inclusive - from + 1).setConstant(value);
}

}  // namespace

TEST_CASE("run: one step of zero drive is one all-zero row") {
  auto ps = fixtures::phase_set_network(2);
  auto trace = run(ps.network, {}, 1);
  CHECK(trace.steps() == 1);
  CHECK(trace.activations.isZero());
  CHECK_THROWS_AS(run(ps.network, {}, 0), Error);
}

TEST_CASE("run: single driven PO reproduces the closed-form period") {
  NetworkSpec spec;
  spec.tokens = {{"u", Layer::PoPred, Bank::Driver, 0.0}};
  Network net(spec);
  auto trace = run(net, DriveSchedule::constant({{"u", 1.0}}), 120);
  auto bursts = extract_bursts(trace, "u", 0.5);
  REQUIRE(bursts.size() >= 5);
  for (std::size_t i = 1; i < bursts.size(); ++i) CHECK(bursts[i].start - bursts[i - 1].start == 20);
}

TEST_CASE("run: two RB groups under one P alternate without overlap") {
  auto ps = fixtures::phase_set_network(2);
  auto trace = run(ps.network, DriveSchedule::constant({{"P", 1.0}}), 200);
  auto a = extract_bursts(trace, ps.roles[0].rb, 0.5);
  auto b = extract_bursts(trace, ps.roles[1].rb, 0.5);
  REQUIRE(a.size() >= 5);
  REQUIRE(b.size() >= 5);
  for (const auto& x : a)
    for (const auto& y : b) CHECK_FALSE(x.overlaps(y));
}

TEST_CASE("extract_bursts: edge cases") {
  auto t = synthetic(40, {"u"});
  CHECK(extract_bursts(t, 0.5).empty());

  pulse(t, "u", 10, 20);
  auto one = extract_bursts(t, 0.5);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == BurstEvent{"u", 10, 20, 10});

  t.activations(15, 0) = 0.4;
  auto two = extract_bursts(t, 0.5);
  REQUIRE(two.size() == 2);
  CHECK(two[0].end == 14);
  CHECK(two[1].start == 16);

  CHECK_THROWS_AS(extract_bursts(t, 1.0), Error);
}

TEST_CASE("extract_bursts: peak is the earliest maximum") {
  auto t = synthetic(10, {"u"});
  t.activations.col(0) << 0, 0.6, 0.9, 0.9, 0.7, 0, 0, 0, 0, 0;
  auto b = extract_bursts(t, 0.5);
  REQUIRE(b.size() == 1);
  CHECK(b[0].peak == 2);
}

TEST_CASE("detect_phase_sets: one group") {
  auto ps = fixtures::phase_set_network(1);
  auto trace = run(ps.network, DriveSchedule::constant({{"P", 1.0}}), 120);
  auto sets = detect_phase_sets(trace, ps.network, 0.5);
  REQUIRE(sets.size() == 1);
  REQUIRE(sets[0].members.size() == 1);
  CHECK(sets[0].members[0].rbs == std::vector<std::string>{ps.roles[0].rb});
  CHECK(sets[0].members[0].pos.size() == 2);
}

TEST_CASE("detect_phase_sets: constructed alternating and synchronous traces") {
  auto ps = fixtures::phase_set_network(2);
  const auto& r0 = ps.roles[0].rb;
  const auto& r1 = ps.roles[1].rb;

  auto alt = synthetic(80, ps.network.unit_ids());
  for (long c = 0; c < 80; c += 20) {
    pulse(alt, r0, c, c + 8);
    pulse(alt, r1, c + 10, c + 18);
  }
  auto sets = detect_phase_sets(alt, ps.network, 0.5);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].members.size() == 2);

  auto sync = synthetic(80, ps.network.unit_ids());
  for (long c = 0; c < 80; c += 20) {
    pulse(sync, r0, c, c + 8);
    pulse(sync, r1, c, c + 8);
  }
  CHECK(detect_phase_sets(sync, ps.network, 0.5).size() == 2);
  auto merged = detect_phase_sets(sync, ps.network, 0.5, {.merge_synchronous = true});
  REQUIRE(merged.size() == 1);
  REQUIRE(merged[0].members.size() == 1);
  CHECK(merged[0].members[0].rbs.size() == 2);
}

TEST_CASE("detect_phase_sets: needs two cycles") {
  auto ps = fixtures::phase_set_network(1);
  auto t = synthetic(30, ps.network.unit_ids());
  pulse(t, ps.roles[0].rb, 3, 9);
  CHECK_THROWS_AS(detect_phase_sets(t, ps.network, 0.5), Error);
}

TEST_CASE("pairwise_lag: constructed traces") {
  auto t = synthetic(100, {"a", "b", "c", "z"});
  for (long c = 0; c < 100; c += 25) {
    pulse(t, "a", c, c + 4);
    pulse(t, "b", c, c + 4);
    if (c + 9 < 100) pulse(t, "c", c + 5, c + 9);
  }
  CHECK(pairwise_lag(t, "a", "b", 0.5) == 0.0);
  CHECK(pairwise_lag(t, "a", "c", 0.5) == 5.0);
  CHECK(pairwise_lag(t, "c", "a", 0.5) == -5.0);
  CHECK_THROWS_AS(pairwise_lag(t, "a", "z", 0.5), Error);
}

TEST_CASE("pairwise_lag: predicate leads its argument in a running binding") {
  auto ps = fixtures::phase_set_network(2);
  auto trace = run(ps.network, DriveSchedule::constant({{"P", 1.0}}), 200);
  for (const auto& r : ps.roles) CHECK(pairwise_lag(trace, r.pred, r.obj, 0.5) > 0.0);
}

TEST_CASE("synchrony mode: role-filler set fires together") {
  auto ps = fixtures::phase_set_network(3);
  auto trace = run(ps.network, DriveSchedule::constant({{"P", 1.0}}), 200, {.synchrony = true});
  for (const auto& r : ps.roles) {
    CHECK(std::abs(pairwise_lag(trace, r.pred, r.obj, 0.5)) <= 1.0);
    CHECK(std::abs(pairwise_lag(trace, r.rb, r.pred, 0.5)) <= 1.0);
  }
  auto sets = detect_phase_sets(trace, ps.network, 0.5);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].members.size() == 3);
}

TEST_CASE("duty cycle of k groups is about 1/k") {
  for (int k = 2; k <= 4; ++k) {
    auto ps = fixtures::phase_set_network(k);
    auto trace = run(ps.network, DriveSchedule::constant({{"P", 1.0}}), 400);
    const long from = settling_horizon(trace, 0.5);
    for (const auto& r : ps.roles) {
      double d = duty_cycle(trace, r.rb, 0.5, from, trace.steps());
      CHECK(std::abs(d - 1.0 / k) <= 0.2 / k);
    }
  }
}

TEST_CASE("trace helpers") {
  auto t = synthetic(10, {"u"});
  pulse(t, "u", 2, 5, 0.8);
  CHECK(t.slice(4).steps() == 6);
  CHECK(t.scaled(0.5).activations.maxCoeff() == doctest::Approx(0.4));
  CHECK_THROWS_AS(t.column("nope"), Error);
  CHECK(duty_cycle(t, "u", 0.5, 0, 10) == doctest::Approx(0.4));
}

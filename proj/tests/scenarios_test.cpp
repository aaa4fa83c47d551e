#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mlspread/scenarios.hpp"

namespace mlspread {
namespace {

MultilayerNetwork layered(std::size_t n, double p_contact, double p_other, std::uint64_t seed) {
  const std::vector<LayerSpec> layers{{"c", p_contact}, {"o", p_other}, {"w", p_other}};
  return generate_synthetic(n, layers, "c", seed);
}

TEST(SeedCount, RoundsUpWithFloorOfOne) {
  EXPECT_EQ(seed_count(0.01, 1), 1u);
  EXPECT_EQ(seed_count(0.01, 61), 1u);
  EXPECT_EQ(seed_count(0.01, 100), 1u);
  EXPECT_EQ(seed_count(0.01, 241), 3u);
  EXPECT_EQ(seed_count(0.01, 417), 5u);
  EXPECT_EQ(seed_count(0.01, 88804), 889u);
  EXPECT_EQ(seed_count(1.0, 100), 100u);
  EXPECT_EQ(seed_count(0.07, 100), 7u);
  EXPECT_THROW(seed_count(0.0, 10), std::invalid_argument);
  EXPECT_THROW(seed_count(-0.5, 10), std::invalid_argument);
}

TEST(SeedInfected, DrawsFromContactLayerOnly) {
  // Actors d..g never appear on the contact layer.
  const auto net = parse_multilayer_edgelist("a b c\nb x c\nd e o\nf g o\na d o", "c");
  std::set<ActorId> contact{*net.find_actor("a"), *net.find_actor("b"), *net.find_actor("x")};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto seeds = seed_infected(net, 0.5, seed);
    ASSERT_EQ(seeds.size(), 2u);
    for (ActorId a : seeds) ASSERT_TRUE(contact.count(a));
    ASSERT_EQ(seeds, seed_infected(net, 0.5, seed));
  }
  EXPECT_EQ(seed_infected(net, 1.0, 1).size(), 3u);
  EXPECT_THROW(seed_infected(net, 0.0, 1), std::invalid_argument);
}

TEST(SeedInfected, SizesForTableSizes) {
  const auto n61 = layered(61, 0.1, 0.1, 1);
  EXPECT_EQ(seed_infected(n61, 0.01, 5).size(), 1u);
  const auto n241 = layered(241, 0.02, 0.02, 1);
  EXPECT_EQ(seed_infected(n241, 0.01, 5).size(), 3u);
  const auto n100 = layered(100, 0.05, 0.05, 1);
  EXPECT_EQ(seed_infected(n100, 1.0, 5).size(), 100u);
}

TEST(SeedInfected, RoughlyUniform) {
  const auto net = layered(10, 0.5, 0.5, 3);
  std::vector<int> hits(10, 0);
  constexpr int draws = 20'000;
  for (std::uint64_t seed = 0; seed < draws; ++seed) ++hits[seed_infected(net, 0.1, seed).front()];
  // Each actor expected 2000 times, sd ~ 42.
  for (int h : hits) EXPECT_NEAR(h, 2000, 200);
}

TEST(SeedAware, AllActorsEligibleAndIndependent) {
  const auto fig = parse_multilayer_edgelist(
      "n1 n2 l1\nn1 n5 l1\nn2 n5 l1\nn2 n3 l1\nn2 n4 l1\nn3 n4 l1\n"
      "n1 n4 l2\nn1 n6 l2\nn2 n3 l2\nn2 n4 l2\nn3 n4 l2\n",
      "l1");
  EXPECT_EQ(seed_aware(fig, 0.01, 3).size(), 1u);
  EXPECT_EQ(seed_aware(fig, 1.0, 3).size(), 6u);

  // n6 is off the contact layer but can still be an aware seed; overlap with infected seeds is allowed.
  bool saw_n6 = false, saw_overlap = false;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto aware = seed_aware(fig, 0.01, seed);
    const auto infected = seed_infected(fig, 0.01, seed);
    saw_n6 |= aware.front() == *fig.find_actor("n6");
    saw_overlap |= aware.front() == infected.front();
  }
  EXPECT_TRUE(saw_n6);
  EXPECT_TRUE(saw_overlap);
}

TEST(ParseScenario, Names) {
  EXPECT_EQ(parse_scenario("sir").kind, ScenarioKind::VirusOnly);
  EXPECT_EQ(parse_scenario("simultaneous").kind, ScenarioKind::Simultaneous);
  EXPECT_EQ(parse_scenario("blocking:21"), ScenarioSpec::blocking(21));
  EXPECT_EQ(parse_scenario("blocking:21").name(), "blocking:21");
  EXPECT_THROW(parse_scenario("blocking:"), std::invalid_argument);
  EXPECT_THROW(parse_scenario("blocking:x"), std::invalid_argument);
  EXPECT_THROW(parse_scenario("sis"), std::invalid_argument);
}

TEST(RunScenario, BlockingZeroEqualsSimultaneous) {
  const auto net = layered(150, 0.05, 0.03, 4);
  const auto p = SpreadParams::standard(0.28, 0.08, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    EXPECT_EQ(run_scenario(net, p, ScenarioSpec::blocking(0), seed),
              run_scenario(net, p, ScenarioSpec::simultaneous(), seed));
}

TEST(RunScenario, CertainRecoveryEndsOnDayOne) {
  const auto net = layered(100, 0.1, 0.1, 4);
  const auto trace = run_scenario(net, SpreadParams::standard(0.0, 1.0, 1), ScenarioSpec::virus_only(), 7);
  EXPECT_EQ(trace.termination_day, 1u);
  EXPECT_EQ(trace.termination_reason, TerminationReason::NoInfected);
  ASSERT_EQ(trace.rows.size(), 2u);
  EXPECT_EQ(trace.rows[0].counts.infected, 1u);
  EXPECT_EQ(trace.rows[1].counts.recovered, 1u);
  EXPECT_EQ(trace.rows[1].counts.infected, 0u);
}

TEST(RunScenario, AllRecoveredWhenEveryoneCaught) {
  const std::vector<LayerSpec> layers{{"c", 1.0}};
  const auto net = generate_synthetic(10, layers, "c", 1);
  auto p = SpreadParams::standard(1.0, 1.0, 1);
  const auto trace = run_scenario(net, p, ScenarioSpec::virus_only(), 3);
  EXPECT_EQ(trace.termination_reason, TerminationReason::AllRecovered);
  EXPECT_EQ(trace.termination_day, 2u);
  EXPECT_EQ(trace.rows.back().counts.recovered, 10u);
}

TEST(RunScenario, HorizonReached) {
  const auto net = layered(50, 0.2, 0.1, 2);
  ScenarioSpec spec = ScenarioSpec::virus_only();
  spec.horizon = 5;
  const auto trace = run_scenario(net, SpreadParams::standard(0.5, 0.0, 1), spec, 1);
  EXPECT_EQ(trace.termination_reason, TerminationReason::HorizonReached);
  EXPECT_EQ(trace.termination_day, 5u);
  EXPECT_EQ(trace.rows.size(), 6u);
}

TEST(RunScenario, CouplingWithInertAwareness) {
  // eps = mu = 0 and no aware seeds: awareness can only reach infected actors,
  // who no longer use beta, so the epidemic matches the virus-only run exactly.
  const auto net = layered(200, 0.04, 0.04, 9);
  auto p = SpreadParams::standard(0.31, 0.10, 3);
  p.epsilon = 0.0;
  p.mu = 0.0;
  ScenarioSpec inert = ScenarioSpec::simultaneous();
  inert.aware_seed_fraction = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto a = run_scenario(net, p, inert, seed);
    const auto b = run_scenario(net, p, ScenarioSpec::virus_only(), seed);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t d = 0; d < a.rows.size(); ++d) {
      ASSERT_EQ(a.rows[d].counts.susceptible, b.rows[d].counts.susceptible);
      ASSERT_EQ(a.rows[d].counts.infected, b.rows[d].counts.infected);
      ASSERT_EQ(a.rows[d].counts.recovered, b.rows[d].counts.recovered);
    }
  }
}

TEST(RunScenario, TraceInvariants) {
  const auto net = layered(120, 0.06, 0.05, 6);
  const auto p = SpreadParams::standard(0.22, 0.02, 2);
  for (auto spec : {ScenarioSpec::virus_only(), ScenarioSpec::simultaneous(), ScenarioSpec::blocking(7),
                    ScenarioSpec::blocking(21)}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto trace = run_scenario(net, p, spec, seed);
      ASSERT_LE(trace.rows.size(), spec.horizon + 1u);
      ASSERT_EQ(trace.rows.back().day, trace.termination_day);
      for (std::size_t d = 0; d < trace.rows.size(); ++d) {
        const auto& c = trace.rows[d].counts;
        ASSERT_EQ(trace.rows[d].day, d);
        ASSERT_EQ(c.susceptible + c.infected + c.recovered, net.num_actors());
        ASSERT_EQ(c.unaware + c.aware, net.num_actors());
        if (spec.kind == ScenarioKind::VirusOnly) {
          ASSERT_EQ(c.aware, 0u);
        }
        if (spec.kind == ScenarioKind::Blocking && d <= spec.delay_days) {
          ASSERT_EQ(c.aware, 0u);
        }
      }
      if (trace.termination_reason != TerminationReason::HorizonReached) {
        ASSERT_EQ(trace.rows.back().counts.infected, 0u);
      } else {
        ASSERT_EQ(trace.termination_day, spec.horizon);
      }
    }
  }
}

TEST(RunScenario, ActorsOffContactLayerStaySusceptible) {
  const auto net = parse_multilayer_edgelist("a b c\nb d c\nz a o\ny z o", "c");
  const auto p = SpreadParams::standard(0.9, 0.05, 4);
  const auto trace = run_scenario(net, p, ScenarioSpec::simultaneous(), 2);
  EXPECT_EQ(trace.final_states[*net.find_actor("z")].epidemic, EpidemicState::Susceptible);
  EXPECT_EQ(trace.final_states[*net.find_actor("y")].epidemic, EpidemicState::Susceptible);
}

TEST(TraceCsv, Format) {
  const auto net = layered(100, 0.1, 0.1, 4);
  const auto trace = run_scenario(net, SpreadParams::standard(0.0, 1.0, 1), ScenarioSpec::virus_only(), 7);
  std::ostringstream out;
  write_trace_csv(out, trace);
  EXPECT_EQ(out.str(), "day,S,I,R,U,A\n0,99,1,0,100,0\n1,99,0,1,100,0\n");
}

}  // namespace
}  // namespace mlspread

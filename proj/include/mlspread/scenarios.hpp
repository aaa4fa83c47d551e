#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlspread/dynamics.hpp"
#include "mlspread/network.hpp"
#include "mlspread/rng.hpp"

namespace mlspread {

enum class ScenarioKind : std::uint8_t { VirusOnly, Simultaneous, Blocking };

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Simultaneous;
  std::uint32_t delay_days = 0;  // Blocking only
  std::uint32_t horizon = 150;
  double infected_seed_fraction = 0.01;
  // 0 disables aware seeding entirely; only meaningful for coupling checks.
  double aware_seed_fraction = 0.01;

  static ScenarioSpec virus_only() { return {ScenarioKind::VirusOnly}; }
  static ScenarioSpec simultaneous() { return {ScenarioKind::Simultaneous}; }
  static ScenarioSpec blocking(std::uint32_t days) { return {ScenarioKind::Blocking, days}; }

  /// Last day on which awareness is switched off, or nullopt if it never starts.
  std::optional<std::uint32_t> awareness_delay() const {
    switch (kind) {
      case ScenarioKind::VirusOnly: return std::nullopt;
      case ScenarioKind::Simultaneous: return 0u;
      case ScenarioKind::Blocking: return delay_days;
    }
    return std::nullopt;
  }

  std::string name() const {
    switch (kind) {
      case ScenarioKind::VirusOnly: return "sir";
      case ScenarioKind::Simultaneous: return "simultaneous";
      case ScenarioKind::Blocking: return "blocking:" + std::to_string(delay_days);
    }
    return {};
  }

  void validate() const {
    if (!(infected_seed_fraction > 0.0 && infected_seed_fraction <= 1.0))
      throw std::invalid_argument("infected seed fraction must lie in (0,1]");
    if (!(aware_seed_fraction >= 0.0 && aware_seed_fraction <= 1.0))
      throw std::invalid_argument("aware seed fraction must lie in [0,1]");
  }

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

/// Accepts `sir`, `simultaneous` and `blocking:D`.
inline ScenarioSpec parse_scenario(std::string_view text) {
  if (text == "sir" || text == "virus-only") return ScenarioSpec::virus_only();
  if (text == "simultaneous") return ScenarioSpec::simultaneous();
  constexpr std::string_view prefix = "blocking:";
  if (text.starts_with(prefix)) {
    const std::string_view digits = text.substr(prefix.size());
    std::uint32_t days = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), days);
    if (ec == std::errc{} && end == digits.data() + digits.size() && !digits.empty())
      return ScenarioSpec::blocking(days);
  }
  throw std::invalid_argument("unknown scenario '" + std::string(text) + "' (expected sir, simultaneous or blocking:D)");
}

/// ceil(fraction * population), at least one, at most the population.
inline std::size_t seed_count(double fraction, std::size_t population) {
  if (!(fraction > 0.0)) throw std::invalid_argument("seed fraction must be positive");
  // Guard against products like 0.07 * 100 landing a hair above an integer.
  const double raw = std::ceil(fraction * static_cast<double>(population) - 1e-9);
  const auto k = static_cast<std::size_t>(std::max(raw, 1.0));
  return std::min(k, population);
}

namespace detail {

inline std::vector<ActorId> draw_without_replacement(std::vector<ActorId> candidates, std::size_t k,
                                                     std::uint64_t seed, Channel channel) {
  std::vector<std::pair<std::uint64_t, ActorId>> keyed;
  keyed.reserve(candidates.size());
  for (ActorId a : candidates) keyed.emplace_back(hash_key({seed, 0, channel, a}), a);
  std::sort(keyed.begin(), keyed.end());
  std::vector<ActorId> chosen;
  chosen.reserve(k);
  for (std::size_t i = 0; i < k && i < keyed.size(); ++i) chosen.push_back(keyed[i].second);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace detail

/// Uniform subset of the actors present on the contact layer, returned ascending.
inline std::vector<ActorId> seed_infected(const MultilayerNetwork& net, double fraction, std::uint64_t seed) {
  const auto& contact = net.layer(net.contact_layer());
  if (contact.num_present == 0) throw std::invalid_argument("contact layer has no actors");
  std::vector<ActorId> candidates;
  for (ActorId a = 0; a < net.num_actors(); ++a)
    if (contact.present[a]) candidates.push_back(a);
  const std::size_t k = seed_count(fraction, candidates.size());
  return detail::draw_without_replacement(std::move(candidates), k, seed, Channel::InfectedSeed);
}

/// Uniform subset of all actors, drawn independently of the infected seeds.
inline std::vector<ActorId> seed_aware(const MultilayerNetwork& net, double fraction, std::uint64_t seed) {
  std::vector<ActorId> candidates(net.num_actors());
  for (ActorId a = 0; a < candidates.size(); ++a) candidates[a] = a;
  const std::size_t k = seed_count(fraction, candidates.size());
  return detail::draw_without_replacement(std::move(candidates), k, seed, Channel::AwareSeed);
}

enum class TerminationReason : std::uint8_t { HorizonReached, AllRecovered, NoInfected };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::HorizonReached: return "horizon";
    case TerminationReason::AllRecovered: return "all_recovered";
    case TerminationReason::NoInfected: return "no_infected";
  }
  return "?";
}

struct TraceRow {
  std::uint32_t day = 0;
  CompartmentCounts counts;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct RunTrace {
  std::vector<TraceRow> rows;  // rows[d].day == d
  std::uint32_t termination_day = 0;
  TerminationReason termination_reason = TerminationReason::HorizonReached;
  std::vector<ActorState> final_states;

  friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// Seeds the virus on day 0 and iterates `step` until the horizon or until no
/// one is infected. Awareness stays off through day D of the scenario's delay;
/// the aware seeds are placed right after the day-D row is recorded, so the
/// first awareness dynamics happen on day D+1. Aware seeds come from the same
/// key for every delay, making Blocking(0) and Simultaneous the same run.
inline RunTrace run_scenario(const MultilayerNetwork& net, const SpreadParams& params, const ScenarioSpec& spec,
                             std::uint64_t run_seed) {
  params.validate();
  spec.validate();

  PopulationState state(net.num_actors());
  for (ActorId a : seed_infected(net, spec.infected_seed_fraction, run_seed))
    state.actors[a].epidemic = EpidemicState::Infected;

  RunTrace trace;
  trace.rows.push_back({0, count_compartments(state)});
  const auto delay = spec.awareness_delay();

  while (state.iteration < spec.horizon && trace.rows.back().counts.infected > 0) {
    if (delay && *delay == state.iteration && spec.aware_seed_fraction > 0.0) {
      for (ActorId a : seed_aware(net, spec.aware_seed_fraction, run_seed))
        state.actors[a].awareness = AwarenessState::Aware;
    }
    const bool awareness_active = delay && state.iteration >= *delay;
    state = step(state, net, params, awareness_active, run_seed);
    trace.rows.push_back({state.iteration, count_compartments(state)});
  }

  const CompartmentCounts& last = trace.rows.back().counts;
  trace.termination_day = state.iteration;
  if (last.infected > 0) {
    trace.termination_reason = TerminationReason::HorizonReached;
  } else {
    const auto& contact = net.layer(net.contact_layer());
    bool susceptible_left = false;
    for (ActorId a = 0; a < net.num_actors() && !susceptible_left; ++a)
      susceptible_left = contact.present[a] && state.actors[a].epidemic == EpidemicState::Susceptible;
    trace.termination_reason = susceptible_left ? TerminationReason::NoInfected : TerminationReason::AllRecovered;
  }
  trace.final_states = std::move(state.actors);
  return trace;
}

inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "day,S,I,R,U,A\n";
  for (const TraceRow& row : trace.rows) {
    const auto& c = row.counts;
    out << row.day << ',' << c.susceptible << ',' << c.infected << ',' << c.recovered << ',' << c.unaware << ','
        << c.aware << '\n';
  }
}

}  // namespace mlspread

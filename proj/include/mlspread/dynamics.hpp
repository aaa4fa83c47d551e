#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlspread/network.hpp"
#include "mlspread/rng.hpp"

namespace mlspread {

enum class EpidemicState : std::uint8_t { Susceptible, Infected, Recovered };
enum class AwarenessState : std::uint8_t { Unaware, Aware };

struct ActorState {
  EpidemicState epidemic = EpidemicState::Susceptible;
  AwarenessState awareness = AwarenessState::Unaware;

  friend constexpr bool operator==(const ActorState&, const ActorState&) = default;
};

/// Per-iteration probabilities of the coupled SIR (virus) and UAU (awareness) processes.
struct SpreadParams {
  double beta = 0.0;              // infection, unaware susceptible
  double gamma = 0.0;             // recovery
  double beta_aware = 0.0;        // infection, aware susceptible
  double epsilon = 0.0;           // awareness transmission per aware neighbour
  double mu = 0.0;                // forgetting
  double epsilon_infected = 0.0;  // symptom-driven awareness of an infected, unaware actor
  int x = 1;

  static constexpr double kAwareReduction = 10.0;
  static constexpr double kSymptomaticShare = 0.692;

  /// Awareness probabilities scale with the virus ones: epsilon = min(beta*x, 1),
  /// mu = min(gamma*x, 1); awareness cuts infection tenfold.
  static SpreadParams standard(double beta, double gamma, int x) {
    SpreadParams p;
    p.beta = beta;
    p.gamma = gamma;
    p.beta_aware = beta / kAwareReduction;
    p.epsilon = std::min(beta * x, 1.0);
    p.mu = std::min(gamma * x, 1.0);
    p.epsilon_infected = kSymptomaticShare;
    p.x = x;
    p.validate();
    return p;
  }

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
    };
    check(beta, "beta");
    check(gamma, "gamma");
    check(beta_aware, "beta_aware");
    check(epsilon, "epsilon");
    check(mu, "mu");
    check(epsilon_infected, "epsilon_infected");
  }

  friend constexpr bool operator==(const SpreadParams&, const SpreadParams&) = default;
};

struct PopulationState {
  std::vector<ActorState> actors;
  std::uint32_t iteration = 0;  // day of this snapshot; 0 is the seeding day

  explicit PopulationState(std::size_t num_actors = 0) : actors(num_actors) {}

  friend bool operator==(const PopulationState&, const PopulationState&) = default;
};

struct CompartmentCounts {
  std::size_t susceptible = 0;
  std::size_t infected = 0;
  std::size_t recovered = 0;
  std::size_t unaware = 0;
  std::size_t aware = 0;

  friend constexpr bool operator==(const CompartmentCounts&, const CompartmentCounts&) = default;
};

inline CompartmentCounts count_compartments(const PopulationState& state) {
  CompartmentCounts c;
  for (const ActorState& a : state.actors) {
    switch (a.epidemic) {
      case EpidemicState::Susceptible: ++c.susceptible; break;
      case EpidemicState::Infected: ++c.infected; break;
      case EpidemicState::Recovered: ++c.recovered; break;
    }
    (a.awareness == AwarenessState::Aware ? c.aware : c.unaware) += 1;
  }
  return c;
}

inline double effective_infection_probability(const ActorState& target, const SpreadParams& params) {
  if (target.epidemic != EpidemicState::Susceptible)
    throw std::logic_error("infection probability requested for a non-susceptible actor");
  return target.awareness == AwarenessState::Aware ? params.beta_aware : params.beta;
}

/// One synchronous day. Every trial reads the input snapshot only, and each
/// trial has its own event key, so the result is independent of visit order.
///
/// Virus trials run on the contact layer only: one per (infected, susceptible)
/// directed pair plus one recovery draw per infected actor. When awareness is
/// active, every layer carries one trial per (aware, unaware) edge, infected
/// unaware actors get a spontaneous symptom trial, and aware actors may forget.
inline PopulationState step(const PopulationState& state, const MultilayerNetwork& net, const SpreadParams& params,
                            bool awareness_active, std::uint64_t run_seed) {
  const auto& now = state.actors;
  PopulationState next = state;
  next.iteration = state.iteration + 1;
  const std::uint32_t day = next.iteration;
  const LayerId contact = net.contact_layer();

  for (ActorId u = 0; u < now.size(); ++u) {
    if (now[u].epidemic != EpidemicState::Infected) continue;
    if (event_bernoulli({run_seed, day, Channel::Recovery, u}, params.gamma))
      next.actors[u].epidemic = EpidemicState::Recovered;
    for (ActorId v : net.neighbors(u, contact)) {
      if (now[v].epidemic != EpidemicState::Susceptible) continue;
      const double p = effective_infection_probability(now[v], params);
      if (event_bernoulli({run_seed, day, Channel::Infection, u, v, contact}, p))
        next.actors[v].epidemic = EpidemicState::Infected;
    }
  }

  if (!awareness_active) return next;

  for (ActorId u = 0; u < now.size(); ++u) {
    if (now[u].awareness == AwarenessState::Unaware) {
      if (now[u].epidemic == EpidemicState::Infected &&
          event_bernoulli({run_seed, day, Channel::SymptomAwareness, u}, params.epsilon_infected))
        next.actors[u].awareness = AwarenessState::Aware;
      continue;
    }
    if (event_bernoulli({run_seed, day, Channel::Forgetting, u}, params.mu))
      next.actors[u].awareness = AwarenessState::Unaware;
    for (LayerId l = 0; l < net.num_layers(); ++l) {
      for (ActorId v : net.neighbors(u, l)) {
        if (now[v].awareness != AwarenessState::Unaware) continue;
        if (event_bernoulli({run_seed, day, Channel::AwarenessEdge, u, v, l}, params.epsilon))
          next.actors[v].awareness = AwarenessState::Aware;
      }
    }
  }
  return next;
}

}  // namespace mlspread

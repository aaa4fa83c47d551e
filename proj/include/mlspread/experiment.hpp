#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mlspread/csv.hpp"
#include "mlspread/dynamics.hpp"
#include "mlspread/network.hpp"
#include "mlspread/rng.hpp"
#include "mlspread/scenarios.hpp"
#include "mlspread/stats.hpp"

namespace mlspread {

// ---------------------------------------------------------------------------
// Parameter grid

struct BasePair {
  double beta = 0.0;
  double gamma = 0.0;
};

struct ParamGrid {
  std::vector<BasePair> base_pairs;
  std::vector<int> multipliers;

  /// Cartesian product, base pair major: index = pair * |multipliers| + multiplier position.
  std::vector<SpreadParams> combos() const {
    std::vector<SpreadParams> out;
    out.reserve(base_pairs.size() * multipliers.size());
    for (const BasePair& bp : base_pairs)
      for (int x : multipliers) out.push_back(SpreadParams::standard(bp.beta, bp.gamma, x));
    return out;
  }

  std::size_t size() const noexcept { return base_pairs.size() * multipliers.size(); }
};

/// Three Italian estimates and one Polish estimate of (beta, gamma), each with
/// awareness multipliers 1..4.
inline ParamGrid build_param_grid() {
  return ParamGrid{{{0.19, 0.10}, {0.22, 0.02}, {0.28, 0.08}, {0.31, 0.10}}, {1, 2, 3, 4}};
}

// ---------------------------------------------------------------------------
// Run identity

struct RunKey {
  std::string network;
  ScenarioSpec scenario;
  std::size_t combo = 0;
  std::size_t rep = 0;
};

/// Scenario is deliberately not part of the seed: runs that differ only in
/// scenario share every event key and therefore their random numbers.
inline std::uint64_t run_seed_for(std::uint64_t master_seed, const RunKey& key) {
  return combine_seed(master_seed, hash_text(key.network), key.combo, key.rep);
}

// ---------------------------------------------------------------------------
// Per-run metrics

/// Earliest day with the maximal infected count.
inline std::uint32_t peak_day(const RunTrace& trace) {
  if (trace.rows.empty()) throw std::invalid_argument("empty trace");
  std::size_t best = 0;
  for (std::size_t d = 1; d < trace.rows.size(); ++d)
    if (trace.rows[d].counts.infected > trace.rows[best].counts.infected) best = d;
  return trace.rows[best].day;
}

/// I+R on `day`; days past termination report the final counts.
inline std::size_t cumulative_ir(const RunTrace& trace, std::uint32_t day) {
  if (trace.rows.empty()) throw std::invalid_argument("empty trace");
  const auto& row = trace.rows[std::min<std::size_t>(day, trace.rows.size() - 1)];
  return row.counts.infected + row.counts.recovered;
}

/// The part of a trace the comparison metrics need.
struct RunOutcome {
  std::uint32_t peak_day = 0;
  std::size_t peak_infected = 0;
  std::vector<std::uint32_t> ir;  // I+R per day up to termination
  std::uint32_t termination_day = 0;
  TerminationReason termination_reason = TerminationReason::HorizonReached;

  std::size_t ir_at(std::uint32_t day) const { return ir[std::min<std::size_t>(day, ir.size() - 1)]; }
  std::size_t ir_final() const { return ir.back(); }

  friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

inline RunOutcome summarize_run(const RunTrace& trace) {
  RunOutcome out;
  out.peak_day = peak_day(trace);
  out.peak_infected = trace.rows[out.peak_day].counts.infected;
  out.ir.reserve(trace.rows.size());
  for (const TraceRow& row : trace.rows)
    out.ir.push_back(static_cast<std::uint32_t>(row.counts.infected + row.counts.recovered));
  out.termination_day = trace.termination_day;
  out.termination_reason = trace.termination_reason;
  return out;
}

// ---------------------------------------------------------------------------
// Scenario comparison

enum class Aggregation : std::uint8_t {
  Flat,       // mean over every (combo, rep) pair
  ComboMean,  // mean over combos of the per-combo pair means
};

struct MetricRow {
  std::string comparison;
  double peak_day_shift_pct = 0.0;
  double excess_ir_peak_pct = 0.0;
  double excess_ir_150_pct = 0.0;
  double p_peak = 1.0;
  double p_ir_peak = 1.0;
  double p_ir_150 = 1.0;
  std::size_t n_pairs = 0;
};

struct PairKey {
  std::size_t combo = 0;
  std::size_t rep = 0;
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

using PairedOutcomes = std::map<PairKey, RunOutcome>;

namespace detail {

inline double signed_rank_p(const std::vector<double>& diffs) {
  if (std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; })) return 1.0;
  return stats::wilcoxon_signed_rank(diffs).p_two_sided;
}

}  // namespace detail

/// Percent change of `other` against `baseline`, pair by pair, then averaged.
///   peak shift  = 100 * (peak_base - peak_other) / peak_base   (positive: other peaks earlier)
///   excess I+R  = 100 * (ir_other(t) - ir_base(t)) / ir_base(t) with t the baseline's peak day,
///                 and again with t = horizon.
/// Pairs whose baseline peak is day 0 (or whose baseline I+R is 0) are dropped.
/// The p-values come from signed-rank tests on the raw paired differences.
inline MetricRow compare_scenarios(const PairedOutcomes& baseline, const PairedOutcomes& other,
                                   std::uint32_t horizon, Aggregation aggregation = Aggregation::Flat) {
  if (baseline.empty()) throw std::invalid_argument("no runs to compare");
  if (baseline.size() != other.size()) throw std::invalid_argument("baseline and compared run sets differ");

  struct Accumulator {
    double peak = 0.0, ir_peak = 0.0, ir_horizon = 0.0;
    std::size_t n = 0;
  };
  std::map<std::size_t, Accumulator> per_combo;
  Accumulator flat;
  std::vector<double> d_peak, d_ir_peak, d_ir_horizon;

  for (const auto& [key, base] : baseline) {
    auto it = other.find(key);
    if (it == other.end()) throw std::invalid_argument("baseline and compared run sets differ");
    const RunOutcome& cmp = it->second;
    const std::uint32_t t_star = base.peak_day;
    const double base_peak_ir = static_cast<double>(base.ir_at(t_star));
    const double base_horizon_ir = static_cast<double>(base.ir_at(horizon));
    if (t_star == 0 || base_peak_ir == 0.0 || base_horizon_ir == 0.0) continue;

    const double shift = 100.0 * (static_cast<double>(t_star) - static_cast<double>(cmp.peak_day)) / t_star;
    const double ir_peak = 100.0 * (static_cast<double>(cmp.ir_at(t_star)) - base_peak_ir) / base_peak_ir;
    const double ir_horizon = 100.0 * (static_cast<double>(cmp.ir_at(horizon)) - base_horizon_ir) / base_horizon_ir;
    for (Accumulator* acc : {&flat, &per_combo[key.combo]}) {
      acc->peak += shift;
      acc->ir_peak += ir_peak;
      acc->ir_horizon += ir_horizon;
      ++acc->n;
    }
    d_peak.push_back(static_cast<double>(cmp.peak_day) - static_cast<double>(t_star));
    d_ir_peak.push_back(static_cast<double>(cmp.ir_at(t_star)) - base_peak_ir);
    d_ir_horizon.push_back(static_cast<double>(cmp.ir_at(horizon)) - base_horizon_ir);
  }

  MetricRow row;
  row.n_pairs = flat.n;
  if (flat.n == 0) return row;
  if (aggregation == Aggregation::Flat) {
    row.peak_day_shift_pct = flat.peak / flat.n;
    row.excess_ir_peak_pct = flat.ir_peak / flat.n;
    row.excess_ir_150_pct = flat.ir_horizon / flat.n;
  } else {
    for (const auto& [combo, acc] : per_combo) {
      row.peak_day_shift_pct += acc.peak / acc.n;
      row.excess_ir_peak_pct += acc.ir_peak / acc.n;
      row.excess_ir_150_pct += acc.ir_horizon / acc.n;
    }
    const double k = static_cast<double>(per_combo.size());
    row.peak_day_shift_pct /= k;
    row.excess_ir_peak_pct /= k;
    row.excess_ir_150_pct /= k;
  }
  row.p_peak = detail::signed_rank_p(d_peak);
  row.p_ir_peak = detail::signed_rank_p(d_ir_peak);
  row.p_ir_150 = detail::signed_rank_p(d_ir_horizon);
  return row;
}

// ---------------------------------------------------------------------------
// Batch execution

struct RunRecord {
  std::size_t scenario_index = 0;
  std::size_t combo = 0;
  std::size_t rep = 0;
  std::uint64_t run_seed = 0;
  RunOutcome outcome;
};

struct ExperimentOptions {
  std::size_t reps = 20;
  std::uint64_t master_seed = 0;
  unsigned threads = 1;
  Aggregation aggregation = Aggregation::Flat;
};

struct ExperimentResult {
  std::string network;
  ParamGrid grid;
  std::vector<SpreadParams> combos;
  std::vector<ScenarioSpec> scenarios;
  std::vector<RunRecord> runs;  // ordered by (scenario, combo, rep)
  std::vector<MetricRow> comparisons;

  const RunRecord& run(std::size_t scenario, std::size_t combo, std::size_t rep) const {
    const std::size_t reps = runs.size() / (scenarios.size() * combos.size());
    return runs[(scenario * combos.size() + combo) * reps + rep];
  }

  PairedOutcomes outcomes(std::size_t scenario) const {
    PairedOutcomes out;
    for (const RunRecord& r : runs)
      if (r.scenario_index == scenario) out.emplace(PairKey{r.combo, r.rep}, r.outcome);
    return out;
  }

  std::optional<std::size_t> find_scenario(const ScenarioSpec& spec) const {
    for (std::size_t s = 0; s < scenarios.size(); ++s)
      if (scenarios[s].kind == spec.kind && (spec.kind != ScenarioKind::Blocking || scenarios[s].delay_days == spec.delay_days))
        return s;
    return std::nullopt;
  }

  /// Index of the simultaneous baseline, if it was run.
  std::optional<std::size_t> simultaneous_index() const { return find_scenario(ScenarioSpec::simultaneous()); }
};

/// Calls fn(i) for i in [0, count) on up to `threads` workers; the first
/// exception thrown by any task is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace detail {

inline void add_comparisons(ExperimentResult& result, Aggregation aggregation) {
  std::uint32_t horizon = 0;
  for (const auto& s : result.scenarios) horizon = std::max(horizon, s.horizon);

  if (auto base = result.simultaneous_index()) {
    const PairedOutcomes base_runs = result.outcomes(*base);
    for (std::size_t s = 0; s < result.scenarios.size(); ++s) {
      if (s == *base) continue;
      MetricRow row = compare_scenarios(base_runs, result.outcomes(s), horizon, aggregation);
      row.comparison = result.scenarios[s].name() + "_vs_" + result.scenarios[*base].name();
      result.comparisons.push_back(std::move(row));
    }
  }

  std::vector<std::size_t> blocking;
  for (std::size_t s = 0; s < result.scenarios.size(); ++s)
    if (result.scenarios[s].kind == ScenarioKind::Blocking) blocking.push_back(s);
  if (blocking.size() < 2) return;
  std::size_t delay_base = blocking.front();
  for (std::size_t s : blocking) {
    const auto d = result.scenarios[s].delay_days;
    if (d == 21 || (result.scenarios[delay_base].delay_days != 21 && d > result.scenarios[delay_base].delay_days))
      delay_base = s;
  }
  const PairedOutcomes base_runs = result.outcomes(delay_base);
  for (std::size_t s : blocking) {
    if (s == delay_base) continue;
    MetricRow row = compare_scenarios(base_runs, result.outcomes(s), horizon, aggregation);
    row.comparison = result.scenarios[s].name() + "_vs_" + result.scenarios[delay_base].name();
    result.comparisons.push_back(std::move(row));
  }
}

}  // namespace detail

/// Runs every (scenario, combo, repetition). Results are stored by position,
/// so the output does not depend on the thread count or scheduling.
///
/// Comparison rows: each non-simultaneous scenario against Simultaneous, and,
/// with two or more blocking delays, each delay against Blocking(21) (or the
/// longest delay when 21 is not among them).
inline ExperimentResult run_experiment(const MultilayerNetwork& net, std::string network_name, const ParamGrid& grid,
                                       std::vector<ScenarioSpec> scenarios, const ExperimentOptions& options) {
  if (options.reps == 0) throw std::invalid_argument("reps must be at least 1");
  if (scenarios.empty()) throw std::invalid_argument("no scenarios given");
  for (const auto& s : scenarios) s.validate();

  ExperimentResult result;
  result.network = std::move(network_name);
  result.grid = grid;
  result.combos = grid.combos();
  result.scenarios = std::move(scenarios);
  if (result.combos.empty()) throw std::invalid_argument("parameter grid is empty");

  const std::size_t per_scenario = result.combos.size() * options.reps;
  result.runs.resize(result.scenarios.size() * per_scenario);
  parallel_for(result.runs.size(), options.threads, [&](std::size_t i) {
    RunRecord& rec = result.runs[i];
    rec.scenario_index = i / per_scenario;
    rec.combo = (i % per_scenario) / options.reps;
    rec.rep = i % options.reps;
    const RunKey key{result.network, result.scenarios[rec.scenario_index], rec.combo, rec.rep};
    rec.run_seed = run_seed_for(options.master_seed, key);
    rec.outcome = summarize_run(run_scenario(net, result.combos[rec.combo], key.scenario, rec.run_seed));
  });

  detail::add_comparisons(result, options.aggregation);
  return result;
}

inline void write_raw_csv(std::ostream& out, const ExperimentResult& result, bool header = true) {
  if (header)
    out << "network,scenario,combo_index,beta,gamma,epsilon,mu,rep,peak_day,peak_I,ir_at_base_peak,ir_final,"
           "termination_day,termination_reason,run_seed\n";
  const auto base = result.simultaneous_index();
  for (const RunRecord& r : result.runs) {
    const SpreadParams& p = result.combos[r.combo];
    const std::uint32_t base_peak =
        base ? result.run(*base, r.combo, r.rep).outcome.peak_day : r.outcome.peak_day;
    out << result.network << ',' << result.scenarios[r.scenario_index].name() << ',' << r.combo << ','
        << csv::number(p.beta) << ',' << csv::number(p.gamma) << ',' << csv::number(p.epsilon) << ','
        << csv::number(p.mu) << ',' << r.rep << ',' << r.outcome.peak_day << ',' << r.outcome.peak_infected << ','
        << r.outcome.ir_at(base_peak) << ',' << r.outcome.ir_final() << ',' << r.outcome.termination_day << ','
        << to_string(r.outcome.termination_reason) << ',' << r.run_seed << '\n';
  }
}

inline void write_comparison_csv(std::ostream& out, const ExperimentResult& result, bool header = true) {
  if (header)
    out << "network,comparison,peak_day_shift_pct,excess_ir_peak_pct,excess_ir_150_pct,p_peak,p_ir_peak,p_ir_150,"
           "n_pairs\n";
  for (const MetricRow& m : result.comparisons) {
    out << result.network << ',' << m.comparison << ',' << csv::fixed(m.peak_day_shift_pct, 4) << ','
        << csv::fixed(m.excess_ir_peak_pct, 4) << ',' << csv::fixed(m.excess_ir_150_pct, 4) << ','
        << csv::number(m.p_peak) << ',' << csv::number(m.p_ir_peak) << ',' << csv::number(m.p_ir_150) << ','
        << m.n_pairs << '\n';
  }
}

// ---------------------------------------------------------------------------
// Mean-field reference

inline constexpr double kMeanFieldDt = 0.01;

struct MeanFieldPoint {
  double t = 0.0;
  double s = 0.0;
  double i = 0.0;
  double r = 0.0;
};

/// Fixed-step RK4 integration of ds/dt = -beta*i*s, di/dt = beta*i*s - gamma*i,
/// dr/dt = gamma*i. Returns one point per step, starting at t = 0.
inline std::vector<MeanFieldPoint> meanfield_sir(double beta, double gamma, double s0, double i0, double dt,
                                                 double horizon) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (s0 < 0.0 || i0 < 0.0 || s0 + i0 > 1.0 + 1e-12) throw std::invalid_argument("need s0, i0 >= 0 and s0 + i0 <= 1");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<MeanFieldPoint> out;
  out.reserve(steps + 1);
  double r0 = 1.0 - s0 - i0;
  if (r0 < 1e-12) r0 = 0.0;  // s0 + i0 == 1 up to rounding
  MeanFieldPoint p{0.0, s0, i0, r0};
  out.push_back(p);

  auto deriv = [&](double s, double i) {
    const double infection = beta * i * s;
    const double recovery = gamma * i;
    return std::array<double, 3>{-infection, infection - recovery, recovery};
  };
  for (std::size_t k = 1; k <= steps; ++k) {
    const auto k1 = deriv(p.s, p.i);
    const auto k2 = deriv(p.s + 0.5 * dt * k1[0], p.i + 0.5 * dt * k1[1]);
    const auto k3 = deriv(p.s + 0.5 * dt * k2[0], p.i + 0.5 * dt * k2[1]);
    const auto k4 = deriv(p.s + dt * k3[0], p.i + dt * k3[1]);
    p.s += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    p.i += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    p.r += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
    p.t = static_cast<double>(k) * dt;
    out.push_back(p);
  }
  return out;
}

}  // namespace mlspread

#pragma once

#include <array>
#include <string>
#include <vector>

#include "darsan/sim.hpp"

namespace darsan {

// Authority slope knob in (-inf, 0]; maps to the two expertise channels.
struct SlopeSpec {
  double slope = -1.0;
  bool neg_infinity = false;
};

// (w_endorse, w_predict) = (1/(1+|s|), |s|/(1+|s|)); negative infinity -> (0,1).
// Positive slopes are rejected.
std::pair<double, double> slope_weights(const SlopeSpec& spec);

// Applies a slope to a config: sets slope fields and the channel weights.
void apply_slope(SimConfig& config, const SlopeSpec& spec);

// Mean of (qea + pdpa) / 2 over a nonempty set of profiles.
double combined_score(const std::vector<ReviewerProfile>& members);

// Top-k reviewers by w_endorse*qea + w_predict*pdpa, ties by ascending id.
std::vector<ReviewerId> ideal_expert_set(const std::vector<ReviewerProfile>& population, int k,
                                         double w_endorse, double w_predict);

inline constexpr std::size_t kStrategyCount = 5;
std::size_t strategy_index(Strategy s);

// One simulation run inside a sweep.
struct RunRow {
  double setting = 0.0;  // grid value (min_qea or honest fraction)
  int repetition = 0;
  std::uint64_t seed = 0;
  double initial_score = 0.0;
  double ideal_score = 0.0;
  double actual_score = 0.0;
  // Mean final expertise of the initial experts per strategy; count 0 when the
  // strategy had no members.
  std::array<double, kStrategyCount> strategy_mean_expertise{};
  std::array<int, kStrategyCount> strategy_count{};
};

struct SettingAggregate {
  double setting = 0.0;
  int n = 0;
  double initial_mean = 0.0, initial_std = 0.0;
  double ideal_mean = 0.0, ideal_std = 0.0;
  double actual_mean = 0.0, actual_std = 0.0;
  std::array<double, kStrategyCount> strategy_mean_expertise{};
  std::array<int, kStrategyCount> strategy_runs{};
};

struct SweepReport {
  std::vector<RunRow> rows;            // deterministic (grid, repetition) order
  std::vector<SettingAggregate> aggregates;
};

// Recomputes aggregates from rows (pure fold, deterministic order).
std::vector<SettingAggregate> aggregate_rows(const std::vector<RunRow>& rows);

// Min-QEA sweep: for each grid value, `repetitions` seeded runs of the base
// config with that bootstrap constraint. Child seeds derive from the base seed,
// experiment name, grid index and repetition. `threads` > 1 fans repetitions
// out with OpenMP; results are identical to the serial path.
SweepReport run_min_qea_sweep(const SimConfig& base, const std::vector<double>& qea_grid,
                              int repetitions, int threads = 1);

// Strategy tournament over honest fractions in (0,1). Initial experts are
// partitioned into round(fraction*k) honest members and a selfish remainder
// assigned from `selfish_strategies` (even split, leftovers to the earliest).
SweepReport run_strategy_tournament(const SimConfig& base,
                                    const std::vector<double>& honest_fractions,
                                    const std::vector<Strategy>& selfish_strategies,
                                    int repetitions, int threads = 1);

// Default grids per the experiment protocol.
std::vector<double> default_qea_grid();       // 0.1 .. 0.9 step 0.1
std::vector<double> default_fraction_grid();  // 0.1 .. 0.9 step 0.1
std::vector<Strategy> all_selfish_strategies();

// Convergence modes: slope 0 (endorsement channel only), negative infinity
// (prediction channel only), and -1 with arrivals enabled. All three share the
// base seed so the initial trait table is identical.
struct ConvergenceModes {
  SimulationResult endorse_only;
  SimulationResult predict_only;
  SimulationResult both_channels;
};

ConvergenceModes run_convergence_modes(const SimConfig& base);

}  // namespace darsan

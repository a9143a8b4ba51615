#include "darsan/experiments.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace darsan {

std::pair<double, double> slope_weights(const SlopeSpec& spec) {
  if (spec.neg_infinity) return {0.0, 1.0};
  if (spec.slope > 0.0) fail(ErrorCode::InvalidArgument, "slope must be in (-inf, 0]");
  double mag = -spec.slope;
  return {1.0 / (1.0 + mag), mag / (1.0 + mag)};
}

void apply_slope(SimConfig& config, const SlopeSpec& spec) {
  auto [w_endorse, w_predict] = slope_weights(spec);
  config.slope = spec.neg_infinity ? 0.0 : spec.slope;
  config.slope_neg_infinity = spec.neg_infinity;
  config.incentives.w_endorse = w_endorse;
  config.incentives.w_predict = w_predict;
}

double combined_score(const std::vector<ReviewerProfile>& members) {
  if (members.empty()) fail(ErrorCode::InvalidArgument, "empty member set");
  double total = 0.0;
  for (const ReviewerProfile& p : members) total += (p.qea + p.pdpa) / 2.0;
  return total / static_cast<double>(members.size());
}

std::vector<ReviewerId> ideal_expert_set(const std::vector<ReviewerProfile>& population, int k,
                                         double w_endorse, double w_predict) {
  if (k < 0 || static_cast<std::size_t>(k) > population.size())
    fail(ErrorCode::InvalidArgument, "k exceeds population size");
  std::vector<std::pair<double, ReviewerId>> ranked;
  ranked.reserve(population.size());
  for (const ReviewerProfile& p : population)
    ranked.emplace_back(w_endorse * p.qea + w_predict * p.pdpa, p.id);
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(ranked.begin(), ranked.begin() + k, ranked.end(), better);
  std::vector<ReviewerId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(ranked[static_cast<std::size_t>(i)].second);
  return out;
}

std::size_t strategy_index(Strategy s) { return static_cast<std::size_t>(s); }

std::vector<double> default_qea_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<double> default_fraction_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

std::vector<Strategy> all_selfish_strategies() {
  return {Strategy::Lazy, Strategy::EndorseExpert, Strategy::EndorsePoor,
          Strategy::NoEndorsement};
}

namespace {

// Runs one simulation and reduces it to a sweep row.
RunRow run_one(const SimConfig& config, double setting, int repetition) {
  RunRow row;
  row.setting = setting;
  row.repetition = repetition;
  row.seed = config.seed;

  SimulationResult result = run_simulation(config);

  auto members = [&result](const std::vector<ReviewerId>& ids) {
    std::vector<ReviewerProfile> out;
    out.reserve(ids.size());
    for (ReviewerId id : ids) out.push_back(result.population[id]);
    return out;
  };
  row.initial_score = combined_score(members(result.initial_experts));
  row.actual_score = combined_score(members(result.final_experts));
  auto ideal = ideal_expert_set(result.population, config.k_experts,
                                config.incentives.w_endorse, config.incentives.w_predict);
  row.ideal_score = combined_score(members(ideal));

  std::array<double, kStrategyCount> totals{};
  std::array<int, kStrategyCount> counts{};
  for (ReviewerId id : result.initial_experts) {
    std::size_t s = strategy_index(result.population[id].strategy);
    totals[s] += result.final_ledger.expertise(id, kSimArea);
    ++counts[s];
  }
  for (std::size_t s = 0; s < kStrategyCount; ++s) {
    row.strategy_count[s] = counts[s];
    row.strategy_mean_expertise[s] = counts[s] > 0 ? totals[s] / counts[s] : 0.0;
  }
  return row;
}

// Deterministic task fan-out shared by both sweeps: rows land in a fixed
// (grid, repetition) slot regardless of thread schedule.
template <typename MakeConfig>
std::vector<RunRow> run_grid(std::size_t grid_size, int repetitions, int threads,
                             MakeConfig&& make_config) {
  std::vector<RunRow> rows(grid_size * static_cast<std::size_t>(repetitions));
  std::exception_ptr first_error = nullptr;
  long total = static_cast<long>(rows.size());

#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long t = 0; t < total; ++t) {
      try {
        std::size_t gi = static_cast<std::size_t>(t) / static_cast<std::size_t>(repetitions);
        int rep = static_cast<int>(t % repetitions);
        auto [config, setting] = make_config(gi, rep);
        rows[static_cast<std::size_t>(t)] = run_one(config, setting, rep);
      } catch (...) {
#pragma omp critical
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return rows;
  }
#else
  (void)threads;
#endif

  for (long t = 0; t < total; ++t) {
    std::size_t gi = static_cast<std::size_t>(t) / static_cast<std::size_t>(repetitions);
    int rep = static_cast<int>(t % repetitions);
    auto [config, setting] = make_config(gi, rep);
    rows[static_cast<std::size_t>(t)] = run_one(config, setting, rep);
  }
  return rows;
}

double std_dev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

std::vector<SettingAggregate> aggregate_rows(const std::vector<RunRow>& rows) {
  std::vector<SettingAggregate> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    while (j < rows.size() && rows[j].setting == rows[i].setting) ++j;

    SettingAggregate agg;
    agg.setting = rows[i].setting;
    agg.n = static_cast<int>(j - i);
    std::vector<double> initial, ideal, actual;
    for (std::size_t r = i; r < j; ++r) {
      initial.push_back(rows[r].initial_score);
      ideal.push_back(rows[r].ideal_score);
      actual.push_back(rows[r].actual_score);
      for (std::size_t s = 0; s < kStrategyCount; ++s) {
        if (rows[r].strategy_count[s] > 0) {
          agg.strategy_mean_expertise[s] += rows[r].strategy_mean_expertise[s];
          ++agg.strategy_runs[s];
        }
      }
    }
    auto mean = [](const std::vector<double>& v) {
      double t = 0.0;
      for (double x : v) t += x;
      return t / static_cast<double>(v.size());
    };
    agg.initial_mean = mean(initial);
    agg.ideal_mean = mean(ideal);
    agg.actual_mean = mean(actual);
    agg.initial_std = std_dev(initial, agg.initial_mean);
    agg.ideal_std = std_dev(ideal, agg.ideal_mean);
    agg.actual_std = std_dev(actual, agg.actual_mean);
    for (std::size_t s = 0; s < kStrategyCount; ++s) {
      if (agg.strategy_runs[s] > 0) agg.strategy_mean_expertise[s] /= agg.strategy_runs[s];
    }
    out.push_back(agg);
    i = j;
  }
  return out;
}

SweepReport run_min_qea_sweep(const SimConfig& base, const std::vector<double>& qea_grid,
                              int repetitions, int threads) {
  if (repetitions < 1) fail(ErrorCode::InvalidArgument, "repetitions must be positive");
  for (double q : qea_grid) {
    if (q < 0.0 || q > 1.0) fail(ErrorCode::InvalidArgument, "qea grid value outside [0,1]");
  }

  auto make_config = [&](std::size_t gi, int rep) {
    SimConfig config = base;
    config.min_initial_qea = qea_grid[gi];
    config.seed = derive_seed(base.seed, "sweep-qea", gi, static_cast<std::uint64_t>(rep));
    return std::make_pair(config, qea_grid[gi]);
  };
  SweepReport report;
  report.rows = run_grid(qea_grid.size(), repetitions, threads, make_config);
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

SweepReport run_strategy_tournament(const SimConfig& base,
                                    const std::vector<double>& honest_fractions,
                                    const std::vector<Strategy>& selfish_strategies,
                                    int repetitions, int threads) {
  if (repetitions < 1) fail(ErrorCode::InvalidArgument, "repetitions must be positive");
  if (selfish_strategies.empty())
    fail(ErrorCode::InvalidArgument, "tournament needs at least one selfish strategy");
  for (Strategy s : selfish_strategies) {
    if (s == Strategy::Honest)
      fail(ErrorCode::InvalidArgument, "selfish assignment cannot include the honest strategy");
  }
  for (double f : honest_fractions) {
    if (f <= 0.0 || f >= 1.0)
      fail(ErrorCode::InvalidArgument, "honest fraction must lie strictly inside (0,1)");
  }

  auto make_config = [&](std::size_t gi, int rep) {
    double fraction = honest_fractions[gi];
    SimConfig config = base;
    config.seed = derive_seed(base.seed, "tournament", gi, static_cast<std::uint64_t>(rep));
    // Even split of the selfish share across the assigned strategies; the
    // rounding rule (honest = round(f*k), leftovers to earliest) sits in the
    // sim's strategy assignment.
    config.strategy_mix.clear();
    config.strategy_mix[Strategy::Honest] = fraction;
    double each = (1.0 - fraction) / static_cast<double>(selfish_strategies.size());
    for (Strategy s : selfish_strategies) config.strategy_mix[s] += each;
    return std::make_pair(config, fraction);
  };
  SweepReport report;
  report.rows = run_grid(honest_fractions.size(), repetitions, threads, make_config);
  report.aggregates = aggregate_rows(report.rows);
  return report;
}

ConvergenceModes run_convergence_modes(const SimConfig& base) {
  ConvergenceModes modes;

  SimConfig endorse = base;
  apply_slope(endorse, SlopeSpec{0.0, false});
  endorse.arrivals.enabled = false;
  modes.endorse_only = run_simulation(endorse);

  SimConfig predict = base;
  apply_slope(predict, SlopeSpec{0.0, true});
  predict.arrivals.enabled = false;
  modes.predict_only = run_simulation(predict);

  SimConfig both = base;
  apply_slope(both, SlopeSpec{-1.0, false});
  both.arrivals.enabled = true;
  modes.both_channels = run_simulation(both);

  return modes;
}

}  // namespace darsan

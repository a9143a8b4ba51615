#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include "darsan/agents.hpp"
#include "darsan/protocol.hpp"
#include "darsan/rng.hpp"

namespace darsan {

// The simulation runs a single area.
inline constexpr AreaId kSimArea = 0;

struct ArrivalSchedule {
  bool enabled = false;
  int count = 10;   // reviewers per batch
  int every = 100;  // rounds between batches (first batch after this many rounds)
};

struct SimConfig {
  int n_reviewers = 500;
  int n_rounds = 3000;
  int k_experts = 50;
  double initial_expertise = 100000.0;
  double trait_mean = 0.5;
  double trait_std = 0.15;
  double min_initial_qea = 0.0;
  double sale_noise_sigma = 0.05;
  ArrivalSchedule arrivals;
  std::uint64_t seed = 0;
  double entry_fee = 10.0;
  // Channel weights live in incentives (w_endorse / w_predict); the slope is
  // kept alongside for provenance in configs and manifests.
  double slope = -1.0;
  bool slope_neg_infinity = false;
  IncentiveParams incentives;
  NoiseParams noise;
  // Fractions of the initial expert set per strategy; must sum to 1.
  std::map<Strategy, double> strategy_mix = {{Strategy::Honest, 1.0}};
  int max_admission_attempts = 1000;

  void validate() const;
};

// One admitted round of the series export.
struct PerRound {
  int round = 0;  // 1-based
  double asset_q = 0.0;
  double asset_d = 0.0;
  double observed_demand = 0.0;
  double rbar = 0.0;
  double eps = 0.0;
  double pool_paid = 0.0;
  int expert_turnover = 0;
  // In-memory extras (not part of the series CSV schema).
  double expert_combined_score = 0.0;
  int admission_attempts = 1;
  double endorse_paid = 0.0;
  double dividend_paid = 0.0;
};

struct SimulationResult {
  std::vector<ReviewerProfile> population;  // ids are indices; includes arrivals
  std::vector<ReviewerId> initial_experts;  // ascending
  std::vector<ReviewerId> final_experts;    // after the last settled round
  ExpertiseLedger final_ledger;
  TokenLedger tokens;
  std::vector<PerRound> rounds;
  Digest log_head{};  // event-log digest
  std::uint64_t log_size = 0;
};

// Population traits: independent draws from Normal(trait_mean, trait_std)
// truncated to [0,1] by re-drawing. Ids are assigned 0..n-1.
std::vector<ReviewerProfile> init_population(const SimConfig& config, Rng& rng);

// Uniform random k-subset of reviewers with qea >= min_initial_qea, ascending.
std::vector<ReviewerId> pick_initial_experts(const std::vector<ReviewerProfile>& population,
                                             const SimConfig& config, Rng& rng);

// Fresh asset: quality and demand uniform on [0,1], single simulation area.
AssetRecord generate_asset(AssetId id, const SimConfig& config, Rng& rng);

// Sale metric: hidden demand plus zero-mean Gaussian noise, clamped to [0,1].
double observed_demand(double hidden_demand, double sigma, Rng& rng);

// Drives the protocol engine round by round with independent per-concern
// random streams. Stepping is exposed so tests can inspect state at round
// boundaries; run_simulation wraps the whole loop.
class Simulation {
 public:
  // `event_sink` receives one event line per protocol transition (optional).
  // `retain_events` keeps events in memory (tests only; large runs stream).
  explicit Simulation(const SimConfig& config, std::ostream* event_sink = nullptr,
                      bool retain_events = false);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Runs the next admitted round (injecting scheduled arrivals first,
  // regenerating rejected assets). Returns the series row.
  PerRound run_round();

  const std::vector<ReviewerProfile>& population() const { return population_; }
  const std::vector<ReviewerId>& initial_experts() const { return initial_experts_; }
  ProtocolEngine& engine() { return *engine_; }
  const ProtocolEngine& engine() const { return *engine_; }
  int rounds_run() const { return round_index_; }

  SimulationResult finish();

 private:
  void inject_arrivals();

  SimConfig config_;
  std::vector<ReviewerProfile> population_;
  std::vector<ReviewerId> initial_experts_;
  std::vector<ReviewerId> current_experts_;
  std::unique_ptr<ProtocolEngine> engine_;
  Rng assets_rng_, ratings_rng_, reviews_rng_, predictions_rng_, endorsements_rng_, sale_rng_,
      arrivals_rng_;
  AssetId next_asset_id_ = 0;
  int round_index_ = 0;  // completed admitted rounds
  std::vector<PerRound> rounds_;
};

SimulationResult run_simulation(const SimConfig& config, std::ostream* event_sink = nullptr);

// Mean of (qea + pdpa) / 2 over the given members (ids index the population).
double combined_score(const std::vector<ReviewerProfile>& population,
                      const std::vector<ReviewerId>& members);

}  // namespace darsan

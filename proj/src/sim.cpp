#include "darsan/sim.hpp"

#include <algorithm>
#include <cmath>

namespace darsan {

namespace {

constexpr Strategy kSelfishOrder[] = {Strategy::Lazy, Strategy::EndorseExpert,
                                      Strategy::EndorsePoor, Strategy::NoEndorsement};

double mix_fraction(const std::map<Strategy, double>& mix, Strategy s) {
  auto it = mix.find(s);
  return it == mix.end() ? 0.0 : it->second;
}

// Honest count rounds to nearest; the selfish remainder is split proportionally
// with leftovers going to the earliest strategies in fixed order.
void assign_strategies(std::vector<ReviewerProfile>& population,
                       const std::vector<ReviewerId>& experts,
                       const std::map<Strategy, double>& mix) {
  int k = static_cast<int>(experts.size());
  double honest_frac = mix_fraction(mix, Strategy::Honest);
  int n_honest = static_cast<int>(std::lround(honest_frac * k));
  n_honest = std::clamp(n_honest, 0, k);
  int n_selfish = k - n_honest;

  double selfish_frac_total = 0.0;
  for (Strategy s : kSelfishOrder) selfish_frac_total += mix_fraction(mix, s);
  if (selfish_frac_total <= 0.0) n_selfish = 0;

  int counts[4] = {0, 0, 0, 0};
  if (n_selfish > 0) {
    int assigned = 0;
    for (int i = 0; i < 4; ++i) {
      counts[i] = static_cast<int>(
          std::floor(n_selfish * mix_fraction(mix, kSelfishOrder[i]) / selfish_frac_total));
      assigned += counts[i];
    }
    int leftover = n_selfish - assigned;
    for (int i = 0; i < 4 && leftover > 0; ++i) {
      if (mix_fraction(mix, kSelfishOrder[i]) > 0.0) {
        ++counts[i];
        --leftover;
      }
    }
  }

  std::size_t pos = 0;
  for (int j = 0; j < n_honest; ++j, ++pos) population[experts[pos]].strategy = Strategy::Honest;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < counts[i]; ++j, ++pos)
      population[experts[pos]].strategy = kSelfishOrder[i];
  }
  // Rounding slack (selfish fractions all zero but n_selfish > 0) stays honest.
  for (; pos < static_cast<std::size_t>(k); ++pos)
    population[experts[pos]].strategy = Strategy::Honest;
}

}  // namespace

void SimConfig::validate() const {
  if (n_reviewers < 1) fail(ErrorCode::Config, "n_reviewers must be positive");
  if (n_rounds < 0) fail(ErrorCode::Config, "n_rounds must be nonnegative");
  if (k_experts < 1) fail(ErrorCode::Config, "k_experts must be positive");
  if (k_experts > n_reviewers) fail(ErrorCode::Config, "k_experts exceeds n_reviewers");
  if (initial_expertise <= 0.0) fail(ErrorCode::Config, "initial_expertise must be positive");
  if (trait_std < 0.0) fail(ErrorCode::Config, "trait_std must be nonnegative");
  if (min_initial_qea < 0.0 || min_initial_qea > 1.0)
    fail(ErrorCode::Config, "min_initial_qea outside [0,1]");
  if (sale_noise_sigma < 0.0) fail(ErrorCode::Config, "sale_noise_sigma must be nonnegative");
  if (arrivals.enabled && (arrivals.count < 1 || arrivals.every < 1))
    fail(ErrorCode::Config, "arrival batches need positive count and spacing");
  if (entry_fee < 0.0) fail(ErrorCode::Config, "entry_fee must be nonnegative");
  if (max_admission_attempts < 1)
    fail(ErrorCode::Config, "max_admission_attempts must be positive");
  double mix_total = 0.0;
  for (const auto& [strategy, fraction] : strategy_mix) {
    if (fraction < 0.0) fail(ErrorCode::Config, "strategy fraction must be nonnegative");
    mix_total += fraction;
  }
  if (std::abs(mix_total - 1.0) > 1e-9) fail(ErrorCode::Config, "strategy_mix must sum to 1");
  incentives.validate();
  if (noise.w_min <= 0.0 || noise.w_max < noise.w_min)
    fail(ErrorCode::Config, "noise widths need 0 < w_min <= w_max");
}

std::vector<ReviewerProfile> init_population(const SimConfig& config, Rng& rng) {
  auto draw_trait = [&]() {
    if (config.trait_std <= 0.0) return std::clamp(config.trait_mean, 0.0, 1.0);
    double x;
    do {
      x = rng.normal(config.trait_mean, config.trait_std);
    } while (x < 0.0 || x > 1.0);
    return x;
  };

  std::vector<ReviewerProfile> population;
  population.reserve(static_cast<std::size_t>(config.n_reviewers));
  for (int i = 0; i < config.n_reviewers; ++i) {
    ReviewerProfile p;
    p.id = static_cast<ReviewerId>(i);
    p.qea = draw_trait();
    p.pdpa = draw_trait();
    population.push_back(p);
  }
  return population;
}

std::vector<ReviewerId> pick_initial_experts(const std::vector<ReviewerProfile>& population,
                                             const SimConfig& config, Rng& rng) {
  std::vector<ReviewerId> eligible;
  for (const ReviewerProfile& p : population) {
    if (p.qea >= config.min_initial_qea) eligible.push_back(p.id);
  }
  if (eligible.size() < static_cast<std::size_t>(config.k_experts)) {
    fail(ErrorCode::Config, "only " + std::to_string(eligible.size()) +
                                " reviewers satisfy min_initial_qea, need " +
                                std::to_string(config.k_experts));
  }
  for (int i = 0; i < config.k_experts; ++i) {
    std::size_t j =
        static_cast<std::size_t>(i) + rng.index(eligible.size() - static_cast<std::size_t>(i));
    std::swap(eligible[static_cast<std::size_t>(i)], eligible[j]);
  }
  eligible.resize(static_cast<std::size_t>(config.k_experts));
  std::sort(eligible.begin(), eligible.end());
  return eligible;
}

AssetRecord generate_asset(AssetId id, const SimConfig& config, Rng& rng) {
  AssetRecord asset;
  asset.id = id;
  asset.area_tags = {kSimArea};
  asset.hidden_quality = rng.uniform01();
  asset.hidden_demand = rng.uniform01();
  asset.entry_fee = config.entry_fee;
  return asset;
}

double observed_demand(double hidden_demand, double sigma, Rng& rng) {
  if (hidden_demand < 0.0 || hidden_demand > 1.0)
    fail(ErrorCode::InvalidArgument, "demand outside [0,1]");
  if (sigma <= 0.0) return hidden_demand;
  return std::clamp(hidden_demand + rng.normal(0.0, sigma), 0.0, 1.0);
}

double combined_score(const std::vector<ReviewerProfile>& population,
                      const std::vector<ReviewerId>& members) {
  if (members.empty()) fail(ErrorCode::InvalidArgument, "empty member set");
  double total = 0.0;
  for (ReviewerId id : members) {
    if (id >= population.size() || population[id].id != id)
      fail(ErrorCode::InvalidArgument, "member id outside population");
    total += (population[id].qea + population[id].pdpa) / 2.0;
  }
  return total / static_cast<double>(members.size());
}

Simulation::Simulation(const SimConfig& config, std::ostream* event_sink, bool retain_events)
    : config_(config),
      assets_rng_(derive_seed(config.seed, "assets")),
      ratings_rng_(derive_seed(config.seed, "ratings")),
      reviews_rng_(derive_seed(config.seed, "reviews")),
      predictions_rng_(derive_seed(config.seed, "predictions")),
      endorsements_rng_(derive_seed(config.seed, "endorsements")),
      sale_rng_(derive_seed(config.seed, "sale")),
      arrivals_rng_(derive_seed(config.seed, "arrivals")) {
  config_.incentives.k = config_.k_experts;
  config_.validate();

  Rng population_rng(derive_seed(config_.seed, "population"));
  population_ = init_population(config_, population_rng);

  Rng bootstrap_rng(derive_seed(config_.seed, "bootstrap"));
  initial_experts_ = pick_initial_experts(population_, config_, bootstrap_rng);
  assign_strategies(population_, initial_experts_, config_.strategy_mix);

  ExpertiseLedger ledger;
  for (const ReviewerProfile& p : population_) ledger.register_reviewer(p.id);
  for (ReviewerId id : initial_experts_)
    ledger.set_expertise(id, kSimArea, config_.initial_expertise);

  engine_ = std::make_unique<ProtocolEngine>(std::move(ledger), config_.incentives);
  engine_->log().set_sink(event_sink);
  engine_->log().set_retention(retain_events);
  current_experts_ = engine_->current_experts(kSimArea);
}

Simulation::~Simulation() = default;

void Simulation::inject_arrivals() {
  auto draw_trait = [&]() {
    if (config_.trait_std <= 0.0) return std::clamp(config_.trait_mean, 0.0, 1.0);
    double x;
    do {
      x = arrivals_rng_.normal(config_.trait_mean, config_.trait_std);
    } while (x < 0.0 || x > 1.0);
    return x;
  };
  for (int i = 0; i < config_.arrivals.count; ++i) {
    ReviewerProfile p;
    p.id = static_cast<ReviewerId>(population_.size());
    p.qea = draw_trait();
    p.pdpa = draw_trait();
    population_.push_back(p);
    engine_->ledger().register_reviewer(p.id);
  }
}

PerRound Simulation::run_round() {
  if (config_.arrivals.enabled && round_index_ > 0 && round_index_ % config_.arrivals.every == 0)
    inject_arrivals();

  // Pre-listing: regenerate until an asset passes admission control.
  std::uint64_t round_id = 0;
  AssetRecord admitted;
  int attempts = 0;
  bool listed = false;
  while (attempts < config_.max_admission_attempts) {
    ++attempts;
    AssetRecord asset = generate_asset(next_asset_id_++, config_, assets_rng_);
    round_id = engine_->submit_asset(asset);
    const RoundState& st = engine_->round(round_id);
    for (ReviewerId expert : st.assigned_experts) {
      double rating =
          honest_review(population_[expert], asset.hidden_quality, config_.noise, ratings_rng_);
      engine_->record_rating(round_id, expert, rating);
    }
    if (engine_->finalize_admission(round_id)) {
      admitted = asset;
      listed = true;
      break;
    }
  }
  if (!listed) {
    fail(ErrorCode::Config, "no asset admitted after " +
                                std::to_string(config_.max_admission_attempts) +
                                " attempts; threshold too high?");
  }

  // Pre-sale: every reviewer reviews and predicts, then endorses per strategy.
  for (const ReviewerProfile& p : population_) {
    double review = honest_review(p, admitted.hidden_quality, config_.noise, reviews_rng_);
    engine_->record_review(round_id, p.id, review);
  }
  for (const ReviewerProfile& p : population_) {
    double prediction =
        honest_prediction(p, admitted.hidden_demand, config_.noise, predictions_rng_);
    engine_->record_prediction(round_id, p.id, prediction);
  }
  {
    const RoundState& st = engine_->round(round_id);
    auto picks =
        choose_all_endorsements(population_, st.reviews, st.assigned_experts, endorsements_rng_);
    for (const auto& [endorser, endorsee] : picks)
      engine_->record_endorsement(round_id, endorser, endorsee);
  }

  // Sale and settlement.
  double demand = observed_demand(admitted.hidden_demand, config_.sale_noise_sigma, sale_rng_);
  RoundOutcome outcome = engine_->settle_round(round_id, demand);
  current_experts_ = outcome.new_experts[kSimArea];

  PerRound row;
  row.round = ++round_index_;
  row.asset_q = admitted.hidden_quality;
  row.asset_d = admitted.hidden_demand;
  row.observed_demand = demand;
  row.rbar = outcome.rbar;
  row.eps = outcome.prediction_settled ? outcome.eps : 0.0;
  row.pool_paid = outcome.prediction_paid_total;
  row.expert_turnover = outcome.expert_turnover;
  row.expert_combined_score = combined_score(population_, current_experts_);
  row.admission_attempts = attempts;
  row.endorse_paid = outcome.endorse_gain_total;
  row.dividend_paid = outcome.dividend_total;
  rounds_.push_back(row);
  return row;
}

SimulationResult Simulation::finish() {
  SimulationResult result;
  result.population = std::move(population_);
  result.initial_experts = initial_experts_;
  result.final_experts = current_experts_;
  result.final_ledger = engine_->ledger();
  result.tokens = engine_->tokens();
  result.rounds = std::move(rounds_);
  result.log_head = engine_->log().head_hash();
  result.log_size = engine_->log().size();
  return result;
}

SimulationResult run_simulation(const SimConfig& config, std::ostream* event_sink) {
  Simulation sim(config, event_sink);
  for (int i = 0; i < config.n_rounds; ++i) sim.run_round();
  return sim.finish();
}

}  // namespace darsan

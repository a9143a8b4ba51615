#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "darsan/sim.hpp"

using namespace darsan;

namespace {

// Desk-scale config that still exercises every code path.
SimConfig small_config() {
  SimConfig config;
  config.n_reviewers = 40;
  config.n_rounds = 25;
  config.k_experts = 5;
  config.seed = 314159;
  config.min_initial_qea = 0.4;
  return config;
}

}  // namespace

TEST_CASE("population initialization") {
  SimConfig config;
  config.n_reviewers = 10000;
  Rng rng(derive_seed(config.seed, "population"));
  auto population = init_population(config, rng);
  REQUIRE(population.size() == 10000);

  double mean_qea = 0.0;
  for (const auto& p : population) {
    CHECK(p.qea >= 0.0);
    CHECK(p.qea <= 1.0);
    CHECK(p.pdpa >= 0.0);
    CHECK(p.pdpa <= 1.0);
    mean_qea += p.qea;
  }
  mean_qea /= static_cast<double>(population.size());
  CHECK(std::abs(mean_qea - 0.5) < 0.01);

  // Degenerate spread pins every trait at the mean.
  SimConfig flat = config;
  flat.trait_std = 0.0;
  Rng rng2(1);
  for (const auto& p : init_population(flat, rng2)) {
    CHECK(p.qea == 0.5);
    CHECK(p.pdpa == 0.5);
  }

  // Same seed, same population.
  Rng rng3(derive_seed(config.seed, "population"));
  auto again = init_population(config, rng3);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].qea == population[i].qea);
    CHECK(again[i].pdpa == population[i].pdpa);
  }
}

TEST_CASE("initial expert selection respects the qea floor") {
  SimConfig config = small_config();
  config.min_initial_qea = 0.55;
  Rng pop_rng(derive_seed(config.seed, "population"));
  auto population = init_population(config, pop_rng);

  Rng rng(derive_seed(config.seed, "bootstrap"));
  auto experts = pick_initial_experts(population, config, rng);
  REQUIRE(experts.size() == 5);
  for (ReviewerId id : experts) CHECK(population[id].qea >= 0.55);
  CHECK(std::is_sorted(experts.begin(), experts.end()));

  // Too few eligible reviewers is a config error.
  SimConfig impossible = config;
  impossible.min_initial_qea = 0.999;
  Rng rng2(7);
  try {
    pick_initial_experts(population, impossible, rng2);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}

TEST_CASE("asset generation is uniform and seeded") {
  SimConfig config;
  Rng rng(derive_seed(9, "assets"));
  double mean_q = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto asset = generate_asset(static_cast<AssetId>(i), config, rng);
    CHECK(asset.hidden_quality >= 0.0);
    CHECK(asset.hidden_quality <= 1.0);
    CHECK(asset.hidden_demand >= 0.0);
    CHECK(asset.hidden_demand <= 1.0);
    mean_q += asset.hidden_quality;
  }
  CHECK(std::abs(mean_q / 10000.0 - 0.5) < 0.02);

  Rng rng_a(derive_seed(5, "assets")), rng_b(derive_seed(5, "assets"));
  for (int i = 0; i < 50; ++i) {
    auto a = generate_asset(static_cast<AssetId>(i), config, rng_a);
    auto b = generate_asset(static_cast<AssetId>(i), config, rng_b);
    CHECK(a.hidden_quality == b.hidden_quality);
    CHECK(a.hidden_demand == b.hidden_demand);
  }
}

TEST_CASE("observed demand noise model") {
  Rng rng(21);
  CHECK(observed_demand(0.37, 0.0, rng) == 0.37);
  for (int i = 0; i < 2000; ++i) {
    CHECK(observed_demand(1.0, 0.3, rng) <= 1.0);
    CHECK(observed_demand(0.0, 0.3, rng) >= 0.0);
  }

  // Moment check: sample std within 0.005 of sigma for an interior demand.
  Rng rng2(99);
  const int n = 100000;
  double mean = 0.0;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = observed_demand(0.5, 0.05, rng2);
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(std::abs(std::sqrt(ss / n) - 0.05) < 0.005);
}

TEST_CASE("zero threshold admits the first asset") {
  SimConfig config = small_config();
  config.incentives.thresh = 0.0;
  config.n_rounds = 3;
  Simulation sim(config);
  for (int i = 0; i < 3; ++i) {
    PerRound row = sim.run_round();
    CHECK(row.admission_attempts == 1);
  }
}

TEST_CASE("simulation is deterministic in the seed") {
  SimConfig config = small_config();
  auto a = run_simulation(config);
  auto b = run_simulation(config);

  CHECK(a.log_head == b.log_head);
  CHECK(a.log_size == b.log_size);
  CHECK(a.final_ledger.expertise_equals(b.final_ledger));
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].rbar == b.rounds[i].rbar);
    CHECK(a.rounds[i].eps == b.rounds[i].eps);
    CHECK(a.rounds[i].pool_paid == b.rounds[i].pool_paid);
    CHECK(a.rounds[i].observed_demand == b.rounds[i].observed_demand);
  }
  CHECK(a.final_experts == b.final_experts);

  auto c = run_simulation([&] {
    SimConfig other = config;
    other.seed = config.seed + 1;
    return other;
  }());
  CHECK(a.log_head != c.log_head);
}

TEST_CASE("zero rounds leaves the bootstrapped ledger") {
  SimConfig config = small_config();
  config.n_rounds = 0;
  auto result = run_simulation(config);
  CHECK(result.rounds.empty());
  for (const auto& p : result.population) {
    bool is_initial = std::binary_search(result.initial_experts.begin(),
                                         result.initial_experts.end(), p.id);
    CHECK(result.final_ledger.expertise(p.id, kSimArea) ==
          (is_initial ? config.initial_expertise : 0.0));
  }
  CHECK(result.final_experts.size() == 5);
}

TEST_CASE("arrival schedule grows the population on time") {
  SimConfig config = small_config();
  config.n_rounds = 300;
  config.n_reviewers = 30;
  config.arrivals.enabled = true;
  config.arrivals.count = 10;
  config.arrivals.every = 50;
  config.incentives.thresh = 0.0;  // keep it quick

  Simulation sim(config);
  CHECK(sim.population().size() == 30);
  for (int i = 0; i < 50; ++i) sim.run_round();
  CHECK(sim.population().size() == 30);  // batch lands before round 51
  sim.run_round();
  CHECK(sim.population().size() == 40);
  for (int i = 51; i < 300; ++i) sim.run_round();
  // floor(299/50) = 5 batches in total.
  CHECK(sim.population().size() == 30 + 5 * 10);

  auto result = sim.finish();
  CHECK(result.population.size() == 80);
  for (ReviewerId id = 30; id < 80; ++id)
    CHECK_FALSE(std::binary_search(result.initial_experts.begin(), result.initial_experts.end(),
                                   id));
}

TEST_CASE("ledger stays nonnegative and the log verifies at every boundary") {
  SimConfig config = small_config();
  config.n_rounds = 12;
  std::ostringstream sink;
  Simulation sim(config, &sink, /*retain_events=*/true);
  for (int i = 0; i < config.n_rounds; ++i) {
    PerRound row = sim.run_round();
    CHECK(sim.engine().ledger().min_expertise() >= 0.0);
    auto verdict = EventLog::verify(sim.engine().log().events());
    CHECK(verdict.ok);
    // Expert pool is exactly k after every rotation.
    CHECK(sim.engine().current_experts(kSimArea).size() == 5);
    CHECK(row.round == i + 1);
  }
}

TEST_CASE("per-round conservation accounting") {
  SimConfig config = small_config();
  config.n_rounds = 0;
  Simulation sim(config);
  double before = 0.0;
  for (ReviewerId id : sim.engine().ledger().reviewers())
    before += sim.engine().ledger().expertise(id, kSimArea);
  for (int i = 0; i < 10; ++i) {
    PerRound row = sim.run_round();
    double after = 0.0;
    for (ReviewerId id : sim.engine().ledger().reviewers())
      after += sim.engine().ledger().expertise(id, kSimArea);
    double distributed = row.endorse_paid + row.dividend_paid + row.pool_paid;
    CHECK(std::abs((after - before) - distributed) <=
          1e-9 * std::max(1.0, std::abs(distributed)));
    before = after;
  }
}

TEST_CASE("small-run replay reproduces the final ledger bit for bit") {
  SimConfig config = small_config();
  config.n_rounds = 20;
  config.arrivals.enabled = true;
  config.arrivals.count = 3;
  config.arrivals.every = 7;

  Simulation sim(config, nullptr, /*retain_events=*/true);
  for (int i = 0; i < config.n_rounds; ++i) sim.run_round();
  auto events = sim.engine().log().events();
  auto result = sim.finish();

  ExpertiseLedger initial;
  for (const auto& p : result.population) initial.register_reviewer(p.id);
  for (ReviewerId id : result.initial_experts)
    initial.set_expertise(id, kSimArea, config.initial_expertise);

  IncentiveParams params = config.incentives;
  params.k = config.k_experts;
  ProtocolEngine replayed = replay_events(std::move(initial), params, events);
  CHECK(replayed.ledger().expertise_equals(result.final_ledger));
  CHECK(replayed.log().head_hash() == result.log_head);
  CHECK(replayed.log().size() == result.log_size);
}

TEST_CASE("sink stream carries the same chain the digest reports") {
  SimConfig config = small_config();
  config.n_rounds = 5;
  std::ostringstream sink;
  auto result = run_simulation(config, &sink);

  std::istringstream in(sink.str());
  std::string line;
  std::uint64_t count = 0;
  ProtocolEvent last;
  while (std::getline(in, line)) {
    REQUIRE(EventLog::parse_line(line, last));
    ++count;
  }
  CHECK(count == result.log_size);
  CHECK(last.hash == result.log_head);
}

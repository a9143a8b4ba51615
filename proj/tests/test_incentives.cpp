#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "darsan/incentives.hpp"
#include "oracle_ref.hpp"

using namespace darsan;

namespace {

IncentiveParams defaults() {
  IncentiveParams p;
  return p;
}

bool close_rel(double a, double b, double tol = 1e-12) {
  double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= tol * scale;
}

}  // namespace

TEST_CASE("mingain and addgain linear forms") {
  IncentiveParams p = defaults();
  CHECK(mingain(0.0, p) == 0.0);
  CHECK(addgain(0.0, p) == 0.0);
  CHECK(mingain(100000.0, p) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(mingain(-1.0, p), Error);
  CHECK_THROWS_AS(addgain(-0.5, p), Error);
}

TEST_CASE("endorsement gain worked values") {
  IncentiveParams p = defaults();
  CHECK(endorsement_gain(0.0, 0.0, p) == 0.0);
  CHECK(endorsement_gain(100000.0, 100000.0, p) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(endorsement_gain(100000.0, 0.0, p) == doctest::Approx(200.0).epsilon(1e-12));
  // Endorsee above the endorser: gap clamps to zero, mingain remains.
  CHECK(endorsement_gain(1000.0, 5000.0, p) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("endorsement gain monotonicity") {
  IncentiveParams p = defaults();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> exp_dist(0.0, 200000.0);
  for (int i = 0; i < 500; ++i) {
    double e = exp_dist(rng), r = exp_dist(rng), bump = exp_dist(rng) * 0.01;
    double base = endorsement_gain(e, r, p);
    CHECK(base >= mingain(e, p));
    CHECK(endorsement_gain(e + bump, r, p) >= base);
    CHECK(endorsement_gain(e, r + bump, p) <= base);
  }
}

TEST_CASE("dividends worked values") {
  IncentiveParams p = defaults();  // c1 = 0.5
  std::vector<std::pair<ReviewerId, std::uint32_t>> snap = {{1, 3}, {2, 1}};

  auto out = dividends(100.0, /*endorser=*/3, snap, p);
  REQUIRE(out.size() == 2);
  CHECK(out[1] == doctest::Approx(37.5).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(12.5).epsilon(1e-12));

  // Self-endorser excluded from payout but still in the denominator.
  auto self_out = dividends(100.0, /*endorser=*/1, snap, p);
  REQUIRE(self_out.size() == 1);
  CHECK(self_out[2] == doctest::Approx(12.5).epsilon(1e-12));

  CHECK(dividends(100.0, 3, {}, p).empty());
}

TEST_CASE("dividend conservation") {
  IncentiveParams p = defaults();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size_dist(1, 8);
  std::uniform_int_distribution<std::uint32_t> count_dist(1, 20);
  std::uniform_real_distribution<double> delta_dist(0.0, 500.0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = size_dist(rng);
    std::vector<std::pair<ReviewerId, std::uint32_t>> snap;
    for (int i = 0; i < n; ++i) snap.emplace_back(static_cast<ReviewerId>(i), count_dist(rng));
    double delta = delta_dist(rng);
    ReviewerId endorser = static_cast<ReviewerId>(trial % (n + 2));  // sometimes an investor
    auto out = dividends(delta, endorser, snap, p);
    double paid = 0.0;
    for (const auto& [id, amt] : out) paid += amt;
    double cap = p.c1 * delta;
    CHECK(paid <= cap + 1e-9 * std::max(1.0, cap));
    bool endorser_invested = false;
    for (const auto& [id, cnt] : snap) {
      if (id == endorser) endorser_invested = true;
    }
    if (!endorser_invested && delta > 0.0) {
      CHECK(close_rel(paid, cap, 1e-9));
    }
  }
}

TEST_CASE("weighted mean rating") {
  CHECK(weighted_mean_rating({{0.8, 2.0}, {0.8, 7.0}}) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(weighted_mean_rating({{1.0, 3.0}, {0.0, 1.0}}) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(weighted_mean_rating({{0.2, 1.0}, {0.6, 1.0}, {1.0, 1.0}}) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_mean_rating({}), Error);
  try {
    weighted_mean_rating({{0.5, 0.0}, {0.7, 0.0}});
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
}

TEST_CASE("admission boundary") {
  CHECK(admit(0.5, 0.5));
  CHECK_FALSE(admit(0.49, 0.5));
  CHECK(admit(1.0, 0.0));
}

TEST_CASE("prediction error") {
  CHECK(prediction_error(0.7, 0.7) == 0.0);
  CHECK(prediction_error(1.0, 0.0) == 1.0);
  CHECK(prediction_error(0.6, 0.35) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK_THROWS_AS(prediction_error(1.2, 0.5), Error);
}

TEST_CASE("system error squares expertise") {
  CHECK(system_error({{0.2, 1.0}, {0.2, 5.0}, {0.2, 0.3}}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(system_error({{0.04, 100.0}, {0.25, 0.0}}) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(system_error({{0.0, 1.0}, {0.3, 2.0}}) == doctest::Approx(0.24).epsilon(1e-12));
  try {
    system_error({{0.1, 0.0}});
    FAIL("expected degenerate error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
}

TEST_CASE("system error bounds and scale invariance") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> err_dist(0.0, 1.0);
  std::uniform_real_distribution<double> exp_dist(0.0, 100000.0);
  std::uniform_real_distribution<double> scale_dist(0.1, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + static_cast<int>(err_dist(rng) * 9);
    std::vector<std::pair<double, double>> input;
    double lo = 1.0, hi = 0.0;
    bool any_weight = false;
    for (int i = 0; i < n; ++i) {
      double e = err_dist(rng), x = exp_dist(rng);
      if (i == 0) x += 1.0;  // at least one positive weight
      input.emplace_back(e, x);
      if (x > 0.0) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        any_weight = true;
      }
    }
    REQUIRE(any_weight);
    double eps = system_error(input);
    CHECK(eps >= lo - 1e-12);
    CHECK(eps <= hi + 1e-12);
    double factor = scale_dist(rng);
    std::vector<std::pair<double, double>> scaled = input;
    for (auto& [e, x] : scaled) x *= factor;
    CHECK(close_rel(system_error(scaled), eps, 1e-9));
  }
}

TEST_CASE("prediction shares worked values") {
  IncentiveParams p = defaults();  // c2 = 1e-4
  std::map<ReviewerId, double> errors = {{1, 0.1}, {2, 0.0}, {3, 0.04}};
  auto shares = prediction_shares(errors, 0.1, p);
  CHECK(shares.count(1) == 0);  // boundary: error == eps yields zero
  CHECK(shares[2] == doctest::Approx(10000.0).epsilon(1e-12));
  CHECK(shares[3] == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("prediction shares properties") {
  IncentiveParams p = defaults();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> err_dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<ReviewerId, double> errors;
    int n = 1 + static_cast<int>(err_dist(rng) * 9);
    for (int i = 0; i < n; ++i) errors[static_cast<ReviewerId>(i)] = err_dist(rng);
    double eps = err_dist(rng);
    auto shares = prediction_shares(errors, eps, p);
    for (const auto& [id, share] : shares) {
      CHECK(errors[id] < eps);
      CHECK(share <= 1.0 / p.c2 + 1e-9);
    }
    // Nonincreasing in error among recipients.
    for (const auto& [a, sa] : shares) {
      for (const auto& [b, sb] : shares) {
        if (errors[a] < errors[b]) CHECK(sa >= sb - 1e-12);
      }
    }
  }
}

TEST_CASE("prediction pool distribution") {
  IncentiveParams p = defaults();
  p.w_predict = 1.0;
  p.w_endorse = 0.0;
  p.pool_scale = 1000.0;

  CHECK(distribute_prediction_pool({}, 0.5, p).empty());

  // eps = 0.1 -> pool = 1000 * 0.1 * 1 = 100, split 3:1.
  std::map<ReviewerId, double> shares = {{1, 3.0}, {2, 1.0}};
  auto out = distribute_prediction_pool(shares, 0.1, p);
  CHECK(out[1] == doctest::Approx(75.0).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(25.0).epsilon(1e-12));

  CHECK(distribute_prediction_pool(shares, 0.0, p)[1] == 0.0);
}

TEST_CASE("pool conservation") {
  IncentiveParams p = defaults();
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<ReviewerId, double> shares;
    int n = 1 + static_cast<int>(dist(rng) * 7);
    for (int i = 0; i < n; ++i) shares[static_cast<ReviewerId>(i)] = 1.0 + dist(rng) * 9999.0;
    double eps = dist(rng);
    auto out = distribute_prediction_pool(shares, eps, p);
    double paid = 0.0;
    for (const auto& [id, amt] : out) paid += amt;
    CHECK(close_rel(paid, p.pool_scale * eps * p.w_predict, 1e-9));
  }
}

TEST_CASE("expert selection") {
  ExpertiseLedger ledger;
  for (ReviewerId id : {1u, 2u, 3u, 4u}) ledger.register_reviewer(id);
  ledger.set_expertise(1, 0, 5.0);
  ledger.set_expertise(2, 0, 3.0);
  ledger.set_expertise(3, 0, 9.0);

  CHECK(select_experts(ledger, 0, 2) == std::vector<ReviewerId>{3, 1});

  // Tie-break by ascending id.
  ExpertiseLedger tie;
  tie.register_reviewer(7);
  tie.register_reviewer(4);
  tie.set_expertise(7, 0, 5.0);
  tie.set_expertise(4, 0, 5.0);
  CHECK(select_experts(tie, 0, 1) == std::vector<ReviewerId>{4});

  // Zero-expertise reviewers fill remaining slots in id order.
  CHECK(select_experts(ledger, 0, 4) == std::vector<ReviewerId>{3, 1, 2, 4});
  CHECK(select_experts(ledger, 0, 10) == std::vector<ReviewerId>{3, 1, 2, 4});

  // Pure function of the ledger.
  CHECK(select_experts(ledger, 0, 3) == select_experts(ledger, 0, 3));
}

TEST_CASE("expertise burning") {
  IncentiveParams p = defaults();  // burn_fraction = 1.0
  ExpertiseLedger ledger;
  std::vector<ReviewerId> experts;
  for (ReviewerId id = 0; id < 50; ++id) {
    ledger.register_reviewer(id);
    ledger.set_expertise(id, 0, 1000.0 + id);
    experts.push_back(id);
  }

  std::vector<ReviewerId> votes26(experts.begin(), experts.begin() + 26);
  CHECK(burn_expertise(ledger, 5, votes26, experts, 0, p));
  CHECK(ledger.expertise(5, 0) == 0.0);

  std::vector<ReviewerId> votes25(experts.begin(), experts.begin() + 25);
  double before = ledger.expertise(7, 0);
  CHECK_FALSE(burn_expertise(ledger, 7, votes25, experts, 0, p));
  CHECK(ledger.expertise(7, 0) == before);

  // Non-expert targets can still be burned.
  ledger.register_reviewer(99);
  ledger.set_expertise(99, 0, 10.0);
  CHECK(burn_expertise(ledger, 99, votes26, experts, 0, p));
  CHECK(ledger.expertise(99, 0) == 0.0);

  // Voter outside the expert set is rejected.
  std::vector<ReviewerId> bad_votes = votes26;
  bad_votes.push_back(99);
  CHECK_THROWS_AS(burn_expertise(ledger, 5, bad_votes, experts, 0, p), Error);

  // Partial burn.
  IncentiveParams half = p;
  half.burn_fraction = 0.25;
  ledger.set_expertise(3, 0, 400.0);
  CHECK(burn_expertise(ledger, 3, votes26, experts, 0, half));
  CHECK(ledger.expertise(3, 0) == doctest::Approx(300.0).epsilon(1e-12));
}

TEST_CASE("ledger nonnegativity guards") {
  ExpertiseLedger ledger;
  ledger.register_reviewer(1);
  CHECK_THROWS_AS(ledger.set_expertise(1, 0, -2.0), Error);
  ledger.set_expertise(1, 0, 5.0);
  CHECK_THROWS_AS(ledger.add_expertise(1, 0, -6.0), Error);
  ledger.add_expertise(1, 0, -5.0);
  CHECK(ledger.expertise(1, 0) == 0.0);
  CHECK(ledger.min_expertise() >= 0.0);
}

TEST_CASE("invshare snapshot semantics") {
  ExpertiseLedger ledger;
  for (ReviewerId id : {1u, 2u, 3u}) ledger.register_reviewer(id);

  ledger.record_investment(1, 3);
  ledger.record_investment(1, 3);
  ledger.record_investment(2, 3);
  // No snapshot taken since these events: snapshot sees pre-event values (0).
  CHECK(ledger.invshare(1, 3) == 2);
  CHECK(ledger.snapshot_row(3).empty());

  ledger.take_invshare_snapshot();
  auto row = ledger.snapshot_row(3);
  REQUIRE(row.size() == 2);
  CHECK(row[0] == std::pair<ReviewerId, std::uint32_t>{1, 2});
  CHECK(row[1] == std::pair<ReviewerId, std::uint32_t>{2, 1});

  // Post-snapshot investments do not leak into the frozen view.
  ledger.record_investment(1, 3);
  ledger.record_investment(2, 3);
  CHECK(ledger.invshare(1, 3) == 3);
  CHECK(ledger.invshare_snapshot(1, 3) == 2);
  CHECK(ledger.snapshot_row_total(3) == 3);

  ledger.take_invshare_snapshot();
  CHECK(ledger.invshare_snapshot(1, 3) == 3);
  CHECK(ledger.snapshot_row_total(3) == 5);
}

TEST_CASE("oracle equivalence on random small instances") {
  IncentiveParams p = defaults();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> exp_dist(0.0, 150000.0);
  std::uniform_int_distribution<int> n_dist(1, 10);
  std::uniform_int_distribution<std::uint32_t> cnt_dist(0, 9);

  for (int trial = 0; trial < 1000; ++trial) {
    int n = n_dist(rng);

    // Eq. 1
    double e = exp_dist(rng), r = exp_dist(rng);
    CHECK(close_rel(endorsement_gain(e, r, p),
                    oracle::endorsement_gain(e, r, p.alpha, p.beta)));

    // Eq. 2
    std::vector<std::pair<ReviewerId, std::uint32_t>> snap;
    for (int i = 0; i < n; ++i) {
      std::uint32_t c = cnt_dist(rng);
      if (c > 0) snap.emplace_back(static_cast<ReviewerId>(i), c);
    }
    ReviewerId endorser = static_cast<ReviewerId>(trial % (n + 1));
    double delta = unit(rng) * 300.0;
    auto got = dividends(delta, endorser, snap, p);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> snap_u;
    for (auto& [id, c] : snap) snap_u.emplace_back(id, c);
    auto want = oracle::dividends(delta, endorser, snap_u, p.c1);
    REQUIRE(got.size() == want.size());
    for (const auto& [id, amt] : want) CHECK(close_rel(got[id], amt));

    // Eq. 3 propagated through Eq. 4
    std::vector<std::pair<double, double>> errs;
    std::map<ReviewerId, double> err_map;
    for (int i = 0; i < n; ++i) {
      double demand = unit(rng), pred = unit(rng);
      double err = prediction_error(demand, pred);
      double x = exp_dist(rng);
      if (i == 0) x += 1.0;
      errs.emplace_back(err, x);
      err_map[static_cast<ReviewerId>(i)] = err;
    }
    double eps = system_error(errs);
    CHECK(close_rel(eps, oracle::system_error(errs)));

    // Eq. 5 and the pool split
    auto got_shares = prediction_shares(err_map, eps, p);
    std::map<std::uint32_t, double> err_u(err_map.begin(), err_map.end());
    auto want_shares = oracle::prediction_shares(err_u, eps, p.c2);
    REQUIRE(got_shares.size() == want_shares.size());
    for (const auto& [id, s] : want_shares) CHECK(close_rel(got_shares[id], s));

    auto got_pool = distribute_prediction_pool(got_shares, eps, p);
    auto want_pool = oracle::split_pool(want_shares, p.pool_scale * eps * p.w_predict);
    REQUIRE(got_pool.size() == want_pool.size());
    for (const auto& [id, amt] : want_pool) CHECK(close_rel(got_pool[id], amt));

    // Weighted mean rating
    std::vector<std::pair<Rating, double>> ratings;
    for (int i = 0; i < n; ++i) {
      double w = exp_dist(rng);
      if (i == 0) w += 1.0;
      ratings.emplace_back(unit(rng), w);
    }
    CHECK(close_rel(weighted_mean_rating(ratings), oracle::weighted_mean(ratings)));
  }
}

TEST_CASE("params validation") {
  IncentiveParams p = defaults();
  CHECK_NOTHROW(p.validate());
  p.w_endorse = 0.7;
  CHECK_THROWS_AS(p.validate(), Error);
  p.w_endorse = 0.5;
  p.c1 = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

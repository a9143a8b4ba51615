#include "darsan/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace darsan {

namespace {

std::string join_ids(const std::vector<ReviewerId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(ids[i]);
  }
  return out;
}

std::string join_areas(const std::vector<AreaId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(',');
    out += std::to_string(ids[i]);
  }
  return out;
}

template <typename T>
std::vector<T> parse_id_list(const std::string& s) {
  std::vector<T> out;
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string token = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (token.empty()) fail(ErrorCode::Corrupt, "empty id in list");
    out.push_back(static_cast<T>(std::stoull(token)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void check_unit_interval(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::InvalidArgument, std::string(what) + " outside [0,1]");
}

}  // namespace

const char* to_string(AssetState state) {
  switch (state) {
    case AssetState::Submitted: return "Submitted";
    case AssetState::UnderAdmission: return "UnderAdmission";
    case AssetState::Rejected: return "Rejected";
    case AssetState::Listed: return "Listed";
    case AssetState::Sold: return "Sold";
    case AssetState::Settled: return "Settled";
  }
  return "Unknown";
}

ProtocolEngine::ProtocolEngine(ExpertiseLedger ledger, IncentiveParams params)
    : ledger_(std::move(ledger)), params_(params) {
  params_.validate();
}

RoundState& ProtocolEngine::open_round(std::uint64_t round_id, AssetState expected) {
  auto it = rounds_.find(round_id);
  if (it == rounds_.end())
    fail(ErrorCode::WrongState, "round " + std::to_string(round_id) + " is not open");
  if (it->second.asset.state != expected) {
    fail(ErrorCode::WrongState, "round " + std::to_string(round_id) + " is " +
                                    to_string(it->second.asset.state) + ", expected " +
                                    to_string(expected));
  }
  return it->second;
}

const RoundState& ProtocolEngine::round(std::uint64_t round_id) const {
  auto it = rounds_.find(round_id);
  if (it == rounds_.end())
    fail(ErrorCode::WrongState, "round " + std::to_string(round_id) + " is not open");
  return it->second;
}

bool ProtocolEngine::round_open(std::uint64_t round_id) const {
  return rounds_.count(round_id) > 0;
}

void ProtocolEngine::close_round(std::uint64_t round_id) {
  auto it = rounds_.find(round_id);
  if (it != rounds_.end()) {
    open_assets_.erase(it->second.asset.id);
    rounds_.erase(it);
  }
}

std::vector<ReviewerId> ProtocolEngine::current_experts(AreaId area) const {
  return select_experts(ledger_, area, params_.k);
}

std::uint64_t ProtocolEngine::submit_asset(AssetRecord asset) {
  if (asset.state != AssetState::Submitted)
    fail(ErrorCode::WrongState, "asset must be in Submitted state");
  if (asset.area_tags.empty()) fail(ErrorCode::InvalidArgument, "asset has no area tags");
  if (asset.entry_fee < 0.0) fail(ErrorCode::InvalidArgument, "negative entry fee");
  if (open_assets_.count(asset.id))
    fail(ErrorCode::Duplicate, "asset " + std::to_string(asset.id) + " already has an open round");
  std::sort(asset.area_tags.begin(), asset.area_tags.end());
  asset.area_tags.erase(std::unique(asset.area_tags.begin(), asset.area_tags.end()),
                        asset.area_tags.end());

  RoundState st;
  st.round_id = next_round_id_++;
  st.asset = asset;
  st.asset.state = AssetState::UnderAdmission;

  // Freeze the per-area expert lists, their union, and every reviewer's
  // expertise summed over the asset's areas.
  std::set<ReviewerId> assigned;
  for (AreaId area : st.asset.area_tags) {
    auto experts = select_experts(ledger_, area, params_.k);
    assigned.insert(experts.begin(), experts.end());
    st.area_experts[area] = std::move(experts);
  }
  st.assigned_experts.assign(assigned.begin(), assigned.end());
  for (ReviewerId id : ledger_.reviewers()) {
    double total = 0.0;
    for (AreaId area : st.asset.area_tags) total += ledger_.expertise(id, area);
    if (total > 0.0) st.round_start_expertise[id] = total;
  }

  ledger_.take_invshare_snapshot();

  Payload payload(EventKind::AssetSubmitted, st.round_id);
  payload.add_u64("asset", st.asset.id)
      .add_str("areas", join_areas(st.asset.area_tags))
      .add_f64("fee", st.asset.entry_fee);
  log_.append(payload);

  open_assets_.insert(st.asset.id);
  std::uint64_t round_id = st.round_id;
  rounds_.emplace(round_id, std::move(st));
  return round_id;
}

void ProtocolEngine::record_rating(std::uint64_t round_id, ReviewerId expert, Rating rating) {
  RoundState& st = open_round(round_id, AssetState::UnderAdmission);
  check_unit_interval(rating, "rating");
  if (!std::binary_search(st.assigned_experts.begin(), st.assigned_experts.end(), expert))
    fail(ErrorCode::NotAuthorized,
         "reviewer " + std::to_string(expert) + " is not an assigned expert for this round");
  if (st.expert_ratings.count(expert))
    fail(ErrorCode::Duplicate, "expert " + std::to_string(expert) + " already rated");
  st.expert_ratings[expert] = rating;

  Payload payload(EventKind::RatingRecorded, round_id);
  payload.add_u64("reviewer", expert).add_f64("value", rating);
  log_.append(payload);
}

bool ProtocolEngine::finalize_admission(std::uint64_t round_id) {
  RoundState& st = open_round(round_id, AssetState::UnderAdmission);
  if (st.expert_ratings.empty()) fail(ErrorCode::Degenerate, "no ratings recorded");

  std::vector<std::pair<Rating, double>> weighted;
  weighted.reserve(st.expert_ratings.size());
  for (const auto& [expert, rating] : st.expert_ratings)
    weighted.emplace_back(rating, st.start_expertise(expert));
  st.rbar = weighted_mean_rating(weighted);

  bool listed = admit(st.rbar, params_.thresh);
  Payload payload(EventKind::AdmissionDecided, round_id);
  payload.add_u64("admitted", listed ? 1 : 0).add_f64("rbar", st.rbar);
  log_.append(payload);

  if (listed) {
    st.asset.state = AssetState::Listed;
    return true;
  }
  st.asset.state = AssetState::Rejected;
  tokens_.incentive_pool += st.asset.entry_fee;
  Payload fee(EventKind::FeeForfeited, round_id);
  fee.add_f64("amount", st.asset.entry_fee);
  log_.append(fee);
  close_round(round_id);
  return false;
}

std::vector<AssetId> listing_order(std::vector<std::pair<AssetId, double>> listed) {
  std::sort(listed.begin(), listed.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<AssetId> out;
  out.reserve(listed.size());
  for (const auto& [id, rbar] : listed) out.push_back(id);
  return out;
}

std::vector<AssetId> ProtocolEngine::listing_order() const {
  std::vector<std::pair<AssetId, double>> listed;
  for (const auto& [round_id, st] : rounds_) {
    if (st.asset.state == AssetState::Listed) listed.emplace_back(st.asset.id, st.rbar);
  }
  return darsan::listing_order(std::move(listed));
}

void ProtocolEngine::record_review(std::uint64_t round_id, ReviewerId reviewer, double review) {
  RoundState& st = open_round(round_id, AssetState::Listed);
  check_unit_interval(review, "review");
  if (!ledger_.is_registered(reviewer))
    fail(ErrorCode::NotAuthorized, "reviewer " + std::to_string(reviewer) + " is not registered");
  if (st.reviews.count(reviewer))
    fail(ErrorCode::Duplicate, "reviewer " + std::to_string(reviewer) + " already reviewed");
  st.reviews[reviewer] = review;

  Payload payload(EventKind::ReviewRecorded, round_id);
  payload.add_u64("reviewer", reviewer).add_f64("value", review);
  log_.append(payload);
}

void ProtocolEngine::record_prediction(std::uint64_t round_id, ReviewerId reviewer,
                                       double prediction) {
  RoundState& st = open_round(round_id, AssetState::Listed);
  check_unit_interval(prediction, "prediction");
  if (!ledger_.is_registered(reviewer))
    fail(ErrorCode::NotAuthorized, "reviewer " + std::to_string(reviewer) + " is not registered");
  if (st.predictions.count(reviewer))
    fail(ErrorCode::Duplicate, "reviewer " + std::to_string(reviewer) + " already predicted");
  st.predictions[reviewer] = prediction;

  Payload payload(EventKind::PredictionRecorded, round_id);
  payload.add_u64("reviewer", reviewer).add_f64("value", prediction);
  log_.append(payload);
}

void ProtocolEngine::record_endorsement(std::uint64_t round_id, ReviewerId endorser,
                                        ReviewerId endorsee) {
  RoundState& st = open_round(round_id, AssetState::Listed);
  if (endorser == endorsee) fail(ErrorCode::SelfEndorsement, "cannot endorse your own review");
  if (!st.reviews.count(endorsee))
    fail(ErrorCode::MissingReview,
         "endorsee " + std::to_string(endorsee) + " has no recorded review");
  if (st.endorsements.count(endorser))
    fail(ErrorCode::Duplicate, "reviewer " + std::to_string(endorser) + " already endorsed");
  if (!ledger_.is_registered(endorser))
    fail(ErrorCode::NotAuthorized, "endorser " + std::to_string(endorser) + " is not registered");
  st.endorsements[endorser] = endorsee;

  Payload payload(EventKind::EndorsementRecorded, round_id);
  payload.add_u64("endorser", endorser).add_u64("endorsee", endorsee);
  log_.append(payload);
}

RoundOutcome ProtocolEngine::settle_round(std::uint64_t round_id, double observed_demand) {
  RoundState& st = open_round(round_id, AssetState::Listed);
  check_unit_interval(observed_demand, "observed demand");

  // Validate everything up front so a failed settlement leaves no trace.
  double predictor_weight_sq = 0.0;
  for (const auto& [reviewer, prediction] : st.predictions) {
    double w = st.start_expertise(reviewer);
    predictor_weight_sq += w * w;
  }
  if (!st.predictions.empty() && predictor_weight_sq <= 0.0)
    fail(ErrorCode::Degenerate, "all predictor expertise is zero");

  st.observed_demand = observed_demand;
  st.asset.state = AssetState::Sold;
  Payload sale(EventKind::SaleObserved, round_id);
  sale.add_f64("demand", observed_demand);
  log_.append(sale);

  RoundOutcome outcome;
  outcome.round_id = round_id;
  outcome.asset_id = st.asset.id;
  outcome.rbar = st.rbar;
  outcome.observed_demand = observed_demand;

  const std::vector<ReviewerId>& ids = ledger_.reviewers();
  auto index_of = [&ids](ReviewerId id) {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    return static_cast<std::size_t>(it - ids.begin());
  };
  std::vector<double> gains(ids.size(), 0.0);

  // Pays Eq. 2 dividends on `delta` gained by `earner` to the earner's prior
  // investors, suppressing `suppress`'s slice.
  auto pay_dividends = [&](ReviewerId earner, ReviewerId suppress, double delta) {
    double total = static_cast<double>(ledger_.snapshot_row_total(earner));
    if (total <= 0.0 || delta <= 0.0) return;
    ledger_.for_each_snapshot_share(earner, [&](ReviewerId investor, std::uint32_t count) {
      if (investor == suppress) return;
      double payout = params_.c1 * delta * static_cast<double>(count) / total;
      gains[index_of(investor)] += payout;
      outcome.dividend_total += payout;
    });
  };

  // (a) Endorsement gains (Eq. 1, scaled by the channel weight) and the
  // dividends they trigger (Eq. 2, against the round-start snapshot). Only
  // endorsements from the round's frozen experts confer expertise; everyone
  // else's endorsement is an investment stake only. All inputs are round-start
  // values, so processing order is immaterial.
  for (const auto& [endorser, endorsee] : st.endorsements) {
    if (!std::binary_search(st.assigned_experts.begin(), st.assigned_experts.end(), endorser))
      continue;
    double delta =
        params_.w_endorse *
        endorsement_gain(st.start_expertise(endorser), st.start_expertise(endorsee), params_);
    if (delta > 0.0) {
      gains[index_of(endorsee)] += delta;
      outcome.endorse_gain_total += delta;
      pay_dividends(endorsee, endorser, delta);
    }
  }

  // (b) Prediction settlement: Eq. 3 errors, Eq. 4 system error over the
  // predictors with round-start expertise, Eq. 5 shares, proportional pool.
  std::map<ReviewerId, double> prediction_payouts;
  if (!st.predictions.empty()) {
    std::map<ReviewerId, double> errors;
    std::vector<std::pair<double, double>> weighted_errors;
    weighted_errors.reserve(st.predictions.size());
    for (const auto& [reviewer, prediction] : st.predictions) {
      double err = prediction_error(observed_demand, prediction);
      errors[reviewer] = err;
      weighted_errors.emplace_back(err, st.start_expertise(reviewer));
    }
    outcome.eps = system_error(weighted_errors);
    outcome.prediction_settled = true;
    if (params_.pool_scale * outcome.eps * params_.w_predict > 0.0) {
      auto shares = prediction_shares(errors, outcome.eps, params_);
      prediction_payouts = distribute_prediction_pool(shares, outcome.eps, params_);
      for (const auto& [reviewer, amount] : prediction_payouts) {
        gains[index_of(reviewer)] += amount;
        outcome.prediction_paid_total += amount;
        if (params_.broad_dividends) pay_dividends(reviewer, reviewer, amount);
      }
    }
  }

  // Apply the accumulated gains, split equally across the asset's areas.
  double area_count = static_cast<double>(st.asset.area_tags.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (gains[i] <= 0.0) continue;
    for (AreaId area : st.asset.area_tags)
      ledger_.add_expertise(ids[i], area, gains[i] / area_count);
  }

  Payload distributed(EventKind::ExpertiseDistributed, round_id);
  distributed.add_f64("endorse_total", outcome.endorse_gain_total)
      .add_f64("dividend_total", outcome.dividend_total)
      .add_f64("prediction_total", outcome.prediction_paid_total)
      .add_f64("eps", outcome.prediction_settled ? outcome.eps : 0.0);
  log_.append(distributed);

  // (c) Investment shares gain this round's endorsements, then the snapshot
  // moves to the new round boundary.
  for (const auto& [endorser, endorsee] : st.endorsements)
    ledger_.record_investment(endorser, endorsee);
  ledger_.take_invshare_snapshot();

  // (d) Expert rotation per area.
  for (AreaId area : st.asset.area_tags) {
    auto experts = select_experts(ledger_, area, params_.k);
    std::vector<ReviewerId> frozen = st.area_experts[area];  // ranked order; sort for lookup
    std::sort(frozen.begin(), frozen.end());
    int turnover = 0;
    for (ReviewerId id : experts) {
      if (!std::binary_search(frozen.begin(), frozen.end(), id)) ++turnover;
    }
    outcome.expert_turnover += turnover;
    Payload rotated(EventKind::ExpertsRotated, round_id);
    rotated.add_u64("area", area).add_str("experts", join_ids(experts));
    log_.append(rotated);
    outcome.new_experts[area] = std::move(experts);
  }

  // (e) Token incentive to the raters, proportional to round-start expertise.
  double pay = tokens_.incentive_pool * params_.incentive_pool_fraction;
  double rater_weight = 0.0;
  for (const auto& [expert, rating] : st.expert_ratings) rater_weight += st.start_expertise(expert);
  if (pay > 0.0 && rater_weight > 0.0) {
    for (const auto& [expert, rating] : st.expert_ratings) {
      double amount = pay * st.start_expertise(expert) / rater_weight;
      tokens_.balances[expert] += amount;
      outcome.tokens_paid += amount;
    }
    tokens_.incentive_pool -= pay;
    Payload paid(EventKind::IncentivePaid, round_id);
    paid.add_f64("total", pay).add_u64("recipients", st.expert_ratings.size());
    log_.append(paid);
  }

  st.asset.state = AssetState::Settled;
  close_round(round_id);
  return outcome;
}

bool ProtocolEngine::burn(ReviewerId target, const std::vector<ReviewerId>& votes, AreaId area) {
  auto experts = current_experts(area);
  std::sort(experts.begin(), experts.end());
  bool applied = burn_expertise(ledger_, target, votes, experts, area, params_);

  Payload payload(EventKind::ExpertiseBurned, kNoRound);
  payload.add_u64("target", target)
      .add_u64("area", area)
      .add_str("votes", join_ids(votes))
      .add_u64("applied", applied ? 1 : 0);
  log_.append(payload);
  return applied;
}

namespace {

// Feeds recorded inputs back through a fresh engine; derived events are
// skipped and regenerated by the engine itself.
class Replayer {
 public:
  Replayer(ExpertiseLedger initial, const IncentiveParams& params)
      : engine_(std::move(initial), params) {
    engine_.log().set_retention(false);
  }

  void handle(const ProtocolEvent& event) {
    PayloadReader payload(event.payload);
    switch (event.kind) {
      case EventKind::AssetSubmitted: {
        AssetRecord asset;
        asset.id = payload.get_u64("asset");
        asset.area_tags = parse_id_list<AreaId>(payload.get_str("areas"));
        asset.entry_fee = payload.get_f64("fee");
        std::uint64_t round_id = engine_.submit_asset(asset);
        if (round_id != event.round)
          fail(ErrorCode::Corrupt, "replay produced round " + std::to_string(round_id) +
                                       ", log says " + std::to_string(event.round));
        break;
      }
      case EventKind::RatingRecorded:
        engine_.record_rating(event.round, static_cast<ReviewerId>(payload.get_u64("reviewer")),
                              payload.get_f64("value"));
        break;
      case EventKind::AdmissionDecided: {
        bool listed = engine_.finalize_admission(event.round);
        if (listed != (payload.get_u64("admitted") == 1))
          fail(ErrorCode::Corrupt, "replay admission decision diverged at round " +
                                       std::to_string(event.round));
        break;
      }
      case EventKind::ReviewRecorded:
        engine_.record_review(event.round, static_cast<ReviewerId>(payload.get_u64("reviewer")),
                              payload.get_f64("value"));
        break;
      case EventKind::PredictionRecorded:
        engine_.record_prediction(event.round,
                                  static_cast<ReviewerId>(payload.get_u64("reviewer")),
                                  payload.get_f64("value"));
        break;
      case EventKind::EndorsementRecorded:
        engine_.record_endorsement(event.round,
                                   static_cast<ReviewerId>(payload.get_u64("endorser")),
                                   static_cast<ReviewerId>(payload.get_u64("endorsee")));
        break;
      case EventKind::SaleObserved:
        engine_.settle_round(event.round, payload.get_f64("demand"));
        break;
      case EventKind::ExpertiseBurned:
        engine_.burn(static_cast<ReviewerId>(payload.get_u64("target")),
                     parse_id_list<ReviewerId>(payload.get_str("votes")),
                     static_cast<AreaId>(payload.get_u64("area")));
        break;
      default:
        break;  // derived events: FeeForfeited, ExpertiseDistributed, ExpertsRotated, IncentivePaid
    }
  }

  ProtocolEngine take() { return std::move(engine_); }

 private:
  ProtocolEngine engine_;
};

}  // namespace

ProtocolEngine replay_events(ExpertiseLedger initial, const IncentiveParams& params,
                             const std::vector<ProtocolEvent>& events) {
  Replayer replayer(std::move(initial), params);
  for (const ProtocolEvent& event : events) replayer.handle(event);
  return replayer.take();
}

ProtocolEngine replay_file(ExpertiseLedger initial, const IncentiveParams& params,
                           const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  Replayer replayer(std::move(initial), params);
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ProtocolEvent event;
    if (!EventLog::parse_line(line, event))
      fail(ErrorCode::Corrupt, "unparseable event line at index " + std::to_string(index));
    replayer.handle(event);
    ++index;
  }
  return replayer.take();
}

}  // namespace darsan

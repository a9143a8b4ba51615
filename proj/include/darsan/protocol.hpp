#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "darsan/event_log.hpp"
#include "darsan/incentives.hpp"
#include "darsan/ledger.hpp"
#include "darsan/types.hpp"

namespace darsan {

enum class AssetState { Submitted, UnderAdmission, Rejected, Listed, Sold, Settled };

const char* to_string(AssetState state);

struct AssetRecord {
  AssetId id = 0;
  std::vector<AreaId> area_tags;  // nonempty, sorted, unique
  // Hidden intrinsic properties. Visible only to the agents layer; protocol
  // logic never reads them (replayed rounds run with zeroes here).
  double hidden_quality = 0.0;
  double hidden_demand = 0.0;
  AssetState state = AssetState::Submitted;
  double entry_fee = 0.0;
};

struct TokenLedger {
  double incentive_pool = 0.0;
  std::map<ReviewerId, double> balances;
};

// Per-asset round. The expert set, per-area expert lists and every reviewer's
// expertise are frozen at submission; settlement works from these frozen
// values so processing order inside a round cannot change the result.
struct RoundState {
  std::uint64_t round_id = 0;
  AssetRecord asset;
  std::vector<ReviewerId> assigned_experts;             // union over areas, ascending
  std::map<AreaId, std::vector<ReviewerId>> area_experts;  // frozen per-area lists
  std::map<ReviewerId, double> round_start_expertise;   // sum over the asset's areas, zeros omitted
  std::map<ReviewerId, Rating> expert_ratings;
  double rbar = -1.0;  // set by finalize_admission
  std::map<ReviewerId, double> reviews;
  std::map<ReviewerId, double> predictions;
  std::map<ReviewerId, ReviewerId> endorsements;  // endorser -> endorsee
  double observed_demand = -1.0;

  double start_expertise(ReviewerId id) const {
    auto it = round_start_expertise.find(id);
    return it == round_start_expertise.end() ? 0.0 : it->second;
  }
};

struct RoundOutcome {
  std::uint64_t round_id = 0;
  AssetId asset_id = 0;
  double rbar = 0.0;
  double observed_demand = 0.0;
  bool prediction_settled = false;
  double eps = 0.0;
  double endorse_gain_total = 0.0;   // sum of w_endorse-scaled Eq. 1 gains
  double dividend_total = 0.0;       // sum of Eq. 2 payouts
  double prediction_paid_total = 0.0;
  double tokens_paid = 0.0;
  int expert_turnover = 0;  // members of the new expert sets absent from the frozen ones
  std::map<AreaId, std::vector<ReviewerId>> new_experts;
};

// Round id used for events not tied to an asset round (expertise burning).
inline constexpr std::uint64_t kNoRound = std::numeric_limits<std::uint64_t>::max();

// The per-asset round state machine over the expertise ledger. Single-writer:
// all mutations on one engine must be serialized by the caller.
class ProtocolEngine {
 public:
  ProtocolEngine(ExpertiseLedger ledger, IncentiveParams params);

  ExpertiseLedger& ledger() { return ledger_; }
  const ExpertiseLedger& ledger() const { return ledger_; }
  const TokenLedger& tokens() const { return tokens_; }
  EventLog& log() { return log_; }
  const IncentiveParams& params() const { return params_; }

  // Steps 1-2: opens a round, freezes the assigned expert set (union of
  // per-area top-k) and every reviewer's round-start expertise, and takes the
  // invshare snapshot. Returns the new round id.
  std::uint64_t submit_asset(AssetRecord asset);

  // Step 3: pre-listing rating, experts only, one per expert.
  void record_rating(std::uint64_t round_id, ReviewerId expert, Rating rating);

  // Steps 4-5: computes rbar and decides admission. Rejection forfeits the
  // entry fee into the incentive pool and closes the round. Returns true when
  // the asset is listed.
  bool finalize_admission(std::uint64_t round_id);

  // Step 6: currently listed assets in decreasing rbar, ties by ascending id.
  std::vector<AssetId> listing_order() const;

  // Step 7: pre-sale reviews and predictions, one of each per reviewer.
  void record_review(std::uint64_t round_id, ReviewerId reviewer, double review);
  void record_prediction(std::uint64_t round_id, ReviewerId reviewer, double prediction);

  // Step 9: one endorsement per reviewer per round, never of yourself, and
  // only of a recorded review. No expertise moves until settlement.
  void record_endorsement(std::uint64_t round_id, ReviewerId endorser, ReviewerId endorsee);

  // Steps 10-11: settles the round in deterministic order — endorsement gains
  // and dividends, prediction payouts, invshare update + snapshot, expert
  // rotation, token incentive. Closes the round.
  RoundOutcome settle_round(std::uint64_t round_id, double observed_demand);

  // Checks-and-balances vote; returns true iff the burn applied.
  bool burn(ReviewerId target, const std::vector<ReviewerId>& votes, AreaId area);

  // Open-round access (rounds are dropped once settled or rejected).
  const RoundState& round(std::uint64_t round_id) const;
  bool round_open(std::uint64_t round_id) const;

  std::vector<ReviewerId> current_experts(AreaId area) const;

 private:
  RoundState& open_round(std::uint64_t round_id, AssetState expected);
  void close_round(std::uint64_t round_id);

  ExpertiseLedger ledger_;
  TokenLedger tokens_;
  IncentiveParams params_;
  EventLog log_;
  std::map<std::uint64_t, RoundState> rounds_;  // open rounds only
  std::set<AssetId> open_assets_;
  std::uint64_t next_round_id_ = 0;
};

// Ordering rule behind ProtocolEngine::listing_order, exposed for direct use:
// descending rbar, ties by ascending asset id.
std::vector<AssetId> listing_order(std::vector<std::pair<AssetId, double>> listed);

// Replays input events (submissions, ratings, reviews, predictions,
// endorsements, sales, burns) through a fresh engine; derived events in the
// log are ignored and regenerated. Returns the engine in its final state.
ProtocolEngine replay_events(ExpertiseLedger initial, const IncentiveParams& params,
                             const std::vector<ProtocolEvent>& events);

// Streaming variant for logs too large to hold in memory.
ProtocolEngine replay_file(ExpertiseLedger initial, const IncentiveParams& params,
                           const std::string& path);

}  // namespace darsan

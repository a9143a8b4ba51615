#include "darsan/incentives.hpp"

#include <algorithm>
#include <cmath>

namespace darsan {

void IncentiveParams::validate() const {
  if (alpha < 0.0 || beta < 0.0) fail(ErrorCode::Config, "alpha and beta must be nonnegative");
  if (c1 <= 0.0) fail(ErrorCode::Config, "c1 must be positive");
  if (c2 <= 0.0) fail(ErrorCode::Config, "c2 must be positive");
  if (pool_scale <= 0.0) fail(ErrorCode::Config, "pool_scale must be positive");
  if (k < 1) fail(ErrorCode::Config, "k must be at least 1");
  if (thresh < 0.0 || thresh > 1.0) fail(ErrorCode::Config, "thresh outside [0,1]");
  if (burn_fraction <= 0.0 || burn_fraction > 1.0) fail(ErrorCode::Config, "burn_fraction outside (0,1]");
  if (w_endorse < 0.0 || w_endorse > 1.0 || w_predict < 0.0 || w_predict > 1.0)
    fail(ErrorCode::Config, "channel weights outside [0,1]");
  if (std::abs(w_endorse + w_predict - 1.0) > 1e-12)
    fail(ErrorCode::Config, "channel weights must sum to 1");
  if (incentive_pool_fraction < 0.0 || incentive_pool_fraction > 1.0)
    fail(ErrorCode::Config, "incentive_pool_fraction outside [0,1]");
}

double mingain(double endorser_expertise, const IncentiveParams& params) {
  if (endorser_expertise < 0.0) fail(ErrorCode::InvalidArgument, "negative expertise");
  return params.alpha * endorser_expertise;
}

double addgain(double expertise_gap, const IncentiveParams& params) {
  if (expertise_gap < 0.0) fail(ErrorCode::InvalidArgument, "negative expertise gap");
  return params.beta * expertise_gap;
}

double endorsement_gain(double endorser_expertise, double endorsee_expertise,
                        const IncentiveParams& params) {
  if (endorser_expertise < 0.0 || endorsee_expertise < 0.0)
    fail(ErrorCode::InvalidArgument, "negative expertise");
  double gap = std::max(0.0, endorser_expertise - endorsee_expertise);
  return mingain(endorser_expertise, params) + addgain(gap, params);
}

std::map<ReviewerId, double> dividends(
    double delta, ReviewerId endorser,
    const std::vector<std::pair<ReviewerId, std::uint32_t>>& snapshot,
    const IncentiveParams& params) {
  std::map<ReviewerId, double> out;
  if (delta < 0.0) fail(ErrorCode::InvalidArgument, "negative endorsement gain");
  if (snapshot.empty()) return out;

  // Denominator sums over all investors, including the endorser; only the
  // endorser's payout is suppressed (that slice is forfeited).
  double total = 0.0;
  for (const auto& [investor, count] : snapshot) total += static_cast<double>(count);
  if (total <= 0.0) return out;

  for (const auto& [investor, count] : snapshot) {
    if (investor == endorser) continue;
    out[investor] = params.c1 * delta * static_cast<double>(count) / total;
  }
  return out;
}

double weighted_mean_rating(const std::vector<std::pair<Rating, double>>& ratings) {
  if (ratings.empty()) fail(ErrorCode::InvalidArgument, "no ratings");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [rating, weight] : ratings) {
    if (rating < 0.0 || rating > 1.0) fail(ErrorCode::InvalidArgument, "rating outside [0,1]");
    if (weight < 0.0) fail(ErrorCode::InvalidArgument, "negative weight");
    num += rating * weight;
    den += weight;
  }
  if (den <= 0.0) fail(ErrorCode::Degenerate, "all rating weights are zero");
  return num / den;
}

bool admit(Rating rbar, Rating thresh) {
  if (rbar < 0.0 || rbar > 1.0 || thresh < 0.0 || thresh > 1.0)
    fail(ErrorCode::InvalidArgument, "rating outside [0,1]");
  return rbar >= thresh;
}

double prediction_error(double demand, double prediction) {
  if (demand < 0.0 || demand > 1.0 || prediction < 0.0 || prediction > 1.0)
    fail(ErrorCode::InvalidArgument, "demand/prediction outside [0,1]");
  double diff = demand - prediction;
  return diff * diff;
}

double system_error(const std::vector<std::pair<double, double>>& errors_and_expertise) {
  if (errors_and_expertise.empty()) fail(ErrorCode::InvalidArgument, "no prediction errors");
  double num = 0.0;
  double den = 0.0;
  for (const auto& [error, exp] : errors_and_expertise) {
    if (error < 0.0) fail(ErrorCode::InvalidArgument, "negative error");
    if (exp < 0.0) fail(ErrorCode::InvalidArgument, "negative expertise");
    num += error * exp * exp;
    den += exp * exp;
  }
  if (den <= 0.0) fail(ErrorCode::Degenerate, "all predictor expertise is zero");
  return num / den;
}

std::map<ReviewerId, double> prediction_shares(const std::map<ReviewerId, double>& errors,
                                               double eps, const IncentiveParams& params) {
  if (eps < 0.0) fail(ErrorCode::InvalidArgument, "negative system error");
  std::map<ReviewerId, double> out;
  for (const auto& [reviewer, error] : errors) {
    if (error >= eps) continue;
    out[reviewer] = 1.0 / std::max(params.c2, error);
  }
  return out;
}

std::map<ReviewerId, double> distribute_prediction_pool(const std::map<ReviewerId, double>& shares,
                                                        double eps,
                                                        const IncentiveParams& params) {
  std::map<ReviewerId, double> out;
  if (shares.empty()) return out;
  double total = 0.0;
  for (const auto& [reviewer, share] : shares) total += share;
  if (total <= 0.0) return out;
  double pool = params.pool_scale * eps * params.w_predict;
  for (const auto& [reviewer, share] : shares) out[reviewer] = pool * share / total;
  return out;
}

std::vector<ReviewerId> select_experts(const ExpertiseLedger& ledger, AreaId area, int k) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be at least 1");
  const auto& table = ledger.area_expertise(area);
  std::vector<std::pair<double, ReviewerId>> ranked;
  ranked.reserve(ledger.reviewers().size());
  for (ReviewerId id : ledger.reviewers()) {
    auto it = table.find(id);
    ranked.emplace_back(it == table.end() ? 0.0 : it->second, id);
  }
  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  size_t take = std::min<size_t>(static_cast<size_t>(k), ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + take, ranked.end(), better);
  std::vector<ReviewerId> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.push_back(ranked[i].second);
  return out;
}

bool burn_expertise(ExpertiseLedger& ledger, ReviewerId target,
                    const std::vector<ReviewerId>& votes,
                    const std::vector<ReviewerId>& current_experts, AreaId area,
                    const IncentiveParams& params) {
  std::vector<ReviewerId> unique_votes(votes);
  std::sort(unique_votes.begin(), unique_votes.end());
  unique_votes.erase(std::unique(unique_votes.begin(), unique_votes.end()), unique_votes.end());
  for (ReviewerId voter : unique_votes) {
    if (std::find(current_experts.begin(), current_experts.end(), voter) ==
        current_experts.end()) {
      fail(ErrorCode::NotAuthorized, "voter " + std::to_string(voter) + " is not an expert");
    }
  }
  if (2 * unique_votes.size() <= current_experts.size()) return false;  // strict majority required
  ledger.scale_expertise(target, area, 1.0 - params.burn_fraction);
  return true;
}

}  // namespace darsan

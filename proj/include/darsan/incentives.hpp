#pragma once

#include <map>
#include <vector>

#include "darsan/ledger.hpp"
#include "darsan/types.hpp"

namespace darsan {

// Authority-chosen constants for the incentive equations. The gain functions
// are linear: mingain(x) = alpha*x, addgain(d) = beta*d. Channel weights
// (w_endorse, w_predict) come from the slope parameter and must sum to 1.
struct IncentiveParams {
  double alpha = 0.001;          // mingain coefficient
  double beta = 0.001;           // addgain coefficient
  double c1 = 0.5;               // dividend scale
  double c2 = 1e-4;              // prediction-share floor
  double pool_scale = 10000.0;   // prediction pool per unit of system error
  int k = 50;                    // expert pool size per area
  double thresh = 0.5;           // admission threshold on the weighted mean rating
  double burn_fraction = 1.0;    // fraction burned on a successful vote
  double w_endorse = 0.5;        // endorsement channel weight
  double w_predict = 0.5;        // prediction channel weight
  double incentive_pool_fraction = 0.1;  // token pool share paid out per round
  bool broad_dividends = false;  // extend dividends to prediction gains

  void validate() const;
};

// Eq. 1 pieces. Inputs are expertise points; negative input is an error.
double mingain(double endorser_expertise, const IncentiveParams& params);
double addgain(double expertise_gap, const IncentiveParams& params);

// Eq. 1: expertise gained by the endorsee from one endorsement.
double endorsement_gain(double endorser_expertise, double endorsee_expertise,
                        const IncentiveParams& params);

// Eq. 2: dividends to prior investors of the endorsee. `snapshot` holds the
// endorsee's investment shares frozen at the round boundary. The endorser's
// own payout is suppressed (self-endorsement cannot feed itself) but their
// shares still count toward the denominator. Empty snapshot -> empty map.
std::map<ReviewerId, double> dividends(
    double delta, ReviewerId endorser,
    const std::vector<std::pair<ReviewerId, std::uint32_t>>& snapshot,
    const IncentiveParams& params);

// Expertise-weighted mean of ratings in [0,1]. All-zero weights are degenerate.
double weighted_mean_rating(const std::vector<std::pair<Rating, double>>& ratings);

// Admission rule: listed iff rbar >= thresh (boundary inclusive).
bool admit(Rating rbar, Rating thresh);

// Eq. 3: squared prediction error.
double prediction_error(double demand, double prediction);

// Eq. 4: system-wide prediction error, expertise-SQUARED weighted.
double system_error(const std::vector<std::pair<double, double>>& errors_and_expertise);

// Eq. 5: prediction shares. Reviewers with error >= eps get nothing; others
// get 1/max(c2, error). Zero shares are omitted from the result.
std::map<ReviewerId, double> prediction_shares(const std::map<ReviewerId, double>& errors,
                                               double eps, const IncentiveParams& params);

// Splits the prediction pool (pool_scale * eps * w_predict) proportionally to
// shares. Empty shares -> empty map.
std::map<ReviewerId, double> distribute_prediction_pool(const std::map<ReviewerId, double>& shares,
                                                        double eps,
                                                        const IncentiveParams& params);

// Top-k reviewers by expertise in `area`; ties broken by ascending id, and
// zero-expertise reviewers fill remaining slots by ascending id.
std::vector<ReviewerId> select_experts(const ExpertiseLedger& ledger, AreaId area, int k);

// Majority-vote penalty. Returns true iff the burn applied (strict majority of
// the current experts voted). Voters must themselves be current experts.
bool burn_expertise(ExpertiseLedger& ledger, ReviewerId target,
                    const std::vector<ReviewerId>& votes,
                    const std::vector<ReviewerId>& current_experts, AreaId area,
                    const IncentiveParams& params);

}  // namespace darsan

#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "darsan/rng.hpp"
#include "darsan/types.hpp"

namespace darsan {

enum class Strategy { Honest, Lazy, EndorseExpert, EndorsePoor, NoEndorsement };

const char* to_string(Strategy strategy);
std::optional<Strategy> strategy_from_string(std::string_view name);

// Hidden reviewer traits plus endorsement behavior. Traits are constant for a
// simulation's lifetime and never visible to the protocol.
struct ReviewerProfile {
  ReviewerId id = 0;
  double qea = 0.0;   // quality estimation ability, [0,1]
  double pdpa = 0.0;  // demand prediction ability, [0,1]
  Strategy strategy = Strategy::Honest;
};

struct NoiseParams {
  double w_max = 0.5;    // half width at trait 0
  double w_min = 0.001;  // width floor at trait 1 (keeps the distribution nondegenerate)
};

// Half width of the estimation noise for a trait value: linear from w_max down
// to w_min, strictly positive and decreasing in the trait.
double trait_width(double trait, const NoiseParams& noise);

// Inverse-CDF sample of the symmetric triangular distribution on
// [peak - w, peak + w], truncated and renormalized to [0,1]. Deterministic in u.
double sample_truncated_triangular(double peak, double half_width, double u);

// Noisy estimates of the asset's hidden properties: triangular around the true
// value with width driven by the relevant trait.
double honest_review(const ReviewerProfile& profile, double hidden_quality,
                     const NoiseParams& noise, Rng& rng);
double honest_prediction(const ReviewerProfile& profile, double hidden_demand,
                         const NoiseParams& noise, Rng& rng);

struct VisibleReview {
  double review = 0.0;
  bool is_expert = false;
  double round_start_expertise = 0.0;
};

// Endorsement choice for one reviewer. `visible` must not contain `self`.
// Honest picks the closest review (ties by ascending id), Lazy a uniformly
// random one, EndorseExpert a uniformly random visible expert, EndorsePoor the
// most distant review, NoEndorsement nothing. Strategies that pick at random
// consume exactly one draw, and only when their candidate set is nonempty.
std::optional<ReviewerId> choose_endorsement(Strategy strategy, ReviewerId self, double own_review,
                                             const std::map<ReviewerId, VisibleReview>& visible,
                                             Rng& rng);

// Batch endorsement selection for a whole round: equivalent to calling
// choose_endorsement for each participant in ascending id order against the
// recorded reviews, but with an O(n log n) path for the honest majority.
// `experts` must be sorted ascending. Participants without a recorded review
// are skipped.
std::map<ReviewerId, ReviewerId> choose_all_endorsements(
    const std::vector<ReviewerProfile>& participants, const std::map<ReviewerId, double>& reviews,
    const std::vector<ReviewerId>& experts, Rng& rng);

}  // namespace darsan

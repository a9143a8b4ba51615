#include "darsan/agents.hpp"

#include <algorithm>
#include <cmath>

namespace darsan {

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Honest: return "honest";
    case Strategy::Lazy: return "lazy";
    case Strategy::EndorseExpert: return "endorse_expert";
    case Strategy::EndorsePoor: return "endorse_poor";
    case Strategy::NoEndorsement: return "no_endorsement";
  }
  return "unknown";
}

std::optional<Strategy> strategy_from_string(std::string_view name) {
  if (name == "honest") return Strategy::Honest;
  if (name == "lazy") return Strategy::Lazy;
  if (name == "endorse_expert") return Strategy::EndorseExpert;
  if (name == "endorse_poor") return Strategy::EndorsePoor;
  if (name == "no_endorsement") return Strategy::NoEndorsement;
  return std::nullopt;
}

double trait_width(double trait, const NoiseParams& noise) {
  if (trait < 0.0 || trait > 1.0) fail(ErrorCode::InvalidArgument, "trait outside [0,1]");
  return noise.w_max * (1.0 - trait) + noise.w_min * trait;
}

namespace {

// Untruncated CDF of the symmetric triangular distribution with the given
// peak and half width.
double triangular_cdf(double x, double peak, double w) {
  double a = peak - w, b = peak + w;
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  if (x <= peak) {
    double u = x - a;
    return u * u / (2.0 * w * w);
  }
  double v = b - x;
  return 1.0 - v * v / (2.0 * w * w);
}

}  // namespace

double sample_truncated_triangular(double peak, double half_width, double u) {
  if (peak < 0.0 || peak > 1.0) fail(ErrorCode::InvalidArgument, "peak outside [0,1]");
  if (half_width <= 0.0) fail(ErrorCode::InvalidArgument, "half width must be positive");
  if (u < 0.0 || u >= 1.0) fail(ErrorCode::InvalidArgument, "u outside [0,1)");

  double a = peak - half_width, b = peak + half_width;
  double lo = std::max(a, 0.0), hi = std::min(b, 1.0);
  double t_lo = triangular_cdf(lo, peak, half_width);
  double t_hi = triangular_cdf(hi, peak, half_width);
  double t = t_lo + u * (t_hi - t_lo);

  double x;
  if (t <= 0.5) {
    x = a + half_width * std::sqrt(2.0 * t);
  } else {
    x = b - half_width * std::sqrt(2.0 * (1.0 - t));
  }
  return std::clamp(x, lo, hi);
}

double honest_review(const ReviewerProfile& profile, double hidden_quality,
                     const NoiseParams& noise, Rng& rng) {
  return sample_truncated_triangular(hidden_quality, trait_width(profile.qea, noise),
                                     rng.uniform01());
}

double honest_prediction(const ReviewerProfile& profile, double hidden_demand,
                         const NoiseParams& noise, Rng& rng) {
  return sample_truncated_triangular(hidden_demand, trait_width(profile.pdpa, noise),
                                     rng.uniform01());
}

namespace {

// Lexicographic (distance, id) preference; smaller wins.
struct Candidate {
  double dist = 0.0;
  ReviewerId id = 0;
  bool valid = false;

  void offer(double d, ReviewerId candidate_id) {
    if (!valid || d < dist || (d == dist && candidate_id < id)) {
      dist = d;
      id = candidate_id;
      valid = true;
    }
  }
};

}  // namespace

std::optional<ReviewerId> choose_endorsement(Strategy strategy, ReviewerId self, double own_review,
                                             const std::map<ReviewerId, VisibleReview>& visible,
                                             Rng& rng) {
  if (visible.count(self)) fail(ErrorCode::InvalidArgument, "visible set contains self");
  if (visible.empty() || strategy == Strategy::NoEndorsement) return std::nullopt;

  switch (strategy) {
    case Strategy::Honest: {
      Candidate best;
      for (const auto& [id, vr] : visible) best.offer(std::abs(own_review - vr.review), id);
      return best.id;
    }
    case Strategy::Lazy: {
      std::size_t pick = rng.index(visible.size());
      auto it = visible.begin();
      std::advance(it, static_cast<long>(pick));
      return it->first;
    }
    case Strategy::EndorseExpert: {
      std::vector<ReviewerId> experts;
      for (const auto& [id, vr] : visible) {
        if (vr.is_expert) experts.push_back(id);
      }
      if (experts.empty()) return std::nullopt;
      return experts[rng.index(experts.size())];
    }
    case Strategy::EndorsePoor: {
      Candidate best;
      for (const auto& [id, vr] : visible) best.offer(-std::abs(own_review - vr.review), id);
      return best.id;
    }
    case Strategy::NoEndorsement:
      return std::nullopt;
  }
  return std::nullopt;
}

namespace {

// Nearest other review via the sorted (value, id) array. Entries with equal
// values sit adjacent with ascending ids, which makes the min-id tie-break a
// matter of picking the first entry of the relevant run.
std::optional<ReviewerId> nearest_other(const std::vector<std::pair<double, ReviewerId>>& sorted,
                                        double own_value, ReviewerId self) {
  std::size_t n = sorted.size();
  if (n <= 1) return std::nullopt;

  auto run = std::equal_range(sorted.begin(), sorted.end(),
                              std::make_pair(own_value, ReviewerId{0}),
                              [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t lo = static_cast<std::size_t>(run.first - sorted.begin());
  std::size_t hi = static_cast<std::size_t>(run.second - sorted.begin());

  Candidate best;
  // Duplicates of the own value (distance zero), excluding self.
  if (lo < hi) {
    if (sorted[lo].second != self) {
      best.offer(0.0, sorted[lo].second);
    } else if (lo + 1 < hi) {
      best.offer(0.0, sorted[lo + 1].second);
    }
  }
  // Nearest distinct value below: min id lives at the start of that run.
  if (lo > 0) {
    double left_value = sorted[lo - 1].first;
    auto left_run = std::lower_bound(
        sorted.begin(), sorted.begin() + static_cast<long>(lo), std::make_pair(left_value, ReviewerId{0}),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    best.offer(own_value - left_value, left_run->second);
  }
  // Nearest distinct value above: the first entry of the right run has min id.
  if (hi < n) best.offer(sorted[hi].first - own_value, sorted[hi].second);

  if (!best.valid) return std::nullopt;
  return best.id;
}

}  // namespace

std::map<ReviewerId, ReviewerId> choose_all_endorsements(
    const std::vector<ReviewerProfile>& participants, const std::map<ReviewerId, double>& reviews,
    const std::vector<ReviewerId>& experts, Rng& rng) {
  std::map<ReviewerId, ReviewerId> out;
  if (reviews.empty()) return out;

  std::vector<std::pair<double, ReviewerId>> sorted;
  sorted.reserve(reviews.size());
  for (const auto& [id, value] : reviews) sorted.emplace_back(value, id);
  std::sort(sorted.begin(), sorted.end());

  std::vector<ReviewerId> reviewed_experts;
  for (ReviewerId id : experts) {
    if (reviews.count(id)) reviewed_experts.push_back(id);
  }

  // Ascending id order, matching per-reviewer calls over a shared stream.
  std::vector<const ReviewerProfile*> ordered;
  ordered.reserve(participants.size());
  for (const ReviewerProfile& p : participants) {
    if (reviews.count(p.id)) ordered.push_back(&p);
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const ReviewerProfile* a, const ReviewerProfile* b) { return a->id < b->id; });

  for (const ReviewerProfile* p : ordered) {
    double own = reviews.at(p->id);
    std::optional<ReviewerId> pick;
    switch (p->strategy) {
      case Strategy::Honest:
        pick = nearest_other(sorted, own, p->id);
        break;
      case Strategy::Lazy: {
        std::size_t others = reviews.size() - 1;
        if (others == 0) break;
        std::size_t k = rng.index(others);
        // k-th review in ascending id order, skipping self.
        auto it = reviews.begin();
        for (std::size_t seen = 0;; ++it) {
          if (it->first == p->id) continue;
          if (seen == k) break;
          ++seen;
        }
        pick = it->first;
        break;
      }
      case Strategy::EndorseExpert: {
        std::size_t count = reviewed_experts.size();
        bool self_is_expert =
            std::binary_search(reviewed_experts.begin(), reviewed_experts.end(), p->id);
        if (self_is_expert) --count;
        if (count == 0) break;
        std::size_t k = rng.index(count);
        for (ReviewerId id : reviewed_experts) {
          if (id == p->id) continue;
          if (k == 0) {
            pick = id;
            break;
          }
          --k;
        }
        break;
      }
      case Strategy::EndorsePoor: {
        Candidate best;
        for (const auto& [value, id] : sorted) {
          if (id == p->id) continue;
          best.offer(-std::abs(own - value), id);
        }
        if (best.valid) pick = best.id;
        break;
      }
      case Strategy::NoEndorsement:
        break;
    }
    if (pick) out[p->id] = *pick;
  }
  return out;
}

}  // namespace darsan

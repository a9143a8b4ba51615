#include "darsan/ledger.hpp"

#include <algorithm>
#include <limits>

namespace darsan {

void ExpertiseLedger::register_reviewer(ReviewerId id) {
  auto it = std::lower_bound(reviewers_.begin(), reviewers_.end(), id);
  if (it != reviewers_.end() && *it == id) {
    fail(ErrorCode::Duplicate, "reviewer " + std::to_string(id) + " already registered");
  }
  reviewers_.insert(it, id);
}

bool ExpertiseLedger::is_registered(ReviewerId id) const {
  return std::binary_search(reviewers_.begin(), reviewers_.end(), id);
}

double ExpertiseLedger::expertise(ReviewerId id, AreaId area) const {
  auto area_it = expertise_.find(area);
  if (area_it == expertise_.end()) return 0.0;
  auto it = area_it->second.find(id);
  return it == area_it->second.end() ? 0.0 : it->second;
}

void ExpertiseLedger::set_expertise(ReviewerId id, AreaId area, double value) {
  if (value < 0.0) fail(ErrorCode::InvalidArgument, "expertise must be nonnegative");
  expertise_[area][id] = value;
}

void ExpertiseLedger::add_expertise(ReviewerId id, AreaId area, double delta) {
  double& slot = expertise_[area][id];
  if (slot + delta < 0.0) fail(ErrorCode::InvalidArgument, "expertise would go negative");
  slot += delta;
}

void ExpertiseLedger::scale_expertise(ReviewerId id, AreaId area, double factor) {
  if (factor < 0.0 || factor > 1.0) fail(ErrorCode::InvalidArgument, "scale factor outside [0,1]");
  auto area_it = expertise_.find(area);
  if (area_it == expertise_.end()) return;
  auto it = area_it->second.find(id);
  if (it != area_it->second.end()) it->second *= factor;
}

double ExpertiseLedger::total_expertise(AreaId area) const {
  double total = 0.0;
  auto area_it = expertise_.find(area);
  if (area_it == expertise_.end()) return 0.0;
  for (const auto& [id, value] : area_it->second) total += value;
  return total;
}

const std::map<ReviewerId, double>& ExpertiseLedger::area_expertise(AreaId area) const {
  static const std::map<ReviewerId, double> empty;
  auto it = expertise_.find(area);
  return it == expertise_.end() ? empty : it->second;
}

std::uint32_t ExpertiseLedger::invshare(ReviewerId investor, ReviewerId endorsee) const {
  auto row_it = invshare_.find(endorsee);
  if (row_it == invshare_.end()) return 0;
  const InvRow& row = row_it->second;
  auto it = std::lower_bound(row.begin(), row.end(), investor,
                             [](const InvEntry& e, ReviewerId id) { return e.investor < id; });
  return (it != row.end() && it->investor == investor) ? it->count : 0;
}

std::uint32_t ExpertiseLedger::invshare_snapshot(ReviewerId investor, ReviewerId endorsee) const {
  auto row_it = invshare_.find(endorsee);
  if (row_it == invshare_.end()) return 0;
  const InvRow& row = row_it->second;
  auto it = std::lower_bound(row.begin(), row.end(), investor,
                             [](const InvEntry& e, ReviewerId id) { return e.investor < id; });
  return (it != row.end() && it->investor == investor) ? snap_value(*it) : 0;
}

std::vector<std::pair<ReviewerId, std::uint32_t>> ExpertiseLedger::snapshot_row(
    ReviewerId endorsee) const {
  std::vector<std::pair<ReviewerId, std::uint32_t>> out;
  auto row_it = invshare_.find(endorsee);
  if (row_it == invshare_.end()) return out;
  out.reserve(row_it->second.size());
  for (const InvEntry& e : row_it->second) {
    std::uint32_t v = snap_value(e);
    if (v > 0) out.emplace_back(e.investor, v);
  }
  return out;
}

std::uint64_t ExpertiseLedger::snapshot_row_total(ReviewerId endorsee) const {
  std::uint64_t total = 0;
  auto row_it = invshare_.find(endorsee);
  if (row_it == invshare_.end()) return 0;
  for (const InvEntry& e : row_it->second) total += snap_value(e);
  return total;
}

void ExpertiseLedger::record_investment(ReviewerId investor, ReviewerId endorsee) {
  InvRow& row = invshare_[endorsee];
  auto it = std::lower_bound(row.begin(), row.end(), investor,
                             [](const InvEntry& e, ReviewerId id) { return e.investor < id; });
  if (it == row.end() || it->investor != investor) {
    InvEntry fresh;
    fresh.investor = investor;
    fresh.snap_epoch = epoch_;  // snapshot value for a new entry is 0
    it = row.insert(it, fresh);
  } else if (it->snap_epoch < epoch_) {
    it->snap_count = it->count;
    it->snap_epoch = epoch_;
  }
  ++it->count;
}

bool ExpertiseLedger::expertise_equals(const ExpertiseLedger& other) const {
  return expertise_ == other.expertise_;
}

double ExpertiseLedger::min_expertise() const {
  double lo = 0.0;
  bool first = true;
  for (const auto& [area, table] : expertise_) {
    for (const auto& [id, value] : table) {
      if (first || value < lo) {
        lo = value;
        first = false;
      }
    }
  }
  return lo;
}

}  // namespace darsan

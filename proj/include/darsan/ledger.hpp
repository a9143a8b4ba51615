#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "darsan/types.hpp"

namespace darsan {

// Per-area expertise scores plus cumulative endorsement ("investment") shares.
// This is the protocol's only persistent reputation state.
//
// The investment shares carry "up until the previous round" semantics: dividend
// payouts are computed from a snapshot frozen at the most recent round boundary.
// Snapshots are realized lazily with an epoch counter so taking one is O(1);
// each entry remembers the count it had when the current epoch began.
class ExpertiseLedger {
 public:
  struct InvEntry {
    ReviewerId investor = 0;
    std::uint32_t count = 0;       // cumulative endorsements, all rounds
    std::uint32_t snap_count = 0;  // count as of snap_epoch
    std::uint64_t snap_epoch = 0;
  };
  using InvRow = std::vector<InvEntry>;  // sorted by investor id

  // --- reviewer registry -------------------------------------------------
  // All reviewers known to the system, including zero-expertise ones; they are
  // eligible to fill expert slots when fewer than k reviewers hold positive
  // expertise.
  void register_reviewer(ReviewerId id);
  bool is_registered(ReviewerId id) const;
  const std::vector<ReviewerId>& reviewers() const { return reviewers_; }

  // --- expertise ----------------------------------------------------------
  double expertise(ReviewerId id, AreaId area) const;
  void set_expertise(ReviewerId id, AreaId area, double value);
  void add_expertise(ReviewerId id, AreaId area, double delta);
  // Multiplies the target's expertise in `area` by `factor` in [0,1].
  void scale_expertise(ReviewerId id, AreaId area, double factor);
  double total_expertise(AreaId area) const;
  const std::map<ReviewerId, double>& area_expertise(AreaId area) const;

  // --- investment shares ----------------------------------------------------
  std::uint32_t invshare(ReviewerId investor, ReviewerId endorsee) const;
  std::uint32_t invshare_snapshot(ReviewerId investor, ReviewerId endorsee) const;
  // Snapshot row for one endorsee: (investor, count as of the last snapshot),
  // zero entries omitted, ascending investor id.
  std::vector<std::pair<ReviewerId, std::uint32_t>> snapshot_row(ReviewerId endorsee) const;
  std::uint64_t snapshot_row_total(ReviewerId endorsee) const;

  // Visits the snapshot row without materializing it (settlement hot path).
  // `fn(investor, snapshot_count)` is called in ascending investor order for
  // entries with a positive snapshot value.
  template <typename F>
  void for_each_snapshot_share(ReviewerId endorsee, F&& fn) const {
    auto row_it = invshare_.find(endorsee);
    if (row_it == invshare_.end()) return;
    for (const InvEntry& e : row_it->second) {
      std::uint32_t v = snap_value(e);
      if (v > 0) fn(e.investor, v);
    }
  }

  // Records one endorsement event (investor -> endorsee); increments the
  // cumulative share by exactly 1, preserving the current snapshot value.
  void record_investment(ReviewerId investor, ReviewerId endorsee);

  // Freezes the current invshare state as the new snapshot (round boundary).
  void take_invshare_snapshot() { ++epoch_; }

  // Bitwise equality of the expertise tables (replay determinism checks).
  bool expertise_equals(const ExpertiseLedger& other) const;

  double min_expertise() const;

 private:
  std::vector<ReviewerId> reviewers_;  // sorted ascending
  std::map<AreaId, std::map<ReviewerId, double>> expertise_;
  std::map<ReviewerId, InvRow> invshare_;  // keyed by endorsee
  std::uint64_t epoch_ = 1;

  std::uint32_t snap_value(const InvEntry& e) const {
    return e.snap_epoch == epoch_ ? e.snap_count : e.count;
  }
};

}  // namespace darsan

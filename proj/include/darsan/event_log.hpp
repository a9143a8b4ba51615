#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "darsan/hash.hpp"
#include "darsan/types.hpp"

namespace darsan {

enum class EventKind : std::uint8_t {
  AssetSubmitted = 0,
  RatingRecorded,
  AdmissionDecided,
  ReviewRecorded,
  PredictionRecorded,
  EndorsementRecorded,
  SaleObserved,
  ExpertiseDistributed,
  ExpertsRotated,
  ExpertiseBurned,
  FeeForfeited,
  IncentivePaid,
};

const char* to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view name);

// Canonical payload byte form. Layout: kind byte, round id as big-endian u64,
// then fields in insertion order. Each field is `key 0x00 type value` with
// type 'u' (u64 big-endian), 'd' (f64 as big-endian IEEE-754 bit pattern) or
// 's' (u32 big-endian length + raw bytes). The byte string is what gets
// hashed, exported as hex, and decoded on replay.
class Payload {
 public:
  Payload(EventKind kind, std::uint64_t round);

  Payload& add_u64(std::string_view key, std::uint64_t value);
  Payload& add_f64(std::string_view key, double value);
  Payload& add_str(std::string_view key, std::string_view value);

  EventKind kind() const { return kind_; }
  std::uint64_t round() const { return round_; }
  const std::string& bytes() const { return bytes_; }

 private:
  EventKind kind_;
  std::uint64_t round_;
  std::string bytes_;
};

// Decoded view of a canonical payload byte string.
class PayloadReader {
 public:
  // Throws Error(Corrupt) on malformed bytes.
  explicit PayloadReader(std::string_view bytes);

  EventKind kind() const { return kind_; }
  std::uint64_t round() const { return round_; }

  std::uint64_t get_u64(std::string_view key) const;
  double get_f64(std::string_view key) const;
  const std::string& get_str(std::string_view key) const;
  bool has(std::string_view key) const;

 private:
  struct Field {
    std::string key;
    char type;
    std::uint64_t u = 0;
    double d = 0.0;
    std::string s;
  };
  const Field& find(std::string_view key) const;

  EventKind kind_;
  std::uint64_t round_ = 0;
  std::vector<Field> fields_;
};

struct ProtocolEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::AssetSubmitted;
  std::uint64_t round = 0;
  std::string payload;  // canonical bytes (includes kind + round prefix)
  Digest prev_hash{};
  Digest hash{};
};

struct VerifyResult {
  bool ok = true;
  std::uint64_t first_bad = 0;  // index of the first corrupt entry when !ok
  std::string reason;
};

// Append-only hash chain: hash = SHA-256(seq_be8 || payload || prev_hash),
// genesis prev_hash all zeroes; sequence numbers increase by 1 from 0.
//
// Events can be retained in memory (tests, replay of small runs), streamed to
// a sink line by line (full-scale runs), or both. The chain head and count are
// always tracked.
class EventLog {
 public:
  EventLog() = default;

  void set_sink(std::ostream* sink) { sink_ = sink; }
  void set_retention(bool keep) { retain_ = keep; }

  const ProtocolEvent& append(const Payload& payload);

  std::uint64_t size() const { return count_; }
  const Digest& head_hash() const { return head_; }
  const std::vector<ProtocolEvent>& events() const { return events_; }

  static Digest compute_hash(std::uint64_t seq, std::string_view payload_bytes,
                             const Digest& prev_hash);

  // One event per line: `seq=N kind=Name round=R payload=<hex> prev=<hex> hash=<hex>`.
  static std::string to_line(const ProtocolEvent& event);
  static bool parse_line(std::string_view line, ProtocolEvent& out);

  static VerifyResult verify(const std::vector<ProtocolEvent>& events);
  static VerifyResult verify_file(const std::string& path);
  // Throws Error(Io) on unreadable file, Error(Corrupt) on unparseable lines.
  static std::vector<ProtocolEvent> read_file(const std::string& path);

 private:
  std::ostream* sink_ = nullptr;
  bool retain_ = true;
  std::uint64_t count_ = 0;
  Digest head_{};  // all zeroes before the first event
  std::vector<ProtocolEvent> events_;
  ProtocolEvent scratch_;  // last appended event when retention is off
};

}  // namespace darsan

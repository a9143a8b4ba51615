#include "darsan/event_log.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

namespace darsan {

namespace {

constexpr const char* kKindNames[] = {
    "AssetSubmitted",      "RatingRecorded",    "AdmissionDecided", "ReviewRecorded",
    "PredictionRecorded",  "EndorsementRecorded", "SaleObserved",   "ExpertiseDistributed",
    "ExpertsRotated",      "ExpertiseBurned",   "FeeForfeited",     "IncentivePaid",
};
constexpr std::size_t kKindCount = sizeof(kKindNames) / sizeof(kKindNames[0]);

void put_u64_be(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8)
    out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint64_t read_u64_be(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

void put_u32_be(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8)
    out.push_back(static_cast<char>((v >> shift) & 0xff));
}

}  // namespace

const char* to_string(EventKind kind) {
  auto i = static_cast<std::size_t>(kind);
  return i < kKindCount ? kKindNames[i] : "Unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindCount; ++i) {
    if (name == kKindNames[i]) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

Payload::Payload(EventKind kind, std::uint64_t round) : kind_(kind), round_(round) {
  bytes_.reserve(64);
  bytes_.push_back(static_cast<char>(kind));
  put_u64_be(bytes_, round);
}

Payload& Payload::add_u64(std::string_view key, std::uint64_t value) {
  bytes_.append(key);
  bytes_.push_back('\0');
  bytes_.push_back('u');
  put_u64_be(bytes_, value);
  return *this;
}

Payload& Payload::add_f64(std::string_view key, double value) {
  bytes_.append(key);
  bytes_.push_back('\0');
  bytes_.push_back('d');
  put_u64_be(bytes_, std::bit_cast<std::uint64_t>(value));
  return *this;
}

Payload& Payload::add_str(std::string_view key, std::string_view value) {
  bytes_.append(key);
  bytes_.push_back('\0');
  bytes_.push_back('s');
  put_u32_be(bytes_, static_cast<std::uint32_t>(value.size()));
  bytes_.append(value);
  return *this;
}

PayloadReader::PayloadReader(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::size_t n = bytes.size();
  if (n < 9) fail(ErrorCode::Corrupt, "payload too short");
  if (p[0] >= kKindCount) fail(ErrorCode::Corrupt, "unknown event kind byte");
  kind_ = static_cast<EventKind>(p[0]);
  round_ = read_u64_be(p + 1);
  std::size_t i = 9;
  while (i < n) {
    std::size_t key_end = i;
    while (key_end < n && p[key_end] != 0) ++key_end;
    if (key_end + 1 >= n) fail(ErrorCode::Corrupt, "truncated payload field key");
    Field f;
    f.key.assign(bytes.data() + i, key_end - i);
    f.type = static_cast<char>(p[key_end + 1]);
    i = key_end + 2;
    switch (f.type) {
      case 'u':
        if (i + 8 > n) fail(ErrorCode::Corrupt, "truncated u64 field");
        f.u = read_u64_be(p + i);
        i += 8;
        break;
      case 'd':
        if (i + 8 > n) fail(ErrorCode::Corrupt, "truncated f64 field");
        f.d = std::bit_cast<double>(read_u64_be(p + i));
        i += 8;
        break;
      case 's': {
        if (i + 4 > n) fail(ErrorCode::Corrupt, "truncated string length");
        std::uint32_t len = 0;
        for (int j = 0; j < 4; ++j) len = (len << 8) | p[i + static_cast<std::size_t>(j)];
        i += 4;
        if (i + len > n) fail(ErrorCode::Corrupt, "truncated string field");
        f.s.assign(bytes.data() + i, len);
        i += len;
        break;
      }
      default:
        fail(ErrorCode::Corrupt, "unknown payload field type");
    }
    fields_.push_back(std::move(f));
  }
}

const PayloadReader::Field& PayloadReader::find(std::string_view key) const {
  for (const Field& f : fields_) {
    if (f.key == key) return f;
  }
  fail(ErrorCode::Corrupt, "missing payload field: " + std::string(key));
}

bool PayloadReader::has(std::string_view key) const {
  for (const Field& f : fields_) {
    if (f.key == key) return true;
  }
  return false;
}

std::uint64_t PayloadReader::get_u64(std::string_view key) const {
  const Field& f = find(key);
  if (f.type != 'u') fail(ErrorCode::Corrupt, "field type mismatch: " + std::string(key));
  return f.u;
}

double PayloadReader::get_f64(std::string_view key) const {
  const Field& f = find(key);
  if (f.type != 'd') fail(ErrorCode::Corrupt, "field type mismatch: " + std::string(key));
  return f.d;
}

const std::string& PayloadReader::get_str(std::string_view key) const {
  const Field& f = find(key);
  if (f.type != 's') fail(ErrorCode::Corrupt, "field type mismatch: " + std::string(key));
  return f.s;
}

Digest EventLog::compute_hash(std::uint64_t seq, std::string_view payload_bytes,
                              const Digest& prev_hash) {
  std::string msg;
  msg.reserve(8 + payload_bytes.size() + prev_hash.size());
  put_u64_be(msg, seq);
  msg.append(payload_bytes);
  msg.append(reinterpret_cast<const char*>(prev_hash.data()), prev_hash.size());
  return sha256(msg);
}

const ProtocolEvent& EventLog::append(const Payload& payload) {
  ProtocolEvent event;
  event.seq = count_;
  event.kind = payload.kind();
  event.round = payload.round();
  event.payload = payload.bytes();
  event.prev_hash = head_;
  event.hash = compute_hash(event.seq, event.payload, event.prev_hash);

  head_ = event.hash;
  ++count_;
  if (sink_) *sink_ << to_line(event) << '\n';
  if (retain_) {
    events_.push_back(std::move(event));
    return events_.back();
  }
  scratch_ = std::move(event);
  return scratch_;
}

std::string EventLog::to_line(const ProtocolEvent& event) {
  std::string line;
  line.reserve(160 + event.payload.size() * 2);
  line += "seq=";
  line += std::to_string(event.seq);
  line += " kind=";
  line += to_string(event.kind);
  line += " round=";
  line += std::to_string(event.round);
  line += " payload=";
  line += to_hex(event.payload.data(), event.payload.size());
  line += " prev=";
  line += to_hex(event.prev_hash);
  line += " hash=";
  line += to_hex(event.hash);
  return line;
}

bool EventLog::parse_line(std::string_view line, ProtocolEvent& out) {
  auto take = [&line](std::string_view prefix) -> std::optional<std::string_view> {
    if (line.substr(0, prefix.size()) != prefix) return std::nullopt;
    line.remove_prefix(prefix.size());
    std::size_t end = line.find(' ');
    std::string_view token = line.substr(0, end);
    line.remove_prefix(end == std::string_view::npos ? line.size() : end + 1);
    return token;
  };

  auto seq_tok = take("seq=");
  auto kind_tok = take("kind=");
  auto round_tok = take("round=");
  auto payload_tok = take("payload=");
  auto prev_tok = take("prev=");
  auto hash_tok = take("hash=");
  if (!seq_tok || !kind_tok || !round_tok || !payload_tok || !prev_tok || !hash_tok) return false;

  auto parse_u64 = [](std::string_view s, std::uint64_t& v) {
    if (s.empty()) return false;
    v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return true;
  };

  if (!parse_u64(*seq_tok, out.seq)) return false;
  auto kind = event_kind_from_string(*kind_tok);
  if (!kind) return false;
  out.kind = *kind;
  if (!parse_u64(*round_tok, out.round)) return false;
  if (!from_hex(*payload_tok, out.payload)) return false;
  if (!digest_from_hex(*prev_tok, out.prev_hash)) return false;
  if (!digest_from_hex(*hash_tok, out.hash)) return false;

  // The payload prefix must agree with the decoded kind and round.
  if (out.payload.size() < 9) return false;
  if (static_cast<std::uint8_t>(out.payload[0]) != static_cast<std::uint8_t>(out.kind)) return false;
  std::uint64_t round_in_payload =
      read_u64_be(reinterpret_cast<const unsigned char*>(out.payload.data()) + 1);
  if (round_in_payload != out.round) return false;
  return true;
}

namespace {

VerifyResult check_event(const ProtocolEvent& event, std::uint64_t index, const Digest& want_prev) {
  VerifyResult r;
  if (event.seq != index) {
    return {false, index, "sequence number mismatch"};
  }
  if (event.prev_hash != want_prev) {
    return {false, index, "broken chain linkage"};
  }
  Digest want = EventLog::compute_hash(event.seq, event.payload, event.prev_hash);
  if (event.hash != want) {
    return {false, index, "hash mismatch"};
  }
  return r;
}

}  // namespace

VerifyResult EventLog::verify(const std::vector<ProtocolEvent>& events) {
  Digest prev{};
  for (std::uint64_t i = 0; i < events.size(); ++i) {
    VerifyResult r = check_event(events[i], i, prev);
    if (!r.ok) return r;
    prev = events[i].hash;
  }
  return {};
}

VerifyResult EventLog::verify_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  Digest prev{};
  std::uint64_t index = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ProtocolEvent event;
    if (!parse_line(line, event)) {
      return {false, index, "unparseable event line"};
    }
    VerifyResult r = check_event(event, index, prev);
    if (!r.ok) return r;
    prev = event.hash;
    ++index;
  }
  return {};
}

std::vector<ProtocolEvent> EventLog::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::vector<ProtocolEvent> out;
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ProtocolEvent event;
    if (!parse_line(line, event))
      fail(ErrorCode::Corrupt, "unparseable event line at index " + std::to_string(index));
    out.push_back(std::move(event));
    ++index;
  }
  return out;
}

}  // namespace darsan

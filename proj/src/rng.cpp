#include "darsan/rng.hpp"

#include <string>

#include "darsan/hash.hpp"

namespace darsan {

std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t a,
                          std::uint64_t b) {
  std::string msg;
  msg.reserve(24 + label.size());
  auto put_u64 = [&msg](std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
      msg.push_back(static_cast<char>((v >> shift) & 0xff));
  };
  put_u64(base);
  msg.append(label);
  put_u64(a);
  put_u64(b);
  Digest d = sha256(msg);
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | d[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace darsan

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace darsan {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of the given bytes (OpenSSL-backed).
Digest sha256(const void* data, std::size_t len);
inline Digest sha256(std::string_view bytes) { return sha256(bytes.data(), bytes.size()); }

std::string to_hex(const Digest& digest);
std::string to_hex(const void* data, std::size_t len);
// Returns false on odd length or non-hex characters.
bool from_hex(std::string_view hex, std::string& out);
bool digest_from_hex(std::string_view hex, Digest& out);

// SHA-256 of a file's contents; throws Error(Io) if unreadable.
Digest sha256_file(const std::string& path);

}  // namespace darsan

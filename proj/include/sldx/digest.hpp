#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sldx {

/// SHA-256 digest.
struct Digest {
  std::array<unsigned char, 32> bytes{};

  std::string hex() const;
  /// Throws Error(SchemaViolation) on anything but 64 hex chars.
  static Digest from_hex(std::string_view hex);

  bool operator==(const Digest&) const = default;
  auto operator<=>(const Digest&) const = default;
};

Digest sha256(std::string_view data);

}  // namespace sldx

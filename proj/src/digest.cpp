#include "sldx/digest.hpp"

#include <openssl/evp.h>

#include <memory>

#include "sldx/error.hpp"
#include "sldx/text.hpp"

namespace sldx {

std::string Digest::hex() const { return text::to_hex(bytes.data(), bytes.size()); }

Digest Digest::from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() != 64) throw Error(ErrorCode::SchemaViolation, "digest must be 64 hex characters");
  Digest d;
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::SchemaViolation, "invalid hex digit in digest");
    d.bytes[i] = static_cast<unsigned char>((hi << 4) | lo);
  }
  return d;
}

Digest sha256(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  Digest d;
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), d.bytes.data(), &len) != 1 || len != d.bytes.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return d;
}

}  // namespace sldx

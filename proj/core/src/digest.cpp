#include "vchat/digest.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>
#include <vector>

#include "vchat/error.hpp"

namespace vchat {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
  static constexpr char k_hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (auto byte : digest) {
    out.push_back(k_hex[byte >> 4]);
    out.push_back(k_hex[byte & 0x0f]);
  }
  return out;
}

std::string base64_encode(std::string_view data) {
  std::vector<unsigned char> out(4 * ((data.size() + 2) / 3) + 1);
  const int written = EVP_EncodeBlock(out.data(), reinterpret_cast<const unsigned char*>(data.data()),
                                      static_cast<int>(data.size()));
  return std::string(reinterpret_cast<const char*>(out.data()), static_cast<std::size_t>(written));
}

std::string base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(Errc::malformed_response, "base64 length is not a multiple of 4");
  if (text.empty()) return {};
  std::vector<unsigned char> out(3 * (text.size() / 4) + 1);
  const int written = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                      static_cast<int>(text.size()));
  if (written < 0) throw Error(Errc::malformed_response, "invalid base64 payload");
  // EVP_DecodeBlock counts padding bytes as zeros.
  std::size_t size = static_cast<std::size_t>(written);
  if (text.ends_with("==")) {
    size -= 2;
  } else if (text.ends_with('=')) {
    size -= 1;
  }
  return std::string(reinterpret_cast<const char*>(out.data()), size);
}

} // namespace vchat

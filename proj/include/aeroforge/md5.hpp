#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace aeroforge::util {

/// RFC 1321 MD5. Used as a content digest for artifact provenance and
/// checkpoint integrity, not for anything security-sensitive.
class Md5 {
 public:
  Md5();
  void update(const void* data, std::size_t len);
  std::array<std::uint8_t, 16> finish();

  static std::string hex(std::string_view data);

 private:
  void process_block(const std::uint8_t* block);

  std::uint32_t state_[4];
  std::uint64_t total_len_ = 0;
  std::uint8_t buffer_[64];
  std::size_t buffer_len_ = 0;
};

}  // namespace aeroforge::util

#pragma once

#include <string>
#include <string_view>

namespace aeroforge::util {

/// gzip-format compression (zlib). Throws std::runtime_error on corrupt input.
std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);

}  // namespace aeroforge::util

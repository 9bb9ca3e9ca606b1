#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aeroforge::util {

/// Shortest round-trip decimal representation of a double. Used everywhere a
/// number ends up in a file so that reruns are byte-identical.
std::string num_str(double v);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

std::vector<std::string> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
std::string lower(std::string_view s);

/// ISO-8601 UTC timestamp of now (second resolution).
std::string utc_timestamp();

/// Deterministic per-stream RNG: a master seed plus a stream label yields an
/// independent mt19937_64. Same (seed, label) always gives the same stream.
std::mt19937_64 seeded_rng(std::uint64_t master_seed, std::string_view stream);

double parse_double(std::string_view s);

}  // namespace aeroforge::util

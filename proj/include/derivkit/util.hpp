#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace derivkit::util {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);
bool icontains(std::string_view hay, std::string_view needle);
/// Position of the last case-insensitive occurrence, or npos.
std::size_t rfind_icase(std::string_view hay, std::string_view needle);

std::string fixed(double v, int decimals);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace derivkit::util

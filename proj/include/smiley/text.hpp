#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace smiley {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
/// Splits on '\n'; a trailing newline does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view text);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
/// Shortest round-trip decimal form.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed and truncates any existing file.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_escape(std::string_view field);

}  // namespace smiley

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mloc {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Splits into lines keeping the terminators, so joining the pieces
// reproduces the input byte-for-byte.
std::vector<std::string> split_lines_keep_ends(std::string_view text);

// Runs of internal whitespace collapse to a single space; ends trimmed.
std::string collapse_ws(std::string_view s);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Writes to a sibling temp file then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void append_line(const std::filesystem::path& path, std::string_view line);

// Strict decimal integer (optional sign, digits only).
std::optional<long> parse_int(std::string_view s);

// Rounds to 4 decimal places; the precision reports and stored
// workload-reduction values use.
double round4(double v);

// "0.8125" -> "81%" (nearest integer percentage, half away from zero).
std::string format_percent(double fraction);

std::string iso8601_utc_now();

}  // namespace mloc

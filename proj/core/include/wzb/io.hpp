#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wzb::io {

/// Splits one comma-separated line; trims surrounding blanks and a trailing CR.
/// Quoting is not supported: none of the formats written here need it.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string_view trim(std::string_view s);

/// Breaks text into lines, dropping a trailing empty line.
std::vector<std::string_view> lines(std::string_view text);

/// Strict decimal parse of the whole field; throws MalformedField naming `what`.
double parse_double(std::string_view field, std::string_view what);
long long parse_int(std::string_view field, std::string_view what);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);
std::string format_fixed(double v, int decimals);
/// Scientific notation with `significant` significant digits (e.g. 1.23457e+02).
std::string format_scientific(double v, int significant);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace wzb::io

#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace outbreak::io {

/// Reads one line, stripping a trailing CR so LF and CRLF files read alike.
bool read_line(std::istream& in, std::string& line);

std::vector<std::string_view> split(std::string_view text, char delim);

std::string_view trim(std::string_view text);

/// Whole-field decimal parse; rejects trailing garbage, empty text and
/// leading '+'. Accepts "nan"/"inf" spellings; callers decide finiteness.
std::optional<double> parse_double(std::string_view text);

std::optional<long long> parse_int(std::string_view text);

/// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

/// `%.17g`: always enough digits to round-trip, fixed width of precision.
std::string format_g17(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file then renames over `path`. If `writer`
/// throws, the temp file is removed and any previous `path` is left intact.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);

}  // namespace outbreak::io

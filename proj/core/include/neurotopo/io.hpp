#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace neurotopo::io {

/// Shortest form that still carries 17 significant digits; "inf"/"-inf" for
/// infinities. Parsing the result with parse_double reproduces the bits.
std::string format_double(double value);

/// Accepts decimal and scientific notation, an optional leading '+', and
/// "inf"/"infinity"/"nan" in any case. Returns nullopt on trailing garbage.
std::optional<double> parse_double(std::string_view text);

std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Reads every line of a text stream, stripping a trailing '\r'.
std::vector<std::string> read_lines(std::istream& in);

std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

void write_file_atomic_binary(const std::filesystem::path& path,
                              const std::string& bytes);

/// Labels end up as CSV cells; reject anything that would break a row.
void require_plain_label(std::string_view label);

}  // namespace neurotopo::io

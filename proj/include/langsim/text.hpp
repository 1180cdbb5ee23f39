#pragma once

// Text and file plumbing shared by the loaders and emitters.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace langsim::text {

/// Decodes UTF-8 into Unicode scalar values. Throws ParseError on malformed
/// sequences (overlong forms, surrogates, truncated tails).
std::vector<char32_t> decode_utf8(std::string_view s);

/// Splits a UTF-8 string into one string per scalar value.
std::vector<std::string> utf8_chars(std::string_view s);

void append_utf8(std::string& out, char32_t cp);

bool is_valid_utf8(std::string_view s);

/// Reads a whole file. Rejects byte-order marks and invalid UTF-8.
std::string read_file(const std::filesystem::path& path);

/// Splits file contents into lines on '\n', dropping a trailing '\r'.
/// A final newline does not produce an empty last line.
std::vector<std::string> split_lines(const std::string& contents);

std::vector<std::string> split(std::string_view s, char sep);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view s);

/// Strict decimal parse: the whole field must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest representation that round-trips through parse_double.
std::string format_shortest(double v);

/// Fixed-point with `decimals` digits after the point. Negative zero prints as zero.
std::string format_fixed(double v, int decimals);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// 64-bit FNV-1a; stable across platforms, used for named seed streams.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace langsim::text

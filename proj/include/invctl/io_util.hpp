#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace invctl {

/// 64-bit FNV-1a over a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);

/// Lower-case hex, zero-padded to 16 digits.
std::string to_hex(std::uint64_t value);

/// Shortest decimal text that parses back to the exact same double.
std::string format_double(double value);

/// Strict full-token parse; throws std::invalid_argument on anything else.
double parse_double(const std::string& text);
long long parse_integer(const std::string& text);

/// Whole-file helpers; throw std::runtime_error naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);
std::string file_checksum_hex(const std::string& path);

/// Splits one CSV line on commas. The formats used here never quote or
/// embed commas, so no quoting rules apply.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace invctl

#pragma once

#include <filesystem>
#include <string>

namespace antsel {

/// Fixed-point decimal with the given number of places ("%.6f" by default),
/// the form used by every numeric CSV/JSON cell this library writes.
std::string format_fixed(double value, int decimals = 6);

/// Shortest-form decimal ("%g"), used for path components such as SNR
/// values in cell directory names.
std::string format_compact(double value);

/// Nearest double to value rounded at the given decimal place. JSON numbers
/// pass through this so serialized output matches the CSV precision.
double round_to(double value, int decimals = 6);

/// Writes content verbatim (binary mode). Parent directories must already
/// exist. Throws std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Reads a whole file. Throws std::runtime_error if unreadable.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace antsel

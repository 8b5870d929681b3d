#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace facver {

std::string trim(std::string_view s);
std::string trim_leading(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view text, std::string_view prefix);
std::string replace_all(std::string text, std::string_view from, std::string_view to);
std::vector<std::string> split_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories. The atomic variant writes to a temp file in the
// same directory and renames into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string utc_timestamp();

// Runs body(0..count-1) on up to max_workers threads. The first exception is
// rethrown on the calling thread after all workers join.
void parallel_for(std::size_t count, int max_workers, const std::function<void(std::size_t)>& body);

std::string sha256_hex(std::string_view data);

}  // namespace facver

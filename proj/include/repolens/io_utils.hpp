#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace repolens {

std::string read_file(const std::filesystem::path& p);

// Writes via a sibling temp file followed by rename, so readers never observe
// a half-written artifact.
void write_file_atomic(const std::filesystem::path& p, const std::string& content);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 1469598103934665603ULL);
std::string fnv1a64_hex(std::string_view data);

// Sorted recursive listing of regular files under root (relative paths).
std::vector<std::filesystem::path> list_files_recursive(const std::filesystem::path& root);

}  // namespace repolens

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace emdtex::io {

std::vector<std::byte> read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::byte> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

// Unique sibling path "<path>.tmp-<n>" that does not exist yet.
std::filesystem::path temp_sibling(const std::filesystem::path& path);

// Replaces `target` (file or directory) with the fully written `staged` directory.
void commit_directory(const std::filesystem::path& staged, const std::filesystem::path& target);

}  // namespace emdtex::io

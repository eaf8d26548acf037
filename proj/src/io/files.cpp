#include "emdtex/io/files.hpp"

#include <atomic>
#include <fstream>
#include <system_error>

#include <unistd.h>

#include "emdtex/error.hpp"

namespace emdtex::io {

namespace fs = std::filesystem;

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) throw Error(ErrorCode::kIo, "cannot size " + path.string());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(static_cast<std::size_t>(size));
  if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw Error(ErrorCode::kIo, "cannot read " + path.string());
  }
  return bytes;
}

fs::path temp_sibling(const fs::path& path) {
  static std::atomic<unsigned> counter{0};
  const std::string base = path.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-";
  while (true) {
    fs::path candidate = path.parent_path() / (base + std::to_string(counter++));
    std::error_code ec;
    if (!fs::exists(candidate, ec)) return candidate;
  }
}

void write_file_atomic(const fs::path& path, std::span<const std::byte> bytes) {
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::as_bytes(std::span(text.data(), text.size())));
}

void commit_directory(const fs::path& staged, const fs::path& target) {
  std::error_code ec;
  fs::path old;
  if (fs::exists(target, ec)) {
    old = temp_sibling(target);
    fs::rename(target, old, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot move aside " + target.string());
  }
  fs::rename(staged, target, ec);
  if (ec) {
    if (!old.empty()) fs::rename(old, target, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + target.string());
  }
  if (!old.empty()) fs::remove_all(old, ec);
}

}  // namespace emdtex::io

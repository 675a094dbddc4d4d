#include "ctxgate/scan.hpp"

#include <algorithm>
#include <cctype>

namespace ctxgate {

namespace {

std::string_view basename_of(std::string_view path) {
  const std::size_t slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

}  // namespace

std::string extension_of(std::string_view path) {
  const std::string_view name = basename_of(path);
  const std::size_t dot = name.rfind('.');
  if (dot == std::string_view::npos || dot + 1 == name.size()) return "";
  std::string ext(name.substr(dot + 1));
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<FileRecord> scan_repository(const Vfs& vfs, const ScanConfig& config) {
  if (config.max_depth < 1) {
    raise(Errc::degenerate_input, "max_depth must be >= 1");
  }
  std::vector<FileRecord> records;

  // (dir path, dir depth); children of a dir at depth d sit at d + 1.
  std::vector<std::pair<std::string, int>> pending;
  pending.emplace_back("", 0);
  while (!pending.empty()) {
    auto [dir, depth] = std::move(pending.back());
    pending.pop_back();
    std::vector<FileMetadata> entries;
    try {
      entries = vfs.list_dir(dir);
    } catch (const Error& e) {
      // an unreadable subdirectory is skipped, not fatal; root problems are
      if (depth > 0 && e.code() == Errc::permission_denied) continue;
      throw;
    }
    for (FileMetadata& meta : entries) {
      const std::string_view name = basename_of(meta.path);
      if (!config.follow_hidden && !name.empty() && name.front() == '.') continue;
      switch (meta.kind) {
        case FileKind::directory:
          if (config.prune_dirs.contains(std::string(name))) break;
          if (depth + 1 < config.max_depth) {
            pending.emplace_back(meta.path, depth + 1);
          }
          // a directory at max_depth is seen but not listed: its children
          // would exceed the limit
          break;
        case FileKind::file: {
          FileRecord record;
          record.extension = extension_of(meta.path);
          record.metadata = std::move(meta);
          record.depth = depth + 1;
          records.push_back(std::move(record));
          break;
        }
        case FileKind::symlink:
          break;  // recorded by the backend, never followed, never emitted
      }
    }
  }

  std::sort(records.begin(), records.end(), [](const FileRecord& a, const FileRecord& b) {
    return a.metadata.path < b.metadata.path;
  });
  return records;
}

}  // namespace ctxgate

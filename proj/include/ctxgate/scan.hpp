#pragma once

#include <set>
#include <string>
#include <vector>

#include "ctxgate/vfs.hpp"

namespace ctxgate {

struct ScanConfig {
  // Depth counts path components below the root; root children sit at 1.
  int max_depth = 20;
  // Matched against the final path component of a directory; pruned
  // directories are never listed and never consume depth.
  std::set<std::string> prune_dirs = {"node_modules", ".git", "__pycache__"};
  // Dot-prefixed entries are kept by default.
  bool follow_hidden = true;
};

struct FileRecord {
  FileMetadata metadata;
  int depth = 0;
  std::string extension;  // lowercase suffix after the last dot, "" if none
};

std::string extension_of(std::string_view path);

// Single-pass traversal of the mounted tree: every non-pruned regular file
// at depth <= max_depth, sorted by path. Directories and symlinks are never
// emitted; symlinks are never followed.
std::vector<FileRecord> scan_repository(const Vfs& vfs, const ScanConfig& config = {});

}  // namespace ctxgate

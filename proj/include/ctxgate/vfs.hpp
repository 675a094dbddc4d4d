#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctxgate/error.hpp"

namespace ctxgate {

enum class FileKind { file, directory, symlink };

const char* file_kind_name(FileKind kind);

// One directory entry. Paths are repository-relative, '/'-separated,
// with no "." or ".." segments; the tree root is the empty string.
struct FileMetadata {
  std::string path;
  std::uint64_t size = 0;
  FileKind kind = FileKind::file;
};

// One file in a virtual tree. `prefix` holds leading bytes only; `content`
// holds the whole file and must match `size` exactly. A trailing '/' on the
// path declares an explicit (possibly empty) directory.
struct ManifestEntry {
  std::string path;
  std::uint64_t size = 0;
  std::optional<std::string> prefix;
  std::optional<std::string> content;
};

struct VirtualManifest {
  std::vector<ManifestEntry> entries;
};

// Read-traffic accounting for one mounted tree. Counters only ever grow;
// updates are atomic so concurrent scans stay exact.
class IoCounters {
 public:
  void record_stat() { stat_calls_.fetch_add(1, std::memory_order_relaxed); }
  void record_dir_listing() { dir_listings_.fetch_add(1, std::memory_order_relaxed); }
  void record_content_read(std::string_view path, std::uint64_t bytes);

  std::uint64_t stat_calls() const { return stat_calls_.load(std::memory_order_relaxed); }
  std::uint64_t dir_listings() const { return dir_listings_.load(std::memory_order_relaxed); }
  std::uint64_t content_bytes_read() const { return bytes_total_.load(std::memory_order_relaxed); }
  std::uint64_t content_bytes_read(std::string_view path) const;

 private:
  std::atomic<std::uint64_t> stat_calls_{0};
  std::atomic<std::uint64_t> dir_listings_{0};
  std::atomic<std::uint64_t> bytes_total_{0};
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::uint64_t> bytes_per_file_;
};

// Filesystem abstraction every scan and filter runs against. Implementations
// are read-only after construction and safe for concurrent callers.
//
// Accounting contract (identical across backends, so reports from a real
// tree and from its manifest twin compare byte-for-byte):
//   stat()        +1 stat_call
//   list_dir()    +1 dir_listing
//   read_prefix() +min(limit, size) content bytes
class Vfs {
 public:
  virtual ~Vfs() = default;

  // Metadata lookup; never reads file content.
  virtual FileMetadata stat(std::string_view path) const = 0;

  // Children of a directory, sorted lexicographically by path (byte-wise).
  virtual std::vector<FileMetadata> list_dir(std::string_view path) const = 0;

  // First min(limit, size) bytes of a file, from offset 0. limit must be > 0.
  virtual std::string read_prefix(std::string_view path, std::uint64_t limit) const = 0;

  const IoCounters& counters() const { return counters_; }

 protected:
  mutable IoCounters counters_;
};

// In-memory tree mounted from a VirtualManifest. Never touches the real
// filesystem: lookups resolve against tables built at mount time.
// Reading a file whose manifest carries neither a sufficient prefix nor full
// content raises missing_content -- that is a test-authoring bug, not an
// unreadable file.
class MemoryVfs : public Vfs {
 public:
  explicit MemoryVfs(const VirtualManifest& manifest);

  FileMetadata stat(std::string_view path) const override;
  std::vector<FileMetadata> list_dir(std::string_view path) const override;
  std::string read_prefix(std::string_view path, std::uint64_t limit) const override;

 private:
  struct Node {
    FileMetadata meta;
    std::optional<std::string> prefix;
    std::optional<std::string> content;
  };

  const Node& lookup(std::string_view path) const;

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::size_t>> children_;
};

// Real-filesystem backend rooted at a directory. Construction validates the
// root (root_not_found / root_not_a_directory). Symlinks are reported with
// their own kind and never followed.
class RealVfs : public Vfs {
 public:
  explicit RealVfs(std::string root);

  FileMetadata stat(std::string_view path) const override;
  std::vector<FileMetadata> list_dir(std::string_view path) const override;
  std::string read_prefix(std::string_view path, std::uint64_t limit) const override;

  const std::string& root() const { return root_; }

  // Global count of real-filesystem operations performed by any RealVfs.
  // Zero-disk-I/O tests assert this stays flat while a MemoryVfs suite runs.
  static std::uint64_t fs_op_count();

 private:
  std::string root_;
};

// Manifest interchange: JSON array of
//   {"path": str, "size": int, "prefix_b64": str?, "content_b64": str?}
VirtualManifest parse_manifest(std::string_view json_text);
VirtualManifest load_manifest(const std::string& file_path);
std::string manifest_to_json(const VirtualManifest& manifest);

// Snapshot of a mounted tree as a manifest. Files at or below content_limit
// bytes are captured whole; larger files keep a content_limit-byte prefix.
VirtualManifest manifest_from_tree(const Vfs& vfs, std::uint64_t content_limit);

}  // namespace ctxgate

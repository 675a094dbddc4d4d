#include "ctxgate/vfs.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <utility>

#include "base64.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace ctxgate {

namespace {

// Strips "./" and a trailing '/' so lookups tolerate the common spellings.
std::string normalize_lookup(std::string_view path) {
  while (path.substr(0, 2) == "./") path.remove_prefix(2);
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);
  if (path == ".") return "";
  return std::string(path);
}

bool valid_relative_path(std::string_view path) {
  if (path.empty()) return false;
  if (path.front() == '/' || path.back() == '/') return false;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    std::string_view seg = path.substr(start, end - start);
    if (seg.empty() || seg == "." || seg == "..") return false;
    start = end + 1;
    if (end == path.size()) break;
  }
  return true;
}

std::string parent_of(std::string_view path) {
  std::size_t slash = path.rfind('/');
  if (slash == std::string_view::npos) return "";
  return std::string(path.substr(0, slash));
}

}  // namespace

const char* file_kind_name(FileKind kind) {
  switch (kind) {
    case FileKind::file: return "file";
    case FileKind::directory: return "directory";
    case FileKind::symlink: return "symlink";
  }
  return "unknown";
}

void IoCounters::record_content_read(std::string_view path, std::uint64_t bytes) {
  bytes_total_.fetch_add(bytes, std::memory_order_relaxed);
  std::lock_guard lock(mutex_);
  bytes_per_file_[std::string(path)] += bytes;
}

std::uint64_t IoCounters::content_bytes_read(std::string_view path) const {
  std::lock_guard lock(mutex_);
  auto it = bytes_per_file_.find(std::string(path));
  return it == bytes_per_file_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// MemoryVfs

MemoryVfs::MemoryVfs(const VirtualManifest& manifest) {
  auto add_node = [&](Node node) -> std::size_t {
    auto [it, inserted] = index_.try_emplace(node.meta.path, nodes_.size());
    if (!inserted) {
      raise(Errc::duplicate_path, "manifest path appears twice: '" + node.meta.path + "'");
    }
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
  };

  // Root directory always exists, even for an empty manifest.
  add_node(Node{FileMetadata{"", 0, FileKind::directory}, {}, {}});

  for (const ManifestEntry& entry : manifest.entries) {
    const bool is_dir = !entry.path.empty() && entry.path.back() == '/';
    std::string path = entry.path;
    while (!path.empty() && path.back() == '/') path.pop_back();
    if (!valid_relative_path(path)) {
      raise(Errc::malformed_manifest, "invalid path: '" + entry.path + "'");
    }
    if (is_dir) {
      if (entry.prefix || entry.content) {
        raise(Errc::malformed_manifest, "directory entry '" + entry.path + "' carries content");
      }
      add_node(Node{FileMetadata{path, 0, FileKind::directory}, {}, {}});
      continue;
    }
    if (entry.content && entry.content->size() != entry.size) {
      raise(Errc::malformed_manifest, "content length does not match size for '" + path + "'");
    }
    if (entry.prefix && entry.prefix->size() > entry.size) {
      raise(Errc::malformed_manifest, "prefix longer than size for '" + path + "'");
    }
    add_node(Node{FileMetadata{path, entry.size, FileKind::file}, entry.prefix, entry.content});
  }

  // Derive every parent directory.
  const std::size_t declared = nodes_.size();
  for (std::size_t i = 1; i < declared; ++i) {
    std::string parent = parent_of(nodes_[i].meta.path);
    while (!parent.empty() && !index_.contains(parent)) {
      add_node(Node{FileMetadata{parent, 0, FileKind::directory}, {}, {}});
      parent = parent_of(parent);
    }
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const std::string parent = parent_of(nodes_[i].meta.path);
    const auto it = index_.find(parent);
    if (nodes_[it->second].meta.kind != FileKind::directory) {
      raise(Errc::malformed_manifest, "file '" + parent + "' used as a directory");
    }
    children_[parent].push_back(i);
  }
  children_.try_emplace("");  // empty root lists as []

  for (auto& [dir, kids] : children_) {
    std::sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
      return nodes_[a].meta.path < nodes_[b].meta.path;
    });
  }
}

const MemoryVfs::Node& MemoryVfs::lookup(std::string_view path) const {
  const auto it = index_.find(normalize_lookup(path));
  if (it == index_.end()) {
    raise(Errc::not_found, "no such path: '" + std::string(path) + "'");
  }
  return nodes_[it->second];
}

FileMetadata MemoryVfs::stat(std::string_view path) const {
  const Node& node = lookup(path);
  counters_.record_stat();
  return node.meta;
}

std::vector<FileMetadata> MemoryVfs::list_dir(std::string_view path) const {
  const Node& node = lookup(path);
  if (node.meta.kind != FileKind::directory) {
    raise(Errc::not_a_directory, "'" + std::string(path) + "' is not a directory");
  }
  counters_.record_dir_listing();
  std::vector<FileMetadata> out;
  const auto it = children_.find(node.meta.path);
  if (it != children_.end()) {
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(nodes_[idx].meta);
  }
  return out;
}

std::string MemoryVfs::read_prefix(std::string_view path, std::uint64_t limit) const {
  const Node& node = lookup(path);
  if (node.meta.kind != FileKind::file) {
    raise(Errc::not_found, "'" + std::string(path) + "' is not a regular file");
  }
  const std::uint64_t want = std::min(limit, node.meta.size);
  if (want == 0) return {};
  const std::string* source = nullptr;
  if (node.content) {
    source = &*node.content;
  } else if (node.prefix && node.prefix->size() >= want) {
    source = &*node.prefix;
  } else {
    raise(Errc::missing_content, "manifest entry '" + node.meta.path + "' lacks the " +
                                     std::to_string(want) + " content bytes this read needs");
  }
  counters_.record_content_read(node.meta.path, want);
  return source->substr(0, static_cast<std::size_t>(want));
}

// ---------------------------------------------------------------------------
// RealVfs

namespace {
std::atomic<std::uint64_t> g_real_fs_ops{0};

FileKind kind_from_status(const fs::file_status& st) {
  if (st.type() == fs::file_type::symlink) return FileKind::symlink;
  if (st.type() == fs::file_type::directory) return FileKind::directory;
  return FileKind::file;
}
}  // namespace

std::uint64_t RealVfs::fs_op_count() { return g_real_fs_ops.load(std::memory_order_relaxed); }

RealVfs::RealVfs(std::string root) : root_(std::move(root)) {
  g_real_fs_ops.fetch_add(1, std::memory_order_relaxed);
  std::error_code ec;
  const fs::file_status st = fs::status(root_, ec);
  if (ec || st.type() == fs::file_type::not_found) {
    raise(Errc::root_not_found, "root does not exist: '" + root_ + "'");
  }
  if (st.type() != fs::file_type::directory) {
    raise(Errc::root_not_a_directory, "root is not a directory: '" + root_ + "'");
  }
}

FileMetadata RealVfs::stat(std::string_view path) const {
  g_real_fs_ops.fetch_add(1, std::memory_order_relaxed);
  const std::string rel = normalize_lookup(path);
  const fs::path full = rel.empty() ? fs::path(root_) : fs::path(root_) / rel;
  std::error_code ec;
  const fs::file_status st = fs::symlink_status(full, ec);
  if (ec == std::errc::permission_denied) {
    raise(Errc::permission_denied, "stat '" + rel + "'");
  }
  if (ec || st.type() == fs::file_type::not_found) {
    raise(Errc::not_found, "no such path: '" + rel + "'");
  }
  FileMetadata meta{rel, 0, kind_from_status(st)};
  if (meta.kind == FileKind::file) {
    const std::uint64_t size = fs::file_size(full, ec);
    meta.size = ec ? 0 : size;
  }
  counters_.record_stat();
  return meta;
}

std::vector<FileMetadata> RealVfs::list_dir(std::string_view path) const {
  g_real_fs_ops.fetch_add(1, std::memory_order_relaxed);
  const std::string rel = normalize_lookup(path);
  const fs::path full = rel.empty() ? fs::path(root_) : fs::path(root_) / rel;
  std::error_code ec;
  const fs::file_status st = fs::symlink_status(full, ec);
  if (ec == std::errc::permission_denied) raise(Errc::permission_denied, "list '" + rel + "'");
  if (ec || st.type() == fs::file_type::not_found) raise(Errc::not_found, "no such path: '" + rel + "'");
  if (st.type() != fs::file_type::directory) {
    raise(Errc::not_a_directory, "'" + rel + "' is not a directory");
  }

  std::vector<FileMetadata> out;
  fs::directory_iterator it(full, fs::directory_options::none, ec);
  if (ec == std::errc::permission_denied) raise(Errc::permission_denied, "list '" + rel + "'");
  if (ec) raise(Errc::not_found, "cannot list '" + rel + "': " + ec.message());
  for (const fs::directory_entry& entry : it) {
    std::error_code entry_ec;
    const fs::file_status est = entry.symlink_status(entry_ec);
    if (entry_ec) continue;  // vanished or unreadable entry; scan stays non-blocking
    const std::string name = entry.path().filename().string();
    FileMetadata meta{rel.empty() ? name : rel + "/" + name, 0, kind_from_status(est)};
    if (meta.kind == FileKind::file) {
      const std::uint64_t size = entry.file_size(entry_ec);
      meta.size = entry_ec ? 0 : size;
    }
    out.push_back(std::move(meta));
  }
  std::sort(out.begin(), out.end(),
            [](const FileMetadata& a, const FileMetadata& b) { return a.path < b.path; });
  counters_.record_dir_listing();
  return out;
}

std::string RealVfs::read_prefix(std::string_view path, std::uint64_t limit) const {
  g_real_fs_ops.fetch_add(1, std::memory_order_relaxed);
  const std::string rel = normalize_lookup(path);
  const fs::path full = fs::path(root_) / rel;

  std::FILE* f = std::fopen(full.c_str(), "rb");
  if (!f) {
    if (errno == EACCES || errno == EPERM) raise(Errc::permission_denied, "read '" + rel + "'");
    raise(Errc::not_found, "cannot open '" + rel + "'");
  }
  std::error_code ec;
  const std::uint64_t size = fs::file_size(full, ec);
  const std::uint64_t want = ec ? 0 : std::min(limit, size);
  std::string buf(static_cast<std::size_t>(want), '\0');
  std::size_t got = want == 0 ? 0 : std::fread(buf.data(), 1, buf.size(), f);
  std::fclose(f);
  buf.resize(got);
  if (got > 0) counters_.record_content_read(rel, got);
  return buf;
}

// ---------------------------------------------------------------------------
// Manifest interchange

VirtualManifest parse_manifest(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(Errc::malformed_manifest, e.what());
  }
  if (!doc.is_array()) raise(Errc::malformed_manifest, "top-level value must be an array");

  VirtualManifest manifest;
  manifest.entries.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    if (!item.is_object() || !item.contains("path") || !item["path"].is_string() ||
        !item.contains("size") || !item["size"].is_number_integer() ||
        item["size"].get<std::int64_t>() < 0) {
      raise(Errc::malformed_manifest,
            "entry " + std::to_string(i) + " needs a string path and a non-negative size");
    }
    ManifestEntry entry;
    entry.path = item["path"].get<std::string>();
    entry.size = item["size"].get<std::uint64_t>();
    auto decode_field = [&](const char* key) -> std::optional<std::string> {
      if (!item.contains(key)) return std::nullopt;
      if (!item[key].is_string()) {
        raise(Errc::malformed_manifest, std::string(key) + " must be a string in entry '" + entry.path + "'");
      }
      try {
        return detail::base64_decode(item[key].get<std::string>());
      } catch (const std::invalid_argument& e) {
        raise(Errc::malformed_manifest, std::string(e.what()) + " in entry '" + entry.path + "'");
      }
    };
    entry.prefix = decode_field("prefix_b64");
    entry.content = decode_field("content_b64");
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

VirtualManifest load_manifest(const std::string& file_path) {
  std::ifstream in(file_path, std::ios::binary);
  if (!in) raise(Errc::not_found, "cannot open manifest '" + file_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest(text);
}

std::string manifest_to_json(const VirtualManifest& manifest) {
  nlohmann::json doc = nlohmann::json::array();
  for (const ManifestEntry& entry : manifest.entries) {
    nlohmann::json item;
    item["path"] = entry.path;
    item["size"] = entry.size;
    if (entry.prefix) item["prefix_b64"] = detail::base64_encode(*entry.prefix);
    if (entry.content) item["content_b64"] = detail::base64_encode(*entry.content);
    doc.push_back(std::move(item));
  }
  return doc.dump(1);
}

VirtualManifest manifest_from_tree(const Vfs& vfs, std::uint64_t content_limit) {
  VirtualManifest manifest;
  std::vector<std::string> pending{""};
  while (!pending.empty()) {
    const std::string dir = std::move(pending.back());
    pending.pop_back();
    const std::vector<FileMetadata> entries = vfs.list_dir(dir);
    if (entries.empty() && !dir.empty()) {
      manifest.entries.push_back(ManifestEntry{dir + "/", 0, {}, {}});
      continue;
    }
    for (const FileMetadata& meta : entries) {
      if (meta.kind == FileKind::directory) {
        pending.push_back(meta.path);
      } else if (meta.kind == FileKind::file) {
        ManifestEntry entry{meta.path, meta.size, {}, {}};
        if (meta.size > 0) {
          std::string bytes = vfs.read_prefix(meta.path, content_limit);
          if (bytes.size() == meta.size) {
            entry.content = std::move(bytes);
          } else {
            entry.prefix = std::move(bytes);
          }
        }
        manifest.entries.push_back(std::move(entry));
      }
      // symlinks have no manifest representation and are dropped
    }
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return manifest;
}

}  // namespace ctxgate

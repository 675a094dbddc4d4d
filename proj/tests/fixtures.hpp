#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ctxgate/vfs.hpp"

namespace ctxgate::testing {

// File whose bytes are all present in the manifest.
inline ManifestEntry text_file(std::string path, std::string content) {
  ManifestEntry entry;
  entry.path = std::move(path);
  entry.size = content.size();
  entry.content = std::move(content);
  return entry;
}

// Large file represented by a declared size plus a leading prefix.
inline ManifestEntry sized_file(std::string path, std::uint64_t size, std::string prefix = {}) {
  ManifestEntry entry;
  entry.path = std::move(path);
  entry.size = size;
  if (!prefix.empty()) entry.prefix = std::move(prefix);
  return entry;
}

inline std::string repeat_line(std::string_view line, std::size_t count) {
  std::string out;
  out.reserve((line.size() + 1) * count);
  for (std::size_t i = 0; i < count; ++i) {
    out += line;
    out += '\n';
  }
  return out;
}

inline std::string source_prefix(std::size_t bytes) {
  static constexpr std::string_view kLine = "def handler(value):\n    return value + 1\n";
  std::string out;
  while (out.size() < bytes) out += kLine;
  out.resize(bytes);
  return out;
}

inline std::string csv_prefix(std::size_t bytes) {
  std::string out;
  std::uint32_t v = 12345;
  while (out.size() < bytes) {
    out += std::to_string(v % 100000);
    out += (v % 7 == 0) ? '\n' : ',';
    v = v * 1664525 + 1013904223;
  }
  out.resize(bytes);
  return out;
}

// Random manifests for property tests. Mixes the archetypes the filters
// care about: source text, csv numbers, binary blobs, minified lines, big
// tails, empty files. Every file carries a prefix long enough for any gate
// read up to `prefix_budget`.
struct ManifestGenerator {
  std::mt19937_64 rng;
  std::uint64_t prefix_budget = 4'096;

  explicit ManifestGenerator(std::uint64_t seed) : rng(seed) {}

  VirtualManifest next(std::size_t max_files = 40) {
    VirtualManifest manifest;
    std::uniform_int_distribution<std::size_t> count_dist(0, max_files);
    const std::size_t count = count_dist(rng);
    for (std::size_t i = 0; i < count; ++i) {
      manifest.entries.push_back(random_entry(i));
    }
    return manifest;
  }

  ManifestEntry random_entry(std::size_t index) {
    std::uniform_int_distribution<int> kind_dist(0, 6);
    std::uniform_int_distribution<int> depth_dist(0, 3);
    std::string path;
    const int depth = depth_dist(rng);
    for (int d = 0; d < depth; ++d) path += "d" + std::to_string(d) + "/";

    const int kind = kind_dist(rng);
    std::uniform_int_distribution<std::uint64_t> small(1, 8'000);
    std::uniform_int_distribution<std::uint64_t> large(1'000'000, 20'000'000);
    switch (kind) {
      case 0: {  // small source file
        const std::uint64_t size = small(rng);
        return sized_file(path + "src" + std::to_string(index) + ".py", size,
                          source_prefix(clamp_prefix(size)));
      }
      case 1: {  // csv data
        const std::uint64_t size = small(rng) * 4;
        return sized_file(path + "data" + std::to_string(index) + ".csv", size,
                          csv_prefix(clamp_prefix(size)));
      }
      case 2: {  // binary blob with a magic prefix
        const std::uint64_t size = small(rng) * 64;
        std::string prefix = "\x89PNG\r\n\x1a\n";
        prefix += csv_prefix(clamp_prefix(size) > 8 ? clamp_prefix(size) - 8 : 0);
        prefix.resize(clamp_prefix(size));
        return sized_file(path + "img" + std::to_string(index) + ".png", size, prefix);
      }
      case 3: {  // minified single line
        const std::uint64_t size = small(rng) * 16 + 600;
        std::string prefix(clamp_prefix(size), 'x');
        return sized_file(path + "bundle" + std::to_string(index) + ".js", size, prefix);
      }
      case 4: {  // large tail file
        const std::uint64_t size = large(rng);
        return sized_file(path + "weights" + std::to_string(index) + ".pt", size,
                          csv_prefix(clamp_prefix(size)));
      }
      case 5:  // empty file
        return text_file(path + "empty" + std::to_string(index), "");
      default: {  // plain text without extension
        const std::uint64_t size = small(rng);
        return sized_file(path + "notes" + std::to_string(index), size,
                          source_prefix(clamp_prefix(size)));
      }
    }
  }

 private:
  std::size_t clamp_prefix(std::uint64_t size) const {
    return static_cast<std::size_t>(std::min(size, prefix_budget));
  }
};

}  // namespace ctxgate::testing

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctxgate/gitignore.hpp"
#include "ctxgate/scan.hpp"
#include "ctxgate/vfs.hpp"

namespace ctxgate {

enum class Verdict { allowed, flagged };

enum class FlagReason {
  none,
  size_exceeds_theta,
  blocked_extension,
  binary_signature,
  minified,
  gitignored,
  low_semantic_density,
  unreadable,
};

// Hybrid gates in evaluation order (ascending I/O cost: 0, 0, 8 B, 4 KB).
enum class GateId { size = 1, extension = 2, binary = 3, semantic = 4 };

enum class FilterId { none, gitignore, minified, binary, extension, size, semantic, hybrid };

const char* verdict_name(Verdict v);
const char* flag_reason_name(FlagReason r);
const char* gate_name(GateId g);
const char* filter_name(FilterId f);
std::optional<FilterId> filter_from_name(std::string_view name);

struct FilterDecision {
  Verdict verdict = Verdict::allowed;
  FlagReason reason = FlagReason::none;
  std::optional<GateId> triggering_gate;
  std::uint64_t content_bytes_read = 0;

  bool flagged() const { return verdict == Verdict::flagged; }
};

// Leading-byte signature, 1..8 bytes.
struct MagicSignature {
  std::string bytes;
  std::string format;
};

std::vector<MagicSignature> default_magic_table();
std::set<std::string> default_extension_blocklist();
std::vector<std::string> default_semantic_keywords();

struct FilterConfig {
  std::uint64_t theta = 1'048'576;
  std::set<std::string> extension_blocklist = default_extension_blocklist();
  std::vector<MagicSignature> magic_table = default_magic_table();
  double min_avg_line_length = 500.0;
  std::uint64_t minified_prefix = 65'536;
  std::uint64_t semantic_prefix = 4'096;
  std::vector<std::string> semantic_keywords = default_semantic_keywords();
  double semantic_density_threshold = 0.05;

  void validate() const;  // raises degenerate_input on a broken config
};

// Config file is a JSON object mirroring the field names; absent fields keep
// their defaults. Signatures appear as {"signature_hex", "format"} pairs.
FilterConfig filter_config_from_json(std::string_view json_text);
std::string filter_config_to_json(const FilterConfig& config);

// Paths forced back into the allowed set, applied after every filter.
// Patterns use the same glob syntax as the ignore engine.
struct OverrideSet {
  std::vector<std::string> include_patterns;

  bool matches(std::string_view path) const;
  static OverrideSet parse(std::string_view text);  // one pattern per line, '#' comments
};

FilterDecision no_filter(const FileRecord& record);
FilterDecision size_filter(const FileRecord& record, std::uint64_t theta);
FilterDecision extension_filter(const FileRecord& record, const std::set<std::string>& blocklist);
FilterDecision binary_filter(const Vfs& vfs, const FileRecord& record,
                             const std::vector<MagicSignature>& magic_table);
FilterDecision minified_filter(const Vfs& vfs, const FileRecord& record,
                               const FilterConfig& config);
FilterDecision gitignore_filter(const FileRecord& record, const GitignoreMatcher& patterns);
FilterDecision semantic_filter(const Vfs& vfs, const FileRecord& record,
                               const FilterConfig& config);

// Gate chain Size -> Extension -> Binary -> Semantic with early exit on the
// first trigger. Byte accounting accumulates the reads actually performed,
// bounded by 8 + 4096.
FilterDecision hybrid_filter(const Vfs& vfs, const FileRecord& record, const FilterConfig& config);

FilterDecision apply_overrides(FilterDecision decision, const FileRecord& record,
                               const OverrideSet& overrides);

// Dispatch by filter id. The gitignore matcher is only consulted when
// filter_id == FilterId::gitignore.
FilterDecision evaluate_filter(const Vfs& vfs, FilterId filter_id, const FileRecord& record,
                               const FilterConfig& config, const GitignoreMatcher& gitignore);

}  // namespace ctxgate

#include "ctxgate/filters.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "json.hpp"

namespace ctxgate {

const char* verdict_name(Verdict v) {
  return v == Verdict::allowed ? "allowed" : "flagged";
}

const char* flag_reason_name(FlagReason r) {
  switch (r) {
    case FlagReason::none: return "none";
    case FlagReason::size_exceeds_theta: return "size_exceeds_theta";
    case FlagReason::blocked_extension: return "blocked_extension";
    case FlagReason::binary_signature: return "binary_signature";
    case FlagReason::minified: return "minified";
    case FlagReason::gitignored: return "gitignored";
    case FlagReason::low_semantic_density: return "low_semantic_density";
    case FlagReason::unreadable: return "unreadable";
  }
  return "unknown";
}

const char* gate_name(GateId g) {
  switch (g) {
    case GateId::size: return "size";
    case GateId::extension: return "extension";
    case GateId::binary: return "binary";
    case GateId::semantic: return "semantic";
  }
  return "unknown";
}

const char* filter_name(FilterId f) {
  switch (f) {
    case FilterId::none: return "none";
    case FilterId::gitignore: return "gitignore";
    case FilterId::minified: return "minified";
    case FilterId::binary: return "binary";
    case FilterId::extension: return "extension";
    case FilterId::size: return "size";
    case FilterId::semantic: return "semantic";
    case FilterId::hybrid: return "hybrid";
  }
  return "unknown";
}

std::optional<FilterId> filter_from_name(std::string_view name) {
  for (FilterId f : {FilterId::none, FilterId::gitignore, FilterId::minified, FilterId::binary,
                     FilterId::extension, FilterId::size, FilterId::semantic, FilterId::hybrid}) {
    if (name == filter_name(f)) return f;
  }
  return std::nullopt;
}

std::vector<MagicSignature> default_magic_table() {
  using namespace std::string_literals;
  return {
      {"\x89PNG\r\n\x1a\n"s, "png"},
      {"\xFF\xD8\xFF"s, "jpeg"},
      {"GIF8"s, "gif"},
      {"%PDF-"s, "pdf"},
      {"PK\x03\x04"s, "zip"},
      {"\x1F\x8B"s, "gzip"},
      {"SQLite f"s, "sqlite"},
      {"\x7F"
       "ELF"s,
       "elf"},
      {"\xCF\xFA\xED\xFE"s, "macho64"},
      {"\x80"s, "pickle"},  // PROTO opcode, protocol 2 and above
      {"\x89HDF\r\n\x1a\n"s, "hdf5"},
  };
}

std::set<std::string> default_extension_blocklist() {
  return {"csv", "tsv", "h5",  "hdf5", "pkl",    "pickle", "sqlite", "db",  "log",
          "bin", "onnx", "pt", "npy",  "npz",    "parquet", "min.js", "map"};
}

std::vector<std::string> default_semantic_keywords() {
  return {"function", "class",     "import",  "return", "if",      "else",   "def",
          "for",      "while",     "const",   "let",    "var",     "public", "private",
          "static",   "void",      "int",     "string", "bool",    "true",   "false",
          "null",     "new",       "this",    "self",   "include", "namespace", "struct",
          "enum",     "template",  "package", "interface", "func", "type",   "switch",
          "case",     "break",     "continue", "try",   "catch",   "except", "raise",
          "throw",    "lambda",    "async",   "await",  "module",  "require", "export",
          "from"};
}

void FilterConfig::validate() const {
  if (theta == 0) raise(Errc::degenerate_input, "theta must be > 0");
  if (minified_prefix == 0 || semantic_prefix == 0) {
    raise(Errc::degenerate_input, "prefix budgets must be > 0");
  }
  if (semantic_keywords.empty()) {
    raise(Errc::degenerate_input, "semantic_keywords must be non-empty");
  }
  for (const MagicSignature& sig : magic_table) {
    if (sig.bytes.empty() || sig.bytes.size() > 8) {
      raise(Errc::degenerate_input, "magic signature '" + sig.format + "' must be 1-8 bytes");
    }
  }
}

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view basename_of(std::string_view path) {
  const std::size_t slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

FilterDecision flag(FlagReason reason, std::uint64_t bytes_read,
                    std::optional<GateId> gate = std::nullopt) {
  return FilterDecision{Verdict::flagged, reason, gate, bytes_read};
}

FilterDecision allow(std::uint64_t bytes_read) {
  return FilterDecision{Verdict::allowed, FlagReason::none, std::nullopt, bytes_read};
}

// Content read used by the reading filters: permission problems become an
// `unreadable` flag, while a manifest missing required bytes propagates --
// that one is a bug in the test fixture, not a property of the file.
std::optional<std::string> try_read(const Vfs& vfs, const FileRecord& record, std::uint64_t limit) {
  try {
    return vfs.read_prefix(record.metadata.path, limit);
  } catch (const Error& e) {
    if (e.code() == Errc::permission_denied || e.code() == Errc::not_found) return std::nullopt;
    throw;
  }
}

bool extension_blocked(const FileRecord& record, const std::set<std::string>& blocklist) {
  if (blocklist.contains(record.extension) && !record.extension.empty()) return true;
  // multi-dot entries like "min.js" match as filename suffixes
  const std::string name = to_lower(basename_of(record.metadata.path));
  for (const std::string& entry : blocklist) {
    if (entry.find('.') == std::string::npos) continue;
    if (name.size() > entry.size() && name.ends_with(entry) &&
        name[name.size() - entry.size() - 1] == '.') {
      return true;
    }
  }
  return false;
}

bool matches_magic(std::string_view prefix, const std::vector<MagicSignature>& table) {
  for (const MagicSignature& sig : table) {
    if (prefix.size() >= sig.bytes.size() && prefix.substr(0, sig.bytes.size()) == sig.bytes) {
      return true;
    }
  }
  return false;
}

double semantic_density(std::string_view text, const std::vector<std::string>& keywords,
                        std::uint64_t* word_count) {
  std::unordered_set<std::string> keyword_set(keywords.begin(), keywords.end());
  std::uint64_t words = 0;
  std::uint64_t hits = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalnum(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    ++words;
    if (keyword_set.contains(to_lower(text.substr(start, i - start)))) ++hits;
  }
  *word_count = words;
  return words == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(words);
}

}  // namespace

FilterDecision no_filter(const FileRecord&) { return allow(0); }

FilterDecision size_filter(const FileRecord& record, std::uint64_t theta) {
  if (record.metadata.size > theta) {
    return flag(FlagReason::size_exceeds_theta, 0);
  }
  return allow(0);
}

FilterDecision extension_filter(const FileRecord& record, const std::set<std::string>& blocklist) {
  if (extension_blocked(record, blocklist)) {
    return flag(FlagReason::blocked_extension, 0);
  }
  return allow(0);
}

FilterDecision binary_filter(const Vfs& vfs, const FileRecord& record,
                             const std::vector<MagicSignature>& magic_table) {
  const std::optional<std::string> prefix = try_read(vfs, record, 8);
  if (!prefix) return flag(FlagReason::unreadable, 0);
  if (matches_magic(*prefix, magic_table)) {
    return flag(FlagReason::binary_signature, prefix->size());
  }
  return allow(prefix->size());
}

FilterDecision minified_filter(const Vfs& vfs, const FileRecord& record,
                               const FilterConfig& config) {
  const std::optional<std::string> prefix = try_read(vfs, record, config.minified_prefix);
  if (!prefix) return flag(FlagReason::unreadable, 0);
  const std::uint64_t newlines = std::count(prefix->begin(), prefix->end(), '\n');
  const std::uint64_t lines = std::max<std::uint64_t>(newlines, 1);
  const double avg_line = static_cast<double>(prefix->size()) / static_cast<double>(lines);
  if (avg_line > config.min_avg_line_length) {
    return flag(FlagReason::minified, prefix->size());
  }
  return allow(prefix->size());
}

FilterDecision gitignore_filter(const FileRecord& record, const GitignoreMatcher& patterns) {
  if (patterns.ignored(record.metadata.path)) {
    return flag(FlagReason::gitignored, 0);
  }
  return allow(0);
}

FilterDecision semantic_filter(const Vfs& vfs, const FileRecord& record,
                               const FilterConfig& config) {
  const std::optional<std::string> prefix = try_read(vfs, record, config.semantic_prefix);
  if (!prefix) return flag(FlagReason::unreadable, 0);
  std::uint64_t words = 0;
  const double density = semantic_density(*prefix, config.semantic_keywords, &words);
  // a prefix with no words at all carries no linguistic signal
  if (words == 0 || density < config.semantic_density_threshold) {
    return flag(FlagReason::low_semantic_density, prefix->size());
  }
  return allow(prefix->size());
}

FilterDecision hybrid_filter(const Vfs& vfs, const FileRecord& record,
                             const FilterConfig& config) {
  std::uint64_t bytes = 0;

  FilterDecision gate = size_filter(record, config.theta);
  if (gate.flagged()) return flag(gate.reason, bytes, GateId::size);

  gate = extension_filter(record, config.extension_blocklist);
  if (gate.flagged()) return flag(gate.reason, bytes, GateId::extension);

  gate = binary_filter(vfs, record, config.magic_table);
  bytes += gate.content_bytes_read;
  if (gate.flagged()) return flag(gate.reason, bytes, GateId::binary);

  gate = semantic_filter(vfs, record, config);
  bytes += gate.content_bytes_read;
  if (gate.flagged()) return flag(gate.reason, bytes, GateId::semantic);

  return allow(bytes);
}

FilterDecision apply_overrides(FilterDecision decision, const FileRecord& record,
                               const OverrideSet& overrides) {
  if (decision.flagged() && overrides.matches(record.metadata.path)) {
    decision.verdict = Verdict::allowed;
    decision.reason = FlagReason::none;
    decision.triggering_gate.reset();
  }
  return decision;
}

FilterDecision evaluate_filter(const Vfs& vfs, FilterId filter_id, const FileRecord& record,
                               const FilterConfig& config, const GitignoreMatcher& gitignore) {
  switch (filter_id) {
    case FilterId::none: return no_filter(record);
    case FilterId::gitignore: return gitignore_filter(record, gitignore);
    case FilterId::minified: return minified_filter(vfs, record, config);
    case FilterId::binary: return binary_filter(vfs, record, config.magic_table);
    case FilterId::extension: return extension_filter(record, config.extension_blocklist);
    case FilterId::size: return size_filter(record, config.theta);
    case FilterId::semantic: return semantic_filter(vfs, record, config);
    case FilterId::hybrid: return hybrid_filter(vfs, record, config);
  }
  return no_filter(record);
}

bool OverrideSet::matches(std::string_view path) const {
  for (const std::string& pattern : include_patterns) {
    if (pattern == path) return true;
    if (glob_match(pattern, path)) return true;
    // slash-free patterns also match by basename, like the ignore engine
    if (pattern.find('/') == std::string::npos) {
      const std::size_t slash = path.rfind('/');
      if (slash != std::string_view::npos && glob_match(pattern, path.substr(slash + 1))) {
        return true;
      }
    }
  }
  return false;
}

OverrideSet OverrideSet::parse(std::string_view text) {
  OverrideSet set;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    const bool at_end = end == text.size();
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') set.include_patterns.emplace_back(line);
    if (at_end) break;
  }
  return set;
}

// ---------------------------------------------------------------------------
// Config file round-trip

namespace {

std::string hex_encode(std::string_view bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

std::string hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) raise(Errc::degenerate_input, "odd-length signature_hex");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    raise(Errc::degenerate_input, "invalid signature_hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

}  // namespace

FilterConfig filter_config_from_json(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(Errc::degenerate_input, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) raise(Errc::degenerate_input, "config must be a JSON object");

  FilterConfig config;
  if (doc.contains("theta")) config.theta = doc["theta"].get<std::uint64_t>();
  if (doc.contains("extension_blocklist")) {
    config.extension_blocklist.clear();
    for (const auto& e : doc["extension_blocklist"]) {
      config.extension_blocklist.insert(to_lower(e.get<std::string>()));
    }
  }
  if (doc.contains("magic_table")) {
    config.magic_table.clear();
    for (const auto& e : doc["magic_table"]) {
      config.magic_table.push_back(
          MagicSignature{hex_decode(e.at("signature_hex").get<std::string>()),
                         e.value("format", std::string("unnamed"))});
    }
  }
  if (doc.contains("min_avg_line_length")) {
    config.min_avg_line_length = doc["min_avg_line_length"].get<double>();
  }
  if (doc.contains("minified_prefix")) config.minified_prefix = doc["minified_prefix"].get<std::uint64_t>();
  if (doc.contains("semantic_prefix")) config.semantic_prefix = doc["semantic_prefix"].get<std::uint64_t>();
  if (doc.contains("semantic_keywords")) {
    config.semantic_keywords.clear();
    for (const auto& e : doc["semantic_keywords"]) {
      config.semantic_keywords.push_back(to_lower(e.get<std::string>()));
    }
  }
  if (doc.contains("semantic_density_threshold")) {
    config.semantic_density_threshold = doc["semantic_density_threshold"].get<double>();
  }
  config.validate();
  return config;
}

std::string filter_config_to_json(const FilterConfig& config) {
  nlohmann::json doc;
  doc["theta"] = config.theta;
  doc["extension_blocklist"] = config.extension_blocklist;
  doc["magic_table"] = nlohmann::json::array();
  for (const MagicSignature& sig : config.magic_table) {
    doc["magic_table"].push_back({{"signature_hex", hex_encode(sig.bytes)}, {"format", sig.format}});
  }
  doc["min_avg_line_length"] = config.min_avg_line_length;
  doc["minified_prefix"] = config.minified_prefix;
  doc["semantic_prefix"] = config.semantic_prefix;
  doc["semantic_keywords"] = config.semantic_keywords;
  doc["semantic_density_threshold"] = config.semantic_density_threshold;
  return doc.dump(1);
}

}  // namespace ctxgate

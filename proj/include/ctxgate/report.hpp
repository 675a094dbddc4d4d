#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctxgate/analysis.hpp"
#include "ctxgate/filters.hpp"
#include "ctxgate/scan.hpp"
#include "ctxgate/tokens.hpp"
#include "ctxgate/vfs.hpp"

namespace ctxgate {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

struct ReportRow {
  std::string path;
  std::uint64_t size = 0;
  Verdict verdict = Verdict::allowed;
  FlagReason reason = FlagReason::none;
  std::optional<GateId> gate;
  std::uint64_t tokens = 0;
  TokenMethod method = TokenMethod::heuristic;
  std::uint64_t content_bytes_read = 0;
  double latency_ms = 0;  // volatile; excluded from row serialization
};

struct LatencyStats {
  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
};

struct IoSnapshot {
  std::uint64_t stat_calls = 0;
  std::uint64_t dir_listings = 0;
  std::uint64_t content_bytes_read = 0;
};

struct ScanReport {
  int schema = kReportSchema;
  std::string tool_version = kToolVersion;
  std::string source_kind = "scan";  // "scan" or "replay"
  std::string source;                // repo root or manifest id
  FilterId filter_id = FilterId::hybrid;
  FilterConfig config;
  std::vector<ReportRow> rows;  // sorted by path
  ReductionResult reduction;
  BucketHistogram histogram;
  LatencyStats latency;
  IoSnapshot io;
  std::optional<std::uint64_t> budget;
  std::optional<PackResult> selection;
  std::optional<FprResult> fpr;
};

// Full pipeline over scanned records: decide (post-override), estimate,
// aggregate. Per-file latency covers the filter decision only. For the
// gitignore filter, patterns come from the tree's root .gitignore.
ScanReport run_filter(const Vfs& vfs, const std::vector<FileRecord>& records, FilterId filter_id,
                      const FilterConfig& config, const OverrideSet& overrides = {},
                      const TokenizerPort* tokenizer = nullptr);

// Applies pack_context to the allowed rows and attaches the selection.
void attach_selection(ScanReport& report, const std::vector<FileRecord>& records,
                      const BudgetConfig& budget, PackOrder order = PackOrder::path_ascending);

// FPR of the report's flagged set against relevance labels. Leaves the
// report untouched (and returns false) when nothing is flagged.
bool attach_fpr(ScanReport& report, const std::set<std::string>& relevant);

// JSON is the canonical format; CSV and the aligned table are projections.
std::string report_to_json(const ScanReport& report, bool include_latency = true);
std::string report_to_csv(const ScanReport& report);
std::string report_to_table(const ScanReport& report);

// Recomputes aggregates from the rows and compares; reports must round-trip.
bool report_self_consistent(const ScanReport& report);

// Size literal with unit suffix: plain bytes, decimal KB/MB/GB, binary
// KiB/MiB/GiB. Raises bad_theta_syntax.
std::uint64_t parse_size(std::string_view text);

std::string sweep_to_csv(std::span<const std::uint64_t> thetas,
                         std::span<const CorpusStats> stats);

}  // namespace ctxgate

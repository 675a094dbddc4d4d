#include "ctxgate/report.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace ctxgate {

namespace {

LatencyStats latency_stats(std::vector<double> samples_ms) {
  LatencyStats stats;
  if (samples_ms.empty()) return stats;
  std::sort(samples_ms.begin(), samples_ms.end());
  double sum = 0;
  for (const double v : samples_ms) sum += v;
  stats.mean_ms = sum / static_cast<double>(samples_ms.size());
  const std::size_t n = samples_ms.size();
  stats.median_ms = n % 2 == 1 ? samples_ms[n / 2]
                               : (samples_ms[n / 2 - 1] + samples_ms[n / 2]) / 2.0;
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  stats.p95_ms = samples_ms[std::max<std::size_t>(rank, 1) - 1];
  return stats;
}

GitignoreMatcher load_root_gitignore(const Vfs& vfs) {
  FileMetadata meta;
  try {
    meta = vfs.stat(".gitignore");
  } catch (const Error&) {
    return {};
  }
  if (meta.kind != FileKind::file || meta.size == 0) return {};
  std::vector<std::string> warnings;
  GitignoreMatcher matcher =
      GitignoreMatcher::parse(vfs.read_prefix(".gitignore", meta.size), &warnings);
  for (const std::string& warning : warnings) {
    std::cerr << "warning: .gitignore: " << warning << "\n";
  }
  return matcher;
}

}  // namespace

ScanReport run_filter(const Vfs& vfs, const std::vector<FileRecord>& records, FilterId filter_id,
                      const FilterConfig& config, const OverrideSet& overrides,
                      const TokenizerPort* tokenizer) {
  config.validate();
  GitignoreMatcher gitignore;
  if (filter_id == FilterId::gitignore) gitignore = load_root_gitignore(vfs);

  ScanReport report;
  report.filter_id = filter_id;
  report.config = config;
  report.rows.reserve(records.size());

  using clock = std::chrono::steady_clock;
  for (const FileRecord& record : records) {
    const auto t0 = clock::now();
    FilterDecision decision = evaluate_filter(vfs, filter_id, record, config, gitignore);
    decision = apply_overrides(decision, record, overrides);
    const auto t1 = clock::now();

    const TokenEstimate estimate = estimate_tokens(vfs, record, tokenizer);
    ReportRow row;
    row.path = record.metadata.path;
    row.size = record.metadata.size;
    row.verdict = decision.verdict;
    row.reason = decision.reason;
    row.gate = decision.triggering_gate;
    row.tokens = estimate.tokens;
    row.method = estimate.method;
    row.content_bytes_read = decision.content_bytes_read;
    row.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.path < b.path; });

  std::vector<std::pair<std::string, Verdict>> decisions;
  TokensByPath tokens;
  std::vector<double> latencies;
  decisions.reserve(report.rows.size());
  latencies.reserve(report.rows.size());
  for (const ReportRow& row : report.rows) {
    decisions.emplace_back(row.path, row.verdict);
    tokens[row.path] = row.tokens;
    latencies.push_back(row.latency_ms);
  }
  report.reduction = compute_reduction(decisions, tokens);
  report.histogram = bucket_histogram(records);
  report.latency = latency_stats(std::move(latencies));
  report.io = IoSnapshot{vfs.counters().stat_calls(), vfs.counters().dir_listings(),
                         vfs.counters().content_bytes_read()};
  return report;
}

void attach_selection(ScanReport& report, const std::vector<FileRecord>& records,
                      const BudgetConfig& budget, PackOrder order) {
  TokensByPath tokens;
  std::vector<FileRecord> allowed;
  for (const ReportRow& row : report.rows) tokens[row.path] = row.tokens;
  for (const FileRecord& record : records) {
    const auto it = std::lower_bound(
        report.rows.begin(), report.rows.end(), record.metadata.path,
        [](const ReportRow& row, const std::string& path) { return row.path < path; });
    if (it != report.rows.end() && it->path == record.metadata.path &&
        it->verdict == Verdict::allowed) {
      allowed.push_back(record);
    }
  }
  report.budget = budget.t_mecw;
  report.selection = pack_context(allowed, tokens, budget, order);
}

bool attach_fpr(ScanReport& report, const std::set<std::string>& relevant) {
  std::set<std::string> flagged;
  for (const ReportRow& row : report.rows) {
    if (row.verdict == Verdict::flagged) flagged.insert(row.path);
  }
  if (flagged.empty()) return false;
  report.fpr = compute_fpr(flagged, relevant);
  return true;
}

namespace {

nlohmann::json row_to_json(const ReportRow& row) {
  nlohmann::json j;
  j["path"] = row.path;
  j["size"] = row.size;
  j["verdict"] = verdict_name(row.verdict);
  j["reason"] = flag_reason_name(row.reason);
  j["gate"] = row.gate ? nlohmann::json(gate_name(*row.gate)) : nlohmann::json(nullptr);
  j["tokens"] = row.tokens;
  j["method"] = token_method_name(row.method);
  j["bytes_read"] = row.content_bytes_read;
  return j;
}

}  // namespace

std::string report_to_json(const ScanReport& report, bool include_latency) {
  nlohmann::json doc;
  doc["schema"] = report.schema;
  doc["tool_version"] = report.tool_version;
  doc["source_kind"] = report.source_kind;
  doc["source"] = report.source;
  doc["filter_id"] = filter_name(report.filter_id);
  doc["config"] = nlohmann::json::parse(filter_config_to_json(report.config));

  doc["rows"] = nlohmann::json::array();
  for (const ReportRow& row : report.rows) doc["rows"].push_back(row_to_json(row));

  nlohmann::json reduction;
  reduction["baseline_tokens"] = report.reduction.baseline_tokens;
  reduction["filtered_tokens"] = report.reduction.filtered_tokens;
  reduction["reduction_pct"] = report.reduction.reduction_pct;
  reduction["flagged_count"] = report.reduction.flagged_count;
  reduction["allowed_count"] = report.reduction.allowed_count;
  doc["aggregates"]["reduction"] = std::move(reduction);

  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& bucket : report.histogram.buckets) {
    buckets.push_back({{"label", bucket.label},
                       {"file_count", bucket.file_count},
                       {"total_bytes", bucket.total_bytes},
                       {"pct_of_bytes", bucket.pct_of_bytes}});
  }
  doc["aggregates"]["histogram"] = std::move(buckets);

  if (include_latency) {
    doc["aggregates"]["latency_ms"] = {{"mean", report.latency.mean_ms},
                                       {"median", report.latency.median_ms},
                                       {"p95", report.latency.p95_ms}};
  }

  doc["io_counters"] = {{"stat_calls", report.io.stat_calls},
                        {"dir_listings", report.io.dir_listings},
                        {"content_bytes_read", report.io.content_bytes_read}};

  if (report.budget) doc["budget"] = *report.budget;
  if (report.selection) {
    doc["selection"] = {{"selected", report.selection->selected},
                        {"total_tokens", report.selection->total_tokens}};
  }
  if (report.fpr) {
    doc["fpr"] = {{"flagged_count", report.fpr->flagged_count},
                  {"flagged_relevant_count", report.fpr->flagged_relevant_count},
                  {"rate", report.fpr->fpr}};
  }
  return doc.dump(1);
}

std::string report_to_csv(const ScanReport& report) {
  std::string out = "path,size,verdict,reason,gate,tokens,method,bytes_read\n";
  for (const ReportRow& row : report.rows) {
    out += row.path;
    out += ',';
    out += std::to_string(row.size);
    out += ',';
    out += verdict_name(row.verdict);
    out += ',';
    out += flag_reason_name(row.reason);
    out += ',';
    out += row.gate ? gate_name(*row.gate) : "";
    out += ',';
    out += std::to_string(row.tokens);
    out += ',';
    out += token_method_name(row.method);
    out += ',';
    out += std::to_string(row.content_bytes_read);
    out += '\n';
  }
  return out;
}

std::string report_to_table(const ScanReport& report) {
  std::size_t path_width = 4;
  for (const ReportRow& row : report.rows) path_width = std::max(path_width, row.path.size());
  path_width = std::min<std::size_t>(path_width, 60);

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %12s  %-7s  %-20s  %-9s  %10s\n",
                static_cast<int>(path_width), "PATH", "SIZE", "VERDICT", "REASON", "GATE",
                "TOKENS");
  out << line;
  for (const ReportRow& row : report.rows) {
    std::snprintf(line, sizeof line, "%-*s  %12llu  %-7s  %-20s  %-9s  %10llu\n",
                  static_cast<int>(path_width), row.path.c_str(),
                  static_cast<unsigned long long>(row.size), verdict_name(row.verdict),
                  flag_reason_name(row.reason), row.gate ? gate_name(*row.gate) : "-",
                  static_cast<unsigned long long>(row.tokens));
    out << line;
  }
  std::snprintf(line, sizeof line,
                "\n%llu files, %llu flagged | baseline %llu tokens -> %llu (%.2f%% reduction)\n",
                static_cast<unsigned long long>(report.rows.size()),
                static_cast<unsigned long long>(report.reduction.flagged_count),
                static_cast<unsigned long long>(report.reduction.baseline_tokens),
                static_cast<unsigned long long>(report.reduction.filtered_tokens),
                report.reduction.reduction_pct);
  out << line;
  return out.str();
}

bool report_self_consistent(const ScanReport& report) {
  std::vector<std::pair<std::string, Verdict>> decisions;
  TokensByPath tokens;
  std::vector<FileRecord> records;
  for (const ReportRow& row : report.rows) {
    decisions.emplace_back(row.path, row.verdict);
    tokens[row.path] = row.tokens;
    FileRecord record;
    record.metadata = FileMetadata{row.path, row.size, FileKind::file};
    records.push_back(std::move(record));
  }
  if (!std::is_sorted(report.rows.begin(), report.rows.end(),
                      [](const ReportRow& a, const ReportRow& b) { return a.path < b.path; })) {
    return false;
  }

  const ReductionResult reduction = compute_reduction(decisions, tokens);
  if (reduction.baseline_tokens != report.reduction.baseline_tokens ||
      reduction.filtered_tokens != report.reduction.filtered_tokens ||
      reduction.flagged_count != report.reduction.flagged_count ||
      reduction.allowed_count != report.reduction.allowed_count ||
      reduction.reduction_pct != report.reduction.reduction_pct) {
    return false;
  }
  const BucketHistogram histogram = bucket_histogram(records);
  for (std::size_t i = 0; i < histogram.buckets.size(); ++i) {
    if (histogram.buckets[i].file_count != report.histogram.buckets[i].file_count ||
        histogram.buckets[i].total_bytes != report.histogram.buckets[i].total_bytes ||
        histogram.buckets[i].pct_of_bytes != report.histogram.buckets[i].pct_of_bytes) {
      return false;
    }
  }
  return true;
}

std::uint64_t parse_size(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
    ++pos;
  }
  if (pos == 0) raise(Errc::bad_theta_syntax, "no leading number in '" + std::string(text) + "'");
  double value = 0;
  try {
    value = std::stod(std::string(text.substr(0, pos)));
  } catch (const std::exception&) {
    raise(Errc::bad_theta_syntax, "bad number in '" + std::string(text) + "'");
  }

  std::string suffix(text.substr(pos));
  std::uint64_t multiplier = 1;
  if (suffix == "" || suffix == "B" || suffix == "b") {
    multiplier = 1;
  } else if (suffix == "KB" || suffix == "kB" || suffix == "kb") {
    multiplier = 1'000;
  } else if (suffix == "MB" || suffix == "mb") {
    multiplier = 1'000'000;
  } else if (suffix == "GB" || suffix == "gb") {
    multiplier = 1'000'000'000;
  } else if (suffix == "KiB" || suffix == "kib") {
    multiplier = 1ull << 10;
  } else if (suffix == "MiB" || suffix == "mib") {
    multiplier = 1ull << 20;
  } else if (suffix == "GiB" || suffix == "gib") {
    multiplier = 1ull << 30;
  } else {
    raise(Errc::bad_theta_syntax, "unknown size suffix '" + suffix + "'");
  }
  const double bytes = value * static_cast<double>(multiplier);
  if (!(bytes >= 0) || bytes > 9.0e18) {
    raise(Errc::bad_theta_syntax, "size out of range: '" + std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(std::llround(bytes));
}

std::string sweep_to_csv(std::span<const std::uint64_t> thetas,
                         std::span<const CorpusStats> stats) {
  std::string out = "theta_bytes,mean_pct,std_pct,min_pct,max_pct\n";
  char line[160];
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    std::snprintf(line, sizeof line, "%llu,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<unsigned long long>(thetas[i]), stats[i].mean, stats[i].std_dev,
                  stats[i].min, stats[i].max);
    out += line;
  }
  return out;
}

}  // namespace ctxgate

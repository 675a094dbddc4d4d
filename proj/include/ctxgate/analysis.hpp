#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxgate/filters.hpp"
#include "ctxgate/scan.hpp"

namespace ctxgate {

struct ReductionResult {
  std::uint64_t baseline_tokens = 0;
  std::uint64_t filtered_tokens = 0;  // tokens of allowed files only
  double reduction_pct = 0;           // 100 * (1 - filtered/baseline); 0 on empty baseline
  std::uint64_t flagged_count = 0;
  std::uint64_t allowed_count = 0;
};

using TokensByPath = std::unordered_map<std::string, std::uint64_t>;

// Post-override verdict per path. Raises missing_estimate when a decision
// path has no token estimate.
ReductionResult compute_reduction(std::span<const std::pair<std::string, Verdict>> decisions,
                                  const TokensByPath& tokens_by_path);

// Four decimal size buckets, lower-exclusive / upper-inclusive:
// [0, 100 KB], (100 KB, 1 MB], (1 MB, 10 MB], (10 MB, inf).
struct BucketHistogram {
  struct Bucket {
    std::string label;
    std::uint64_t file_count = 0;
    std::uint64_t total_bytes = 0;
    double pct_of_bytes = 0;
  };
  std::array<Bucket, 4> buckets;
};

BucketHistogram bucket_histogram(std::span<const FileRecord> records);

// SizeFilter reduction at each threshold; thetas are evaluated in ascending
// order, and reduction is non-increasing in theta.
std::vector<ReductionResult> threshold_sweep(std::span<const FileRecord> records,
                                             const TokensByPath& tokens_by_path,
                                             std::vector<std::uint64_t> thetas);

struct CorpusStats {
  double mean = 0;
  double std_dev = 0;  // sample standard deviation, n - 1 denominator
  double min = 0;
  double max = 0;
  bool degenerate_sample = false;  // fewer than 2 repositories
};

CorpusStats aggregate_corpus(std::span<const ReductionResult> per_repo);

struct FprResult {
  std::uint64_t flagged_count = 0;
  std::uint64_t flagged_relevant_count = 0;
  double fpr = 0;  // flagged_relevant / flagged
};

// Raises empty_flagged_set when nothing is flagged; the rate is undefined.
FprResult compute_fpr(const std::set<std::string>& flagged, const std::set<std::string>& relevant);

// Relevance-label file: newline-delimited paths, '#' comments.
std::set<std::string> parse_relevance_labels(std::string_view text);

struct WilsonInterval {
  double lo = 0;
  double hi = 0;
};

WilsonInterval wilson_interval(double p_hat, std::uint64_t n, double z = 1.96);

struct WilcoxonResult {
  double w_statistic = 0;  // min of the signed rank sums
  double p_value = 1;      // two-tailed; exact enumeration for n_effective <= 12
  std::size_t n_effective = 0;
};

WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs);

struct BudgetConfig {
  std::uint64_t t_mecw = 0;                 // effective token budget
  std::optional<std::uint64_t> t_mcw = {};  // nominal window, informational
};

enum class PackOrder { path_ascending, size_ascending };

struct PackResult {
  std::vector<std::string> selected;
  std::uint64_t total_tokens = 0;
};

// Greedy whole-file packing under the budget: a file that does not fit is
// skipped, never truncated, and packing continues past it.
PackResult pack_context(std::span<const FileRecord> allowed_records,
                        const TokensByPath& tokens_by_path, const BudgetConfig& budget,
                        PackOrder order = PackOrder::path_ascending);

}  // namespace ctxgate

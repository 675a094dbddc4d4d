#include "ctxgate/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace ctxgate {

ReductionResult compute_reduction(std::span<const std::pair<std::string, Verdict>> decisions,
                                  const TokensByPath& tokens_by_path) {
  ReductionResult result;
  for (const auto& [path, verdict] : decisions) {
    const auto it = tokens_by_path.find(path);
    if (it == tokens_by_path.end()) {
      raise(Errc::missing_estimate, "no token estimate for '" + path + "'");
    }
    result.baseline_tokens += it->second;
    if (verdict == Verdict::allowed) {
      result.filtered_tokens += it->second;
      ++result.allowed_count;
    } else {
      ++result.flagged_count;
    }
  }
  if (result.baseline_tokens > 0) {
    result.reduction_pct = 100.0 * (1.0 - static_cast<double>(result.filtered_tokens) /
                                              static_cast<double>(result.baseline_tokens));
  }
  return result;
}

BucketHistogram bucket_histogram(std::span<const FileRecord> records) {
  BucketHistogram histogram;
  histogram.buckets[0].label = "<=100KB";
  histogram.buckets[1].label = "100KB-1MB";
  histogram.buckets[2].label = "1MB-10MB";
  histogram.buckets[3].label = ">10MB";

  for (const FileRecord& record : records) {
    const std::uint64_t size = record.metadata.size;
    std::size_t idx;
    if (size <= 100'000) {
      idx = 0;
    } else if (size <= 1'000'000) {
      idx = 1;
    } else if (size <= 10'000'000) {
      idx = 2;
    } else {
      idx = 3;
    }
    histogram.buckets[idx].file_count += 1;
    histogram.buckets[idx].total_bytes += size;
  }

  std::uint64_t total = 0;
  for (const auto& bucket : histogram.buckets) total += bucket.total_bytes;
  if (total > 0) {
    for (auto& bucket : histogram.buckets) {
      bucket.pct_of_bytes =
          100.0 * static_cast<double>(bucket.total_bytes) / static_cast<double>(total);
    }
  }
  return histogram;
}

std::vector<ReductionResult> threshold_sweep(std::span<const FileRecord> records,
                                             const TokensByPath& tokens_by_path,
                                             std::vector<std::uint64_t> thetas) {
  if (thetas.empty()) raise(Errc::degenerate_input, "theta list is empty");
  std::sort(thetas.begin(), thetas.end());

  std::vector<ReductionResult> results;
  results.reserve(thetas.size());
  std::vector<std::pair<std::string, Verdict>> decisions(records.size());
  for (const std::uint64_t theta : thetas) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      decisions[i] = {records[i].metadata.path,
                      size_filter(records[i], theta).verdict};
    }
    results.push_back(compute_reduction(decisions, tokens_by_path));
  }
  return results;
}

CorpusStats aggregate_corpus(std::span<const ReductionResult> per_repo) {
  if (per_repo.empty()) raise(Errc::degenerate_input, "no per-repository results");
  CorpusStats stats;
  stats.min = per_repo.front().reduction_pct;
  stats.max = stats.min;
  double sum = 0;
  for (const ReductionResult& r : per_repo) {
    sum += r.reduction_pct;
    stats.min = std::min(stats.min, r.reduction_pct);
    stats.max = std::max(stats.max, r.reduction_pct);
  }
  const double n = static_cast<double>(per_repo.size());
  stats.mean = sum / n;
  if (per_repo.size() < 2) {
    stats.degenerate_sample = true;
    return stats;
  }
  double ss = 0;
  for (const ReductionResult& r : per_repo) {
    const double d = r.reduction_pct - stats.mean;
    ss += d * d;
  }
  stats.std_dev = std::sqrt(ss / (n - 1.0));
  return stats;
}

FprResult compute_fpr(const std::set<std::string>& flagged,
                      const std::set<std::string>& relevant) {
  if (flagged.empty()) {
    raise(Errc::empty_flagged_set, "FPR is undefined when no file is flagged");
  }
  FprResult result;
  result.flagged_count = flagged.size();
  for (const std::string& path : flagged) {
    if (relevant.contains(path)) ++result.flagged_relevant_count;
  }
  result.fpr = static_cast<double>(result.flagged_relevant_count) /
               static_cast<double>(result.flagged_count);
  return result;
}

std::set<std::string> parse_relevance_labels(std::string_view text) {
  std::set<std::string> labels;
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
    if (!line.empty() && line.front() != '#') labels.emplace(line);
    if (at_end) break;
  }
  return labels;
}

WilsonInterval wilson_interval(double p_hat, std::uint64_t n, double z) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) {
    raise(Errc::invalid_proportion, "p_hat must lie in [0, 1]");
  }
  if (n < 1) raise(Errc::invalid_proportion, "n must be >= 1");
  if (!(z > 0)) raise(Errc::invalid_proportion, "z must be > 0");

  const double nd = static_cast<double>(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double center = (p_hat + z2 / (2.0 * nd)) / denom;
  const double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / nd + z2 / (4.0 * nd * nd)) / denom;
  return WilsonInterval{std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

// Average ranks of |d| with ties sharing the mean rank; returns ranks in the
// order of the (sorted) magnitudes alongside tie-group sizes.
void rank_magnitudes(std::vector<double>& magnitudes, std::vector<double>* ranks,
                     std::vector<std::size_t>* tie_groups) {
  std::sort(magnitudes.begin(), magnitudes.end());
  ranks->resize(magnitudes.size());
  std::size_t i = 0;
  while (i < magnitudes.size()) {
    std::size_t j = i;
    while (j < magnitudes.size() && magnitudes[j] == magnitudes[i]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) (*ranks)[k] = avg_rank;
    tie_groups->push_back(j - i);
    i = j;
  }
}

// Exact two-tailed p: distribution of W+ over all 2^n sign assignments,
// computed by subset-sum counting over doubled ranks (which are integers).
double exact_two_tailed_p(const std::vector<double>& ranks, double w_min) {
  std::int64_t total2 = 0;
  std::vector<std::int64_t> ranks2(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    ranks2[i] = std::llround(2.0 * ranks[i]);
    total2 += ranks2[i];
  }
  std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
  counts[0] = 1.0;
  for (const std::int64_t r : ranks2) {
    for (std::int64_t s = total2 - r; s >= 0; --s) {
      if (counts[static_cast<std::size_t>(s)] > 0) {
        counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      }
    }
  }
  const std::int64_t w2 = std::llround(2.0 * w_min);
  double tail_low = 0;
  double tail_high = 0;
  for (std::int64_t s = 0; s <= total2; ++s) {
    if (s <= w2) tail_low += counts[static_cast<std::size_t>(s)];
    if (s >= total2 - w2) tail_high += counts[static_cast<std::size_t>(s)];
  }
  const double p = (tail_low + tail_high) / std::pow(2.0, static_cast<double>(ranks.size()));
  return std::min(1.0, p);
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs) {
  std::vector<double> magnitudes;
  std::vector<double> diffs;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n < 5) {
    raise(Errc::too_few_pairs, "need >= 5 non-zero differences, got " + std::to_string(n));
  }

  // rank by |d|, then attribute each rank back to its difference's sign
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });
  magnitudes.resize(n);
  for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::abs(diffs[order[i]]);

  std::vector<double> ranks;
  std::vector<std::size_t> tie_groups;
  rank_magnitudes(magnitudes, &ranks, &tie_groups);

  double w_plus = 0;
  double w_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    w_total += ranks[i];
    if (diffs[order[i]] > 0) w_plus += ranks[i];
  }
  const double w_minus = w_total - w_plus;
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult result;
  result.w_statistic = w;
  result.n_effective = n;
  if (n <= 12) {
    result.p_value = exact_two_tailed_p(ranks, w);
    return result;
  }

  const double nd = static_cast<double>(n);
  const double mu = nd * (nd + 1.0) / 4.0;
  double tie_term = 0;
  for (const std::size_t t : tie_groups) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double sigma2 = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  if (sigma2 <= 0) {
    result.p_value = 1.0;
    return result;
  }
  const double zval = (mu - w) / std::sqrt(sigma2);
  result.p_value = std::min(1.0, std::erfc(zval / std::sqrt(2.0)));
  return result;
}

PackResult pack_context(std::span<const FileRecord> allowed_records,
                        const TokensByPath& tokens_by_path, const BudgetConfig& budget,
                        PackOrder order) {
  if (budget.t_mcw && (budget.t_mecw == 0 || *budget.t_mcw < budget.t_mecw)) {
    raise(Errc::degenerate_input, "need 0 < t_mecw <= t_mcw when both windows are given");
  }
  std::vector<const FileRecord*> sorted;
  sorted.reserve(allowed_records.size());
  for (const FileRecord& r : allowed_records) sorted.push_back(&r);
  if (order == PackOrder::path_ascending) {
    std::sort(sorted.begin(), sorted.end(),
              [](const FileRecord* a, const FileRecord* b) {
                return a->metadata.path < b->metadata.path;
              });
  } else {
    std::sort(sorted.begin(), sorted.end(), [](const FileRecord* a, const FileRecord* b) {
      if (a->metadata.size != b->metadata.size) return a->metadata.size < b->metadata.size;
      return a->metadata.path < b->metadata.path;
    });
  }

  PackResult result;
  for (const FileRecord* record : sorted) {
    const auto it = tokens_by_path.find(record->metadata.path);
    if (it == tokens_by_path.end()) {
      raise(Errc::missing_estimate, "no token estimate for '" + record->metadata.path + "'");
    }
    if (result.total_tokens + it->second <= budget.t_mecw) {
      result.selected.push_back(record->metadata.path);
      result.total_tokens += it->second;
    }
    // else: skipped whole, packing continues
  }
  return result;
}

}  // namespace ctxgate

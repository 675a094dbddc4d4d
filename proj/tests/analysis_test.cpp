#include "ctxgate/analysis.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"

using namespace ctxgate;
using namespace ctxgate::testing;

namespace {

FileRecord plain_record(std::string path, std::uint64_t size) {
  FileRecord record;
  record.metadata = FileMetadata{std::move(path), size, FileKind::file};
  return record;
}

// Root-finding form of the Wilson interval: solutions of
// (p_hat - p)^2 = z^2 p (1 - p) / n, algebraically distinct from the
// center-halfwidth form the library uses.
WilsonInterval wilson_oracle(double p, double n, double z) {
  const double z2 = z * z;
  const double a = n + z2;
  const double b = 2.0 * n * p + z2;
  const double disc = z * std::sqrt(z2 + 4.0 * n * p * (1.0 - p));
  return WilsonInterval{(b - disc) / (2.0 * a), (b + disc) / (2.0 * a)};
}

// Brute-force enumeration over all 2^n sign assignments, average ranks for
// ties, two tails counted directly.
double wilcoxon_p_oracle(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(diffs[i]);
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  auto rank_of = [&](double mag) {
    double sum = 0;
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (sorted[i] == mag) {
        sum += static_cast<double>(i + 1);
        ++count;
      }
    }
    return sum / count;
  };
  std::vector<double> ranks(n);
  double total = 0;
  double w_plus_obs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ranks[i] = rank_of(mags[i]);
    total += ranks[i];
    if (diffs[i] > 0) w_plus_obs += ranks[i];
  }
  const double w_obs = std::min(w_plus_obs, total - w_plus_obs);

  std::uint64_t hits = 0;
  const std::uint64_t patterns = 1ull << n;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w_plus = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i)) w_plus += ranks[i];
    }
    if (w_plus <= w_obs || w_plus >= total - w_obs) ++hits;
  }
  return std::min(1.0, static_cast<double>(hits) / static_cast<double>(patterns));
}

}  // namespace

TEST_CASE("compute_reduction follows the formula") {
  TokensByPath tokens{{"kept", 4'600'000}, {"cut", 149'400'000}};
  std::vector<std::pair<std::string, Verdict>> decisions{{"kept", Verdict::allowed},
                                                         {"cut", Verdict::flagged}};
  const ReductionResult r = compute_reduction(decisions, tokens);
  CHECK(r.baseline_tokens == 154'000'000);
  CHECK(r.filtered_tokens == 4'600'000);
  CHECK(r.flagged_count == 1);
  CHECK(r.allowed_count == 1);
  // 100 * (1 - 4.6/154.0)
  CHECK(r.reduction_pct == doctest::Approx(97.012987).epsilon(1e-6));
}

TEST_CASE("reduction edge cases") {
  TokensByPath tokens{{"a", 100}, {"b", 300}};
  std::vector<std::pair<std::string, Verdict>> none{{"a", Verdict::allowed},
                                                    {"b", Verdict::allowed}};
  CHECK(compute_reduction(none, tokens).reduction_pct == 0.0);

  std::vector<std::pair<std::string, Verdict>> all{{"a", Verdict::flagged},
                                                   {"b", Verdict::flagged}};
  CHECK(compute_reduction(all, tokens).reduction_pct == 100.0);

  // empty corpus: reduction defined as zero
  CHECK(compute_reduction({}, tokens).reduction_pct == 0.0);

  std::vector<std::pair<std::string, Verdict>> missing{{"zzz", Verdict::allowed}};
  CHECK_THROWS_AS(compute_reduction(missing, tokens), Error);
}

TEST_CASE("bucket histogram boundaries are decimal and upper-inclusive") {
  std::vector<FileRecord> records{plain_record("a", 50'000), plain_record("b", 500'000),
                                  plain_record("c", 5'000'000), plain_record("d", 50'000'000)};
  const BucketHistogram h = bucket_histogram(records);
  for (const auto& bucket : h.buckets) CHECK(bucket.file_count == 1);

  // boundary values land in the lower bucket
  std::vector<FileRecord> edges{plain_record("kb", 100'000), plain_record("kb+", 100'001),
                                plain_record("mb", 1'000'000), plain_record("mb+", 1'000'001),
                                plain_record("ten", 10'000'000), plain_record("ten+", 10'000'001)};
  const BucketHistogram b = bucket_histogram(edges);
  CHECK(b.buckets[0].file_count == 1);
  CHECK(b.buckets[1].file_count == 2);
  CHECK(b.buckets[2].file_count == 2);
  CHECK(b.buckets[3].file_count == 1);
}

TEST_CASE("single small file owns all bytes") {
  std::vector<FileRecord> records{plain_record("only", 50'000)};
  const BucketHistogram h = bucket_histogram(records);
  CHECK(h.buckets[0].pct_of_bytes == 100.0);
  CHECK(h.buckets[1].pct_of_bytes == 0.0);
}

TEST_CASE("histogram conserves bytes and percentages") {
  ManifestGenerator gen(11);
  for (int round = 0; round < 20; ++round) {
    const VirtualManifest manifest = gen.next();
    std::vector<FileRecord> records;
    std::uint64_t total = 0;
    for (const ManifestEntry& e : manifest.entries) {
      if (!e.path.empty() && e.path.back() == '/') continue;
      records.push_back(plain_record(e.path, e.size));
      total += e.size;
    }
    const BucketHistogram h = bucket_histogram(records);
    std::uint64_t bucket_total = 0;
    double pct_total = 0;
    for (const auto& bucket : h.buckets) {
      bucket_total += bucket.total_bytes;
      pct_total += bucket.pct_of_bytes;
    }
    CHECK(bucket_total == total);
    if (total > 0) CHECK(pct_total == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("tail manifest concentrates bytes above 1 MB") {
  std::vector<FileRecord> records;
  for (int i = 0; i < 990; ++i) records.push_back(plain_record("s" + std::to_string(i), 10'000));
  for (int i = 0; i < 10; ++i) {
    records.push_back(plain_record("big" + std::to_string(i), 10'000'000));
  }
  const BucketHistogram h = bucket_histogram(records);
  // 10 MB exactly sits in the (1 MB, 10 MB] bucket under the stated intervals
  CHECK(h.buckets[2].file_count == 10);
  CHECK(h.buckets[2].pct_of_bytes ==
        doctest::Approx(100.0 * 1.0e8 / 1.099e8).epsilon(1e-9));
}

TEST_CASE("threshold sweep reductions are non-increasing") {
  std::vector<FileRecord> records;
  TokensByPath tokens;
  for (int i = 0; i < 990; ++i) {
    records.push_back(plain_record("s" + std::to_string(i), 10'000));
    tokens["s" + std::to_string(i)] = 2'500;
  }
  for (int i = 0; i < 10; ++i) {
    records.push_back(plain_record("big" + std::to_string(i), 10'000'000));
    tokens["big" + std::to_string(i)] = 2'500'000;
  }
  const std::vector<std::uint64_t> thetas{50'000, 100'000, 500'000, 1'000'000, 5'000'000};
  const auto results = threshold_sweep(records, tokens, thetas);
  REQUIRE(results.size() == 5);
  for (std::size_t i = 1; i < results.size(); ++i) {
    CHECK(results[i].reduction_pct <= results[i - 1].reduction_pct);
  }
  CHECK(results[0].reduction_pct >= results[4].reduction_pct);

  // a threshold above the largest file removes nothing
  const auto top = threshold_sweep(records, tokens, {20'000'000});
  CHECK(top[0].reduction_pct == 0.0);

  // identical small files: any theta at or above their size removes nothing
  std::vector<FileRecord> flat;
  TokensByPath flat_tokens;
  for (int i = 0; i < 50; ++i) {
    flat.push_back(plain_record("f" + std::to_string(i), 10'240));
    flat_tokens["f" + std::to_string(i)] = 2'560;
  }
  for (const auto& r : threshold_sweep(flat, flat_tokens, {10'240, 102'400})) {
    CHECK(r.reduction_pct == 0.0);
  }
}

TEST_CASE("threshold sweep rejects an empty theta list") {
  CHECK_THROWS_AS(threshold_sweep({}, {}, {}), Error);
}

TEST_CASE("corpus aggregation uses the sample standard deviation") {
  ReductionResult a;
  a.reduction_pct = 70.0;
  ReductionResult b;
  b.reduction_pct = 90.0;
  std::vector<ReductionResult> two{a, b};
  const CorpusStats stats = aggregate_corpus(two);
  CHECK(stats.mean == doctest::Approx(80.0));
  CHECK(stats.std_dev == doctest::Approx(14.142135623).epsilon(1e-9));
  CHECK(stats.min == 70.0);
  CHECK(stats.max == 90.0);
  CHECK_FALSE(stats.degenerate_sample);

  std::vector<ReductionResult> same{a, a, a};
  CHECK(aggregate_corpus(same).std_dev == 0.0);

  std::vector<ReductionResult> one{a};
  const CorpusStats single = aggregate_corpus(one);
  CHECK(single.std_dev == 0.0);
  CHECK(single.degenerate_sample);

  CHECK_THROWS_AS(aggregate_corpus({}), Error);
}

TEST_CASE("fpr is exact set arithmetic") {
  const FprResult half = compute_fpr({"a", "b"}, {"b"});
  CHECK(half.fpr == 0.5);
  CHECK(half.flagged_count == 2);
  CHECK(half.flagged_relevant_count == 1);

  CHECK(compute_fpr({"a", "b"}, {}).fpr == 0.0);
  CHECK(compute_fpr({"a"}, {"a"}).fpr == 1.0);

  CHECK_THROWS_AS(compute_fpr({}, {"x"}), Error);
  try {
    compute_fpr({}, {});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_flagged_set);
  }
}

TEST_CASE("relevance label files parse like override files") {
  const auto labels = parse_relevance_labels("# annotated relevant set\nsrc/a.py\ngen/x_pb.py\n");
  CHECK(labels == std::set<std::string>{"src/a.py", "gen/x_pb.py"});
  CHECK(parse_relevance_labels("").empty());
}

TEST_CASE("wilson interval collapses asymptotically and stays interior") {
  const WilsonInterval big = wilson_interval(0.5, 1'000'000);
  CHECK(big.lo > 0.4989);
  CHECK(big.lo < 0.4991);
  CHECK(big.hi > 0.5009);
  CHECK(big.hi < 0.5011);

  const WilsonInterval zero = wilson_interval(0.0, 10);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi > 0.0);
  const WilsonInterval one = wilson_interval(1.0, 10);
  CHECK(one.hi == 1.0);
  CHECK(one.lo < 1.0);
  CHECK(one.lo > 0.0);

  CHECK_THROWS_AS(wilson_interval(1.5, 10), Error);
  CHECK_THROWS_AS(wilson_interval(0.5, 0), Error);
}

TEST_CASE("wilson interval matches the quadratic-form oracle") {
  const WilsonInterval w = wilson_interval(0.796, 10);
  const WilsonInterval o = wilson_oracle(0.796, 10.0, 1.96);
  CHECK(w.lo == doctest::Approx(o.lo).epsilon(1e-9));
  CHECK(w.hi == doctest::Approx(o.hi).epsilon(1e-9));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> p_dist(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> n_dist(1, 100'000);
  for (int round = 0; round < 1'000; ++round) {
    const double p = p_dist(rng);
    const std::uint64_t n = n_dist(rng);
    const WilsonInterval impl = wilson_interval(p, n);
    const WilsonInterval oracle = wilson_oracle(p, static_cast<double>(n), 1.96);
    CHECK(std::abs(impl.lo - std::max(0.0, oracle.lo)) < 1e-9);
    CHECK(std::abs(impl.hi - std::min(1.0, oracle.hi)) < 1e-9);
  }
}

TEST_CASE("wilcoxon all-positive n=6 gives the textbook p") {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 6; ++i) pairs.emplace_back(10.0 + i, 10.0);
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  CHECK(r.n_effective == 6);
  CHECK(r.w_statistic == 0.0);
  CHECK(r.p_value == doctest::Approx(0.03125).epsilon(1e-12));
}

TEST_CASE("wilcoxon symmetric differences are insignificant") {
  std::vector<std::pair<double, double>> pairs{{1, 0}, {0, 1}, {2, 0}, {0, 2}, {3, 0}, {0, 3}};
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  CHECK(r.p_value > 0.9);
}

TEST_CASE("wilcoxon drops zero differences") {
  std::vector<std::pair<double, double>> pairs{{1, 1}, {2, 2}, {3, 2}, {4, 2}, {5, 2},
                                               {6, 2}, {7, 2}};
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);  // two zeros dropped
  CHECK(r.n_effective == 5);
}

TEST_CASE("wilcoxon raises on too few pairs") {
  std::vector<std::pair<double, double>> pairs{{1, 1}, {2, 2}, {3, 2}, {4, 3}, {5, 3}, {6, 4}};
  CHECK_THROWS_AS(wilcoxon_signed_rank(pairs), Error);
  try {
    wilcoxon_signed_rank(pairs);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_few_pairs);
  }
}

TEST_CASE("wilcoxon exact p matches full enumeration, ties included") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n_dist(5, 12);
  std::uniform_int_distribution<int> value_dist(-6, 6);
  int tested = 0;
  while (tested < 200) {
    const int n = n_dist(rng);
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> diffs;
    for (int i = 0; i < n; ++i) {
      const int d = value_dist(rng);
      pairs.emplace_back(static_cast<double>(d), 0.0);
      if (d != 0) diffs.push_back(static_cast<double>(d));
    }
    if (diffs.size() < 5) continue;
    ++tested;
    const WilcoxonResult r = wilcoxon_signed_rank(pairs);
    CHECK(r.n_effective == diffs.size());
    CHECK(r.p_value == doctest::Approx(wilcoxon_p_oracle(diffs)).epsilon(1e-12));
  }
}

TEST_CASE("wilcoxon large-n path returns a sane approximation") {
  std::vector<std::pair<double, double>> pairs;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> shift(0.5, 1.0);
  for (int i = 0; i < 40; ++i) pairs.emplace_back(shift(rng), 0.0);
  const WilcoxonResult r = wilcoxon_signed_rank(pairs);
  CHECK(r.n_effective == 40);
  CHECK(r.p_value > 0.0);
  CHECK(r.p_value <= 1.0);
}

TEST_CASE("pack_context greedy trace") {
  std::vector<FileRecord> records{plain_record("a.py", 12'000), plain_record("b.py", 8'000)};
  TokensByPath tokens{{"a.py", 3'000}, {"b.py", 2'000}};

  const PackResult r = pack_context(records, tokens, BudgetConfig{4'096, {}});
  REQUIRE(r.selected.size() == 1);
  CHECK(r.selected[0] == "a.py");  // path order: a first, b no longer fits
  CHECK(r.total_tokens == 3'000);

  CHECK(pack_context(records, tokens, BudgetConfig{0, {}}).selected.empty());

  const PackResult all = pack_context(records, tokens, BudgetConfig{100'000, {}});
  CHECK(all.selected == std::vector<std::string>{"a.py", "b.py"});
  CHECK(all.total_tokens == 5'000);
}

TEST_CASE("pack_context continues past a skip") {
  std::vector<FileRecord> records{plain_record("a", 0), plain_record("b", 0),
                                  plain_record("c", 0)};
  TokensByPath tokens{{"a", 100}, {"b", 5'000}, {"c", 200}};
  const PackResult r = pack_context(records, tokens, BudgetConfig{400, {}});
  CHECK(r.selected == std::vector<std::string>{"a", "c"});
  CHECK(r.total_tokens == 300);
}

TEST_CASE("pack_context can order by size") {
  std::vector<FileRecord> records{plain_record("big", 4'000), plain_record("small", 400)};
  TokensByPath tokens{{"big", 1'000}, {"small", 100}};
  const PackResult r =
      pack_context(records, tokens, BudgetConfig{1'100, {}}, PackOrder::size_ascending);
  CHECK(r.selected == std::vector<std::string>{"small", "big"});
}

TEST_CASE("pack_context never exceeds the budget on random inputs") {
  std::mt19937_64 rng(123);
  std::uniform_int_distribution<std::uint64_t> budget_dist(0, 50'000);
  std::uniform_int_distribution<std::uint64_t> token_dist(0, 9'000);
  std::uniform_int_distribution<int> count_dist(0, 60);
  for (int round = 0; round < 1'000; ++round) {
    std::vector<FileRecord> records;
    TokensByPath tokens;
    const int count = count_dist(rng);
    for (int i = 0; i < count; ++i) {
      const std::string path = "f" + std::to_string(i);
      records.push_back(plain_record(path, 0));
      tokens[path] = token_dist(rng);
    }
    const std::uint64_t budget = budget_dist(rng);
    const PackResult r = pack_context(records, tokens, BudgetConfig{budget, {}});
    std::uint64_t sum = 0;
    for (const std::string& path : r.selected) sum += tokens[path];  // whole files only
    CHECK(sum == r.total_tokens);
    CHECK(sum <= budget);
  }
}

TEST_CASE("pack_context validates the window pair") {
  CHECK_THROWS_AS(pack_context({}, {}, BudgetConfig{4'096, 1'000}), Error);
  CHECK_NOTHROW(pack_context({}, {}, BudgetConfig{4'096, 128'000}));
}

#include "ctxgate/tokens.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

namespace ctxgate {

const char* token_method_name(TokenMethod m) {
  return m == TokenMethod::exact ? "exact" : "heuristic";
}

std::uint64_t heuristic_tokens(std::uint64_t size_bytes) { return size_bytes / 4; }

TokenEstimate estimate_tokens(const Vfs& vfs, const FileRecord& record,
                              const TokenizerPort* tokenizer) {
  const std::string& path = record.metadata.path;
  const std::uint64_t size = record.metadata.size;
  if (tokenizer && size <= kExactTokenizeCutoff) {
    try {
      const std::string content = vfs.read_prefix(path, std::max<std::uint64_t>(size, 1));
      return TokenEstimate{path, tokenizer->count_tokens(content), TokenMethod::exact};
    } catch (const Error& e) {
      if (e.code() != Errc::permission_denied && e.code() != Errc::not_found) throw;
      // unreadable: fall through to the heuristic, visible via method
    }
  }
  return TokenEstimate{path, heuristic_tokens(size), TokenMethod::heuristic};
}

// Segment counts per run class, then a flat merge-rate correction for the
// pair merges a real BPE applies across segment boundaries. Constants were
// calibrated against cl100k-like densities on ASCII source corpora.
std::uint64_t SubwordTokenizer::count_tokens(std::string_view bytes) const {
  const auto is_alpha = [](unsigned char c) { return std::isalpha(c) || c == '_'; };
  const auto is_digit = [](unsigned char c) { return std::isdigit(c) != 0; };
  const auto is_space_class = [](unsigned char c) {
    return c == '\n' || c == '\r' || c == '\t' || c == '\f' || c == '\v';
  };

  std::uint64_t segments = 0;
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const unsigned char c = bytes[i];
    std::size_t run = 1;
    if (is_alpha(c)) {
      while (i + run < n && is_alpha(bytes[i + run])) ++run;
      segments += (run + 3) / 4;  // subword pieces of ~4 letters
    } else if (is_digit(c)) {
      while (i + run < n && is_digit(bytes[i + run])) ++run;
      segments += (run + 2) / 3;  // digits group in threes
    } else if (c == ' ') {
      while (i + run < n && bytes[i + run] == ' ') ++run;
      // a single space rides on the following token; indentation chunks
      if (run > 1) segments += (run + 7) / 8;
    } else if (is_space_class(c)) {
      while (i + run < n && is_space_class(bytes[i + run])) ++run;
      segments += 1;
    } else {
      while (i + run < n) {
        const unsigned char q = bytes[i + run];
        if (is_alpha(q) || is_digit(q) || q == ' ' || is_space_class(q)) break;
        ++run;
      }
      segments += (run + 2) / 3;  // operator clusters merge
    }
    i += run;
  }
  // three segments in four survive merging
  return static_cast<std::uint64_t>(std::llround(0.75 * static_cast<double>(segments)));
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) raise(Errc::degenerate_input, "series lengths differ");
  if (xs.size() < 2) raise(Errc::degenerate_input, "need at least 2 points");
  const double n = static_cast<double>(xs.size());
  double sum_x = 0;
  double sum_y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum_x += xs[i];
    sum_y += ys[i];
  }
  const double mean_x = sum_x / n;
  const double mean_y = sum_y / n;
  double sxx = 0;
  double syy = 0;
  double sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) raise(Errc::degenerate_input, "zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

DensityStudy fit_token_density(std::span<const DensityPair> pairs) {
  if (pairs.size() < 2) raise(Errc::degenerate_input, "need at least 2 (size, tokens) pairs");

  DensityStudy study;
  study.pairs.assign(pairs.begin(), pairs.end());

  double sum_st = 0;
  double sum_ss = 0;
  std::vector<double> sizes(pairs.size());
  std::vector<double> tokens(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!(pairs[i].size > 0)) raise(Errc::degenerate_input, "sizes must be > 0");
    sizes[i] = pairs[i].size;
    tokens[i] = pairs[i].tokens;
    sum_st += pairs[i].size * pairs[i].tokens;
    sum_ss += pairs[i].size * pairs[i].size;
  }
  study.k_hat = sum_st / sum_ss;
  study.pearson = pearson_r(sizes, tokens);
  study.r_squared = study.pearson * study.pearson;

  double err_sum = 0;
  double err_max = 0;
  std::size_t counted = 0;
  for (const DensityPair& p : pairs) {
    if (p.tokens <= 0) continue;  // relative error undefined at zero tokens
    const double err = std::abs(p.tokens - study.k_hat * p.size) / p.tokens * 100.0;
    err_sum += err;
    err_max = std::max(err_max, err);
    ++counted;
  }
  study.mean_abs_err_pct = counted == 0 ? 0.0 : err_sum / static_cast<double>(counted);
  study.max_err_pct = err_max;
  return study;
}

std::vector<DensityPair> parse_density_csv(std::string_view text) {
  std::vector<DensityPair> pairs;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line_no == 1 && line.substr(0, 5) == "path,") continue;  // header

    // path may itself contain commas; the two numeric fields are rightmost
    const std::size_t c2 = line.rfind(',');
    const std::size_t c1 = c2 == std::string_view::npos ? c2 : line.rfind(',', c2 - 1);
    if (c1 == std::string_view::npos || c2 == 0) {
      raise(Errc::degenerate_input, "density csv line " + std::to_string(line_no) +
                                        ": expected path,size_bytes,tokens");
    }
    try {
      DensityPair pair;
      pair.size = std::stod(std::string(line.substr(c1 + 1, c2 - c1 - 1)));
      pair.tokens = std::stod(std::string(line.substr(c2 + 1)));
      pairs.push_back(pair);
    } catch (const std::exception&) {
      raise(Errc::degenerate_input,
            "density csv line " + std::to_string(line_no) + ": bad number");
    }
  }
  return pairs;
}

std::string density_study_to_json(const DensityStudy& study) {
  nlohmann::json doc;
  doc["pairs"] = nlohmann::json::array();
  for (const DensityPair& p : study.pairs) {
    doc["pairs"].push_back({p.size, p.tokens});
  }
  doc["k_hat"] = study.k_hat;
  doc["pearson_r"] = study.pearson;
  doc["r_squared"] = study.r_squared;
  doc["mean_abs_err_pct"] = study.mean_abs_err_pct;
  doc["max_err_pct"] = study.max_err_pct;
  return doc.dump(1);
}

}  // namespace ctxgate

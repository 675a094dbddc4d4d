#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctxgate/scan.hpp"
#include "ctxgate/vfs.hpp"

namespace ctxgate {

enum class TokenMethod { exact, heuristic };

const char* token_method_name(TokenMethod m);

struct TokenEstimate {
  std::string path;
  std::uint64_t tokens = 0;
  TokenMethod method = TokenMethod::heuristic;
};

// Injected token counter; the library never hard-wires an encoding.
class TokenizerPort {
 public:
  virtual ~TokenizerPort() = default;
  virtual std::uint64_t count_tokens(std::string_view bytes) const = 0;
};

// Files above this size always take the size/4 heuristic (50 KiB).
inline constexpr std::uint64_t kExactTokenizeCutoff = 51'200;

// Exact count of the full content when the file is small enough and a
// tokenizer is injected; floor(size/4) otherwise. An unreadable file falls
// back to the heuristic.
TokenEstimate estimate_tokens(const Vfs& vfs, const FileRecord& record,
                              const TokenizerPort* tokenizer = nullptr);

std::uint64_t heuristic_tokens(std::uint64_t size_bytes);

// Content-based token counter for ASCII text: words split into subword
// pieces, digits grouped, punctuation paired, single spaces riding on the
// following word. Tracks how LLM tokenizers segment source code closely
// enough for density studies without shipping a BPE vocabulary.
class SubwordTokenizer : public TokenizerPort {
 public:
  std::uint64_t count_tokens(std::string_view bytes) const override;
};

// Product-moment correlation; raises degenerate_input on length < 2,
// length mismatch, or zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

struct DensityPair {
  double size = 0;    // bytes
  double tokens = 0;  // measured count
};

struct DensityStudy {
  std::vector<DensityPair> pairs;
  double k_hat = 0;  // tokens per byte, through-origin least squares
  double pearson = 0;
  double r_squared = 0;
  double mean_abs_err_pct = 0;
  double max_err_pct = 0;
};

DensityStudy fit_token_density(std::span<const DensityPair> pairs);

// CSV interchange: header "path,size_bytes,tokens", one row per file.
std::vector<DensityPair> parse_density_csv(std::string_view text);
std::string density_study_to_json(const DensityStudy& study);

}  // namespace ctxgate

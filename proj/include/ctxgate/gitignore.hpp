#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ctxgate {

// Glob match with gitignore wildcard semantics: '*' and '?' stop at '/',
// "**" crosses directory boundaries.
bool glob_match(std::string_view pattern, std::string_view path);

// Root-level .gitignore matcher. Supported syntax: '#' comments, '*', '?',
// "**", trailing-slash directory patterns, '!' negation. Evaluation is
// last-match-wins over the file itself and its ancestor directories.
class GitignoreMatcher {
 public:
  GitignoreMatcher() = default;

  // warnings, when given, collects one line per skipped malformed pattern.
  static GitignoreMatcher parse(std::string_view text,
                                std::vector<std::string>* warnings = nullptr);

  bool ignored(std::string_view path) const;
  bool empty() const { return patterns_.empty(); }

 private:
  struct Pattern {
    std::string glob;
    bool negated = false;
    bool dir_only = false;
    bool anchored = false;  // contains a non-trailing '/'
  };

  static bool pattern_matches(const Pattern& pattern, std::string_view file_path);

  std::vector<Pattern> patterns_;
};

}  // namespace ctxgate

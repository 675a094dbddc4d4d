#include "ctxgate/gitignore.hpp"

namespace ctxgate {

namespace {

// Recursive wildcard match. "**" may swallow '/', the single-char forms may
// not. Patterns here are short config lines, so plain backtracking is fine.
bool match_from(std::string_view pattern, std::string_view path) {
  while (true) {
    if (pattern.empty()) return path.empty();
    if (pattern[0] == '*') {
      std::size_t stars = 1;
      while (stars < pattern.size() && pattern[stars] == '*') ++stars;
      const bool cross_dirs = stars >= 2;
      std::string_view rest = pattern.substr(stars);
      // "**/" also matches zero directories
      if (cross_dirs && !rest.empty() && rest[0] == '/' && match_from(rest.substr(1), path)) {
        return true;
      }
      for (std::size_t skip = 0; skip <= path.size(); ++skip) {
        if (match_from(rest, path.substr(skip))) return true;
        if (skip < path.size() && !cross_dirs && path[skip] == '/') return false;
      }
      return false;
    }
    if (path.empty()) return false;
    if (pattern[0] == '?') {
      if (path[0] == '/') return false;
    } else if (pattern[0] != path[0]) {
      return false;
    }
    pattern.remove_prefix(1);
    path.remove_prefix(1);
  }
}

std::string_view basename_of(std::string_view path) {
  const std::size_t slash = path.rfind('/');
  return slash == std::string_view::npos ? path : path.substr(slash + 1);
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  return match_from(pattern, path);
}

GitignoreMatcher GitignoreMatcher::parse(std::string_view text,
                                         std::vector<std::string>* warnings) {
  GitignoreMatcher matcher;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (end == text.size() && line.empty()) break;

    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    // unescaped trailing spaces are insignificant
    while (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    Pattern pattern;
    if (line.front() == '!') {
      pattern.negated = true;
      line.remove_prefix(1);
    }
    if (!line.empty() && line.front() == '/') {
      pattern.anchored = true;
      line.remove_prefix(1);
    }
    while (!line.empty() && line.back() == '/') {
      pattern.dir_only = true;
      line.remove_suffix(1);
    }
    if (line.empty()) {
      if (warnings) {
        warnings->push_back("ignoring malformed pattern on line " + std::to_string(line_no));
      }
      continue;
    }
    if (line.find('/') != std::string_view::npos) pattern.anchored = true;
    pattern.glob = std::string(line);
    matcher.patterns_.push_back(std::move(pattern));
  }
  return matcher;
}

bool GitignoreMatcher::pattern_matches(const Pattern& pattern, std::string_view file_path) {
  auto matches_target = [&](std::string_view target) {
    return pattern.anchored ? glob_match(pattern.glob, target)
                            : glob_match(pattern.glob, basename_of(target));
  };
  if (!pattern.dir_only && matches_target(file_path)) return true;
  // directory patterns (and plain ones) also ignore everything beneath a
  // matching ancestor
  std::size_t slash = file_path.rfind('/');
  while (slash != std::string_view::npos) {
    const std::string_view ancestor = file_path.substr(0, slash);
    if (matches_target(ancestor)) return true;
    slash = ancestor.rfind('/');
  }
  return false;
}

bool GitignoreMatcher::ignored(std::string_view path) const {
  bool result = false;
  for (const Pattern& pattern : patterns_) {
    if (pattern_matches(pattern, path)) result = !pattern.negated;
  }
  return result;
}

}  // namespace ctxgate

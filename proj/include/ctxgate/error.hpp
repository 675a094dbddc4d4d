#pragma once

#include <stdexcept>
#include <string>

namespace ctxgate {

enum class Errc {
  not_found,
  not_a_directory,
  permission_denied,
  duplicate_path,
  missing_content,
  malformed_manifest,
  root_not_found,
  root_not_a_directory,
  missing_estimate,
  degenerate_input,
  invalid_proportion,
  too_few_pairs,
  empty_flagged_set,
  bad_theta_syntax,
};

const char* errc_name(Errc code);

// Single exception type for the whole library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ctxgate

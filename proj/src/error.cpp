#include "ctxgate/error.hpp"

namespace ctxgate {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::not_found: return "not_found";
    case Errc::not_a_directory: return "not_a_directory";
    case Errc::permission_denied: return "permission_denied";
    case Errc::duplicate_path: return "duplicate_path";
    case Errc::missing_content: return "missing_content";
    case Errc::malformed_manifest: return "malformed_manifest";
    case Errc::root_not_found: return "root_not_found";
    case Errc::root_not_a_directory: return "root_not_a_directory";
    case Errc::missing_estimate: return "missing_estimate";
    case Errc::degenerate_input: return "degenerate_input";
    case Errc::invalid_proportion: return "invalid_proportion";
    case Errc::too_few_pairs: return "too_few_pairs";
    case Errc::empty_flagged_set: return "empty_flagged_set";
    case Errc::bad_theta_syntax: return "bad_theta_syntax";
  }
  return "unknown";
}

}  // namespace ctxgate

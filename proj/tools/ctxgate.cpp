#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctxgate/analysis.hpp"
#include "ctxgate/filters.hpp"
#include "ctxgate/report.hpp"
#include "ctxgate/scan.hpp"
#include "ctxgate/tokens.hpp"
#include "ctxgate/vfs.hpp"

namespace {

using namespace ctxgate;

struct CommonFlags {
  std::string filter = "hybrid";
  std::string theta;
  std::string format = "json";
  std::string overrides_file;
  std::string config_file;
  std::string out_file;
  std::string relevant_file;
  std::uint64_t budget = 0;
  bool budget_given = false;
};

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::not_found, "cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_output(const std::string& out_file, const std::string& data) {
  if (out_file.empty()) {
    std::cout << data;
    return;
  }
  std::ofstream out(out_file, std::ios::binary);
  if (!out) raise(Errc::not_found, "cannot write '" + out_file + "'");
  out << data;
}

FilterConfig resolve_config(const CommonFlags& flags) {
  FilterConfig config;
  std::string path = flags.config_file;
  if (path.empty()) {
    if (const char* env = std::getenv("CTXGATE_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) config = filter_config_from_json(read_text_file(path));
  if (!flags.theta.empty()) config.theta = parse_size(flags.theta);
  config.validate();
  return config;
}

OverrideSet resolve_overrides(const CommonFlags& flags) {
  if (flags.overrides_file.empty()) return {};
  return OverrideSet::parse(read_text_file(flags.overrides_file));
}

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--filter", flags->filter, "Filter to apply")
      ->check(CLI::IsMember({"none", "gitignore", "minified", "binary", "extension", "size",
                             "semantic", "hybrid"}));
  cmd->add_option("--theta", flags->theta,
                  "Size threshold (bytes, or with KB/MB decimal, KiB/MiB binary suffix)");
  cmd->add_option("--report", flags->format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "table"}));
  cmd->add_option("--overrides", flags->overrides_file,
                  "File of always-allow path patterns, one per line");
  cmd->add_option("--config", flags->config_file, "Filter config JSON (or $CTXGATE_CONFIG)");
  cmd->add_option("--budget", flags->budget, "Token budget; adds a packed selection to the report")
      ->each([flags](const std::string&) { flags->budget_given = true; });
  cmd->add_option("--relevant", flags->relevant_file,
                  "Relevance-label file; adds the flagged-set FPR to the report");
  cmd->add_option("--out", flags->out_file, "Write the report to a file instead of stdout");
}

void emit_report(ScanReport& report, const std::vector<FileRecord>& records,
                 const CommonFlags& flags) {
  if (flags.budget_given) {
    attach_selection(report, records, BudgetConfig{flags.budget, {}});
  }
  if (!flags.relevant_file.empty()) {
    const auto labels = parse_relevance_labels(read_text_file(flags.relevant_file));
    if (!attach_fpr(report, labels)) {
      std::cerr << "warning: nothing flagged, FPR undefined\n";
    }
  }
  for (const ReportRow& row : report.rows) {
    if (row.verdict == Verdict::flagged) {
      std::cerr << "warning: flagged " << row.path << " (" << flag_reason_name(row.reason)
                << ")\n";
    }
  }
  std::string data;
  if (flags.format == "json") {
    data = report_to_json(report);
  } else if (flags.format == "csv") {
    data = report_to_csv(report);
  } else {
    data = report_to_table(report);
  }
  write_output(flags.out_file, data);
}

int cmd_scan(const std::string& root, const CommonFlags& flags,
             const std::string& emit_manifest) {
  RealVfs vfs(root);
  const std::vector<FileRecord> records = scan_repository(vfs);
  if (!emit_manifest.empty()) {
    // snapshot through a separate handle so the report's io counters only
    // reflect the filter pipeline
    const RealVfs snapshot_vfs(root);
    const VirtualManifest manifest = manifest_from_tree(snapshot_vfs, 65'536);
    std::ofstream out(emit_manifest, std::ios::binary);
    if (!out) raise(Errc::not_found, "cannot write '" + emit_manifest + "'");
    out << manifest_to_json(manifest);
  }
  ScanReport report = run_filter(vfs, records, *filter_from_name(flags.filter),
                                 resolve_config(flags), resolve_overrides(flags));
  report.source_kind = "scan";
  report.source = root;
  emit_report(report, records, flags);
  return 0;
}

int cmd_replay(const std::string& manifest_file, const CommonFlags& flags) {
  const MemoryVfs vfs(load_manifest(manifest_file));
  const std::vector<FileRecord> records = scan_repository(vfs);
  ScanReport report = run_filter(vfs, records, *filter_from_name(flags.filter),
                                 resolve_config(flags), resolve_overrides(flags));
  report.source_kind = "replay";
  report.source = manifest_file;
  emit_report(report, records, flags);
  return 0;
}

std::vector<std::uint64_t> parse_theta_list(const std::string& spec) {
  std::vector<std::uint64_t> thetas;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    const std::string item = spec.substr(start, end - start);
    if (!item.empty()) thetas.push_back(parse_size(item));
    start = end + 1;
    if (end == spec.size()) break;
  }
  if (thetas.empty()) raise(Errc::bad_theta_syntax, "empty theta list");
  if (!std::is_sorted(thetas.begin(), thetas.end())) {
    std::cerr << "warning: theta list was not ascending; sorting it\n";
    std::sort(thetas.begin(), thetas.end());
  }
  return thetas;
}

int cmd_sweep(const std::vector<std::string>& inputs, const std::string& theta_spec,
              const CommonFlags& flags) {
  const std::vector<std::uint64_t> thetas = parse_theta_list(theta_spec);

  // per input: reduction at each theta; then corpus stats per theta
  std::vector<std::vector<ReductionResult>> per_input;
  for (const std::string& input : inputs) {
    std::unique_ptr<Vfs> vfs;
    if (std::filesystem::is_directory(input)) {
      vfs = std::make_unique<RealVfs>(input);
    } else {
      vfs = std::make_unique<MemoryVfs>(load_manifest(input));
    }
    const std::vector<FileRecord> records = scan_repository(*vfs);
    TokensByPath tokens;
    for (const FileRecord& r : records) {
      tokens[r.metadata.path] = heuristic_tokens(r.metadata.size);
    }
    per_input.push_back(threshold_sweep(records, tokens, thetas));
  }

  std::vector<CorpusStats> stats;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    std::vector<ReductionResult> column;
    column.reserve(per_input.size());
    for (const auto& results : per_input) column.push_back(results[t]);
    stats.push_back(aggregate_corpus(column));
  }
  write_output(flags.out_file, sweep_to_csv(thetas, stats));
  return 0;
}

int cmd_density(const std::string& root, const std::string& csv_file, const CommonFlags& flags) {
  std::vector<DensityPair> pairs;
  if (!csv_file.empty()) {
    pairs = parse_density_csv(read_text_file(csv_file));
  } else {
    const RealVfs vfs(root);
    const SubwordTokenizer tokenizer;
    const FilterConfig config;
    for (const FileRecord& record : scan_repository(vfs)) {
      if (record.metadata.size == 0 || record.metadata.size > kExactTokenizeCutoff) continue;
      if (binary_filter(vfs, record, config.magic_table).flagged()) continue;
      const TokenEstimate estimate = estimate_tokens(vfs, record, &tokenizer);
      if (estimate.method != TokenMethod::exact) continue;
      pairs.push_back(DensityPair{static_cast<double>(record.metadata.size),
                                  static_cast<double>(estimate.tokens)});
    }
  }
  write_output(flags.out_file, density_study_to_json(fit_token_density(pairs)) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctxgate: size-and-metadata file filtering for LLM context assembly"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string scan_root;
  std::string emit_manifest;
  CommonFlags scan_flags;
  CLI::App* scan = app.add_subcommand("scan", "Scan a repository and report filter decisions");
  scan->add_option("root", scan_root, "Repository root directory")->required();
  scan->add_option("--emit-manifest", emit_manifest,
                   "Also write a replayable manifest of the scanned tree");
  add_common_flags(scan, &scan_flags);

  std::string replay_manifest;
  CommonFlags replay_flags;
  CLI::App* replay =
      app.add_subcommand("replay", "Run the pipeline against a manifest, no disk reads");
  replay->add_option("manifest", replay_manifest, "Manifest JSON file")->required();
  add_common_flags(replay, &replay_flags);

  std::vector<std::string> sweep_inputs;
  std::string sweep_thetas = "50KB,100KB,500KB,1MB,5MB";
  CommonFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "SizeFilter reduction across thresholds (CSV)");
  sweep->add_option("inputs", sweep_inputs, "Repository roots and/or manifest files")
      ->required();
  sweep->add_option("--thetas", sweep_thetas, "Comma-separated thresholds");
  sweep->add_option("--out", sweep_flags.out_file, "Write CSV to a file instead of stdout");

  std::string density_root;
  std::string density_csv;
  CommonFlags density_flags;
  CLI::App* density =
      app.add_subcommand("density", "Token-density study: fit tokens-per-byte (JSON)");
  density->add_option("root", density_root, "Repository root to measure");
  density->add_option("--csv", density_csv, "Precomputed path,size_bytes,tokens CSV");
  density->add_option("--out", density_flags.out_file, "Write JSON to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand(scan)) return cmd_scan(scan_root, scan_flags, emit_manifest);
    if (app.got_subcommand(replay)) return cmd_replay(replay_manifest, replay_flags);
    if (app.got_subcommand(sweep)) return cmd_sweep(sweep_inputs, sweep_thetas, sweep_flags);
    if (app.got_subcommand(density)) {
      if (density_csv.empty() && density_root.empty()) {
        std::cerr << "density: give a root directory or --csv\n";
        return 2;
      }
      return cmd_density(density_root, density_csv, density_flags);
    }
  } catch (const ctxgate::Error& e) {
    std::cerr << "ctxgate: " << e.what() << "\n";
    const bool usage = e.code() == ctxgate::Errc::bad_theta_syntax ||
                       e.code() == ctxgate::Errc::degenerate_input;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "ctxgate: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

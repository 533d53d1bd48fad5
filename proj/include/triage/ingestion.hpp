#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "triage/warning.hpp"

namespace triage {

struct CorpusManifest {
  std::string corpus_name;
  std::filesystem::path source_root;
  std::vector<std::filesystem::path> report_paths;
  std::size_t warning_count = 0;

  bool operator==(const CorpusManifest&) const = default;
};

void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

/// Non-fatal problem found while reading inputs (a skipped record, a missing
/// source file).
struct Diagnostic {
  std::string message;
  std::optional<std::size_t> record_index;

  bool operator==(const Diagnostic&) const = default;
};

struct IngestResult {
  std::vector<Warning> warnings;
  std::vector<Diagnostic> diagnostics;
};

inline constexpr int kDefaultContextLines = 5;

// Infer report.json: array of objects with bug_type, qualifier, file, line,
// procedure. Malformed JSON throws ParseError with the byte offset; records
// missing a required field are skipped with a diagnostic.
IngestResult parse_infer_report(std::string_view report_bytes);

// SpotBugs XML: BugInstance elements with type, LongMessage and SourceLine.
// Malformed XML throws ParseError; instances without a SourceLine are skipped.
IngestResult parse_spotbugs_report(std::string_view report_bytes);

// Fills each warning's snippet with lines [start - context, end + context]
// clamped to the file. A missing file yields an empty snippet plus a
// diagnostic; a source_root that is not a readable directory throws IoError.
IngestResult attach_snippets(std::vector<Warning> warnings,
                             const std::filesystem::path& source_root,
                             int context_lines = kDefaultContextLines);

// Canonical corpus: JSON Lines, one Warning per line.
void write_corpus_jsonl(std::ostream& out, const std::vector<Warning>& warnings);
std::vector<Warning> read_corpus_jsonl(std::istream& in);

std::string read_file(const std::filesystem::path& path);

}  // namespace triage

#include "triage/ingestion.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <fstream>
#include <sstream>

#include "triage/error.hpp"

namespace triage {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

void to_json(nlohmann::json& j, const CorpusManifest& m) {
  std::vector<std::string> reports;
  for (const auto& p : m.report_paths) reports.push_back(p.generic_string());
  j = {{"corpus_name", m.corpus_name},
       {"source_root", m.source_root.generic_string()},
       {"report_paths", reports},
       {"warning_count", m.warning_count}};
}

void from_json(const nlohmann::json& j, CorpusManifest& m) {
  m.corpus_name = j.value("corpus_name", std::string{});
  m.source_root = j.value("source_root", std::string{});
  m.report_paths.clear();
  for (const auto& p : j.value("report_paths", std::vector<std::string>{})) {
    m.report_paths.emplace_back(p);
  }
  m.warning_count = j.value("warning_count", std::size_t{0});
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

Warning make_warning(Analyzer analyzer, std::string kind, std::string message, std::string path,
                     int line, int column) {
  Warning w;
  w.analyzer = analyzer;
  w.kind = std::move(kind);
  w.message = std::move(message);
  w.location.file_path = canonical_path(path);
  w.location.start_line = line;
  w.location.end_line = line;
  w.location.start_col = column > 0 ? column : 0;
  w.location.end_col = w.location.start_col;
  w.id = warning_identity(analyzer, w.kind, w.location.file_path, line, w.message);
  return w;
}

std::string required_string(const nlohmann::json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw InvalidArgument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

void collect_bug_instances(const pt::ptree& node, std::vector<const pt::ptree*>& out) {
  for (const auto& [name, child] : node) {
    if (name == "BugInstance") {
      out.push_back(&child);
    } else if (name != "<xmlattr>") {
      collect_bug_instances(child, out);
    }
  }
}

const pt::ptree* find_source_line(const pt::ptree& bug) {
  if (auto direct = bug.get_child_optional("SourceLine")) return &*direct;
  for (const char* holder : {"Method", "Class", "Field"}) {
    for (const auto& [name, child] : bug) {
      if (name != holder) continue;
      if (auto nested = child.get_child_optional("SourceLine")) return &*nested;
    }
  }
  return nullptr;
}

std::string class_to_path(std::string classname) {
  if (auto dollar = classname.find('$'); dollar != std::string::npos) classname.resize(dollar);
  for (char& c : classname) {
    if (c == '.') c = '/';
  }
  return classname + ".java";
}

}  // namespace

IngestResult parse_infer_report(std::string_view report_bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(report_bytes.begin(), report_bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed Infer report: ") + e.what(), e.byte);
  }
  if (!doc.is_array()) throw ParseError("Infer report must be a JSON array", 0);

  IngestResult result;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    try {
      if (!rec.is_object()) throw InvalidArgument("record is not an object");
      std::string bug_type = required_string(rec, "bug_type");
      std::string qualifier = required_string(rec, "qualifier");
      std::string file = required_string(rec, "file");
      required_string(rec, "procedure");
      auto line_it = rec.find("line");
      if (line_it == rec.end()) throw InvalidArgument("missing field 'line'");
      if (!line_it->is_number_integer()) throw InvalidArgument("field 'line' is not an integer");
      int line = line_it->get<int>();
      int column = 0;
      if (auto col = rec.find("column"); col != rec.end() && col->is_number_integer()) {
        column = col->get<int>();
      }
      result.warnings.push_back(
          make_warning(Analyzer::infer, bug_type, qualifier, file, line, column));
    } catch (const InvalidArgument& e) {
      result.diagnostics.push_back({"record " + std::to_string(i) + " skipped: " + e.what(), i});
    }
  }
  return result;
}

IngestResult parse_spotbugs_report(std::string_view report_bytes) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(report_bytes)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed SpotBugs report: ") + e.what());
  }

  std::vector<const pt::ptree*> bugs;
  collect_bug_instances(tree, bugs);

  IngestResult result;
  for (std::size_t i = 0; i < bugs.size(); ++i) {
    const pt::ptree& bug = *bugs[i];
    try {
      std::string type = bug.get<std::string>("<xmlattr>.type", "");
      if (type.empty()) throw InvalidArgument("BugInstance without a type");
      const pt::ptree* source_line = find_source_line(bug);
      if (source_line == nullptr) throw InvalidArgument("BugInstance without SourceLine");
      int start = source_line->get<int>("<xmlattr>.start", 0);
      if (start < 1) throw InvalidArgument("SourceLine without a start line");
      int end = source_line->get<int>("<xmlattr>.end", start);
      std::string path = source_line->get<std::string>("<xmlattr>.sourcepath", "");
      if (path.empty()) path = class_to_path(source_line->get<std::string>("<xmlattr>.classname", ""));
      if (path == ".java") throw InvalidArgument("SourceLine without classname or sourcepath");
      std::string message = bug.get<std::string>("LongMessage", "");
      if (message.empty()) message = bug.get<std::string>("ShortMessage", type);
      Warning w = make_warning(Analyzer::spotbugs, type, message, path, start, 0);
      w.location.end_line = std::max(start, end);
      result.warnings.push_back(std::move(w));
    } catch (const std::exception& e) {
      result.diagnostics.push_back(
          {"BugInstance " + std::to_string(i) + " skipped: " + e.what(), i});
    }
  }
  return result;
}

IngestResult attach_snippets(std::vector<Warning> warnings, const fs::path& source_root,
                             int context_lines) {
  if (context_lines < 0) throw InvalidArgument("context_lines must be >= 0");
  std::error_code ec;
  if (!fs::is_directory(source_root, ec)) {
    throw IoError("source root is not a readable directory: " + source_root.string());
  }

  std::map<std::string, std::optional<std::vector<std::string>>> cache;
  auto lines_of = [&](const std::string& rel) -> const std::optional<std::vector<std::string>>& {
    auto [it, inserted] = cache.try_emplace(rel);
    if (inserted) {
      std::ifstream in(source_root / rel, std::ios::binary);
      if (in) {
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          lines.push_back(std::move(line));
        }
        it->second = std::move(lines);
      }
    }
    return it->second;
  };

  IngestResult result;
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    Warning& w = warnings[i];
    const auto& lines = lines_of(w.location.file_path);
    if (!lines) {
      w.snippet.clear();
      result.diagnostics.push_back({"source file not found: " + w.location.file_path, i});
      continue;
    }
    const long n = static_cast<long>(lines->size());
    long first = std::max(1L, static_cast<long>(w.location.start_line) - context_lines);
    long last = std::min(n, static_cast<long>(w.location.end_line) + context_lines);
    std::string snippet;
    for (long l = first; l <= last; ++l) {
      if (l > first) snippet += '\n';
      snippet += (*lines)[static_cast<std::size_t>(l - 1)];
    }
    w.snippet = std::move(snippet);
  }
  result.warnings = std::move(warnings);
  return result;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<Warning>& warnings) {
  for (const auto& w : warnings) out << nlohmann::json(w).dump() << '\n';
}

std::vector<Warning> read_corpus_jsonl(std::istream& in) {
  std::vector<Warning> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<Warning>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what(), line_start);
    } catch (const InvalidArgument& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what(), line_start);
    }
  }
  return out;
}

}  // namespace triage

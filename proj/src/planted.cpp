#include "triage/planted.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "triage/error.hpp"

namespace triage {

namespace {

constexpr std::array kGroups = {"billing", "catalog", "config",  "gateway",
                                "ledger",  "search",  "session", "storage"};
constexpr std::array kSignatureCalls = {"getProperty", "readFile",    "parseHeader", "lookupKey",
                                        "resolvePath", "fetchRecord", "decodeToken", "loadEntry"};
constexpr std::array kNoiseCalls = {"toString", "equals", "size", "get", "put", "append", "trim",
                                    "isEmpty"};
constexpr std::array kReturnTypes = {"void", "int", "String", "boolean", "Object"};
constexpr std::array kFields = {"Config.TIMEOUT", "Constants.EMPTY", "StringUtils.COMMA",
                                "Limits.MAX"};
constexpr std::array kClassSuffixes = {"Service", "Helper"};
constexpr const char* kCommonPackage = "com.example.common";

template <typename Array>
const char* pick(const Array& a, SimRng& rng) {
  return a[rng.below(a.size())];
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct Builder {
  PlantedCorpus& out;
  SimRng& rng;
  int next = 0;

  // package: fully qualified; calls: snippet calls, the first one is the
  // dereferenced value.
  // Noise overrides (rettype, field) let callers spread noise values.
  WarningId add(const std::string& package, const std::vector<std::string>& calls,
                LabelValue truth, const char* rettype = nullptr, const char* field = nullptr) {
    int index = next++;
    std::string group = package.substr(package.rfind('.') + 1);
    std::string cls = capitalize(group) + kClassSuffixes[rng.below(kClassSuffixes.size())];
    std::string dir = package;
    std::replace(dir.begin(), dir.end(), '.', '/');
    std::string path = "src/main/java/" + dir + "/" + cls + ".java";
    int line = 10 + 7 * index;
    std::string message = "object returned by `" + calls.front() +
                          "(...)` could be null and is dereferenced at line " +
                          std::to_string(line) + ".";

    Warning w;
    w.analyzer = Analyzer::infer;
    w.kind = "NULL_DEREFERENCE";
    w.message = message;
    w.location = {path, line, line, 0, 0};
    w.id = warning_identity(w.analyzer, w.kind, path, line, message);
    w.enclosing.package = package;
    w.enclosing.class_name = package + "." + cls;
    w.enclosing.return_type = rettype ? rettype : pick(kReturnTypes, rng);

    std::size_t extra = rng.below(6);
    w.snippet = "  " + w.enclosing.return_type + " handle" + std::to_string(index) + "(String key) {\n";
    for (std::size_t i = 0; i < calls.size(); ++i) {
      w.snippet += "    Object v" + std::to_string(i) + " = source." + calls[i] + "(key);\n";
    }
    for (std::size_t i = 0; i < extra; ++i) w.snippet += "    log(key);\n";
    w.snippet += "  }\n";

    auto fact = [&](Relation r, const std::string& v) {
      out.facts.push_back({w.id, Predicate::make(r, v), Provenance::containment_scan});
    };
    fact(Relation::package, package);
    fact(Relation::classname, w.enclosing.class_name);
    fact(Relation::rettype, w.enclosing.return_type);
    if (field || rng.below(2) == 0) {
      std::string f = field ? field : pick(kFields, rng);
      w.enclosing.fields_used.push_back(f);
      fact(Relation::fields, f);
    }
    for (const auto& c : calls) fact(Relation::code_element, "call:" + c);

    out.ground_truth[w.id] = truth;
    out.warnings.push_back(std::move(w));
    return out.warnings.back().id;
  }
};

}  // namespace

KnowledgeBase PlantedCorpus::knowledge_base() const {
  KnowledgeBase kb;
  for (const auto& w : warnings) kb.add_warning(w.id);
  for (const auto& f : facts) kb.add_fact(f);
  return kb;
}

PlantedCorpus make_planted_corpus(const PlantedOptions& opts) {
  if (opts.rules < 1 || opts.rules > static_cast<int>(kGroups.size())) {
    throw InvalidArgument("planted rule count must be in 1.." + std::to_string(kGroups.size()));
  }
  if (opts.min_cluster < 1 || opts.uninteresting < opts.rules * opts.min_cluster) {
    throw InvalidArgument("not enough uninteresting warnings for the requested clusters");
  }
  if (opts.interesting < 0) throw InvalidArgument("interesting count must be >= 0");

  SimRng rng(splitmix64(opts.seed));
  PlantedCorpus out;
  Builder b{out, rng};

  std::vector<int> sizes(static_cast<std::size_t>(opts.rules), opts.min_cluster);
  for (int left = opts.uninteresting - opts.rules * opts.min_cluster; left > 0; --left) {
    ++sizes[rng.below(sizes.size())];
  }

  auto package_of = [](int g) { return std::string("com.example.") + kGroups[g]; };
  auto noise_calls = [&] {
    std::vector<std::string> calls;
    std::size_t n = 1 + rng.below(2);
    for (std::size_t i = 0; i < n; ++i) {
      std::string c = pick(kNoiseCalls, rng);
      if (std::find(calls.begin(), calls.end(), c) == calls.end()) calls.push_back(c);
    }
    return calls;
  };

  for (int g = 0; g < opts.rules; ++g) {
    out.planted_rules.emplace_back(
        g + 1, std::vector<Predicate>{Predicate::make(Relation::package, package_of(g)),
                                      Predicate::make(Relation::code_element,
                                                      std::string("call:") + kSignatureCalls[g])});
    IdSet cluster;
    for (int i = 0; i < sizes[static_cast<std::size_t>(g)]; ++i) {
      std::vector<std::string> calls{kSignatureCalls[g]};
      for (auto& c : noise_calls()) calls.push_back(c);
      cluster.insert(b.add(package_of(g), calls, LabelValue::uninteresting));
    }
    out.clusters.push_back(std::move(cluster));
  }

  // Distractors: the first ones share each half of every signature in turn,
  // the rest pick a half at random or are unrelated. Noise values are dealt
  // round-robin so each one also occurs on an interesting warning, which
  // keeps noise from separating the two classes on its own.
  for (int i = 0; i < opts.interesting; ++i) {
    int g, half;
    if (i < 2 * opts.rules) {
      g = i / 2;
      half = i % 2;
    } else {
      g = static_cast<int>(rng.below(static_cast<std::size_t>(opts.rules)));
      half = static_cast<int>(rng.below(3));
    }
    auto slot = static_cast<std::size_t>(i);
    std::vector<std::string> calls{kNoiseCalls[slot % kNoiseCalls.size()]};
    for (auto& c : noise_calls()) {
      if (c != calls.front()) calls.push_back(c);
    }
    std::string package = kCommonPackage;
    if (half == 0) package = package_of(g);
    if (half == 1) calls.insert(calls.begin(), kSignatureCalls[g]);
    b.add(package, calls, LabelValue::interesting, kReturnTypes[slot % kReturnTypes.size()],
          slot < kFields.size() ? kFields[slot] : nullptr);
  }
  return out;
}

}  // namespace triage

#include "codec/context.h"

#include <algorithm>
#include <cctype>
#include <set>

#include "codec/decompile.h"
#include "codec/error.h"
#include "codec/sketch.h"

namespace codec {
namespace {

constexpr std::array<std::string_view, kNumEvidenceTypes> kTypeNames = {
    "class_name",
    "field_types",
    "surrounding_return_types",
    "surrounding_formal_params",
    "surrounding_api_sequences",
    "surrounding_method_names",
    "method_name",
    "javadoc",
    "api_calls",
    "api_sequences",
    "return_type",
    "formal_params",
    "types",
    "keywords",
};

bool known(const std::string& s) { return !s.empty() && s != kUnknown; }

void push_unique(std::vector<std::string>& out, std::set<std::string>& seen,
                 const std::string& tok) {
  if (seen.insert(tok).second) out.push_back(tok);
}

std::vector<std::string> call_tokens(const std::vector<CallExpr>& calls) {
  std::vector<std::string> out;
  out.reserve(calls.size());
  for (const auto& c : calls) out.push_back(c.qualified_name());
  return out;
}

EvidenceInstance formal_instance(const Param& p) {
  EvidenceInstance inst;
  if (known(p.type)) inst.push_back(p.type);
  if (known(p.name))
    for (auto& w : split_camel_case(p.name)) inst.push_back(std::move(w));
  return inst;
}

void add(ContextBundle& b, EvidenceType t, EvidenceInstance inst) {
  if (!inst.empty()) b[t].push_back(std::move(inst));
}

// Identifiers and types mentioned in a method body.
struct BodyScan {
  std::vector<std::string> types;
  std::set<std::string> seen_types;
  std::vector<std::string> keywords;
  std::set<std::string> seen_keywords;

  void add_type(const std::string& t) {
    if (known(t)) push_unique(types, seen_types, t);
  }
  void add_identifier(const std::string& id) {
    if (!known(id) || id == "this") return;
    for (const auto& w : split_camel_case(id)) push_unique(keywords, seen_keywords, w);
  }

  void expr(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kName:
        // Capitalized unresolved names are static receivers (types), not keywords.
        if (!e.text.empty() && std::isupper(static_cast<unsigned char>(e.text[0]))) {
          add_type(e.text);
        } else {
          add_identifier(e.text);
        }
        break;
      case Expr::Kind::kNew:
        add_type(e.text);
        break;
      case Expr::Kind::kField:
        add_identifier(e.text);
        break;
      default:
        break;
    }
    for (const auto& c : e.children) expr(c);
  }

  void stmt(const Stmt& s) {
    if (s.kind == Stmt::Kind::kDecl) {
      add_type(s.type);
      add_identifier(s.name);
    }
    for (const auto& t : s.catch_types) add_type(t);
    for (const auto& n : s.catch_names) add_identifier(n);
    for (const auto& e : s.exprs) expr(e);
    for (const auto& c : s.children) stmt(c);
  }
};

}  // namespace

std::string_view evidence_type_name(EvidenceType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<EvidenceType> evidence_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == name) return static_cast<EvidenceType>(i);
  return std::nullopt;
}

std::size_t ContextBundle::instance_count() const {
  std::size_t n = 0;
  for (const auto& v : evidences) n += v.size();
  return n;
}

std::vector<std::string> split_camel_case(std::string_view id) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) words.push_back(std::move(cur));
    cur.clear();
  };
  auto cls = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isdigit(u)) return 0;
    if (std::isupper(u)) return 1;
    if (std::islower(u)) return 2;
    return 3;
  };
  for (std::size_t i = 0; i < id.size(); ++i) {
    const char c = id[i];
    const int k = cls(c);
    if (k == 3) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const int prev = cls(id[i - 1]);
      const bool digit_edge = (k == 0) != (prev == 0);
      const bool lower_to_upper = prev == 2 && k == 1;
      // "HTMLParser": the last capital of a run starts the next word.
      const bool acronym_end = prev == 1 && k == 1 && i + 1 < id.size() && cls(id[i + 1]) == 2;
      if (digit_edge || lower_to_upper || acronym_end) flush();
    }
    cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  flush();
  return words;
}

// The description ends at the first block tag; an inline tag such as
// {@code x} loses only its tag word.
std::vector<std::string> tokenize_javadoc(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  bool in_tag = false;
  auto flush = [&] {
    if (!cur.empty() && !in_tag) out.push_back(cur);
    cur.clear();
    in_tag = false;
  };
  char prev = ' ';
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '@' && cur.empty()) {
      if (prev != '{') break;
      in_tag = true;
    } else if (std::isalnum(u) || c == '_') {
      cur += static_cast<char>(std::tolower(u));
    } else {
      flush();
    }
    prev = c;
  }
  flush();
  return out;
}

ContextBundle extract_context(const ClassUnit& unit, std::size_t target) {
  if (target >= unit.methods.size())
    throw UsageError("extract_context: method index " + std::to_string(target) +
                     " out of range for class " + unit.class_name);
  ContextBundle b;

  add(b, EvidenceType::kClassName, split_camel_case(unit.class_name));
  for (const auto& f : unit.fields)
    if (known(f.type)) add(b, EvidenceType::kFieldTypes, {f.type});

  for (std::size_t i = 0; i < unit.methods.size(); ++i) {
    if (i == target) continue;
    const MethodAst& m = unit.methods[i];
    if (known(m.return_type)) add(b, EvidenceType::kSurroundingReturnTypes, {m.return_type});
    for (const auto& p : m.formals) add(b, EvidenceType::kSurroundingFormalParams, formal_instance(p));
    if (!m.is_hole()) {
      const SketchAst sk = decompile(m, &unit);
      for (const auto& seq : extract_api_sequences(sk))
        add(b, EvidenceType::kSurroundingApiSequences, call_tokens(seq));
    }
    if (known(m.name)) add(b, EvidenceType::kSurroundingMethodNames, split_camel_case(m.name));
  }

  const MethodAst& m = unit.methods[target];
  if (known(m.name)) add(b, EvidenceType::kMethodName, split_camel_case(m.name));
  if (m.javadoc) add(b, EvidenceType::kJavadoc, tokenize_javadoc(*m.javadoc));
  if (!m.is_hole()) {
    const SketchAst sk = decompile(m, &unit);
    EvidenceInstance calls;
    std::set<std::string> seen;
    for (const auto& c : collect_calls(sk.body)) push_unique(calls, seen, c.qualified_name());
    add(b, EvidenceType::kApiCalls, std::move(calls));
    for (const auto& seq : extract_api_sequences(sk))
      add(b, EvidenceType::kApiSequences, call_tokens(seq));
  }
  if (known(m.return_type)) add(b, EvidenceType::kReturnType, {m.return_type});
  for (const auto& p : m.formals) add(b, EvidenceType::kFormalParams, formal_instance(p));
  if (!m.is_hole()) {
    BodyScan scan;
    scan.stmt(m.body);
    add(b, EvidenceType::kTypes, std::move(scan.types));
    add(b, EvidenceType::kKeywords, std::move(scan.keywords));
  }
  return b;
}

std::size_t find_hole(const ClassUnit& unit) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < unit.methods.size(); ++i) {
    if (!unit.methods[i].is_hole()) continue;
    if (found)
      throw DataError("ambiguous query: class " + unit.class_name + " has more than one " +
                      std::string(kHoleMarker));
    found = i;
  }
  if (!found)
    throw DataError("ambiguous query: class " + unit.class_name + " has no " +
                    std::string(kHoleMarker));
  return *found;
}

HoleLocation find_hole(const std::vector<ClassUnit>& units) {
  std::optional<HoleLocation> found;
  for (std::size_t c = 0; c < units.size(); ++c) {
    for (std::size_t i = 0; i < units[c].methods.size(); ++i) {
      if (!units[c].methods[i].is_hole()) continue;
      if (found) throw DataError("ambiguous query: more than one " + std::string(kHoleMarker));
      found = HoleLocation{c, i};
    }
  }
  if (!found) throw DataError("ambiguous query: no " + std::string(kHoleMarker) + " found");
  return *found;
}

}  // namespace codec

#pragma once

// MJ: the Java-like corpus language. Classes hold fields and methods; method
// bodies use typed declarations, expression statements (calls, `new`,
// assignments), if/else, while, try/catch, return, and the search hole
// `__CODE_SEARCH__;`. Unknown names and types in a query may be written `?`.
// Generics, lambdas, inheritance and imports are not modelled (import and
// package lines are skipped).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codec {

inline constexpr std::string_view kHoleMarker = "__CODE_SEARCH__";
inline constexpr std::string_view kUnknown = "?";

// Source positions are carried for diagnostics only; they never take part in
// structural equality.
struct SourcePos {
  int line = 0;
  int column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

struct Expr {
  enum class Kind {
    kName,     // text = identifier
    kLiteral,  // text = source spelling, literal_type = int/double/String/char/boolean/null
    kNew,      // text = type, children = ctor args
    kCall,     // text = method; children = [receiver?] args; has_receiver
    kField,    // text = field name, children = {object}
    kUnary,    // text = operator, children = {operand}
    kBinary,   // text = operator, children = {lhs, rhs}
    kAssign,   // text = operator (=, +=, ...), children = {target, value}
  };

  Kind kind = Kind::kName;
  std::string text;
  std::string literal_type;
  bool has_receiver = false;
  std::vector<Expr> children;
  SourcePos pos;

  bool operator==(const Expr&) const = default;
};

struct Stmt {
  enum class Kind {
    kBlock,   // children = statements
    kDecl,    // type, name, exprs = {init}?
    kExpr,    // exprs = {e}
    kIf,      // exprs = {cond}, children = {then, else?}
    kWhile,   // exprs = {cond}, children = {body}
    kTry,     // children = {block, handler...}, catch_types/catch_names
    kReturn,  // exprs = {e}?
    kHole,
  };

  Kind kind = Kind::kBlock;
  std::string type;
  std::string name;
  std::vector<Expr> exprs;
  std::vector<Stmt> children;
  std::vector<std::string> catch_types;
  std::vector<std::string> catch_names;
  SourcePos pos;

  bool operator==(const Stmt&) const = default;
};

struct Param {
  std::string type;
  std::string name;
  bool operator==(const Param&) const = default;
};

struct MethodAst {
  std::optional<std::string> javadoc;  // comment text without the delimiters
  std::string return_type;
  std::string name;
  std::vector<Param> formals;
  std::vector<std::string> throws;
  Stmt body;  // a kBlock; for a query target it holds exactly one kHole
  SourcePos pos;

  bool is_hole() const;
  bool operator==(const MethodAst&) const = default;
};

struct ClassUnit {
  std::optional<std::string> javadoc;
  std::string class_name;
  std::vector<Param> fields;
  std::vector<MethodAst> methods;
  SourcePos pos;

  bool operator==(const ClassUnit&) const = default;
};

// Throws ParseError (line/column) on malformed input.
std::vector<ClassUnit> parse_source(std::string_view text);
// Parses a single method declaration (with optional leading JavaDoc).
MethodAst parse_method(std::string_view text);

std::string print_class(const ClassUnit& unit);
std::string print_method(const MethodAst& method, int indent = 0);
std::string print_source(const std::vector<ClassUnit>& units);

// Structural equality of header (return type, name, formals, throws) and
// body. JavaDoc and positions are ignored.
bool exact_match(const MethodAst& a, const MethodAst& b);

// Replaces the method's body with the hole marker.
MethodAst with_hole_body(const MethodAst& method);

}  // namespace codec

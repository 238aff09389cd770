#pragma once

// The Sketch language: API calls, types and control shape of a method, with
// variables, expressions and literals abstracted away.
//
//   Y     ::= Y_api ; Y_ret ; Y_fp
//   Y_api ::= skip | call Cexp | Y1 ; Y2 | if Cseq then Y1 else Y2
//           | while Cseq do Y1 | try Y catch(t1) Y1 ... catch(tk) Yk
//   Cexp  ::= t0.m(t1, ..., tk)

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace codec {

struct CallExpr {
  std::string receiver_type;
  std::string method_name;
  std::vector<std::string> arg_types;

  // "Recv.method", the form used for call tokens in evidence.
  std::string qualified_name() const { return receiver_type + "." + method_name; }

  bool operator==(const CallExpr&) const = default;
  auto operator<=>(const CallExpr&) const = default;
};

using CallSeq = std::vector<CallExpr>;

// One node of Y_api. Children layout by kind:
//   kSeq:   children = statements in order (always >= 2 after normalization)
//   kIf:    cond = Cseq, children = {then, else}
//   kWhile: cond = Cseq, children = {body}
//   kTry:   children = {body, handler_1, ..., handler_k}, catch_types = {t_1..t_k}
struct SketchStmt {
  enum class Kind { kSkip, kCall, kSeq, kIf, kWhile, kTry };

  Kind kind = Kind::kSkip;
  CallExpr call;
  std::vector<CallExpr> cond;
  std::vector<SketchStmt> children;
  std::vector<std::string> catch_types;

  static SketchStmt skip() { return {}; }
  static SketchStmt make_call(CallExpr c);
  // Flattens nested sequences and drops skips; returns skip for an empty
  // list and the sole element for a singleton.
  static SketchStmt make_seq(std::vector<SketchStmt> items);
  static SketchStmt make_if(std::vector<CallExpr> cond, SketchStmt then_branch,
                            SketchStmt else_branch);
  static SketchStmt make_while(std::vector<CallExpr> cond, SketchStmt body);
  static SketchStmt make_try(SketchStmt body, std::vector<std::string> catch_types,
                             std::vector<SketchStmt> handlers);

  bool contains_call() const;

  bool operator==(const SketchStmt&) const = default;
};

struct SketchAst {
  std::string ret_type;
  std::vector<std::string> formal_param_types;
  SketchStmt body;

  bool operator==(const SketchAst&) const = default;
};

// ---- text format -----------------------------------------------------------
//
// One statement per line, two-space indentation for nesting:
//
//   return void
//   formals (File)
//   FileReader.FileReader (File)
//   while
//     BufferedReader.readLine ()
//   do
//     skip
//
// serialize_body() emits only the Y_api part.

std::string serialize_call(const CallExpr& call);
std::string serialize_body(const SketchStmt& body);
std::string serialize_sketch(const SketchAst& sketch);

// Throws ParseError with 1-based line/column.
SketchAst parse_sketch(std::string_view text);
SketchStmt parse_sketch_body(std::string_view text);

// ---- tokens ----------------------------------------------------------------

// Structural keywords of the token linearization.
namespace sketch_token {
inline constexpr std::string_view kRet = "<ret>";
inline constexpr std::string_view kFpEnd = "</fp>";
inline constexpr std::string_view kSkip = "skip";
inline constexpr std::string_view kCall = "call";
inline constexpr std::string_view kCallEnd = "</call>";
inline constexpr std::string_view kSeq = "seq";
inline constexpr std::string_view kSeqEnd = "</seq>";
inline constexpr std::string_view kIf = "if";
inline constexpr std::string_view kThen = "then";
inline constexpr std::string_view kElse = "else";
inline constexpr std::string_view kWhile = "while";
inline constexpr std::string_view kDo = "do";
inline constexpr std::string_view kTry = "try";
inline constexpr std::string_view kCatch = "catch";
inline constexpr std::string_view kTryEnd = "</try>";
}  // namespace sketch_token

inline constexpr std::size_t kDepthBins = 8;

struct SketchTokens {
  std::vector<std::string> tokens;
  // depth_histogram[k] counts statement nodes at depth k (the body root is
  // depth 0); deeper nodes accumulate in the last bin.
  std::vector<std::size_t> depth_histogram;
};

// Pre-order linearization:
//   <ret> ret_type formal_types... </fp> body
//   skip                 -> skip
//   call t0.m(t1..tk)    -> call t0 m t1 .. tk </call>
//   Y1; ..; Yn           -> seq Y1 .. Yn </seq>
//   if C then Y1 else Y2 -> if C.. then Y1 else Y2      (each cond call as above)
//   while C do Y         -> while C.. do Y
//   try Y catch(t) Y'..  -> try Y catch t Y' .. </try>
SketchTokens sketch_tokens(const SketchAst& sketch);

// ---- API call sequences ----------------------------------------------------

inline constexpr std::size_t kDefaultSequenceLimit = 100;

// Distinct call sequences along control-flow paths, in first-seen order:
// then-branch before else-branch, loops taken zero times before once, try
// bodies completing normally before each catch (entered after the whole
// guarded body). Stops once `limit` distinct sequences are found.
std::vector<CallSeq> extract_api_sequences(const SketchAst& sketch,
                                           std::size_t limit = kDefaultSequenceLimit);

// All calls in pre-order, including condition calls.
std::vector<CallExpr> collect_calls(const SketchStmt& stmt);

// ---- equivalence -----------------------------------------------------------

bool api_match(const SketchAst& a, const SketchAst& b);
bool seq_match(const SketchAst& a, const SketchAst& b,
               std::size_t limit = kDefaultSequenceLimit);
bool sketch_match(const SketchAst& a, const SketchAst& b);

}  // namespace codec

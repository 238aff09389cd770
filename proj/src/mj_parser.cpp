#include <cctype>
#include <set>

#include "codec/error.h"
#include "codec/mj.h"

namespace codec {
namespace {

enum class Tok { kIdent, kNumber, kString, kChar, kPunct, kJavadoc, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

const std::set<std::string, std::less<>> kModifiers = {
    "public", "private", "protected", "static",    "final",   "abstract",
    "native", "synchronized", "transient", "volatile", "default"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments(out);
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::kEnd;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        t.kind = Tok::kIdent;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_' || src_[pos_] == '$'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::kNumber;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '.'))
          t.text += advance();
      } else if (c == '"' || c == '\'') {
        t.kind = c == '"' ? Tok::kString : Tok::kChar;
        t.text += advance();
        while (true) {
          if (pos_ >= src_.size() || src_[pos_] == '\n')
            throw ParseError("unterminated literal", t.line, t.column);
          const char ch = advance();
          t.text += ch;
          if (ch == '\\' && pos_ < src_.size()) {
            t.text += advance();
          } else if (ch == c) {
            break;
          }
        }
      } else {
        t.kind = Tok::kPunct;
        static const char* const kMulti[] = {"&&", "||", "==", "!=", "<=", ">=", "+=", "-=",
                                             "*=", "/=", "%=", "++", "--"};
        bool matched = false;
        for (const char* op : kMulti) {
          if (src_.substr(pos_, 2) == op) {
            t.text += advance();
            t.text += advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          static const std::string_view kSingle = "(){}[];,.=<>!+-*/%?&|:@";
          if (kSingle.find(c) == std::string_view::npos)
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
          t.text += advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments(std::vector<Token>& out) {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_, 2) == "/*") {
        Token doc;
        doc.line = line_;
        doc.column = col_;
        const bool is_doc = src_.substr(pos_, 3) == "/**" && src_.substr(pos_, 4) != "/**/";
        advance();
        advance();
        std::string body;
        while (true) {
          if (pos_ >= src_.size()) throw ParseError("unterminated comment", doc.line, doc.column);
          if (src_.substr(pos_, 2) == "*/") {
            advance();
            advance();
            break;
          }
          body += advance();
        }
        if (is_doc) {
          doc.kind = Tok::kJavadoc;
          doc.text = clean_javadoc(body.substr(1));
          out.push_back(std::move(doc));
        }
      } else {
        break;
      }
    }
  }

  // Drops leading '*' decorations and collapses whitespace runs.
  static std::string clean_javadoc(std::string_view raw) {
    std::string out;
    bool at_line_start = true;
    bool pending_space = false;
    for (char c : raw) {
      if (c == '\n') {
        at_line_start = true;
        pending_space = true;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        pending_space = true;
        continue;
      }
      if (at_line_start && c == '*') continue;
      at_line_start = false;
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += c;
    }
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  std::vector<ClassUnit> parse_file() {
    std::vector<ClassUnit> out;
    while (!at_end()) {
      if (peek_ident("import") || peek_ident("package")) {
        while (!at_end() && !peek_punct(";")) ++cur_;
        expect_punct(";");
        continue;
      }
      out.push_back(parse_class());
    }
    return out;
  }

  MethodAst parse_single_method() {
    std::optional<std::string> doc = take_javadoc();
    skip_modifiers();
    std::string type = parse_type();
    std::string name = parse_name();
    MethodAst m = parse_method_rest(std::move(doc), std::move(type), std::move(name));
    if (!at_end()) fail("trailing input after method");
    return m;
  }

 private:
  // ---- token helpers ----
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(cur_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_end() const { return peek().kind == Tok::kEnd; }
  bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kPunct && peek(ahead).text == p;
  }
  bool peek_ident(std::string_view id, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && peek(ahead).text == id;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, t.line, t.column);
  }
  void expect_punct(std::string_view p) {
    if (!peek_punct(p)) fail("expected '" + std::string(p) + "'");
    ++cur_;
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::kIdent) fail(std::string("expected ") + what);
    return toks_[cur_++].text;
  }
  SourcePos pos() const { return {peek().line, peek().column}; }

  std::optional<std::string> take_javadoc() {
    std::optional<std::string> doc;
    while (peek().kind == Tok::kJavadoc) doc = toks_[cur_++].text;
    return doc;
  }
  void skip_stray_javadoc() {
    while (peek().kind == Tok::kJavadoc) ++cur_;
  }
  void skip_modifiers() {
    while (peek().kind == Tok::kIdent && kModifiers.count(peek().text) > 0) ++cur_;
  }

  // ---- declarations ----
  ClassUnit parse_class() {
    ClassUnit unit;
    unit.javadoc = take_javadoc();
    skip_modifiers();
    unit.pos = pos();
    if (!peek_ident("class")) fail("expected 'class'");
    ++cur_;
    unit.class_name = expect_ident("class name");
    expect_punct("{");
    while (!peek_punct("}")) {
      if (at_end()) fail("expected '}' to close class " + unit.class_name);
      std::optional<std::string> doc = take_javadoc();
      if (peek_punct("}")) break;
      skip_modifiers();
      const SourcePos member_pos = pos();
      std::string type = parse_type();
      std::string name = parse_name();
      if (peek_punct("(")) {
        MethodAst m = parse_method_rest(std::move(doc), std::move(type), std::move(name));
        m.pos = member_pos;
        unit.methods.push_back(std::move(m));
      } else {
        if (peek_punct("=")) {
          ++cur_;
          parse_expr();
        }
        expect_punct(";");
        unit.fields.push_back({std::move(type), std::move(name)});
      }
    }
    expect_punct("}");
    return unit;
  }

  std::string parse_name() {
    if (peek_punct("?")) {
      ++cur_;
      return std::string(kUnknown);
    }
    return expect_ident("name");
  }

  std::string parse_type() {
    if (peek_punct("?")) {
      ++cur_;
      return std::string(kUnknown);
    }
    std::string t = expect_ident("type");
    while (peek_punct(".") && peek(1).kind == Tok::kIdent) {
      cur_ += 2;
      t += "." + toks_[cur_ - 1].text;
    }
    while (peek_punct("[") && peek_punct("]", 1)) {
      cur_ += 2;
      t += "[]";
    }
    return t;
  }

  MethodAst parse_method_rest(std::optional<std::string> doc, std::string type,
                              std::string name) {
    MethodAst m;
    m.javadoc = std::move(doc);
    m.return_type = std::move(type);
    m.name = std::move(name);
    expect_punct("(");
    if (!peek_punct(")")) {
      while (true) {
        skip_modifiers();
        Param p;
        p.type = parse_type();
        p.name = parse_name();
        m.formals.push_back(std::move(p));
        if (!peek_punct(",")) break;
        ++cur_;
      }
    }
    expect_punct(")");
    if (peek_ident("throws")) {
      ++cur_;
      while (true) {
        m.throws.push_back(parse_type());
        if (!peek_punct(",")) break;
        ++cur_;
      }
    }
    if (!peek_punct("{")) fail("expected method body");
    m.body = parse_block(/*method_body=*/true);
    return m;
  }

  // ---- statements ----
  Stmt parse_block(bool method_body = false) {
    Stmt block;
    block.kind = Stmt::Kind::kBlock;
    block.pos = pos();
    expect_punct("{");
    while (!peek_punct("}")) {
      if (at_end()) fail("expected '}'");
      skip_stray_javadoc();
      if (peek_punct("}")) break;
      if (peek_ident(kHoleMarker)) {
        if (!method_body || !block.children.empty())
          fail("the search hole must be the entire method body");
        Stmt hole;
        hole.kind = Stmt::Kind::kHole;
        hole.pos = pos();
        ++cur_;
        if (peek_punct(";")) ++cur_;
        skip_stray_javadoc();
        if (!peek_punct("}")) fail("the search hole must be the entire method body");
        block.children.push_back(std::move(hole));
        break;
      }
      block.children.push_back(parse_stmt());
    }
    expect_punct("}");
    return block;
  }

  // Bodies of if/while are always blocks.
  Stmt parse_body() {
    if (peek_punct("{")) return parse_block();
    Stmt block;
    block.kind = Stmt::Kind::kBlock;
    block.pos = pos();
    Stmt s = parse_stmt();
    if (!(s.kind == Stmt::Kind::kBlock && s.children.empty())) block.children.push_back(std::move(s));
    return block;
  }

  bool looks_like_decl() const {
    std::size_t i = 0;
    if (peek(i).kind != Tok::kIdent) return false;
    if (kModifiers.count(peek(i).text) > 0) return true;
    ++i;
    while (peek_punct(".", i) && peek(i + 1).kind == Tok::kIdent) i += 2;
    while (peek_punct("[", i) && peek_punct("]", i + 1)) i += 2;
    return peek(i).kind == Tok::kIdent;
  }

  Stmt parse_stmt() {
    Stmt s;
    s.pos = pos();
    if (peek_punct("{")) return parse_block();
    if (peek_punct(";")) {
      ++cur_;
      s.kind = Stmt::Kind::kBlock;
      return s;
    }
    if (peek_ident(kHoleMarker)) fail("the search hole must be the entire method body");
    if (peek_ident("if")) {
      ++cur_;
      s.kind = Stmt::Kind::kIf;
      expect_punct("(");
      s.exprs.push_back(parse_expr());
      expect_punct(")");
      s.children.push_back(parse_body());
      if (peek_ident("else")) {
        ++cur_;
        s.children.push_back(parse_body());
      }
      return s;
    }
    if (peek_ident("while")) {
      ++cur_;
      s.kind = Stmt::Kind::kWhile;
      expect_punct("(");
      s.exprs.push_back(parse_expr());
      expect_punct(")");
      s.children.push_back(parse_body());
      return s;
    }
    if (peek_ident("try")) {
      ++cur_;
      s.kind = Stmt::Kind::kTry;
      s.children.push_back(parse_block());
      while (peek_ident("catch")) {
        ++cur_;
        expect_punct("(");
        skip_modifiers();
        s.catch_types.push_back(parse_type());
        s.catch_names.push_back(peek().kind == Tok::kIdent ? expect_ident("name") : "");
        expect_punct(")");
        s.children.push_back(parse_block());
      }
      if (s.catch_types.empty()) fail("expected 'catch'");
      return s;
    }
    if (peek_ident("return")) {
      ++cur_;
      s.kind = Stmt::Kind::kReturn;
      if (!peek_punct(";")) s.exprs.push_back(parse_expr());
      expect_punct(";");
      return s;
    }
    if (looks_like_decl()) {
      skip_modifiers();
      s.kind = Stmt::Kind::kDecl;
      s.type = parse_type();
      s.name = expect_ident("variable name");
      if (peek_punct("=")) {
        ++cur_;
        s.exprs.push_back(parse_expr());
      }
      expect_punct(";");
      return s;
    }
    s.kind = Stmt::Kind::kExpr;
    s.exprs.push_back(parse_expr());
    expect_punct(";");
    return s;
  }

  // ---- expressions ----
  Expr parse_expr() { return parse_assign(); }

  Expr parse_assign() {
    Expr lhs = parse_binary(0);
    static const char* const kOps[] = {"=", "+=", "-=", "*=", "/=", "%="};
    for (const char* op : kOps) {
      if (peek_punct(op)) {
        if (lhs.kind != Expr::Kind::kName && lhs.kind != Expr::Kind::kField)
          fail("invalid assignment target");
        Expr e;
        e.kind = Expr::Kind::kAssign;
        e.pos = lhs.pos;
        e.text = op;
        ++cur_;
        e.children.push_back(std::move(lhs));
        e.children.push_back(parse_assign());
        return e;
      }
    }
    return lhs;
  }

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "==" || op == "!=") return 3;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
    if (op == "+" || op == "-") return 5;
    if (op == "*" || op == "/" || op == "%") return 6;
    return -1;
  }

  Expr parse_binary(int min_prec) {
    Expr lhs = parse_unary();
    while (peek().kind == Tok::kPunct) {
      const int prec = precedence(peek().text);
      if (prec < 0 || prec < min_prec) break;
      Expr e;
      e.kind = Expr::Kind::kBinary;
      e.text = toks_[cur_++].text;
      e.pos = lhs.pos;
      e.children.push_back(std::move(lhs));
      e.children.push_back(parse_binary(prec + 1));
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr parse_unary() {
    if (peek_punct("!") || peek_punct("-") || peek_punct("++") || peek_punct("--")) {
      Expr e;
      e.kind = Expr::Kind::kUnary;
      e.pos = pos();
      e.text = toks_[cur_++].text;
      e.children.push_back(parse_unary());
      return e;
    }
    return parse_postfix();
  }

  std::vector<Expr> parse_args() {
    std::vector<Expr> args;
    expect_punct("(");
    if (!peek_punct(")")) {
      while (true) {
        args.push_back(parse_expr());
        if (!peek_punct(",")) break;
        ++cur_;
      }
    }
    expect_punct(")");
    return args;
  }

  Expr parse_postfix() {
    Expr e = parse_primary();
    while (true) {
      if (peek_punct(".")) {
        ++cur_;
        std::string member = expect_ident("member name");
        Expr next;
        next.pos = e.pos;
        next.text = std::move(member);
        if (peek_punct("(")) {
          next.kind = Expr::Kind::kCall;
          next.has_receiver = true;
          next.children.push_back(std::move(e));
          for (auto& a : parse_args()) next.children.push_back(std::move(a));
        } else {
          next.kind = Expr::Kind::kField;
          next.children.push_back(std::move(e));
        }
        e = std::move(next);
      } else if (peek_punct("++") || peek_punct("--")) {
        Expr next;
        next.kind = Expr::Kind::kUnary;
        next.pos = e.pos;
        next.text = "post" + toks_[cur_++].text;
        next.children.push_back(std::move(e));
        e = std::move(next);
      } else {
        return e;
      }
    }
  }

  Expr parse_primary() {
    Expr e;
    e.pos = pos();
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kNumber: {
        e.kind = Expr::Kind::kLiteral;
        e.text = t.text;
        const char last = static_cast<char>(std::tolower(static_cast<unsigned char>(t.text.back())));
        if (last == 'l') {
          e.literal_type = "long";
        } else if (last == 'f') {
          e.literal_type = "float";
        } else if (t.text.find('.') != std::string::npos || last == 'd') {
          e.literal_type = "double";
        } else {
          e.literal_type = "int";
        }
        ++cur_;
        return e;
      }
      case Tok::kString:
      case Tok::kChar:
        e.kind = Expr::Kind::kLiteral;
        e.text = t.text;
        e.literal_type = t.kind == Tok::kString ? "String" : "char";
        ++cur_;
        return e;
      case Tok::kIdent:
        if (t.text == "true" || t.text == "false" || t.text == "null") {
          e.kind = Expr::Kind::kLiteral;
          e.text = t.text;
          e.literal_type = t.text == "null" ? "null" : "boolean";
          ++cur_;
          return e;
        }
        if (t.text == "new") {
          ++cur_;
          e.kind = Expr::Kind::kNew;
          e.text = parse_type();
          e.children = parse_args();
          return e;
        }
        e.text = t.text;
        ++cur_;
        if (peek_punct("(")) {
          e.kind = Expr::Kind::kCall;
          e.children = parse_args();
        } else {
          e.kind = Expr::Kind::kName;
        }
        return e;
      case Tok::kPunct:
        if (t.text == "(") {
          ++cur_;
          Expr inner = parse_expr();
          expect_punct(")");
          return inner;
        }
        break;
      default:
        break;
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t cur_ = 0;
};

}  // namespace

bool MethodAst::is_hole() const {
  return body.children.size() == 1 && body.children.front().kind == Stmt::Kind::kHole;
}

std::vector<ClassUnit> parse_source(std::string_view text) { return Parser(text).parse_file(); }

MethodAst parse_method(std::string_view text) { return Parser(text).parse_single_method(); }

bool exact_match(const MethodAst& a, const MethodAst& b) {
  return a.return_type == b.return_type && a.name == b.name && a.formals == b.formals &&
         a.throws == b.throws && a.body == b.body;
}

MethodAst with_hole_body(const MethodAst& method) {
  MethodAst out = method;
  out.body = Stmt{};
  out.body.kind = Stmt::Kind::kBlock;
  Stmt hole;
  hole.kind = Stmt::Kind::kHole;
  out.body.children.push_back(std::move(hole));
  return out;
}

}  // namespace codec

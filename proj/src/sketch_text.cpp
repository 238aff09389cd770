#include <cctype>
#include <string>

#include "codec/error.h"
#include "codec/sketch.h"

namespace codec {
namespace {

void emit_line(std::string& out, int indent, std::string_view text) {
  out.append(static_cast<std::size_t>(indent), ' ');
  out.append(text);
  out.push_back('\n');
}

std::string join_types(const std::vector<std::string>& types) {
  std::string out = "(";
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (i > 0) out += ", ";
    out += types[i];
  }
  out += ")";
  return out;
}

void emit_stmt(std::string& out, const SketchStmt& s, int indent) {
  using K = SketchStmt::Kind;
  switch (s.kind) {
    case K::kSkip:
      emit_line(out, indent, "skip");
      break;
    case K::kCall:
      emit_line(out, indent, serialize_call(s.call));
      break;
    case K::kSeq:
      for (const auto& c : s.children) emit_stmt(out, c, indent);
      break;
    case K::kIf:
      emit_line(out, indent, "if");
      for (const auto& c : s.cond) emit_line(out, indent + 2, serialize_call(c));
      emit_line(out, indent, "then");
      emit_stmt(out, s.children[0], indent + 2);
      emit_line(out, indent, "else");
      emit_stmt(out, s.children[1], indent + 2);
      break;
    case K::kWhile:
      emit_line(out, indent, "while");
      for (const auto& c : s.cond) emit_line(out, indent + 2, serialize_call(c));
      emit_line(out, indent, "do");
      emit_stmt(out, s.children[0], indent + 2);
      break;
    case K::kTry:
      emit_line(out, indent, "try");
      emit_stmt(out, s.children[0], indent + 2);
      for (std::size_t i = 0; i < s.catch_types.size(); ++i) {
        emit_line(out, indent, "catch (" + s.catch_types[i] + ")");
        emit_stmt(out, s.children[i + 1], indent + 2);
      }
      break;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Line {
  int number = 0;  // 1-based
  int indent = 0;
  std::string_view text;
};

class SketchParser {
 public:
  explicit SketchParser(std::string_view src) {
    int number = 0;
    std::size_t pos = 0;
    while (pos <= src.size()) {
      const std::size_t nl = src.find('\n', pos);
      const std::size_t end = nl == std::string_view::npos ? src.size() : nl;
      std::string_view raw = src.substr(pos, end - pos);
      ++number;
      int indent = 0;
      while (static_cast<std::size_t>(indent) < raw.size() && raw[indent] == ' ') ++indent;
      if (static_cast<std::size_t>(indent) < raw.size() && raw[indent] == '\t')
        throw ParseError("tab in indentation", number, indent + 1);
      std::string_view text = trim(raw);
      if (!text.empty()) lines_.push_back({number, indent, text});
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    last_line_ = number;
  }

  SketchAst parse_full() {
    SketchAst out;
    const Line& ret = expect_line(0, "expected 'return <type>'");
    if (!ret.text.starts_with("return "))
      throw ParseError("expected 'return <type>'", ret.number, ret.indent + 1);
    out.ret_type = std::string(trim(ret.text.substr(7)));
    if (out.ret_type.empty()) throw ParseError("missing return type", ret.number, ret.indent + 8);
    ++cursor_;

    const Line& fp = expect_line(0, "expected 'formals (...)'");
    if (!fp.text.starts_with("formals"))
      throw ParseError("expected 'formals (...)'", fp.number, fp.indent + 1);
    out.formal_param_types = parse_type_list(fp, fp.text.substr(7), fp.indent + 8);
    ++cursor_;

    out.body = parse_body_to_end();
    return out;
  }

  SketchStmt parse_body_to_end() {
    SketchStmt body = parse_block(0);
    if (cursor_ < lines_.size()) {
      const Line& l = lines_[cursor_];
      throw ParseError("unexpected '" + std::string(l.text) + "'", l.number, l.indent + 1);
    }
    if (body.kind == SketchStmt::Kind::kSkip && !saw_statement_)
      throw ParseError("empty sketch body", last_line_, 1);
    return body;
  }

 private:
  static bool is_terminator(std::string_view t) {
    return t == "then" || t == "else" || t == "do" || t.starts_with("catch");
  }

  const Line& expect_line(int indent, const std::string& what) {
    if (cursor_ >= lines_.size()) throw ParseError(what + ", found end of input", last_line_, 1);
    const Line& l = lines_[cursor_];
    if (l.indent != indent) throw ParseError(what + " (bad indentation)", l.number, l.indent + 1);
    return l;
  }

  const Line* peek(int indent) const {
    if (cursor_ >= lines_.size()) return nullptr;
    const Line& l = lines_[cursor_];
    if (l.indent < indent) return nullptr;
    if (l.indent > indent)
      throw ParseError("unexpected indentation", l.number, l.indent + 1);
    return &l;
  }

  SketchStmt parse_block(int indent) {
    std::vector<SketchStmt> items;
    while (const Line* l = peek(indent)) {
      if (is_terminator(l->text)) break;
      items.push_back(parse_stmt(indent));
    }
    return SketchStmt::make_seq(std::move(items));
  }

  // A nested block must hold at least one line.
  SketchStmt parse_nested(int indent, const Line& owner) {
    if (cursor_ >= lines_.size() || lines_[cursor_].indent != indent)
      throw ParseError("expected indented block after '" + std::string(owner.text) + "'",
                       owner.number, owner.indent + 1);
    return parse_block(indent);
  }

  std::vector<CallExpr> parse_cond(int indent) {
    std::vector<CallExpr> out;
    while (cursor_ < lines_.size() && lines_[cursor_].indent == indent) {
      out.push_back(parse_call(lines_[cursor_]));
      ++cursor_;
    }
    return out;
  }

  void expect_keyword(int indent, std::string_view kw) {
    const Line& l = expect_line(indent, "expected '" + std::string(kw) + "'");
    if (l.text != kw)
      throw ParseError("expected '" + std::string(kw) + "', found '" + std::string(l.text) + "'",
                       l.number, l.indent + 1);
    ++cursor_;
  }

  SketchStmt parse_stmt(int indent) {
    const Line& l = lines_[cursor_];
    saw_statement_ = true;
    if (l.text == "skip") {
      ++cursor_;
      return SketchStmt::skip();
    }
    if (l.text == "if") {
      ++cursor_;
      auto cond = parse_cond(indent + 2);
      expect_keyword(indent, "then");
      SketchStmt then_b = parse_nested(indent + 2, l);
      expect_keyword(indent, "else");
      SketchStmt else_b = parse_nested(indent + 2, l);
      return SketchStmt::make_if(std::move(cond), std::move(then_b), std::move(else_b));
    }
    if (l.text == "while") {
      ++cursor_;
      auto cond = parse_cond(indent + 2);
      expect_keyword(indent, "do");
      SketchStmt body = parse_nested(indent + 2, l);
      return SketchStmt::make_while(std::move(cond), std::move(body));
    }
    if (l.text == "try") {
      ++cursor_;
      SketchStmt body = parse_nested(indent + 2, l);
      std::vector<std::string> types;
      std::vector<SketchStmt> handlers;
      while (cursor_ < lines_.size() && lines_[cursor_].indent == indent &&
             lines_[cursor_].text.starts_with("catch")) {
        const Line& c = lines_[cursor_];
        auto list = parse_type_list(c, c.text.substr(5), c.indent + 6);
        if (list.size() != 1) throw ParseError("catch takes one type", c.number, c.indent + 1);
        types.push_back(std::move(list.front()));
        ++cursor_;
        handlers.push_back(parse_nested(indent + 2, c));
      }
      if (types.empty()) throw ParseError("try without catch", l.number, l.indent + 1);
      return SketchStmt::make_try(std::move(body), std::move(types), std::move(handlers));
    }
    if (is_terminator(l.text))
      throw ParseError("unexpected '" + std::string(l.text) + "'", l.number, l.indent + 1);
    SketchStmt s = SketchStmt::make_call(parse_call(l));
    ++cursor_;
    return s;
  }

  std::vector<std::string> parse_type_list(const Line& l, std::string_view rest, int col) {
    rest = trim(rest);
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
      throw ParseError("expected parenthesized type list", l.number, col);
    std::vector<std::string> out;
    std::string_view inner = trim(rest.substr(1, rest.size() - 2));
    if (inner.empty()) return out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = inner.find(',', start);
      std::string_view item =
          trim(inner.substr(start, comma == std::string_view::npos ? inner.npos : comma - start));
      if (item.empty() || !valid_type(item))
        throw ParseError("bad type name '" + std::string(item) + "'", l.number, col);
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  static bool valid_type(std::string_view t) {
    for (char ch : t) {
      const unsigned char c = static_cast<unsigned char>(ch);
      if (!(std::isalnum(c) || c == '_' || c == '$' || c == '.' || c == '[' || c == ']' ||
            c == '?'))
        return false;
    }
    return !t.empty();
  }

  CallExpr parse_call(const Line& l) {
    const std::size_t paren = l.text.find('(');
    if (paren == std::string_view::npos)
      throw ParseError("expected call 'Type.method (args)'", l.number, l.indent + 1);
    std::string_view head = trim(l.text.substr(0, paren));
    const std::size_t dot = head.rfind('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == head.size())
      throw ParseError("expected 'Type.method' before '('", l.number, l.indent + 1);
    CallExpr c;
    c.receiver_type = std::string(head.substr(0, dot));
    c.method_name = std::string(head.substr(dot + 1));
    if (!valid_type(c.receiver_type) || c.method_name.find_first_of(" .") != std::string::npos)
      throw ParseError("malformed call target", l.number, l.indent + 1);
    c.arg_types = parse_type_list(l, l.text.substr(paren), l.indent + static_cast<int>(paren) + 1);
    return c;
  }

  std::vector<Line> lines_;
  std::size_t cursor_ = 0;
  int last_line_ = 1;
  bool saw_statement_ = false;
};

}  // namespace

std::string serialize_call(const CallExpr& call) {
  return call.receiver_type + "." + call.method_name + " " + join_types(call.arg_types);
}

std::string serialize_body(const SketchStmt& body) {
  std::string out;
  emit_stmt(out, body, 0);
  return out;
}

std::string serialize_sketch(const SketchAst& sketch) {
  std::string out;
  emit_line(out, 0, "return " + sketch.ret_type);
  emit_line(out, 0, "formals " + join_types(sketch.formal_param_types));
  emit_stmt(out, sketch.body, 0);
  return out;
}

SketchAst parse_sketch(std::string_view text) { return SketchParser(text).parse_full(); }

SketchStmt parse_sketch_body(std::string_view text) {
  return SketchParser(text).parse_body_to_end();
}

}  // namespace codec

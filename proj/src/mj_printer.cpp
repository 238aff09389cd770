#include <string>

#include "codec/mj.h"

namespace codec {
namespace {

bool needs_parens(const Expr& e) {
  return e.kind == Expr::Kind::kBinary || e.kind == Expr::Kind::kAssign ||
         e.kind == Expr::Kind::kUnary;
}

void print_expr(const Expr& e, std::string& out);

void print_operand(const Expr& e, std::string& out) {
  if (needs_parens(e)) {
    out += '(';
    print_expr(e, out);
    out += ')';
  } else {
    print_expr(e, out);
  }
}

void print_args(const std::vector<Expr>& args, std::size_t first, std::string& out) {
  out += '(';
  for (std::size_t i = first; i < args.size(); ++i) {
    if (i > first) out += ", ";
    print_expr(args[i], out);
  }
  out += ')';
}

void print_expr(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::kName:
    case Expr::Kind::kLiteral:
      out += e.text;
      break;
    case Expr::Kind::kNew:
      out += "new " + e.text;
      print_args(e.children, 0, out);
      break;
    case Expr::Kind::kCall:
      if (e.has_receiver) {
        print_operand(e.children[0], out);
        out += '.';
      }
      out += e.text;
      print_args(e.children, e.has_receiver ? 1 : 0, out);
      break;
    case Expr::Kind::kField:
      print_operand(e.children[0], out);
      out += '.' + e.text;
      break;
    case Expr::Kind::kUnary:
      if (e.text.starts_with("post")) {
        print_operand(e.children[0], out);
        out += e.text.substr(4);
      } else {
        out += e.text;
        print_operand(e.children[0], out);
      }
      break;
    case Expr::Kind::kBinary:
      print_operand(e.children[0], out);
      out += ' ' + e.text + ' ';
      print_operand(e.children[1], out);
      break;
    case Expr::Kind::kAssign:
      print_expr(e.children[0], out);
      out += ' ' + e.text + ' ';
      print_operand(e.children[1], out);
      break;
  }
}

void line(std::string& out, int indent, const std::string& text) {
  out.append(static_cast<std::size_t>(indent), ' ');
  out += text;
  out += '\n';
}

std::string expr_text(const Expr& e) {
  std::string s;
  print_expr(e, s);
  return s;
}

void print_stmt(const Stmt& s, int indent, std::string& out);

void print_children(const Stmt& block, int indent, std::string& out) {
  for (const auto& c : block.children) print_stmt(c, indent, out);
}

void print_stmt(const Stmt& s, int indent, std::string& out) {
  switch (s.kind) {
    case Stmt::Kind::kBlock:
      line(out, indent, "{");
      print_children(s, indent + 2, out);
      line(out, indent, "}");
      break;
    case Stmt::Kind::kDecl:
      line(out, indent,
           s.type + " " + s.name + (s.exprs.empty() ? "" : " = " + expr_text(s.exprs[0])) + ";");
      break;
    case Stmt::Kind::kExpr:
      line(out, indent, expr_text(s.exprs[0]) + ";");
      break;
    case Stmt::Kind::kIf:
      line(out, indent, "if (" + expr_text(s.exprs[0]) + ") {");
      print_children(s.children[0], indent + 2, out);
      if (s.children.size() > 1) {
        line(out, indent, "} else {");
        print_children(s.children[1], indent + 2, out);
      }
      line(out, indent, "}");
      break;
    case Stmt::Kind::kWhile:
      line(out, indent, "while (" + expr_text(s.exprs[0]) + ") {");
      print_children(s.children[0], indent + 2, out);
      line(out, indent, "}");
      break;
    case Stmt::Kind::kTry:
      line(out, indent, "try {");
      print_children(s.children[0], indent + 2, out);
      for (std::size_t i = 0; i < s.catch_types.size(); ++i) {
        const std::string& name = s.catch_names[i];
        line(out, indent,
             "} catch (" + s.catch_types[i] + (name.empty() ? "" : " " + name) + ") {");
        print_children(s.children[i + 1], indent + 2, out);
      }
      line(out, indent, "}");
      break;
    case Stmt::Kind::kReturn:
      line(out, indent, s.exprs.empty() ? "return;" : "return " + expr_text(s.exprs[0]) + ";");
      break;
    case Stmt::Kind::kHole:
      line(out, indent, std::string(kHoleMarker) + ";");
      break;
  }
}

}  // namespace

std::string print_method(const MethodAst& m, int indent) {
  std::string out;
  if (m.javadoc) line(out, indent, "/** " + *m.javadoc + " */");
  std::string header = m.return_type + " " + m.name + "(";
  for (std::size_t i = 0; i < m.formals.size(); ++i) {
    if (i > 0) header += ", ";
    header += m.formals[i].type + " " + m.formals[i].name;
  }
  header += ")";
  if (!m.throws.empty()) {
    header += " throws ";
    for (std::size_t i = 0; i < m.throws.size(); ++i) {
      if (i > 0) header += ", ";
      header += m.throws[i];
    }
  }
  line(out, indent, header + " {");
  print_children(m.body, indent + 2, out);
  line(out, indent, "}");
  return out;
}

std::string print_class(const ClassUnit& unit) {
  std::string out;
  if (unit.javadoc) line(out, 0, "/** " + *unit.javadoc + " */");
  line(out, 0, "class " + unit.class_name + " {");
  for (const auto& f : unit.fields) line(out, 2, f.type + " " + f.name + ";");
  for (const auto& m : unit.methods) {
    out += '\n';
    out += print_method(m, 2);
  }
  line(out, 0, "}");
  return out;
}

std::string print_source(const std::vector<ClassUnit>& units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (i > 0) out += '\n';
    out += print_class(units[i]);
  }
  return out;
}

}  // namespace codec

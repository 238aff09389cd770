#include "codec/decompile.h"

#include <cctype>
#include <map>

namespace codec {
namespace {

class Decompiler {
 public:
  Decompiler(const MethodAst& method, const ClassUnit* owner) {
    if (owner != nullptr) {
      class_name_ = owner->class_name;
      for (const auto& f : owner->fields) vars_[f.name] = f.type;
    }
    for (const auto& p : method.formals)
      if (p.name != kUnknown) vars_[p.name] = p.type;
  }

  SketchStmt stmt(const Stmt& s) {
    using K = Stmt::Kind;
    switch (s.kind) {
      case K::kBlock: {
        std::vector<SketchStmt> items;
        for (const auto& c : s.children) items.push_back(stmt(c));
        return SketchStmt::make_seq(std::move(items));
      }
      case K::kDecl: {
        std::vector<CallExpr> calls;
        if (!s.exprs.empty()) collect(s.exprs[0], calls);
        vars_[s.name] = s.type;
        return calls_to_seq(std::move(calls));
      }
      case K::kExpr:
      case K::kReturn: {
        std::vector<CallExpr> calls;
        if (!s.exprs.empty()) collect(s.exprs[0], calls);
        return calls_to_seq(std::move(calls));
      }
      case K::kIf: {
        std::vector<CallExpr> cond;
        collect(s.exprs[0], cond);
        SketchStmt then_b = stmt(s.children[0]);
        SketchStmt else_b = s.children.size() > 1 ? stmt(s.children[1]) : SketchStmt::skip();
        return keep_if_calls(
            SketchStmt::make_if(std::move(cond), std::move(then_b), std::move(else_b)));
      }
      case K::kWhile: {
        std::vector<CallExpr> cond;
        collect(s.exprs[0], cond);
        SketchStmt body = stmt(s.children[0]);
        return keep_if_calls(SketchStmt::make_while(std::move(cond), std::move(body)));
      }
      case K::kTry: {
        SketchStmt body = stmt(s.children[0]);
        std::vector<SketchStmt> handlers;
        for (std::size_t i = 0; i < s.catch_types.size(); ++i) {
          if (!s.catch_names[i].empty()) vars_[s.catch_names[i]] = s.catch_types[i];
          handlers.push_back(stmt(s.children[i + 1]));
        }
        return keep_if_calls(
            SketchStmt::make_try(std::move(body), s.catch_types, std::move(handlers)));
      }
      case K::kHole:
        return SketchStmt::skip();
    }
    return SketchStmt::skip();
  }

 private:
  static SketchStmt keep_if_calls(SketchStmt s) {
    return s.contains_call() ? std::move(s) : SketchStmt::skip();
  }

  static SketchStmt calls_to_seq(std::vector<CallExpr> calls) {
    std::vector<SketchStmt> items;
    for (auto& c : calls) items.push_back(SketchStmt::make_call(std::move(c)));
    return SketchStmt::make_seq(std::move(items));
  }

  static bool looks_like_type(const std::string& name) {
    return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
  }

  std::string type_of(const Expr& e) const {
    using K = Expr::Kind;
    switch (e.kind) {
      case K::kName: {
        if (e.text == "this" && !class_name_.empty()) return class_name_;
        auto it = vars_.find(e.text);
        if (it != vars_.end() && it->second != kUnknown) return it->second;
        if (it == vars_.end() && looks_like_type(e.text)) return e.text;
        return std::string(kObjectType);
      }
      case K::kLiteral:
        return e.literal_type == "null" ? std::string(kObjectType) : e.literal_type;
      case K::kNew:
        return e.text;
      case K::kUnary:
        return e.text == "!" ? "boolean" : type_of(e.children[0]);
      case K::kBinary: {
        static const char* const kBool[] = {"==", "!=", "<", ">", "<=", ">=", "&&", "||"};
        for (const char* op : kBool)
          if (e.text == op) return "boolean";
        const std::string lhs = type_of(e.children[0]);
        if (e.text == "+" && (lhs == "String" || type_of(e.children[1]) == "String"))
          return "String";
        return lhs;
      }
      case K::kAssign:
        return type_of(e.children[0]);
      case K::kCall:
      case K::kField:
        return std::string(kObjectType);
    }
    return std::string(kObjectType);
  }

  std::string receiver_type(const Expr& call) const {
    if (!call.has_receiver) return class_name_.empty() ? std::string(kObjectType) : class_name_;
    return type_of(call.children[0]);
  }

  // Calls in evaluation order: receiver, arguments, then the call itself.
  void collect(const Expr& e, std::vector<CallExpr>& out) const {
    using K = Expr::Kind;
    for (const auto& c : e.children) collect(c, out);
    if (e.kind == K::kNew) {
      CallExpr c{e.text, e.text, {}};
      for (const auto& a : e.children) c.arg_types.push_back(type_of(a));
      out.push_back(std::move(c));
    } else if (e.kind == K::kCall) {
      CallExpr c{receiver_type(e), e.text, {}};
      for (std::size_t i = e.has_receiver ? 1 : 0; i < e.children.size(); ++i)
        c.arg_types.push_back(type_of(e.children[i]));
      out.push_back(std::move(c));
    }
  }

  std::string class_name_;
  std::map<std::string, std::string> vars_;
};

}  // namespace

SketchAst decompile(const MethodAst& method, const ClassUnit* owner) {
  SketchAst out;
  out.ret_type = method.return_type;
  for (const auto& p : method.formals) out.formal_param_types.push_back(p.type);
  Decompiler d(method, owner);
  out.body = d.stmt(method.body);
  return out;
}

}  // namespace codec

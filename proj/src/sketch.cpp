#include "codec/sketch.h"

#include <algorithm>
#include <set>

namespace codec {

SketchStmt SketchStmt::make_call(CallExpr c) {
  SketchStmt s;
  s.kind = Kind::kCall;
  s.call = std::move(c);
  return s;
}

SketchStmt SketchStmt::make_seq(std::vector<SketchStmt> items) {
  std::vector<SketchStmt> flat;
  for (auto& item : items) {
    if (item.kind == Kind::kSkip) continue;
    if (item.kind == Kind::kSeq) {
      for (auto& child : item.children) flat.push_back(std::move(child));
    } else {
      flat.push_back(std::move(item));
    }
  }
  if (flat.empty()) return skip();
  if (flat.size() == 1) return std::move(flat.front());
  SketchStmt s;
  s.kind = Kind::kSeq;
  s.children = std::move(flat);
  return s;
}

SketchStmt SketchStmt::make_if(std::vector<CallExpr> cond, SketchStmt then_branch,
                               SketchStmt else_branch) {
  SketchStmt s;
  s.kind = Kind::kIf;
  s.cond = std::move(cond);
  s.children.push_back(std::move(then_branch));
  s.children.push_back(std::move(else_branch));
  return s;
}

SketchStmt SketchStmt::make_while(std::vector<CallExpr> cond, SketchStmt body) {
  SketchStmt s;
  s.kind = Kind::kWhile;
  s.cond = std::move(cond);
  s.children.push_back(std::move(body));
  return s;
}

SketchStmt SketchStmt::make_try(SketchStmt body, std::vector<std::string> catch_types,
                                std::vector<SketchStmt> handlers) {
  SketchStmt s;
  s.kind = Kind::kTry;
  s.children.push_back(std::move(body));
  for (auto& h : handlers) s.children.push_back(std::move(h));
  s.catch_types = std::move(catch_types);
  return s;
}

bool SketchStmt::contains_call() const {
  if (kind == Kind::kCall || !cond.empty()) return true;
  return std::any_of(children.begin(), children.end(),
                     [](const SketchStmt& c) { return c.contains_call(); });
}

// ---- tokens ----------------------------------------------------------------

namespace {

void push_call_tokens(const CallExpr& c, std::vector<std::string>& out) {
  out.emplace_back(sketch_token::kCall);
  out.push_back(c.receiver_type);
  out.push_back(c.method_name);
  for (const auto& t : c.arg_types) out.push_back(t);
  out.emplace_back(sketch_token::kCallEnd);
}

void linearize(const SketchStmt& s, std::size_t depth, SketchTokens& out) {
  ++out.depth_histogram[std::min(depth, kDepthBins - 1)];
  auto& toks = out.tokens;
  using K = SketchStmt::Kind;
  switch (s.kind) {
    case K::kSkip:
      toks.emplace_back(sketch_token::kSkip);
      break;
    case K::kCall:
      push_call_tokens(s.call, toks);
      break;
    case K::kSeq:
      toks.emplace_back(sketch_token::kSeq);
      for (const auto& c : s.children) linearize(c, depth + 1, out);
      toks.emplace_back(sketch_token::kSeqEnd);
      break;
    case K::kIf:
      toks.emplace_back(sketch_token::kIf);
      for (const auto& c : s.cond) push_call_tokens(c, toks);
      toks.emplace_back(sketch_token::kThen);
      linearize(s.children[0], depth + 1, out);
      toks.emplace_back(sketch_token::kElse);
      linearize(s.children[1], depth + 1, out);
      break;
    case K::kWhile:
      toks.emplace_back(sketch_token::kWhile);
      for (const auto& c : s.cond) push_call_tokens(c, toks);
      toks.emplace_back(sketch_token::kDo);
      linearize(s.children[0], depth + 1, out);
      break;
    case K::kTry:
      toks.emplace_back(sketch_token::kTry);
      linearize(s.children[0], depth + 1, out);
      for (std::size_t i = 0; i < s.catch_types.size(); ++i) {
        toks.emplace_back(sketch_token::kCatch);
        toks.push_back(s.catch_types[i]);
        linearize(s.children[i + 1], depth + 1, out);
      }
      toks.emplace_back(sketch_token::kTryEnd);
      break;
  }
}

}  // namespace

SketchTokens sketch_tokens(const SketchAst& sketch) {
  SketchTokens out;
  out.depth_histogram.assign(kDepthBins, 0);
  out.tokens.emplace_back(sketch_token::kRet);
  out.tokens.push_back(sketch.ret_type);
  for (const auto& t : sketch.formal_param_types) out.tokens.push_back(t);
  out.tokens.emplace_back(sketch_token::kFpEnd);
  linearize(sketch.body, 0, out);
  return out;
}

// ---- sequences -------------------------------------------------------------

namespace {

// Depth-first path walk over a continuation chain. A frame either executes a
// statement or appends a fixed list of calls (the re-check of a loop
// condition after one iteration).
struct Frame {
  const SketchStmt* stmt = nullptr;
  const std::vector<CallExpr>* calls = nullptr;
  const Frame* next = nullptr;
};

class PathWalker {
 public:
  explicit PathWalker(std::size_t limit) : limit_(limit) {}

  void run(const SketchStmt& root) {
    if (limit_ == 0) return;
    Frame f{&root, nullptr, nullptr};
    step(&f);
  }

  std::vector<CallSeq> take() { return std::move(out_); }

 private:
  // Returns false once the limit is reached.
  bool step(const Frame* f) {
    if (f == nullptr) return emit();
    if (f->calls != nullptr) return with_calls(*f->calls, f->next);

    const SketchStmt& s = *f->stmt;
    if (!s.contains_call()) return step(f->next);

    using K = SketchStmt::Kind;
    switch (s.kind) {
      case K::kSkip:
        return step(f->next);
      case K::kCall: {
        prefix_.push_back(s.call);
        const bool go = step(f->next);
        prefix_.pop_back();
        return go;
      }
      case K::kSeq: {
        std::vector<Frame> frames(s.children.size());
        for (std::size_t i = 0; i < frames.size(); ++i) {
          frames[i].stmt = &s.children[i];
          frames[i].next = i + 1 < frames.size() ? &frames[i + 1] : f->next;
        }
        return step(&frames[0]);
      }
      case K::kIf: {
        const std::size_t mark = push(s.cond);
        Frame then_f{&s.children[0], nullptr, f->next};
        Frame else_f{&s.children[1], nullptr, f->next};
        const bool go = step(&then_f) && step(&else_f);
        prefix_.resize(mark);
        return go;
      }
      case K::kWhile: {
        const std::size_t mark = push(s.cond);
        bool go = step(f->next);
        if (go) {
          Frame recheck{nullptr, &s.cond, f->next};
          Frame body{&s.children[0], nullptr, &recheck};
          go = step(&body);
        }
        prefix_.resize(mark);
        return go;
      }
      case K::kTry: {
        Frame normal{&s.children[0], nullptr, f->next};
        if (!step(&normal)) return false;
        for (std::size_t i = 1; i < s.children.size(); ++i) {
          Frame handler{&s.children[i], nullptr, f->next};
          Frame guarded{&s.children[0], nullptr, &handler};
          if (!step(&guarded)) return false;
        }
        return true;
      }
    }
    return true;
  }

  bool with_calls(const std::vector<CallExpr>& calls, const Frame* next) {
    const std::size_t mark = push(calls);
    const bool go = step(next);
    prefix_.resize(mark);
    return go;
  }

  std::size_t push(const std::vector<CallExpr>& calls) {
    const std::size_t mark = prefix_.size();
    prefix_.insert(prefix_.end(), calls.begin(), calls.end());
    return mark;
  }

  bool emit() {
    if (seen_.insert(prefix_).second) out_.push_back(prefix_);
    return out_.size() < limit_;
  }

  std::size_t limit_;
  CallSeq prefix_;
  std::set<CallSeq> seen_;
  std::vector<CallSeq> out_;
};

void collect_into(const SketchStmt& s, std::vector<CallExpr>& out) {
  if (s.kind == SketchStmt::Kind::kCall) out.push_back(s.call);
  out.insert(out.end(), s.cond.begin(), s.cond.end());
  for (const auto& c : s.children) collect_into(c, out);
}

}  // namespace

std::vector<CallSeq> extract_api_sequences(const SketchAst& sketch, std::size_t limit) {
  PathWalker walker(limit);
  walker.run(sketch.body);
  return walker.take();
}

std::vector<CallExpr> collect_calls(const SketchStmt& stmt) {
  std::vector<CallExpr> out;
  collect_into(stmt, out);
  return out;
}

// ---- equivalence -----------------------------------------------------------

bool api_match(const SketchAst& a, const SketchAst& b) {
  const auto ca = collect_calls(a.body);
  const auto cb = collect_calls(b.body);
  return std::set<CallExpr>(ca.begin(), ca.end()) == std::set<CallExpr>(cb.begin(), cb.end());
}

bool seq_match(const SketchAst& a, const SketchAst& b, std::size_t limit) {
  const auto sa = extract_api_sequences(a, limit);
  const auto sb = extract_api_sequences(b, limit);
  return std::set<CallSeq>(sa.begin(), sa.end()) == std::set<CallSeq>(sb.begin(), sb.end());
}

bool sketch_match(const SketchAst& a, const SketchAst& b) { return a == b; }

}  // namespace codec

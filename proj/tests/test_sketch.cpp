#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "codec/decompile.h"
#include "codec/error.h"
#include "codec/mj.h"
#include "codec/sketch.h"
#include "oracles.h"
#include "test_util.h"

using namespace codec;
using codec::oracle::all_paths;
using codec::oracle::branch_tree;
using codec::oracle::distinct_in_order;
using codec::testing::SketchGen;

namespace {

const char* kReadFile = R"(
void read(File file) {
  FileReader fr1;
  BufferedReader br1;
  fr1 = new FileReader(file);
  br1 = new BufferedReader(fr1);
  while ((br1.readLine()) != null) {}
  return;
}
)";

CallExpr call(std::string recv, std::string name, std::vector<std::string> args = {}) {
  return {std::move(recv), std::move(name), std::move(args)};
}

std::size_t expected_token_count(const SketchStmt& s) {
  using K = SketchStmt::Kind;
  auto call_len = [](const CallExpr& c) { return 4 + c.arg_types.size(); };
  std::size_t n = 0;
  for (const auto& c : s.cond) n += call_len(c);
  switch (s.kind) {
    case K::kSkip:
      return 1;
    case K::kCall:
      return call_len(s.call);
    case K::kSeq:
      n += 2;
      break;
    case K::kIf:
      n += 3;
      break;
    case K::kWhile:
      n += 2;
      break;
    case K::kTry:
      n += 2 + 2 * s.catch_types.size();
      break;
  }
  for (const auto& c : s.children) n += expected_token_count(c);
  return n;
}

std::size_t node_count(const SketchStmt& s) {
  std::size_t n = 1;
  for (const auto& c : s.children) n += node_count(c);
  return n;
}

std::vector<std::pair<MethodAst, SketchAst>> fixture_methods() {
  std::vector<std::pair<MethodAst, SketchAst>> out;
  for (const auto& unit : load_mj_directory(codec::testing::corpus_dir()))
    for (const auto& m : unit.methods) out.emplace_back(m, decompile(m, &unit));
  return out;
}

}  // namespace

TEST(Decompile, ReadFileWorkedExample) {
  const auto s = decompile(parse_method(kReadFile));
  EXPECT_EQ(serialize_body(s.body),
            "FileReader.FileReader (File)\n"
            "BufferedReader.BufferedReader (FileReader)\n"
            "while\n"
            "  BufferedReader.readLine ()\n"
            "do\n"
            "  skip\n");
  EXPECT_EQ(s.ret_type, "void");
  EXPECT_EQ(s.formal_param_types, std::vector<std::string>{"File"});
  EXPECT_EQ(parse_sketch(serialize_sketch(s)), s);
}

TEST(Decompile, ReadFileFromFixtureCorpus) {
  for (const auto& [m, s] : fixture_methods())
    if (m.name == "read" && m.formals.size() == 1 && m.formals[0].type == "File")
      EXPECT_EQ(s, decompile(parse_method(kReadFile)));
}

TEST(Decompile, EmptyBodyIsSkip) {
  const auto s = decompile(parse_method("void f() { }"));
  EXPECT_EQ(s.body, SketchStmt::skip());
}

TEST(Decompile, TryWithEmptyHandler) {
  const auto s = decompile(parse_method("void f(A a) { try { a.f(); } catch (E e) { } }"));
  const auto want = SketchStmt::make_try(SketchStmt::make_call(call("A", "f")), {"E"},
                                         {SketchStmt::skip()});
  EXPECT_EQ(s.body, want);
  EXPECT_EQ(serialize_body(s.body), "try\n  A.f ()\ncatch (E)\n  skip\n");
}

TEST(Decompile, CalllessControlBecomesSkip) {
  const auto s = decompile(parse_method("int f(int n) { int i = 0; while (i < n) { i++; } return i; }"));
  EXPECT_EQ(s.body, SketchStmt::skip());
}

TEST(Decompile, VariableNamesDoNotMatter) {
  const auto a = decompile(parse_method(
      "String f(File file) { BufferedReader r = new BufferedReader(new FileReader(file)); "
      "String line = r.readLine(); r.close(); return line; }"));
  const auto b = decompile(parse_method(
      "String g(File x) { BufferedReader q = new BufferedReader(new FileReader(x)); "
      "String s = q.readLine(); q.close(); return s + \"!\"; }"));
  EXPECT_TRUE(sketch_match(a, b));
}

TEST(SketchText, SkipRoundTrips) {
  SketchAst s{"void", {}, SketchStmt::skip()};
  EXPECT_EQ(parse_sketch(serialize_sketch(s)), s);
}

TEST(SketchText, WorkedExampleParses) {
  const auto body = parse_sketch_body(
      "FileReader.FileReader (File)\n"
      "BufferedReader.BufferedReader (FileReader)\n"
      "while\n"
      "  BufferedReader.readLine ()\n"
      "do\n"
      "  skip\n");
  const auto want = SketchStmt::make_seq(
      {SketchStmt::make_call(call("FileReader", "FileReader", {"File"})),
       SketchStmt::make_call(call("BufferedReader", "BufferedReader", {"FileReader"})),
       SketchStmt::make_while({call("BufferedReader", "readLine")}, SketchStmt::skip())});
  EXPECT_EQ(body, want);
}

TEST(SketchText, NestedIfInsideWhile) {
  SketchAst s{"int", {"List"},
              SketchStmt::make_while(
                  {call("Iterator", "hasNext")},
                  SketchStmt::make_if({call("List", "isEmpty")},
                                      SketchStmt::make_call(call("List", "add", {"Object"})),
                                      SketchStmt::skip()))};
  EXPECT_EQ(parse_sketch(serialize_sketch(s)), s);
}

TEST(SketchText, MalformedReportsPosition) {
  try {
    parse_sketch("return void\nformals ()\nwhile\n  A.f ()\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 3);
  }
  EXPECT_THROW(parse_sketch("nonsense"), ParseError);
}

TEST(SketchText, RandomRoundTrip) {
  SketchGen gen(1234);
  for (int i = 0; i < 10000; ++i) {
    const auto s = gen.sketch(5);
    const auto text = serialize_sketch(s);
    const auto back = parse_sketch(text);
    ASSERT_EQ(back, s) << text;
    ASSERT_EQ(serialize_sketch(back), text);
  }
}

TEST(SketchTokens, SkipOnlyShape) {
  const auto t = sketch_tokens(SketchAst{"void", {"int"}, SketchStmt::skip()});
  EXPECT_EQ(t.tokens, (std::vector<std::string>{"<ret>", "void", "int", "</fp>", "skip"}));
  EXPECT_EQ(t.depth_histogram[0], 1u);
}

TEST(SketchTokens, CountingOracle) {
  SketchGen gen(77);
  for (int i = 0; i < 2000; ++i) {
    const auto s = gen.sketch(5);
    const auto t = sketch_tokens(s);
    EXPECT_EQ(t.tokens.size(), 3 + s.formal_param_types.size() + expected_token_count(s.body));
    std::size_t nodes = 0;
    for (auto c : t.depth_histogram) nodes += c;
    EXPECT_EQ(nodes, node_count(s.body));
    EXPECT_EQ(sketch_tokens(s).tokens, t.tokens);
  }
}

TEST(Sequences, StraightLine) {
  SketchAst s{"void", {}, SketchStmt::make_seq({SketchStmt::make_call(call("A", "f")),
                                                SketchStmt::make_call(call("B", "g"))})};
  const auto seqs = extract_api_sequences(s);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].size(), 2u);
}

TEST(Sequences, IfElse) {
  SketchAst s{"void", {},
              SketchStmt::make_if({}, SketchStmt::make_call(call("A", "f")),
                                  SketchStmt::make_call(call("B", "g")))};
  const auto seqs = extract_api_sequences(s);
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0], CallSeq{call("A", "f")});
  EXPECT_EQ(seqs[1], CallSeq{call("B", "g")});
}

TEST(Sequences, CapAtOneHundred) {
  int counter = 0;
  SketchAst s{"void", {}, branch_tree(7, counter)};
  const auto oracle = distinct_in_order(all_paths(s.body));
  ASSERT_EQ(oracle.size(), 128u);
  EXPECT_EQ(extract_api_sequences(s, std::numeric_limits<std::size_t>::max()), oracle);
  const auto capped = extract_api_sequences(s);
  ASSERT_EQ(capped.size(), 100u);
  EXPECT_TRUE(std::equal(capped.begin(), capped.end(), oracle.begin()));
}

TEST(Sequences, MatchesPathOracleOnRandomSketches) {
  SketchGen gen(99);
  for (int i = 0; i < 3000; ++i) {
    const auto s = gen.sketch(4);
    const auto oracle = distinct_in_order(all_paths(s.body));
    EXPECT_EQ(extract_api_sequences(s, std::numeric_limits<std::size_t>::max()), oracle);
    const auto capped = extract_api_sequences(s, 5);
    EXPECT_LE(capped.size(), 5u);
    EXPECT_TRUE(std::equal(capped.begin(), capped.end(), oracle.begin()));
  }
}

TEST(Matchers, SelfMatchesEverything) {
  SketchGen gen(5);
  for (int i = 0; i < 200; ++i) {
    const auto s = gen.sketch();
    EXPECT_TRUE(api_match(s, s));
    EXPECT_TRUE(seq_match(s, s));
    EXPECT_TRUE(sketch_match(s, s));
  }
  const auto m = parse_method(kReadFile);
  EXPECT_TRUE(exact_match(m, m));
}

TEST(Matchers, ReorderedCalls) {
  SketchAst a{"void", {}, SketchStmt::make_seq({SketchStmt::make_call(call("A", "f")),
                                                SketchStmt::make_call(call("B", "g"))})};
  SketchAst b{"void", {}, SketchStmt::make_seq({SketchStmt::make_call(call("B", "g")),
                                                SketchStmt::make_call(call("A", "f"))})};
  EXPECT_TRUE(api_match(a, b));
  EXPECT_FALSE(seq_match(a, b));
  EXPECT_FALSE(sketch_match(a, b));
}

TEST(Matchers, RenamedLocalsInFixtures) {
  const auto methods = fixture_methods();
  auto find = [&](const std::string& name) {
    auto it = std::find_if(methods.begin(), methods.end(),
                           [&](const auto& p) { return p.first.name == name; });
    EXPECT_NE(it, methods.end()) << name;
    return *it;
  };
  for (const auto& [x, y] : {std::pair<std::string, std::string>{"readFirstLine", "firstLine"},
                             {"range", "firstNumbers"}}) {
    const auto a = find(x);
    const auto b = find(y);
    EXPECT_TRUE(sketch_match(a.second, b.second)) << x << " vs " << y;
    EXPECT_FALSE(exact_match(a.first, b.first)) << x << " vs " << y;
  }
}

TEST(Matchers, ImplicationChainOnFixtures) {
  const auto methods = fixture_methods();
  ASSERT_GE(methods.size(), 100u);
  std::size_t sketch_pairs = 0;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    for (std::size_t j = 0; j < methods.size(); ++j) {
      const auto& [ma, sa] = methods[i];
      const auto& [mb, sb] = methods[j];
      const bool exact = exact_match(ma, mb);
      const bool sk = sketch_match(sa, sb);
      const bool seq = seq_match(sa, sb);
      const bool api = api_match(sa, sb);
      if (exact) EXPECT_TRUE(sk) << ma.name << " / " << mb.name;
      if (sk) EXPECT_TRUE(seq) << ma.name << " / " << mb.name;
      if (seq) EXPECT_TRUE(api) << ma.name << " / " << mb.name;
      if (sk && i != j) ++sketch_pairs;
    }
  }
  EXPECT_GT(sketch_pairs, 0u);
}

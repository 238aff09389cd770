#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>

#include "codec/context.h"
#include "codec/corpus.h"
#include "codec/error.h"
#include "codec/mj.h"
#include "test_util.h"

using namespace codec;
using codec::testing::query_path;

namespace {

using Inst = std::vector<std::string>;
using Insts = std::vector<Inst>;

std::vector<ClassUnit> parse_file(const std::filesystem::path& p) {
  return parse_source(read_file(p));
}

bool all_lower(const Inst& inst) {
  return std::all_of(inst.begin(), inst.end(), [](const std::string& t) {
    return std::none_of(t.begin(), t.end(), [](unsigned char c) { return std::isupper(c); });
  });
}

}  // namespace

TEST(Parser, GuiQueryHasOneHole) {
  const auto units = parse_file(query_path("gui_frame.mj"));
  ASSERT_EQ(units.size(), 1u);
  EXPECT_EQ(units[0].class_name, "MyGuiAppl");
  ASSERT_EQ(units[0].methods.size(), 1u);
  EXPECT_TRUE(units[0].methods[0].is_hole());
  EXPECT_EQ(find_hole(units[0]), 0u);
}

TEST(Parser, EmptyClassBody) {
  const auto units = parse_source("class Empty { }");
  ASSERT_EQ(units.size(), 1u);
  EXPECT_TRUE(units[0].methods.empty());
}

TEST(Parser, UnbalancedBraceReportsLine) {
  try {
    parse_source("class A {\n  void f() {\n    g();\n\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 3);
  }
  try {
    parse_source("class A {\n  void f() {\n  }\n}\n}\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5);
  }
}

TEST(Parser, PrettyPrintIsIdempotentOnFixtures) {
  for (const auto& entry : std::filesystem::directory_iterator(codec::testing::corpus_dir())) {
    const auto units = parse_file(entry.path());
    const auto once = print_source(units);
    const auto reparsed = parse_source(once);
    EXPECT_EQ(reparsed, units) << entry.path();
    EXPECT_EQ(print_source(reparsed), once) << entry.path();
  }
}

TEST(CamelCase, Examples) {
  EXPECT_EQ(split_camel_case("readFully"), (Inst{"read", "fully"}));
  EXPECT_EQ(split_camel_case("MyGuiAppl"), (Inst{"my", "gui", "appl"}));
  EXPECT_EQ(split_camel_case("a"), (Inst{"a"}));
  EXPECT_EQ(split_camel_case("HTMLParser2x"), (Inst{"html", "parser", "2", "x"}));
  EXPECT_EQ(split_camel_case("max_value"), (Inst{"max", "value"}));
}

TEST(Javadoc, TagsDroppedAndLowercased) {
  EXPECT_EQ(tokenize_javadoc("Create a new Frame. @param title the title"),
            (Inst{"create", "a", "new", "frame"}));
  EXPECT_EQ(tokenize_javadoc("Uses {@code Foo} here"), (Inst{"uses", "foo", "here"}));
}

TEST(Extract, GuiQueryBundle) {
  const auto units = parse_file(query_path("gui_frame.mj"));
  const auto b = extract_context(units[0], find_hole(units[0]));
  EXPECT_EQ(b[EvidenceType::kClassName], (Insts{{"my", "gui", "appl"}}));
  EXPECT_EQ(b[EvidenceType::kJavadoc], (Insts{{"create", "a", "new", "frame"}}));
  EXPECT_EQ(b[EvidenceType::kReturnType], (Insts{{"JFrame"}}));
  EXPECT_EQ(b[EvidenceType::kFormalParams], (Insts{{"a"}}));
  EXPECT_TRUE(b[EvidenceType::kApiCalls].empty());
  EXPECT_TRUE(b[EvidenceType::kMethodName].empty());
  EXPECT_TRUE(b[EvidenceType::kApiSequences].empty());
}

TEST(Extract, BareHoleOnlyHasClassName) {
  const auto units = parse_source("class Lonely { ? ?() { __CODE_SEARCH__; } }");
  const auto b = extract_context(units[0], 0);
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
    if (static_cast<EvidenceType>(j) == EvidenceType::kClassName)
      EXPECT_EQ(b.evidences[j], (Insts{{"lonely"}}));
    else
      EXPECT_TRUE(b.evidences[j].empty()) << evidence_type_name(static_cast<EvidenceType>(j));
  }
}

TEST(Extract, SurroundingSequencesOfIoListing) {
  const auto units = parse_file(query_path("io_surround.mj"));
  const auto hole = find_hole(units[0]);
  EXPECT_EQ(units[0].methods[hole].name, "findMe");
  const auto b = extract_context(units[0], hole);
  EXPECT_EQ(b[EvidenceType::kSurroundingApiSequences], (Insts{{"InputStream.read"}}));
  EXPECT_EQ(b[EvidenceType::kSurroundingMethodNames], (Insts{{"read", "fully"}}));
  EXPECT_EQ(b[EvidenceType::kSurroundingReturnTypes], (Insts{{"void"}}));
  EXPECT_EQ(b[EvidenceType::kSurroundingFormalParams].size(), 4u);
  EXPECT_EQ(b[EvidenceType::kMethodName], (Insts{{"find", "me"}}));
  EXPECT_EQ(b[EvidenceType::kFormalParams], (Insts{{"OutputStream", "out"}}));
}

TEST(Extract, TargetOutOfRange) {
  const auto units = parse_file(query_path("gui_frame.mj"));
  EXPECT_THROW(extract_context(units[0], 1), UsageError);
}

TEST(Extract, HoleBodyContributesNothing) {
  for (const auto& unit : load_mj_directory(codec::testing::corpus_dir())) {
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
      ClassUnit masked = unit;
      masked.methods[i] = with_hole_body(unit.methods[i]);
      const auto b = extract_context(masked, i);
      EXPECT_TRUE(b[EvidenceType::kApiCalls].empty());
      EXPECT_TRUE(b[EvidenceType::kApiSequences].empty());
      EXPECT_TRUE(b[EvidenceType::kTypes].empty());
      EXPECT_TRUE(b[EvidenceType::kKeywords].empty());
      // The bundle does not depend on what the body used to be.
      ClassUnit other = unit;
      other.methods[i].body = Stmt{};
      other.methods[i] = with_hole_body(other.methods[i]);
      EXPECT_EQ(extract_context(other, i), b);
    }
  }
}

TEST(Extract, TokensNonEmptyAndIdentifiersLowercase) {
  for (const auto& unit : load_mj_directory(codec::testing::corpus_dir())) {
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
      const auto b = extract_context(unit, i);
      EXPECT_EQ(extract_context(unit, i), b);
      for (const auto& insts : b.evidences)
        for (const auto& inst : insts) {
          EXPECT_FALSE(inst.empty());
          for (const auto& t : inst) EXPECT_FALSE(t.empty());
        }
      for (auto t : {EvidenceType::kClassName, EvidenceType::kMethodName, EvidenceType::kJavadoc,
                     EvidenceType::kSurroundingMethodNames, EvidenceType::kKeywords})
        for (const auto& inst : b[t]) EXPECT_TRUE(all_lower(inst)) << evidence_type_name(t);
    }
  }
}

TEST(FindHole, Errors) {
  const auto none = parse_file(query_path("no_hole.mj"));
  EXPECT_THROW(find_hole(none[0]), DataError);
  EXPECT_THROW(find_hole(none), DataError);
  const auto two = parse_source(
      "class T { void a() { __CODE_SEARCH__; } void b() { __CODE_SEARCH__; } }");
  EXPECT_THROW(find_hole(two[0]), DataError);
}

TEST(EvidenceNames, RoundTrip) {
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
    const auto t = static_cast<EvidenceType>(j);
    EXPECT_EQ(evidence_type_from_name(evidence_type_name(t)), t);
  }
  EXPECT_FALSE(evidence_type_from_name("nope").has_value());
}

TEST(Jsonl, MatchesParserPath) {
  const auto classes = load_mj_directory(codec::testing::corpus_dir());
  const auto records = records_from_classes(classes);
  std::size_t k = 0;
  for (const auto& unit : classes) {
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
      ClassUnit masked = unit;
      masked.methods[i] = with_hole_body(unit.methods[i]);
      ASSERT_LT(k, records.size());
      EXPECT_EQ(records[k].evidences, extract_context(masked, i));
      EXPECT_EQ(records[k].sketch, serialize_sketch(decompile(unit.methods[i], &unit)));
      ++k;
    }
  }
  EXPECT_EQ(k, records.size());

  const auto path = std::filesystem::temp_directory_path() / "codec_test_fixture.jsonl";
  write_jsonl(path, records);
  EXPECT_EQ(read_jsonl(path), records);
  std::filesystem::remove(path);
  for (const auto& r : records) EXPECT_EQ(from_json_line(to_json_line(r)), r);
}

TEST(Jsonl, MalformedLine) {
  EXPECT_THROW(from_json_line("{not json", 3), DataError);
  EXPECT_THROW(from_json_line(R"({"id": 1})", 1), DataError);
  EXPECT_THROW(from_json_line(R"({"id":1,"evidences":{"bogus":[]},"sketch":"","source":""})", 1),
               DataError);
}

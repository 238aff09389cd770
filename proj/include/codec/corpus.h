#pragma once

// Canonical interchange format for extracted corpora: JSON lines, one record
// per indexable method,
//   {"id": int, "evidences": {type: [[token, ...], ...]}, "sketch": text, "source": text}

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codec/context.h"
#include "codec/mj.h"
#include "codec/sketch.h"

namespace codec {

struct CorpusRecord {
  std::int64_t id = 0;
  ContextBundle evidences;
  std::string sketch;  // serialize_sketch text
  std::string source;  // printed MJ method

  bool operator==(const CorpusRecord&) const = default;
};

// One record per non-hole method. The method's own body is masked before
// extraction, so a training context looks exactly like a query context.
// Ids are assigned sequentially from first_id.
std::vector<CorpusRecord> records_from_classes(const std::vector<ClassUnit>& classes,
                                               std::int64_t first_id = 0);

std::string to_json_line(const CorpusRecord& record);
// Throws DataError naming the line on malformed input.
CorpusRecord from_json_line(const std::string& line, std::size_t line_number = 0);

void write_jsonl(const std::filesystem::path& path, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_jsonl(const std::filesystem::path& path);

// All .mj files under dir (sorted by path), parsed.
std::vector<ClassUnit> load_mj_directory(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace codec

#include <algorithm>
#include <fstream>
#include <sstream>

#include "codec/corpus.h"
#include "codec/decompile.h"
#include "codec/error.h"
#include "json.hpp"

namespace codec {

using nlohmann::json;

std::vector<CorpusRecord> records_from_classes(const std::vector<ClassUnit>& classes,
                                               std::int64_t first_id) {
  std::vector<CorpusRecord> out;
  std::int64_t id = first_id;
  for (const auto& unit : classes) {
    for (std::size_t i = 0; i < unit.methods.size(); ++i) {
      const MethodAst& m = unit.methods[i];
      if (m.is_hole()) continue;
      ClassUnit masked = unit;
      masked.methods[i] = with_hole_body(m);
      CorpusRecord r;
      r.id = id++;
      r.evidences = extract_context(masked, i);
      r.sketch = serialize_sketch(decompile(m, &unit));
      r.source = print_method(m);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::string to_json_line(const CorpusRecord& record) {
  json ev = json::object();
  for (std::size_t t = 0; t < kNumEvidenceTypes; ++t)
    ev[std::string(evidence_type_name(static_cast<EvidenceType>(t)))] = record.evidences.evidences[t];
  json j;
  j["id"] = record.id;
  j["evidences"] = std::move(ev);
  j["sketch"] = record.sketch;
  j["source"] = record.source;
  return j.dump();
}

CorpusRecord from_json_line(const std::string& line, std::size_t line_number) {
  const std::string where = "corpus line " + std::to_string(line_number) + ": ";
  try {
    const json j = json::parse(line);
    CorpusRecord r;
    r.id = j.at("id").get<std::int64_t>();
    for (const auto& [key, value] : j.at("evidences").items()) {
      const auto type = evidence_type_from_name(key);
      if (!type) throw DataError(where + "unknown evidence type '" + key + "'");
      auto instances = value.get<std::vector<EvidenceInstance>>();
      for (const auto& inst : instances) {
        if (inst.empty()) throw DataError(where + "empty evidence instance in '" + key + "'");
        for (const auto& tok : inst)
          if (tok.empty()) throw DataError(where + "empty token in '" + key + "'");
      }
      r.evidences[*type] = std::move(instances);
    }
    r.sketch = j.at("sketch").get<std::string>();
    r.source = j.at("source").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(where + e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<CorpusRecord> read_jsonl(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<CorpusRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(from_json_line(line, n));
  }
  return out;
}

std::vector<ClassUnit> load_mj_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".mj") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<ClassUnit> out;
  for (const auto& f : files) {
    try {
      for (auto& u : parse_source(read_file(f))) out.push_back(std::move(u));
    } catch (const ParseError& e) {
      throw DataError(f.string() + ":" + e.what());
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace codec

#pragma once

// Searchable database of precomputed sketch summaries Y' = (mu_Y, var_Y, log P(Y)).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codec/corpus.h"
#include "codec/model.h"
#include "codec/sketch.h"

namespace codec {

struct IndexEntry {
  std::int64_t id = 0;
  std::vector<double> mu_y;
  std::vector<double> var_y;
  double log_py = 0.0;
  std::string sketch_text;
  std::string source_text;

  bool operator==(const IndexEntry&) const = default;
};

struct IndexInput {
  std::int64_t id = 0;
  SketchAst sketch;
  std::string source_text;
};

// Dense scan layout. Entry i occupies numeric[i*stride() .. (i+1)*stride()):
// mu (dim), var (dim), log_py. Texts live in parallel arrays that the scan
// never touches.
struct IndexShard {
  std::size_t dim = 0;
  std::vector<std::int64_t> ids;
  std::vector<double> numeric;
  std::vector<std::string> sketch_texts;
  std::vector<std::string> source_texts;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t stride() const noexcept { return 2 * dim + 1; }
  const double* row(std::size_t i) const noexcept { return numeric.data() + i * stride(); }
  void push_back(const IndexEntry& e);
};

// Seed used for one entry's log P(Y) estimate. It depends on the sketch
// content, not the id, so duplicate programs get identical summaries.
std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& sketch_text);

// Entries come back in input order whatever the thread count
// (0 = hardware concurrency). Throws UsageError on duplicate ids.
std::vector<IndexEntry> build_index(const ModelParams& p, const std::vector<IndexInput>& corpus,
                                    std::size_t mc_n, std::uint64_t seed,
                                    std::size_t threads = 1);
std::vector<IndexInput> index_inputs(const std::vector<CorpusRecord>& records);

// Binary layout (little-endian):
//   "CDXI" u32 version u32 d u64 count
//   count x (u64 id, d f64 mu, d f64 var, f64 log_py)
//   (2 count + 1) x u64 text offsets, then the UTF-8 text blob
//   (sketch_0, source_0, sketch_1, ...)
std::string serialize_index(const std::vector<IndexEntry>& entries);
std::vector<IndexEntry> deserialize_index(std::string_view bytes);
void save_index(const std::vector<IndexEntry>& entries, const std::filesystem::path& path);
std::vector<IndexEntry> load_index(const std::filesystem::path& path);

// FNV-1a of the serialized index.
std::uint64_t index_checksum(const std::vector<IndexEntry>& entries);

// Round-robin: entry i goes to shard i % n_shards.
std::vector<IndexShard> shard(const std::vector<IndexEntry>& entries, std::size_t n_shards);

// Throws DimensionMismatch unless every shard matches the model.
void check_index_dim(const std::vector<IndexShard>& shards, const ModelParams& p);

}  // namespace codec

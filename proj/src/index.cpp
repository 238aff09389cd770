#include "codec/index.h"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "codec/error.h"
#include "codec/rng.h"

namespace codec {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr char kMagic[4] = {'C', 'D', 'X', 'I'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_at(std::string_view bytes, std::size_t pos) {
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  return v;
}

}  // namespace

void IndexShard::push_back(const IndexEntry& e) {
  ids.push_back(e.id);
  numeric.insert(numeric.end(), e.mu_y.begin(), e.mu_y.end());
  numeric.insert(numeric.end(), e.var_y.begin(), e.var_y.end());
  numeric.push_back(e.log_py);
  sketch_texts.push_back(e.sketch_text);
  source_texts.push_back(e.source_text);
}

std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& sketch_text) {
  return mix_seed(global_seed, hash_text(sketch_text));
}

std::vector<IndexEntry> build_index(const ModelParams& p, const std::vector<IndexInput>& corpus,
                                    std::size_t mc_n, std::uint64_t seed, std::size_t threads) {
  if (mc_n == 0) throw UsageError("build_index: mc_n must be >= 1");
  std::set<std::int64_t> seen;
  for (const auto& in : corpus)
    if (!seen.insert(in.id).second)
      throw UsageError("build_index: duplicate id " + std::to_string(in.id));

  std::vector<IndexEntry> out(corpus.size());
  auto work = [&](std::size_t i) {
    const IndexInput& in = corpus[i];
    IndexEntry& e = out[i];
    e.id = in.id;
    e.sketch_text = serialize_sketch(in.sketch);
    e.source_text = in.source_text;
    const PreparedSketch ps = prepare_sketch(p, in.sketch);
    const DiagGaussian q = reverse_encode(p, ps);
    e.mu_y = q.mean();
    e.var_y = q.variance();
    e.log_py = estimate_log_py_detail(p, ps, mc_n, entry_seed(seed, e.sketch_text)).log_mean;
    if (!std::isfinite(e.log_py))
      throw NumericError("build_index: non-finite log P(Y) for id " + std::to_string(in.id));
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(corpus.size(), 1));
  if (threads <= 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < corpus.size(); i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<IndexInput> index_inputs(const std::vector<CorpusRecord>& records) {
  std::vector<IndexInput> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.id, parse_sketch(r.sketch), r.source});
  return out;
}

std::string serialize_index(const std::vector<IndexEntry>& entries) {
  const std::size_t d = entries.empty() ? 0 : entries.front().mu_y.size();
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint64_t>(out, entries.size());
  for (const auto& e : entries) {
    if (e.mu_y.size() != d || e.var_y.size() != d) throw DimensionMismatch(d, e.mu_y.size());
    put<std::uint64_t>(out, static_cast<std::uint64_t>(e.id));
    for (double x : e.mu_y) put<double>(out, x);
    for (double x : e.var_y) put<double>(out, x);
    put<double>(out, e.log_py);
  }
  std::uint64_t offset = 0;
  put<std::uint64_t>(out, offset);
  for (const auto& e : entries) {
    offset += e.sketch_text.size();
    put<std::uint64_t>(out, offset);
    offset += e.source_text.size();
    put<std::uint64_t>(out, offset);
  }
  for (const auto& e : entries) {
    out += e.sketch_text;
    out += e.source_text;
  }
  return out;
}

std::vector<IndexEntry> deserialize_index(std::string_view bytes) {
  constexpr std::size_t kHeader = 4 + 4 + 4 + 8;
  if (bytes.size() < kHeader) throw DataError("index: truncated header");
  if (bytes.substr(0, 4) != std::string_view(kMagic, 4)) throw DataError("index: bad magic");
  const auto version = get_at<std::uint32_t>(bytes, 4);
  if (version != kVersion) throw DataError("index: unsupported version " + std::to_string(version));
  const std::size_t d = get_at<std::uint32_t>(bytes, 8);
  const std::uint64_t count = get_at<std::uint64_t>(bytes, 12);

  const std::size_t stride = 8 + (2 * d + 1) * 8;
  const std::size_t avail = bytes.size() - kHeader;
  if (count > avail / stride) throw DataError("index: truncated numeric section");
  const std::size_t text_table = kHeader + count * stride;
  const std::size_t n_offsets = 2 * count + 1;
  if ((bytes.size() - text_table) / 8 < n_offsets) throw DataError("index: truncated offset table");
  const std::size_t blob = text_table + n_offsets * 8;
  const std::size_t blob_size = bytes.size() - blob;
  if (get_at<std::uint64_t>(bytes, text_table) != 0) throw DataError("index: bad offset table");
  if (get_at<std::uint64_t>(bytes, text_table + (n_offsets - 1) * 8) != blob_size)
    throw DataError("index: text section length mismatch");

  std::vector<IndexEntry> out(count);
  std::size_t pos = kHeader;
  std::uint64_t prev = 0;
  auto text = [&](std::size_t k) {
    const auto end = get_at<std::uint64_t>(bytes, text_table + (k + 1) * 8);
    if (end < prev || end > blob_size) throw DataError("index: bad offset table");
    std::string s(bytes.substr(blob + prev, end - prev));
    prev = end;
    return s;
  };
  for (std::size_t i = 0; i < count; ++i) {
    IndexEntry& e = out[i];
    e.id = static_cast<std::int64_t>(get_at<std::uint64_t>(bytes, pos));
    pos += 8;
    e.mu_y.resize(d);
    e.var_y.resize(d);
    std::memcpy(e.mu_y.data(), bytes.data() + pos, d * 8);
    pos += d * 8;
    std::memcpy(e.var_y.data(), bytes.data() + pos, d * 8);
    pos += d * 8;
    e.log_py = get_at<double>(bytes, pos);
    pos += 8;
    for (double v : e.var_y)
      if (!(v > 0.0)) throw DataError("index: non-positive variance for id " + std::to_string(e.id));
    e.sketch_text = text(2 * i);
    e.source_text = text(2 * i + 1);
  }
  return out;
}

void save_index(const std::vector<IndexEntry>& entries, const std::filesystem::path& path) {
  write_file(path, serialize_index(entries));
}

std::vector<IndexEntry> load_index(const std::filesystem::path& path) {
  return deserialize_index(read_file(path));
}

std::uint64_t index_checksum(const std::vector<IndexEntry>& entries) {
  return hash_text(serialize_index(entries));
}

std::vector<IndexShard> shard(const std::vector<IndexEntry>& entries, std::size_t n_shards) {
  if (n_shards == 0) throw UsageError("shard: n_shards must be >= 1");
  std::vector<IndexShard> out(n_shards);
  const std::size_t d = entries.empty() ? 0 : entries.front().mu_y.size();
  for (auto& s : out) s.dim = d;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].mu_y.size() != d || entries[i].var_y.size() != d)
      throw DimensionMismatch(d, entries[i].mu_y.size());
    out[i % n_shards].push_back(entries[i]);
  }
  return out;
}

void check_index_dim(const std::vector<IndexShard>& shards, const ModelParams& p) {
  for (const auto& s : shards)
    if (s.size() > 0 && s.dim != p.dim) throw DimensionMismatch(p.dim, s.dim);
}

}  // namespace codec

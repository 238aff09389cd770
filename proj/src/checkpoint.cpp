#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "codec/corpus.h"
#include "codec/error.h"
#include "codec/model.h"
#include "codec/rng.h"

namespace codec {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

constexpr char kMagic[4] = {'C', 'D', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("checkpoint: truncated file");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// Sizes every block from the header so a checkpoint can be read back into
// weight_blocks() order.
ModelWeights shaped_weights(std::size_t dim, const std::array<std::size_t, kNumEvidenceTypes>& ev,
                            std::size_t sketch_vocab) {
  ModelWeights w;
  const std::size_t feat = sketch_vocab + kDepthBins;
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) w.embeddings[j].resize(ev[j] * dim);
  w.enc_mean_w.resize(feat * dim);
  w.enc_mean_b.resize(dim);
  w.enc_logvar_w.resize(feat * dim);
  w.enc_logvar_b.resize(dim);
  w.dec_w.resize(dim * sketch_vocab);
  w.dec_b.resize(sketch_vocab);
  return w;
}

void put_vocab(std::string& out, const Vocab& v) {
  for (const auto& t : v.tokens()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.size()));
    out += t;
  }
}

Vocab get_vocab(Reader& r, std::size_t size) {
  Vocab v;
  for (std::size_t i = 0; i < size; ++i) {
    const auto len = r.get<std::uint32_t>();
    const std::string_view tok = r.take(len);
    if (i == 0) {
      if (tok != Vocab::kUnkToken) throw DataError("checkpoint: vocabulary lacks unknown token");
      continue;
    }
    if (v.add(tok) != i) throw DataError("checkpoint: duplicate vocabulary token");
  }
  return v;
}

}  // namespace

std::string serialize_checkpoint(const ModelParams& p) {
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kNumEvidenceTypes));
  for (const auto& v : p.evidence_vocab) put<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.sketch_vocab.size()));
  ModelWeights w = p.w;
  for (const auto& b : weight_blocks(w))
    for (double x : b.values) put<double>(out, x);
  for (const auto& v : p.evidence_vocab) put_vocab(out, v);
  put_vocab(out, p.sketch_vocab);
  put<std::uint64_t>(out, hash_text(out));
  return out;
}

ModelParams deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(4) != std::string_view(kMagic, 4)) throw DataError("checkpoint: bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  ModelParams p;
  p.dim = r.get<std::uint32_t>();
  if (p.dim == 0) throw DataError("checkpoint: zero dimension");
  if (r.get<std::uint32_t>() != kNumEvidenceTypes)
    throw DataError("checkpoint: evidence type count mismatch");
  std::array<std::size_t, kNumEvidenceTypes> ev{};
  for (auto& s : ev) s = r.get<std::uint32_t>();
  const std::size_t sketch_vocab = r.get<std::uint32_t>();
  // Bound the allocation by what the file can actually hold.
  std::size_t total = 0;
  for (auto s : ev) total += s * p.dim;
  total += 2 * (sketch_vocab + kDepthBins) * p.dim + p.dim * sketch_vocab + sketch_vocab;
  if (total > bytes.size() / sizeof(double)) throw DataError("checkpoint: truncated file");

  p.w = shaped_weights(p.dim, ev, sketch_vocab);
  for (auto& b : weight_blocks(p.w))
    for (double& x : b.values) x = r.get<double>();
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) p.evidence_vocab[j] = get_vocab(r, ev[j]);
  p.sketch_vocab = get_vocab(r, sketch_vocab);
  const std::size_t body = r.pos();
  const auto checksum = r.get<std::uint64_t>();
  if (checksum != hash_text(bytes.substr(0, body))) throw DataError("checkpoint: checksum mismatch");
  if (r.pos() != bytes.size()) throw DataError("checkpoint: trailing bytes");
  return p;
}

void save_checkpoint(const ModelParams& p, const std::string& path) {
  write_file(path, serialize_checkpoint(p));
}

ModelParams load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace codec

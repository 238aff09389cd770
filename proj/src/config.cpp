#include "codec/config.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "codec/corpus.h"
#include "codec/error.h"

namespace codec {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view v, T& out) {
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::kAdam ? "adam" : "sgd";
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = learning_rate;
  t.steps = steps;
  t.batch_size = batch_size;
  t.z_samples = z_samples;
  t.seed = seed;
  t.clip_norm = clip_norm;
  t.optimizer = optimizer;
  return t;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw UsageError("config: " + what); };
  if (dim == 0) fail("dim must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("lr must be positive");
  if (z_samples == 0) fail("z_samples must be >= 1");
  if (!(clip_norm > 0.0)) fail("clip_norm must be positive");
  if (!(init_scale > 0.0)) fail("init_scale must be positive");
  if (index_mc == 0) fail("index_mc must be >= 1");
  if (mc_n == 0) fail("mc_n must be >= 1");
  if (shards == 0) fail("shards must be >= 1");
  if (k == 0) fail("k must be >= 1");
}

bool set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  auto size_field = [&](std::size_t& f) {
    if (!parse_number(value, f)) throw UsageError("config: bad integer for " + std::string(key));
  };
  auto real_field = [&](double& f) {
    if (!parse_number(value, f)) throw UsageError("config: bad number for " + std::string(key));
  };
  if (key == "dim") size_field(cfg.dim);
  else if (key == "seed") {
    if (!parse_number(value, cfg.seed)) throw UsageError("config: bad integer for seed");
  } else if (key == "lr") real_field(cfg.learning_rate);
  else if (key == "steps") size_field(cfg.steps);
  else if (key == "batch_size") size_field(cfg.batch_size);
  else if (key == "z_samples") size_field(cfg.z_samples);
  else if (key == "clip_norm") real_field(cfg.clip_norm);
  else if (key == "init_scale") real_field(cfg.init_scale);
  else if (key == "optimizer") {
    if (value == "sgd") cfg.optimizer = Optimizer::kGradientAscent;
    else if (value == "adam") cfg.optimizer = Optimizer::kAdam;
    else throw UsageError("config: optimizer must be sgd or adam");
  } else if (key == "index_mc") size_field(cfg.index_mc);
  else if (key == "mc_n") size_field(cfg.mc_n);
  else if (key == "shards") size_field(cfg.shards);
  else if (key == "threads") size_field(cfg.threads);
  else if (key == "k") size_field(cfg.k);
  else if (key == "corpus") cfg.corpus = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "index") cfg.index = value;
  else return false;
  return true;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      if (!set_config_value(base, key, value))
        throw UsageError("unknown key '" + std::string(key) + "'");
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  return parse_config(read_file(path), std::move(base));
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "dim=" << dim << "\n"
     << "seed=" << seed << "\n"
     << "lr=" << fmt_double(learning_rate) << "\n"
     << "steps=" << steps << "\n"
     << "batch_size=" << batch_size << "\n"
     << "z_samples=" << z_samples << "\n"
     << "clip_norm=" << fmt_double(clip_norm) << "\n"
     << "optimizer=" << optimizer_name(optimizer) << "\n"
     << "init_scale=" << fmt_double(init_scale) << "\n"
     << "index_mc=" << index_mc << "\n"
     << "mc_n=" << mc_n << "\n"
     << "shards=" << shards << "\n"
     << "threads=" << threads << "\n"
     << "k=" << k << "\n"
     << "corpus=" << corpus << "\n"
     << "checkpoint=" << checkpoint << "\n"
     << "index=" << index << "\n";
  return os.str();
}

}  // namespace codec

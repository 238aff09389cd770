#pragma once

// Run configuration: a flat key=value text file. '#' starts a comment.

#include <cstdint>
#include <filesystem>
#include <string>

#include "codec/model.h"

namespace codec {

struct RunConfig {
  std::size_t dim = 16;
  std::uint64_t seed = 1;
  double learning_rate = 0.001;
  std::size_t steps = 2000;
  std::size_t batch_size = 0;  // 0 = full dataset
  std::size_t z_samples = 1;
  double clip_norm = 10.0;
  Optimizer optimizer = Optimizer::kGradientAscent;
  double init_scale = 0.01;
  std::size_t index_mc = 64;   // importance samples per log P(Y)
  std::size_t mc_n = 30;       // draws for MC scoring
  std::size_t shards = 1;
  std::size_t threads = 0;     // 0 = hardware concurrency
  std::size_t k = 10;
  std::string corpus;
  std::string checkpoint;
  std::string index;

  TrainConfig train_config() const;
  // Throws UsageError naming the offending field.
  void validate() const;
  std::string to_text() const;

  bool operator==(const RunConfig&) const = default;
};

// Unknown keys and malformed values throw UsageError with the line number.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

// Sets one field from its textual value; returns false for an unknown key.
bool set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

std::string_view optimizer_name(Optimizer o);

}  // namespace codec

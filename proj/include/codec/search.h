#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "codec/gauss.h"
#include "codec/index.h"
#include "codec/model.h"

namespace codec {

struct SearchResult {
  std::size_t rank = 0;  // 1-based
  std::int64_t id = 0;
  double score = 0.0;    // log P(Y|X)
  std::string sketch_text;
  std::string source_text;

  bool operator==(const SearchResult&) const = default;
};

struct SearchDiagnostics {
  std::size_t scanned = 0;
  std::vector<std::int64_t> excluded_ids;  // non-integrable or non-finite scores, ascending
};

// Top-min(k, N) entries by convolution score; score descending, id ascending
// on ties. Independent of shard and thread count (threads 0 = hardware).
std::vector<SearchResult> search(const std::vector<IndexShard>& shards, const ModelParams& p,
                                 const ContextBundle& x, std::size_t k, std::size_t threads = 1,
                                 SearchDiagnostics* diag = nullptr);
std::vector<SearchResult> search(const std::vector<IndexShard>& shards, const DiagGaussian& gx,
                                 std::size_t k, std::size_t threads = 1,
                                 SearchDiagnostics* diag = nullptr);

// Decoded sketches for Monte-Carlo scoring, parallel to the shard layout.
struct McIndex {
  std::vector<std::vector<PreparedSketch>> sketches;
};
McIndex prepare_mc(const std::vector<IndexShard>& shards, const ModelParams& p);

// As search, scored by mc_score with n draws. Every entry uses the same
// draws (common random numbers), so identical sketches tie exactly.
std::vector<SearchResult> search_mc(const std::vector<IndexShard>& shards, const McIndex& mc,
                                    const ModelParams& p, const ContextBundle& x, std::size_t k,
                                    std::size_t n, std::uint64_t seed, std::size_t threads = 1,
                                    SearchDiagnostics* diag = nullptr);
std::vector<SearchResult> search_mc(const std::vector<IndexShard>& shards, const ModelParams& p,
                                    const ContextBundle& x, std::size_t k, std::size_t n,
                                    std::uint64_t seed, std::size_t threads = 1,
                                    SearchDiagnostics* diag = nullptr);

struct BenchReport {
  std::size_t entries = 0;
  std::size_t threads = 1;
  double analytic_seconds = 0.0;
  double analytic_per_sec = 0.0;             // total
  double analytic_per_sec_per_thread = 0.0;
  std::size_t mc_entries = 0;
  std::size_t mc_n = 30;
  double mc_seconds = 0.0;
  double mc_per_sec = 0.0;
  double slowdown = 0.0;  // per-thread analytic rate / single-thread MC rate
};

// Times `repeats` analytic scans of all shards and one MC(n=mc_n) scan over
// at most mc_limit entries (the MC scan is far slower; its rate is per entry).
BenchReport bench_scan(const std::vector<IndexShard>& shards, const ModelParams& p,
                       const ContextBundle& x, std::size_t repeats, std::size_t threads = 1,
                       std::size_t mc_n = 30, std::size_t mc_limit = 10000);

// Analytic scan only; returns entries scored per second.
double time_analytic_scan(const std::vector<IndexShard>& shards, const DiagGaussian& gx,
                          std::size_t repeats, std::size_t threads, double* seconds = nullptr);

}  // namespace codec

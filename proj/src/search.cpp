#include "codec/search.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "codec/error.h"

namespace codec {
namespace {

struct Candidate {
  double score;
  std::int64_t id;
  std::size_t shard;
  std::size_t row;
};

// Strict ranking order: higher score first, then smaller id.
bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

struct ShardScan {
  std::vector<Candidate> top;  // heap ordered so top.front() is the worst kept
  std::vector<std::int64_t> excluded;
  std::size_t scanned = 0;
};

std::size_t resolve_threads(std::size_t threads, std::size_t work_items) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(threads, work_items));
}

// Runs fn(shard_index) for every shard on up to `threads` workers.
template <typename Fn>
void for_each_shard(std::size_t n_shards, std::size_t threads, Fn&& fn) {
  threads = resolve_threads(threads, n_shards);
  if (threads == 1) {
    for (std::size_t s = 0; s < n_shards; ++s) fn(s);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t s = next++; s < n_shards; s = next++) fn(s);
    });
  for (auto& t : pool) t.join();
}

// Bounded top-k scan of every shard with score_fn(shard, row), then a merge.
template <typename ScoreFn>
std::vector<SearchResult> scan(const std::vector<IndexShard>& shards, std::size_t k,
                               std::size_t threads, SearchDiagnostics* diag, ScoreFn&& score_fn) {
  if (shards.empty()) throw UsageError("search: no shards");
  if (k == 0) throw UsageError("search: k must be >= 1");
  std::vector<ShardScan> scans(shards.size());
  for_each_shard(shards.size(), threads, [&](std::size_t s) {
    const IndexShard& sh = shards[s];
    ShardScan& out = scans[s];
    out.top.reserve(std::min(k, sh.size()));
    for (std::size_t i = 0; i < sh.size(); ++i) {
      const double score = score_fn(s, i);
      if (!std::isfinite(score)) {
        out.excluded.push_back(sh.ids[i]);
        continue;
      }
      const Candidate c{score, sh.ids[i], s, i};
      if (out.top.size() < k) {
        out.top.push_back(c);
        std::push_heap(out.top.begin(), out.top.end(), better);
      } else if (better(c, out.top.front())) {
        std::pop_heap(out.top.begin(), out.top.end(), better);
        out.top.back() = c;
        std::push_heap(out.top.begin(), out.top.end(), better);
      }
    }
    out.scanned = sh.size();
  });

  std::vector<Candidate> merged;
  for (const auto& sc : scans) merged.insert(merged.end(), sc.top.begin(), sc.top.end());
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > k) merged.resize(k);

  std::vector<SearchResult> results;
  results.reserve(merged.size());
  for (std::size_t r = 0; r < merged.size(); ++r) {
    const Candidate& c = merged[r];
    const IndexShard& sh = shards[c.shard];
    results.push_back({r + 1, c.id, c.score, sh.sketch_texts[c.row], sh.source_texts[c.row]});
  }
  if (diag != nullptr) {
    *diag = {};
    for (const auto& sc : scans) {
      diag->scanned += sc.scanned;
      diag->excluded_ids.insert(diag->excluded_ids.end(), sc.excluded.begin(), sc.excluded.end());
    }
    std::sort(diag->excluded_ids.begin(), diag->excluded_ids.end());
  }
  return results;
}

void check_gx(const std::vector<IndexShard>& shards, const DiagGaussian& gx) {
  for (const auto& s : shards)
    if (s.size() > 0 && s.dim != gx.dim()) throw DimensionMismatch(gx.dim(), s.dim);
}

}  // namespace

std::vector<SearchResult> search(const std::vector<IndexShard>& shards, const DiagGaussian& gx,
                                 std::size_t k, std::size_t threads, SearchDiagnostics* diag) {
  check_gx(shards, gx);
  const ConvolutionKernel kernel(gx);
  const std::size_t d = gx.dim();
  return scan(shards, k, threads, diag, [&](std::size_t s, std::size_t i) {
    const double* row = shards[s].row(i);
    return kernel.score(row, row + d, row[2 * d]);
  });
}

std::vector<SearchResult> search(const std::vector<IndexShard>& shards, const ModelParams& p,
                                 const ContextBundle& x, std::size_t k, std::size_t threads,
                                 SearchDiagnostics* diag) {
  check_index_dim(shards, p);
  return search(shards, encode_evidence(p, x), k, threads, diag);
}

McIndex prepare_mc(const std::vector<IndexShard>& shards, const ModelParams& p) {
  McIndex mc;
  mc.sketches.resize(shards.size());
  for (std::size_t s = 0; s < shards.size(); ++s) {
    mc.sketches[s].reserve(shards[s].size());
    for (const auto& text : shards[s].sketch_texts)
      mc.sketches[s].push_back(prepare_sketch(p, parse_sketch(text)));
  }
  return mc;
}

std::vector<SearchResult> search_mc(const std::vector<IndexShard>& shards, const McIndex& mc,
                                    const ModelParams& p, const ContextBundle& x, std::size_t k,
                                    std::size_t n, std::uint64_t seed, std::size_t threads,
                                    SearchDiagnostics* diag) {
  check_index_dim(shards, p);
  if (mc.sketches.size() != shards.size()) throw UsageError("search_mc: McIndex does not match shards");
  const DiagGaussian gx = encode_evidence(p, x);
  return scan(shards, k, threads, diag, [&](std::size_t s, std::size_t i) {
    return mc_score_detail(p, gx, mc.sketches[s][i], n, seed).log_mean;
  });
}

std::vector<SearchResult> search_mc(const std::vector<IndexShard>& shards, const ModelParams& p,
                                    const ContextBundle& x, std::size_t k, std::size_t n,
                                    std::uint64_t seed, std::size_t threads,
                                    SearchDiagnostics* diag) {
  return search_mc(shards, prepare_mc(shards, p), p, x, k, n, seed, threads, diag);
}

double time_analytic_scan(const std::vector<IndexShard>& shards, const DiagGaussian& gx,
                          std::size_t repeats, std::size_t threads, double* seconds) {
  check_gx(shards, gx);
  const ConvolutionKernel kernel(gx);
  const std::size_t d = gx.dim();
  std::size_t total = 0;
  for (const auto& s : shards) total += s.size();
  std::vector<double> sinks(shards.size(), 0.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    for_each_shard(shards.size(), threads, [&](std::size_t s) {
      const IndexShard& sh = shards[s];
      double acc = 0.0;
      for (std::size_t i = 0; i < sh.size(); ++i) {
        const double* row = sh.row(i);
        acc += kernel.score(row, row + d, row[2 * d]);
      }
      sinks[s] += acc;
    });
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Keeps the scoring loop observable so it cannot be optimized away.
  volatile double sink = 0.0;
  for (double v : sinks) sink = sink + v;
  if (seconds != nullptr) *seconds = secs;
  return static_cast<double>(total * std::max<std::size_t>(repeats, 1)) / std::max(secs, 1e-12);
}

BenchReport bench_scan(const std::vector<IndexShard>& shards, const ModelParams& p,
                       const ContextBundle& x, std::size_t repeats, std::size_t threads,
                       std::size_t mc_n, std::size_t mc_limit) {
  check_index_dim(shards, p);
  BenchReport rep;
  for (const auto& s : shards) rep.entries += s.size();
  rep.threads = resolve_threads(threads, shards.size());
  rep.mc_n = mc_n;
  const DiagGaussian gx = encode_evidence(p, x);
  rep.analytic_per_sec = time_analytic_scan(shards, gx, repeats, threads, &rep.analytic_seconds);
  rep.analytic_per_sec_per_thread = rep.analytic_per_sec / static_cast<double>(rep.threads);

  // MC over a prefix of the entries, one shard at a time.
  std::vector<PreparedSketch> sample;
  for (const auto& s : shards) {
    for (std::size_t i = 0; i < s.size() && sample.size() < mc_limit; ++i)
      sample.push_back(prepare_sketch(p, parse_sketch(s.sketch_texts[i])));
  }
  rep.mc_entries = sample.size();
  if (!sample.empty()) {
    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& ps : sample) sink += mc_score_detail(p, gx, ps, mc_n, 1).log_mean;
    rep.mc_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    volatile double keep = sink;
    (void)keep;
    rep.mc_per_sec = static_cast<double>(sample.size()) / std::max(rep.mc_seconds, 1e-12);
    rep.slowdown = rep.analytic_per_sec_per_thread / rep.mc_per_sec;
  }
  return rep;
}

}  // namespace codec

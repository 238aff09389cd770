#pragma once

// Hold-out retrieval evaluation and the synthetic corpus generator.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "codec/context.h"
#include "codec/corpus.h"
#include "codec/index.h"
#include "codec/mj.h"
#include "codec/search.h"
#include "codec/sketch.h"

namespace codec {

struct RetrievalTask {
  std::size_t task_id = 0;
  ContextBundle query;
  SketchAst truth_sketch;
  MethodAst truth_method;
};

// Classes with at least two non-hole methods are eligible. Samples n of them
// without replacement, masks one uniformly chosen method per class and
// extracts the query from what remains. Throws UsageError when fewer than n
// classes are eligible.
std::vector<RetrievalTask> make_tasks(const std::vector<ClassUnit>& corpus, std::size_t n,
                                      std::uint64_t seed);

enum class Matcher { kApi = 0, kSeq, kSketch, kExact };
inline constexpr std::size_t kNumMatchers = 4;
std::string_view matcher_name(Matcher m);

// A search hit decoded for matching.
struct DecodedResult {
  SketchAst sketch;
  std::optional<MethodAst> method;  // absent when the source text does not parse
};
DecodedResult decode_result(const SearchResult& r);

bool equivalent(Matcher m, const RetrievalTask& task, const DecodedResult& r);

// Smallest 1-based rank whose entry is equivalent to the truth, or nullopt.
std::optional<std::size_t> frank(const std::vector<DecodedResult>& results,
                                 const RetrievalTask& task, Matcher m);
std::optional<std::size_t> frank(const std::vector<SearchResult>& results,
                                 const RetrievalTask& task, Matcher m);

using FRank = std::optional<std::size_t>;

// Throw UsageError on an empty task set or k == 0.
double success_rate_at_k(const std::vector<FRank>& franks, std::size_t k);
// flags[q][r] = result r of query q is equivalent; short lists count as misses.
double precision_at_k(const std::vector<std::vector<bool>>& flags, std::size_t k);
// Misses contribute 0.
double mrr(const std::vector<FRank>& franks);

double jaccard_top_k(const std::vector<SearchResult>& a, const std::vector<SearchResult>& b,
                     std::size_t k);

// Expected metrics of a uniformly random ranking of n entries with g
// equivalents among them.
double random_success_at_k(std::size_t n, std::size_t g, std::size_t k);
double random_mrr(std::size_t n, std::size_t g);

inline constexpr std::array<std::string_view, 4> kMetricNames = {"success@1", "success@10",
                                                                 "precision@10", "mrr"};

struct EvalReport {
  std::size_t n_tasks = 0;
  std::size_t depth = 0;  // results retrieved per query
  // metrics[metric][matcher] in kMetricNames x Matcher order.
  std::array<std::array<double, kNumMatchers>, 4> metrics{};
  std::array<std::vector<FRank>, kNumMatchers> franks;

  std::string to_json() const;
  std::string to_csv() const;
};

EvalReport make_report(const std::array<std::vector<FRank>, kNumMatchers>& franks,
                       const std::array<std::vector<std::vector<bool>>, kNumMatchers>& flags,
                       std::size_t depth);

// Searches every task (top `depth`) and scores all four matchers.
EvalReport evaluate(const std::vector<IndexShard>& shards, const ModelParams& p,
                    const std::vector<RetrievalTask>& tasks, std::size_t depth = 100,
                    std::size_t threads = 1);

struct SyntheticCorpus {
  std::vector<ClassUnit> train_classes;
  std::vector<ClassUnit> heldout_classes;
  std::vector<RetrievalTask> tasks;
};

// n_families families, each with a distinct API vocabulary, three method
// templates, and a fixed context vocabulary. per_family training classes
// are generated per family plus ceil(per_family / 16) held-out classes, which
// become retrieval tasks. Each context token is replaced by a random filler
// word with probability `noise`. Throws UsageError unless 2 <= n_families <= 8
// and noise is in [0, 1].
SyntheticCorpus gen_synthetic_corpus(std::size_t n_families, std::size_t per_family, double noise,
                                     std::uint64_t seed);

// Source text of one synthetic class, mostly for tests.
std::string synthetic_class_source(std::size_t family, std::size_t member, double noise,
                                   std::uint64_t seed);

}  // namespace codec

#include "codec/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "codec/decompile.h"
#include "codec/error.h"
#include "codec/rng.h"
#include "json.hpp"

namespace codec {
namespace {

constexpr std::array<std::string_view, kNumMatchers> kMatcherNames = {"api", "seq", "sketch",
                                                                     "exact"};

std::size_t body_count(const ClassUnit& c) {
  return static_cast<std::size_t>(
      std::count_if(c.methods.begin(), c.methods.end(), [](const MethodAst& m) { return !m.is_hole(); }));
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

void require_tasks(std::size_t n, std::size_t k) {
  if (n == 0) throw UsageError("metrics: empty task set");
  if (k == 0) throw UsageError("metrics: K must be >= 1");
}

}  // namespace

std::vector<RetrievalTask> make_tasks(const std::vector<ClassUnit>& corpus, std::size_t n,
                                      std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (body_count(corpus[i]) >= 2) eligible.push_back(i);
  if (eligible.size() < n)
    throw UsageError("make_tasks: " + std::to_string(n) + " tasks requested but only " +
                     std::to_string(eligible.size()) + " eligible classes");
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots are the sample, in draw order.
  for (std::size_t i = 0; i < n; ++i)
    std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);

  std::vector<RetrievalTask> tasks;
  tasks.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const ClassUnit& unit = corpus[eligible[t]];
    std::vector<std::size_t> bodies;
    for (std::size_t m = 0; m < unit.methods.size(); ++m)
      if (!unit.methods[m].is_hole()) bodies.push_back(m);
    const std::size_t target = bodies[rng.below(bodies.size())];

    ClassUnit masked = unit;
    masked.methods[target] = with_hole_body(unit.methods[target]);
    RetrievalTask task;
    task.task_id = t;
    task.query = extract_context(masked, target);
    task.truth_sketch = decompile(unit.methods[target], &unit);
    task.truth_method = unit.methods[target];
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::string_view matcher_name(Matcher m) { return kMatcherNames[static_cast<std::size_t>(m)]; }

DecodedResult decode_result(const SearchResult& r) {
  DecodedResult out;
  out.sketch = parse_sketch(r.sketch_text);
  try {
    out.method = parse_method(r.source_text);
  } catch (const ParseError&) {
    out.method.reset();
  }
  return out;
}

bool equivalent(Matcher m, const RetrievalTask& task, const DecodedResult& r) {
  switch (m) {
    case Matcher::kApi:
      return api_match(task.truth_sketch, r.sketch);
    case Matcher::kSeq:
      return seq_match(task.truth_sketch, r.sketch);
    case Matcher::kSketch:
      return sketch_match(task.truth_sketch, r.sketch);
    case Matcher::kExact:
      return r.method.has_value() && exact_match(task.truth_method, *r.method);
  }
  return false;
}

std::optional<std::size_t> frank(const std::vector<DecodedResult>& results,
                                 const RetrievalTask& task, Matcher m) {
  for (std::size_t i = 0; i < results.size(); ++i)
    if (equivalent(m, task, results[i])) return i + 1;
  return std::nullopt;
}

std::optional<std::size_t> frank(const std::vector<SearchResult>& results,
                                 const RetrievalTask& task, Matcher m) {
  for (std::size_t i = 0; i < results.size(); ++i)
    if (equivalent(m, task, decode_result(results[i]))) return i + 1;
  return std::nullopt;
}

double success_rate_at_k(const std::vector<FRank>& franks, std::size_t k) {
  require_tasks(franks.size(), k);
  std::size_t hits = 0;
  for (const auto& f : franks)
    if (f && *f <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(franks.size());
}

double precision_at_k(const std::vector<std::vector<bool>>& flags, std::size_t k) {
  require_tasks(flags.size(), k);
  std::size_t hits = 0;
  for (const auto& q : flags)
    for (std::size_t r = 0; r < std::min(k, q.size()); ++r)
      if (q[r]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k * flags.size());
}

double mrr(const std::vector<FRank>& franks) {
  require_tasks(franks.size(), 1);
  double sum = 0.0;
  for (const auto& f : franks)
    if (f) sum += 1.0 / static_cast<double>(*f);
  return sum / static_cast<double>(franks.size());
}

double jaccard_top_k(const std::vector<SearchResult>& a, const std::vector<SearchResult>& b,
                     std::size_t k) {
  if (k == 0) throw UsageError("jaccard_top_k: k must be >= 1");
  std::set<std::int64_t> sa, sb;
  for (std::size_t i = 0; i < std::min(k, a.size()); ++i) sa.insert(a[i].id);
  for (std::size_t i = 0; i < std::min(k, b.size()); ++i) sb.insert(b[i].id);
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t inter = 0;
  for (auto id : sa) inter += sb.count(id);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

double random_success_at_k(std::size_t n, std::size_t g, std::size_t k) {
  if (g == 0) return 0.0;
  if (k + g > n) return 1.0;
  const double log_miss = log_choose(static_cast<double>(n - g), static_cast<double>(k)) -
                          log_choose(static_cast<double>(n), static_cast<double>(k));
  return 1.0 - std::exp(log_miss);
}

double random_mrr(std::size_t n, std::size_t g) {
  if (g == 0 || n == 0) return 0.0;
  // P(first equivalent at rank r) = C(n - r, g - 1) / C(n, g).
  const double log_total = log_choose(static_cast<double>(n), static_cast<double>(g));
  double sum = 0.0;
  for (std::size_t r = 1; r + g - 1 <= n; ++r) {
    const double lp =
        log_choose(static_cast<double>(n - r), static_cast<double>(g - 1)) - log_total;
    sum += std::exp(lp) / static_cast<double>(r);
  }
  return sum;
}

EvalReport make_report(const std::array<std::vector<FRank>, kNumMatchers>& franks,
                       const std::array<std::vector<std::vector<bool>>, kNumMatchers>& flags,
                       std::size_t depth) {
  EvalReport rep;
  rep.n_tasks = franks[0].size();
  rep.depth = depth;
  rep.franks = franks;
  for (std::size_t m = 0; m < kNumMatchers; ++m) {
    rep.metrics[0][m] = success_rate_at_k(franks[m], 1);
    rep.metrics[1][m] = success_rate_at_k(franks[m], 10);
    rep.metrics[2][m] = precision_at_k(flags[m], 10);
    rep.metrics[3][m] = mrr(franks[m]);
  }
  return rep;
}

EvalReport evaluate(const std::vector<IndexShard>& shards, const ModelParams& p,
                    const std::vector<RetrievalTask>& tasks, std::size_t depth,
                    std::size_t threads) {
  if (tasks.empty()) throw UsageError("evaluate: no tasks");
  std::array<std::vector<FRank>, kNumMatchers> franks;
  std::array<std::vector<std::vector<bool>>, kNumMatchers> flags;
  for (const auto& task : tasks) {
    const auto results = search(shards, p, task.query, depth, threads);
    std::vector<DecodedResult> decoded;
    decoded.reserve(results.size());
    for (const auto& r : results) decoded.push_back(decode_result(r));
    for (std::size_t m = 0; m < kNumMatchers; ++m) {
      std::vector<bool> f(decoded.size());
      for (std::size_t i = 0; i < decoded.size(); ++i)
        f[i] = equivalent(static_cast<Matcher>(m), task, decoded[i]);
      const auto it = std::find(f.begin(), f.end(), true);
      franks[m].push_back(it == f.end() ? FRank{}
                                        : FRank{static_cast<std::size_t>(it - f.begin()) + 1});
      f.resize(std::min<std::size_t>(f.size(), 10));
      flags[m].push_back(std::move(f));
    }
  }
  return make_report(franks, flags, depth);
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["n_tasks"] = n_tasks;
  j["depth"] = depth;
  nlohmann::ordered_json metrics_json;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    nlohmann::ordered_json row;
    for (std::size_t m = 0; m < kNumMatchers; ++m) row[std::string(kMatcherNames[m])] = metrics[k][m];
    metrics_json[std::string(kMetricNames[k])] = row;
  }
  j["metrics"] = metrics_json;
  nlohmann::ordered_json fr;
  for (std::size_t m = 0; m < kNumMatchers; ++m) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : franks[m]) arr.push_back(f ? nlohmann::ordered_json(*f) : nullptr);
    fr[std::string(kMatcherNames[m])] = arr;
  }
  j["franks"] = fr;
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::string out = "metric";
  for (auto name : kMatcherNames) out += "," + std::string(name);
  out += "\n";
  char buf[32];
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    out += kMetricNames[k];
    for (std::size_t m = 0; m < kNumMatchers; ++m) {
      std::snprintf(buf, sizeof buf, ",%.6f", metrics[k][m]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace codec

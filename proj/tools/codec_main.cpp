// codec: command-line driver for ingest, training, indexing, search and evaluation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "codec/config.h"
#include "codec/corpus.h"
#include "codec/error.h"
#include "codec/eval.h"
#include "codec/index.h"
#include "codec/model.h"
#include "codec/search.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace codec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

// Flags that mirror config keys. Values given on the command line override
// the config file.
class ConfigFlags {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto* opt = app->add_option(flag, values_[key], help);
    opts_.emplace_back(key, opt);
  }
  void add_config_file(CLI::App* app) {
    app->add_option("--config", config_path_, "key=value run configuration file (flags override it)");
  }
  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path_.empty()) cfg = load_config(config_path_);
    for (const auto& [key, opt] : opts_)
      if (opt->count() > 0) set_config_value(cfg, key, values_.at(key));
    cfg.validate();
    return cfg;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> opts_;
  std::string config_path_;
};

struct SyntheticSpec {
  std::size_t families = 8;
  std::size_t per_family = 200;
  double noise = 0.1;
  std::uint64_t seed = 1;
};

// "synthetic:<F>x<P>:<noise>[:<seed>]"
std::optional<SyntheticSpec> parse_synthetic(const std::string& s) {
  constexpr std::string_view kPrefix = "synthetic:";
  if (!s.starts_with(kPrefix)) return std::nullopt;
  SyntheticSpec spec;
  unsigned long long seed = 1;
  double noise = 0.0;
  std::size_t f = 0, p = 0;
  const int got = std::sscanf(s.c_str() + kPrefix.size(), "%zux%zu:%lf:%llu", &f, &p, &noise, &seed);
  if (got < 3) throw UsageError("bad synthetic corpus spec '" + s + "' (want synthetic:<F>x<P>:<noise>[:<seed>])");
  spec.families = f;
  spec.per_family = p;
  spec.noise = noise;
  spec.seed = seed;
  return spec;
}

std::vector<ClassUnit> load_classes(const std::string& src) {
  if (auto spec = parse_synthetic(src))
    return gen_synthetic_corpus(spec->families, spec->per_family, spec->noise, spec->seed).train_classes;
  if (fs::is_directory(src)) return load_mj_directory(src);
  if (fs::is_regular_file(src)) return parse_source(read_file(src));
  throw DataError("no such corpus source: " + src);
}

std::vector<std::pair<ContextBundle, SketchAst>> dataset_from(const std::vector<CorpusRecord>& records) {
  std::vector<std::pair<ContextBundle, SketchAst>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.emplace_back(r.evidences, parse_sketch(r.sketch));
  return out;
}

ContextBundle query_from_file(const std::string& path) {
  const auto units = parse_source(read_file(path));
  const HoleLocation h = find_hole(units);
  return extract_context(units[h.class_index], h.method_index);
}

std::vector<IndexShard> open_index(const std::string& path, const ModelParams& p, std::size_t n_shards) {
  auto shards = shard(load_index(path), n_shards);
  check_index_dim(shards, p);
  return shards;
}

void print_results(const std::vector<SearchResult>& results, const std::string& format) {
  if (format == "json") {
    for (const auto& r : results) {
      nlohmann::ordered_json j;
      j["rank"] = r.rank;
      j["id"] = r.id;
      j["score"] = r.score;
      j["sketch"] = r.sketch_text;
      j["source"] = r.source_text;
      std::cout << j.dump() << "\n";
    }
    return;
  }
  for (const auto& r : results) {
    std::printf("#%zu  id=%lld  score=%.6f\n", r.rank, static_cast<long long>(r.id), r.score);
    std::istringstream src(r.source_text);
    for (std::string line; std::getline(src, line);) std::printf("    %s\n", line.c_str());
  }
}

// ---- subcommands -----------------------------------------------------------

void cmd_ingest(const std::string& src, const std::string& out) {
  std::vector<CorpusRecord> records;
  if (src.ends_with(".jsonl") && fs::is_regular_file(src)) {
    records = read_jsonl(src);
  } else {
    records = records_from_classes(load_classes(src));
  }
  write_jsonl(out, records);
  std::cerr << "ingest: " << records.size() << " records -> " << out << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& out, const std::string& metrics) {
  const auto dataset = dataset_from(read_jsonl(cfg.corpus));
  if (dataset.empty()) throw DataError("train: corpus has no records");
  ModelParams init = init_params(cfg.dim, dataset, cfg.seed, cfg.init_scale);
  const TrainResult res = train(std::move(init), dataset, cfg.train_config());
  std::ofstream csv;
  if (!metrics.empty()) {
    csv.open(metrics);
    if (!csv) throw DataError("cannot write " + metrics);
    csv << "step,objective\n";
  }
  char buf[64];
  for (std::size_t s = 0; s < res.objective_trace.size(); ++s) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", s, res.objective_trace[s]);
    std::cerr << "step " << buf;
    if (csv) csv << buf;
  }
  save_checkpoint(res.params, out);
  std::cerr << "train: " << dataset.size() << " examples, " << res.objective_trace.size()
            << " steps -> " << out << "\n";
}

void cmd_index(const RunConfig& cfg, const std::string& out) {
  const ModelParams p = load_checkpoint(cfg.checkpoint);
  const auto inputs = index_inputs(read_jsonl(cfg.corpus));
  const auto entries = build_index(p, inputs, cfg.index_mc, cfg.seed, cfg.threads);
  save_index(entries, out);
  std::cerr << "index: " << entries.size() << " entries, d=" << p.dim << " -> " << out << "\n";
}

void cmd_search(const RunConfig& cfg, const std::string& query, const std::string& format) {
  const ModelParams p = load_checkpoint(cfg.checkpoint);
  const ContextBundle x = query_from_file(query);
  const auto shards = open_index(cfg.index, p, cfg.shards);
  SearchDiagnostics diag;
  const auto results = search(shards, p, x, cfg.k, cfg.threads, &diag);
  print_results(results, format);
  if (!diag.excluded_ids.empty())
    std::cerr << "search: excluded " << diag.excluded_ids.size() << " non-integrable entries\n";
}

void cmd_eval(const RunConfig& cfg, std::size_t n_tasks, std::size_t depth,
              const std::string& format, const std::string& out) {
  const ModelParams p = load_checkpoint(cfg.checkpoint);
  std::vector<RetrievalTask> tasks;
  if (auto spec = parse_synthetic(cfg.corpus)) {
    tasks = gen_synthetic_corpus(spec->families, spec->per_family, spec->noise, spec->seed).tasks;
    if (n_tasks > 0 && n_tasks < tasks.size()) tasks.resize(n_tasks);
  } else {
    const auto classes = load_classes(cfg.corpus);
    tasks = make_tasks(classes, n_tasks, cfg.seed);
  }
  const auto shards = open_index(cfg.index, p, cfg.shards);
  const EvalReport rep = evaluate(shards, p, tasks, depth, cfg.threads);
  const std::string text = format == "csv" ? rep.to_csv() : rep.to_json();
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

void cmd_oracle_check(const RunConfig& cfg, const std::string& queries, std::size_t n_queries) {
  const ModelParams p = load_checkpoint(cfg.checkpoint);
  std::vector<ContextBundle> xs;
  if (auto spec = parse_synthetic(queries)) {
    for (auto& t : gen_synthetic_corpus(spec->families, spec->per_family, spec->noise, spec->seed).tasks)
      xs.push_back(std::move(t.query));
  } else if (fs::is_directory(queries)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(queries))
      if (e.path().extension() == ".mj") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) xs.push_back(query_from_file(f.string()));
  } else {
    xs.push_back(query_from_file(queries));
  }
  if (n_queries > 0 && xs.size() > n_queries) xs.resize(n_queries);
  if (xs.empty()) throw DataError("oracle-check: no queries");

  const auto shards = open_index(cfg.index, p, cfg.shards);
  const McIndex mc = prepare_mc(shards, p);
  double jac_sum = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const auto a = search(shards, p, xs[q], cfg.k, cfg.threads);
    const auto b = search_mc(shards, mc, p, xs[q], cfg.k, cfg.mc_n, cfg.seed, cfg.threads);
    std::map<std::int64_t, double> mc_scores;
    for (const auto& r : b) mc_scores[r.id] = r.score;
    double delta = 0.0;
    std::size_t common = 0;
    for (const auto& r : a) {
      if (auto it = mc_scores.find(r.id); it != mc_scores.end()) {
        delta += std::fabs(r.score - it->second);
        ++common;
      }
    }
    const double jac = jaccard_top_k(a, b, cfg.k);
    jac_sum += jac;
    std::printf("query %zu jaccard@%zu=%.6f mean_abs_score_delta=%.6f\n", q, cfg.k, jac,
                common ? delta / static_cast<double>(common) : 0.0);
  }
  std::printf("summary queries=%zu mc_n=%zu mean_jaccard@%zu=%.6f\n", xs.size(), cfg.mc_n, cfg.k,
              jac_sum / static_cast<double>(xs.size()));
}

void cmd_bench(const RunConfig& cfg, std::size_t repeats, const std::string& query) {
  const ModelParams p = load_checkpoint(cfg.checkpoint);
  const ContextBundle x = query.empty() ? ContextBundle{} : query_from_file(query);
  const auto shards = open_index(cfg.index, p, std::max(cfg.shards, cfg.threads));
  const BenchReport r = bench_scan(shards, p, x, repeats, cfg.threads, cfg.mc_n);
  std::printf("entries=%zu d=%zu threads=%zu\n", r.entries, p.dim, r.threads);
  std::printf("analytic: %.0f entries/s total, %.0f entries/s/thread (%.3f s)\n",
              r.analytic_per_sec, r.analytic_per_sec_per_thread, r.analytic_seconds);
  std::printf("mc(n=%zu): %.0f entries/s over %zu entries (%.3f s)\n", r.mc_n, r.mc_per_sec,
              r.mc_entries, r.mc_seconds);
  std::printf("slowdown=%.1fx\n", r.slowdown);
}

void cmd_stats(const std::string& path) {
  const auto entries = load_index(path);
  const std::size_t d = entries.empty() ? 0 : entries.front().mu_y.size();
  std::printf("count=%zu d=%zu checksum=%016llx\n", entries.size(), d,
              static_cast<unsigned long long>(index_checksum(entries)));
}

void report_error(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual code search over a latent Gaussian model"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse MJ sources and write canonical JSONL records");
  std::string ingest_src, ingest_out;
  ingest->add_option("--src", ingest_src,
                     "Directory of .mj files, a single .mj file, a .jsonl corpus, or synthetic:<F>x<P>:<noise>[:<seed>]")
      ->required();
  ingest->add_option("--out", ingest_out, "Output JSONL path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the model on a JSONL corpus");
  ConfigFlags train_flags;
  std::string train_out, train_metrics;
  train_flags.add_config_file(train_cmd);
  train_flags.add(train_cmd, "--corpus", "corpus", "Input JSONL corpus");
  train_flags.add(train_cmd, "--dim", "dim", "Latent dimension (default 16)");
  train_flags.add(train_cmd, "--seed", "seed", "Seed for initialization and sampling (default 1)");
  train_flags.add(train_cmd, "--lr", "lr", "Learning rate (default 0.001)");
  train_flags.add(train_cmd, "--steps", "steps", "Optimization steps (default 2000)");
  train_flags.add(train_cmd, "--batch-size", "batch_size", "Examples per step; 0 = full dataset (default 0)");
  train_flags.add(train_cmd, "--z-samples", "z_samples", "Latent samples per example per step (default 1)");
  train_flags.add(train_cmd, "--clip-norm", "clip_norm", "Gradient norm clip (default 10)");
  train_flags.add(train_cmd, "--optimizer", "optimizer", "sgd (plain gradient ascent) or adam (default sgd)");
  train_flags.add(train_cmd, "--init-scale", "init_scale", "Std. dev. of initial weights (default 0.01)");
  train_cmd->add_option("--out", train_out, "Output checkpoint path")->required();
  train_cmd->add_option("--metrics", train_metrics, "Write the per-step objective as CSV here");

  // index
  auto* index_cmd = app.add_subcommand("index", "Precompute the searchable index");
  ConfigFlags index_flags;
  std::string index_out;
  index_flags.add_config_file(index_cmd);
  index_flags.add(index_cmd, "--corpus", "corpus", "Input JSONL corpus");
  index_flags.add(index_cmd, "--checkpoint", "checkpoint", "Model checkpoint");
  index_flags.add(index_cmd, "--index-mc", "index_mc", "Importance samples per log P(Y) (default 64)");
  index_flags.add(index_cmd, "--seed", "seed", "Global seed for the estimates (default 1)");
  index_flags.add(index_cmd, "--threads", "threads", "Worker threads; 0 = all cores (default 0)");
  index_cmd->add_option("--out", index_out, "Output index path")->required();

  // search
  auto* search_cmd = app.add_subcommand("search", "Rank indexed programs for the hole in a query file");
  ConfigFlags search_flags;
  std::string search_query, search_format = "table";
  search_flags.add_config_file(search_cmd);
  search_flags.add(search_cmd, "--index", "index", "Index file");
  search_flags.add(search_cmd, "--checkpoint", "checkpoint", "Model checkpoint");
  search_flags.add(search_cmd, "-k,--k", "k", "Number of results (default 10)");
  search_flags.add(search_cmd, "--shards", "shards", "In-process shard count (default 1)");
  search_flags.add(search_cmd, "--threads", "threads", "Scan threads; 0 = all cores (default 0)");
  search_cmd->add_option("--query", search_query, "MJ file containing exactly one __CODE_SEARCH__ hole")->required();
  search_cmd->add_option("--format", search_format, "table or json (one object per line)")
      ->check(CLI::IsMember({"table", "json"}));

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Hold-out retrieval evaluation");
  ConfigFlags eval_flags;
  std::size_t eval_tasks = 100, eval_depth = 100;
  std::string eval_format = "json", eval_out;
  eval_flags.add_config_file(eval_cmd);
  eval_flags.add(eval_cmd, "--corpus", "corpus", "MJ directory or synthetic:<F>x<P>:<noise>[:<seed>]");
  eval_flags.add(eval_cmd, "--checkpoint", "checkpoint", "Model checkpoint");
  eval_flags.add(eval_cmd, "--index", "index", "Index file");
  eval_flags.add(eval_cmd, "--seed", "seed", "Seed for task sampling (default 1)");
  eval_flags.add(eval_cmd, "--shards", "shards", "In-process shard count (default 1)");
  eval_flags.add(eval_cmd, "--threads", "threads", "Scan threads; 0 = all cores (default 0)");
  eval_cmd->add_option("--tasks", eval_tasks, "Number of tasks; for synthetic corpora 0 = all (default 100)");
  eval_cmd->add_option("--depth", eval_depth, "Results retrieved per task (default 100)");
  eval_cmd->add_option("--format", eval_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  eval_cmd->add_option("--out", eval_out, "Write the report here instead of stdout");

  // oracle-check
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare analytic and Monte-Carlo rankings");
  ConfigFlags oracle_flags;
  std::string oracle_queries;
  std::size_t oracle_n_queries = 0;
  oracle_flags.add_config_file(oracle_cmd);
  oracle_flags.add(oracle_cmd, "--index", "index", "Index file");
  oracle_flags.add(oracle_cmd, "--checkpoint", "checkpoint", "Model checkpoint");
  oracle_flags.add(oracle_cmd, "--n,--mc-n", "mc_n", "Monte-Carlo draws per entry (default 30)");
  oracle_flags.add(oracle_cmd, "-k,--k", "k", "Top-k compared (default 10)");
  oracle_flags.add(oracle_cmd, "--seed", "seed", "Monte-Carlo seed (default 1)");
  oracle_flags.add(oracle_cmd, "--shards", "shards", "In-process shard count (default 1)");
  oracle_flags.add(oracle_cmd, "--threads", "threads", "Scan threads; 0 = all cores (default 0)");
  oracle_cmd->add_option("--queries", oracle_queries,
                         "Query .mj file, directory of them, or synthetic:<F>x<P>:<noise>[:<seed>]")
      ->required();
  oracle_cmd->add_option("--max-queries", oracle_n_queries, "Use at most this many queries; 0 = all");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Measure scan throughput");
  ConfigFlags bench_flags;
  std::size_t bench_repeats = 5;
  std::string bench_query;
  bench_flags.add_config_file(bench_cmd);
  bench_flags.add(bench_cmd, "--index", "index", "Index file");
  bench_flags.add(bench_cmd, "--checkpoint", "checkpoint", "Model checkpoint");
  bench_flags.add(bench_cmd, "--threads", "threads", "Scan threads; 0 = all cores (default 0)");
  bench_flags.add(bench_cmd, "--shards", "shards", "In-process shard count, at least --threads (default 1)");
  bench_flags.add(bench_cmd, "--mc-n", "mc_n", "Monte-Carlo draws for the comparison scan (default 30)");
  bench_cmd->add_option("--repeats", bench_repeats, "Analytic scans to time (default 5)");
  bench_cmd->add_option("--query", bench_query, "Optional query file; default is the empty context");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Print index count, dimension and checksum");
  std::string stats_index;
  stats_cmd->add_option("--index", stats_index, "Index file")->required();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    auto need = [](const std::string& v, const char* flag) {
      if (v.empty()) throw UsageError(std::string("missing required ") + flag);
    };
    if (ingest->parsed()) {
      cmd_ingest(ingest_src, ingest_out);
    } else if (train_cmd->parsed()) {
      const RunConfig cfg = train_flags.resolve();
      need(cfg.corpus, "--corpus");
      cmd_train(cfg, train_out, train_metrics);
    } else if (index_cmd->parsed()) {
      const RunConfig cfg = index_flags.resolve();
      need(cfg.corpus, "--corpus");
      need(cfg.checkpoint, "--checkpoint");
      cmd_index(cfg, index_out);
    } else if (search_cmd->parsed()) {
      const RunConfig cfg = search_flags.resolve();
      need(cfg.index, "--index");
      need(cfg.checkpoint, "--checkpoint");
      cmd_search(cfg, search_query, search_format);
    } else if (eval_cmd->parsed()) {
      const RunConfig cfg = eval_flags.resolve();
      need(cfg.corpus, "--corpus");
      need(cfg.index, "--index");
      need(cfg.checkpoint, "--checkpoint");
      cmd_eval(cfg, eval_tasks, eval_depth, eval_format, eval_out);
    } else if (oracle_cmd->parsed()) {
      const RunConfig cfg = oracle_flags.resolve();
      need(cfg.index, "--index");
      need(cfg.checkpoint, "--checkpoint");
      cmd_oracle_check(cfg, oracle_queries, oracle_n_queries);
    } else if (bench_cmd->parsed()) {
      const RunConfig cfg = bench_flags.resolve();
      need(cfg.index, "--index");
      need(cfg.checkpoint, "--checkpoint");
      cmd_bench(cfg, bench_repeats, bench_query);
    } else if (stats_cmd->parsed()) {
      cmd_stats(stats_index);
    }
  } catch (const codec::Error& e) {
    switch (e.kind()) {
      case ErrorKind::kUsage:
        report_error("usage", e.what());
        return kExitUsage;
      case ErrorKind::kData:
        report_error("data", e.what());
        return kExitData;
      case ErrorKind::kNumeric:
        report_error("numeric", e.what());
        return kExitNumeric;
    }
  } catch (const std::exception& e) {
    report_error("data", e.what());
    return kExitData;
  }
  return kExitOk;
}

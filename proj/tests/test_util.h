#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "codec/context.h"
#include "codec/corpus.h"
#include "codec/decompile.h"
#include "codec/gauss.h"
#include "codec/model.h"
#include "codec/rng.h"
#include "codec/sketch.h"

namespace codec::testing {

inline std::filesystem::path data_dir() { return CODEC_TEST_DATA; }
inline std::filesystem::path corpus_dir() { return data_dir() / "corpus"; }
inline std::filesystem::path query_path(const std::string& name) {
  return data_dir() / "queries" / name;
}

inline DiagGaussian random_gaussian(Rng& rng, std::size_t d, double max_var = 1.9) {
  std::vector<double> mu(d), var(d);
  for (std::size_t i = 0; i < d; ++i) {
    mu[i] = 4.0 * rng.uniform() - 2.0;
    var[i] = 0.05 + (max_var - 0.05) * rng.uniform();
  }
  return DiagGaussian(mu, var);
}

inline double rel_err(double got, double want) {
  const double scale = std::max(1.0, std::abs(want));
  return std::abs(got - want) / scale;
}

// Decoder that ignores z and a reverse encoder that returns the prior, so
// every log P(Y) estimator is exact.
inline void make_z_independent(ModelParams& p) {
  for (auto* v : {&p.w.dec_w, &p.w.enc_mean_w, &p.w.enc_mean_b, &p.w.enc_logvar_w, &p.w.enc_logvar_b})
    std::fill(v->begin(), v->end(), 0.0);
}

// Random sketches in normal form (sequences flattened, no skip inside a
// sequence), built with the public constructors.
class SketchGen {
 public:
  explicit SketchGen(std::uint64_t seed) : rng_(seed) {}

  CallExpr call() {
    static const char* kTypes[] = {"File", "String", "List", "Socket", "JFrame", "int"};
    static const char* kNames[] = {"open", "read", "add", "close", "setVisible", "get"};
    CallExpr c;
    c.receiver_type = kTypes[rng_.below(6)];
    c.method_name = kNames[rng_.below(6)];
    const auto n = rng_.below(3);
    for (std::uint64_t i = 0; i < n; ++i) c.arg_types.push_back(kTypes[rng_.below(6)]);
    return c;
  }

  std::vector<CallExpr> cond() {
    std::vector<CallExpr> out;
    const auto n = rng_.below(3);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(call());
    return out;
  }

  SketchStmt stmt(int depth) {
    const auto pick = depth <= 0 ? rng_.below(2) : rng_.below(6);
    switch (pick) {
      case 0:
        return SketchStmt::skip();
      case 1:
        return SketchStmt::make_call(call());
      case 2: {
        std::vector<SketchStmt> items;
        const auto n = 2 + rng_.below(3);
        for (std::uint64_t i = 0; i < n; ++i) items.push_back(stmt(depth - 1));
        return SketchStmt::make_seq(std::move(items));
      }
      case 3:
        return SketchStmt::make_if(cond(), stmt(depth - 1), stmt(depth - 1));
      case 4:
        return SketchStmt::make_while(cond(), stmt(depth - 1));
      default: {
        std::vector<std::string> types;
        std::vector<SketchStmt> handlers;
        const auto n = 1 + rng_.below(2);
        for (std::uint64_t i = 0; i < n; ++i) {
          types.push_back(i == 0 ? "IOException" : "Exception");
          handlers.push_back(stmt(depth - 1));
        }
        return SketchStmt::make_try(stmt(depth - 1), std::move(types), std::move(handlers));
      }
    }
  }

  SketchAst sketch(int depth = 4) {
    SketchAst s;
    static const char* kRet[] = {"void", "int", "String", "JFrame"};
    s.ret_type = kRet[rng_.below(4)];
    const auto n = rng_.below(3);
    for (std::uint64_t i = 0; i < n; ++i) s.formal_param_types.push_back(call().receiver_type);
    s.body = stmt(depth);
    return s;
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;
};

// Training pairs from JSONL-style records.
inline std::vector<std::pair<ContextBundle, SketchAst>> dataset_of(
    const std::vector<CorpusRecord>& records) {
  std::vector<std::pair<ContextBundle, SketchAst>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.emplace_back(r.evidences, parse_sketch(r.sketch));
  return out;
}

}  // namespace codec::testing

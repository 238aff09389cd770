#include <cmath>
#include <numeric>
#include <sstream>

#include "codec/error.h"
#include "codec/model.h"
#include "codec/rng.h"

namespace codec {
namespace {

struct AdamState {
  ModelWeights m, v;
  std::size_t t = 0;
};

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw UsageError("train: learning rate must be positive");
  if (cfg.z_samples == 0) throw UsageError("train: z samples must be >= 1");
  if (!(cfg.clip_norm > 0.0)) throw UsageError("train: clip norm must be positive");
}

double grad_norm(ModelWeights& g) {
  double ss = 0.0;
  for (auto& b : weight_blocks(g))
    for (double x : b.values) ss += x * x;
  return std::sqrt(ss);
}

}  // namespace

TrainResult train(ModelParams initial,
                  const std::vector<std::pair<ContextBundle, SketchAst>>& dataset,
                  const TrainConfig& cfg) {
  if (dataset.empty()) throw UsageError("train: empty dataset");
  validate(cfg);
  TrainResult result{std::move(initial), {}};
  if (cfg.steps == 0) return result;
  ModelParams& p = result.params;

  std::vector<PreparedContext> xs;
  std::vector<PreparedSketch> ys;
  xs.reserve(dataset.size());
  ys.reserve(dataset.size());
  for (const auto& [x, y] : dataset) {
    xs.push_back(prepare_context(p, x));
    ys.push_back(prepare_sketch(p, y));
  }

  const std::size_t n = dataset.size();
  const std::size_t batch = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = n;  // forces a shuffle on first use when batching
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5348554646ULL));

  AdamState adam;
  if (cfg.optimizer == Optimizer::kAdam) {
    adam.m = zeros_like(p.w);
    adam.v = zeros_like(p.w);
  }
  result.objective_trace.reserve(cfg.steps);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    std::vector<std::size_t> ids;
    if (batch == n) {
      ids = order;
    } else {
      ids.reserve(batch);
      while (ids.size() < batch) {
        if (cursor == n) {
          for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.below(i + 1)]);
          cursor = 0;
        }
        ids.push_back(order[cursor++]);
      }
    }

    ModelWeights grad = zeros_like(p.w);
    const double scale = 1.0 / static_cast<double>(ids.size());
    double objective = 0.0;
    for (std::size_t i : ids) {
      const std::uint64_t seed = mix_seed(cfg.seed, step * n + i);
      objective += scale * elbo_with_gradient(p, xs[i], ys[i], seed, cfg.z_samples, scale, grad);
    }
    const double norm = grad_norm(grad);
    if (!std::isfinite(objective) || !std::isfinite(norm)) {
      std::ostringstream msg;
      msg << "train: non-finite objective at step " << step << " (objective " << objective
          << ", gradient norm " << norm << ")";
      throw NumericError(msg.str());
    }
    result.objective_trace.push_back(objective);

    const double clip = norm > cfg.clip_norm ? cfg.clip_norm / norm : 1.0;
    auto params = weight_blocks(p.w);
    auto grads = weight_blocks(grad);
    if (cfg.optimizer == Optimizer::kGradientAscent) {
      for (std::size_t b = 0; b < params.size(); ++b)
        for (std::size_t k = 0; k < params[b].values.size(); ++k)
          params[b].values[k] += cfg.learning_rate * clip * grads[b].values[k];
    } else {
      constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
      ++adam.t;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.t));
      auto ms = weight_blocks(adam.m);
      auto vs = weight_blocks(adam.v);
      for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t k = 0; k < params[b].values.size(); ++k) {
          const double g = clip * grads[b].values[k];
          double& m = ms[b].values[k];
          double& v = vs[b].values[k];
          m = kBeta1 * m + (1.0 - kBeta1) * g;
          v = kBeta2 * v + (1.0 - kBeta2) * g * g;
          params[b].values[k] += cfg.learning_rate * (m / c1) / (std::sqrt(v / c2) + kEps);
        }
      }
    }
  }
  return result;
}

}  // namespace codec

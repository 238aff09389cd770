#include "codec/model.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "codec/error.h"
#include "codec/rng.h"

namespace codec {

Vocab::Vocab() { add(kUnkToken); }

std::uint32_t Vocab::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

std::uint32_t Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<NamedBlock> weight_blocks(ModelWeights& w) {
  std::vector<NamedBlock> out;
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j)
    out.push_back({"embedding." + std::string(evidence_type_name(static_cast<EvidenceType>(j))),
                   w.embeddings[j]});
  out.push_back({"log_var", w.log_var});
  out.push_back({"enc_mean_w", w.enc_mean_w});
  out.push_back({"enc_mean_b", w.enc_mean_b});
  out.push_back({"enc_logvar_w", w.enc_logvar_w});
  out.push_back({"enc_logvar_b", w.enc_logvar_b});
  out.push_back({"dec_w", w.dec_w});
  out.push_back({"dec_b", w.dec_b});
  out.push_back({"length_logit", std::span<double>(&w.length_logit, 1)});
  return out;
}

ModelWeights zeros_like(const ModelWeights& w) {
  ModelWeights z;
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) z.embeddings[j].assign(w.embeddings[j].size(), 0.0);
  z.enc_mean_w.assign(w.enc_mean_w.size(), 0.0);
  z.enc_mean_b.assign(w.enc_mean_b.size(), 0.0);
  z.enc_logvar_w.assign(w.enc_logvar_w.size(), 0.0);
  z.enc_logvar_b.assign(w.enc_logvar_b.size(), 0.0);
  z.dec_w.assign(w.dec_w.size(), 0.0);
  z.dec_b.assign(w.dec_b.size(), 0.0);
  return z;
}

double ModelParams::length_rate() const { return 1.0 / (1.0 + std::exp(-w.length_logit)); }

ModelParams init_params(std::size_t dim,
                        const std::vector<std::pair<ContextBundle, SketchAst>>& dataset,
                        std::uint64_t seed, double init_scale) {
  if (dim == 0) throw UsageError("latent dimension must be >= 1");
  ModelParams p;
  p.dim = dim;
  for (const auto& [bundle, sketch] : dataset) {
    for (std::size_t j = 0; j < kNumEvidenceTypes; ++j)
      for (const auto& inst : bundle.evidences[j])
        for (const auto& tok : inst) p.evidence_vocab[j].add(tok);
    for (const auto& tok : sketch_tokens(sketch).tokens) p.sketch_vocab.add(tok);
  }
  Rng rng(seed);
  auto draw = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (auto& x : v) x = init_scale * rng.normal();
  };
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j)
    draw(p.w.embeddings[j], p.evidence_vocab[j].size() * dim);
  p.w.log_var.fill(0.0);
  draw(p.w.enc_mean_w, p.feature_dim() * dim);
  p.w.enc_mean_b.assign(dim, 0.0);
  draw(p.w.enc_logvar_w, p.feature_dim() * dim);
  p.w.enc_logvar_b.assign(dim, 0.0);
  draw(p.w.dec_w, dim * p.sketch_vocab.size());
  p.w.dec_b.assign(p.sketch_vocab.size(), 0.0);
  p.w.length_logit = std::log(0.9 / 0.1);
  return p;
}

PreparedContext prepare_context(const ModelParams& p, const ContextBundle& x) {
  PreparedContext out;
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
    for (const auto& inst : x.evidences[j]) {
      if (inst.empty()) continue;
      std::vector<std::uint32_t> ids;
      ids.reserve(inst.size());
      for (const auto& tok : inst) ids.push_back(p.evidence_vocab[j].id(tok));
      out.instances[j].push_back(std::move(ids));
    }
  }
  return out;
}

PreparedSketch prepare_sketch(const ModelParams& p, const SketchAst& s) {
  const SketchTokens toks = sketch_tokens(s);
  std::map<std::uint32_t, double> counts;
  for (const auto& t : toks.tokens) counts[p.sketch_vocab.id(t)] += 1.0;
  PreparedSketch out;
  out.length = toks.tokens.size();
  const double inv_len = 1.0 / static_cast<double>(out.length);
  for (const auto& [id, c] : counts) {
    out.token_counts.emplace_back(id, c);
    out.features.emplace_back(id, c * inv_len);
  }
  std::size_t nodes = 0;
  for (auto c : toks.depth_histogram) nodes += c;
  const auto vocab = static_cast<std::uint32_t>(p.sketch_vocab.size());
  for (std::size_t k = 0; k < kDepthBins; ++k) {
    if (toks.depth_histogram[k] == 0) continue;
    out.features.emplace_back(vocab + static_cast<std::uint32_t>(k),
                              static_cast<double>(toks.depth_histogram[k]) /
                                  static_cast<double>(nodes));
  }
  return out;
}

namespace {

// Conjugate fusion state shared by the forward and backward passes.
struct FusedEvidence {
  double precision = 1.0;                  // P = 1 + sum_j n_j w_j
  std::vector<double> mean;                // S / P
  std::array<std::vector<double>, kNumEvidenceTypes> type_sums;  // sum_k f_jk
  std::array<double, kNumEvidenceTypes> weight{};                // w_j = exp(-log_var_j)
};

FusedEvidence fuse(const ModelParams& p, const PreparedContext& x) {
  const std::size_t d = p.dim;
  FusedEvidence fe;
  std::vector<double> weighted(d, 0.0);
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
    fe.weight[j] = std::exp(-p.w.log_var[j]);
    const auto& insts = x.instances[j];
    if (insts.empty()) continue;
    auto& sum = fe.type_sums[j];
    sum.assign(d, 0.0);
    const double* table = p.w.embeddings[j].data();
    for (const auto& ids : insts) {
      const double inv = 1.0 / static_cast<double>(ids.size());
      for (auto id : ids) {
        const double* row = table + static_cast<std::size_t>(id) * d;
        for (std::size_t i = 0; i < d; ++i) sum[i] += inv * row[i];
      }
    }
    fe.precision += static_cast<double>(insts.size()) * fe.weight[j];
    for (std::size_t i = 0; i < d; ++i) weighted[i] += fe.weight[j] * sum[i];
  }
  fe.mean.resize(d);
  for (std::size_t i = 0; i < d; ++i) fe.mean[i] = weighted[i] / fe.precision;
  return fe;
}

struct ReverseOut {
  std::vector<double> mean;
  std::vector<double> log_var;
};

ReverseOut reverse_forward(const ModelParams& p, const PreparedSketch& s) {
  const std::size_t d = p.dim;
  ReverseOut out{p.w.enc_mean_b, p.w.enc_logvar_b};
  for (const auto& [f, val] : s.features) {
    const double* mw = p.w.enc_mean_w.data() + static_cast<std::size_t>(f) * d;
    const double* lw = p.w.enc_logvar_w.data() + static_cast<std::size_t>(f) * d;
    for (std::size_t i = 0; i < d; ++i) {
      out.mean[i] += val * mw[i];
      out.log_var[i] += val * lw[i];
    }
  }
  return out;
}

double log_length_prob(const ModelParams& p, std::size_t length) {
  // Geometric on L >= 1: (1 - r) r^(L-1), with ln r = -softplus(-logit).
  const double logit = p.w.length_logit;
  const double log_rate = -std::log1p(std::exp(-logit));
  const double log_one_minus = -std::log1p(std::exp(logit));
  return log_one_minus + static_cast<double>(length - 1) * log_rate;
}

// Fills logits = W^T z + b and returns log-sum-exp of logits.
double decoder_logits(const ModelParams& p, std::span<const double> z, std::vector<double>& logits) {
  const std::size_t v = p.sketch_vocab.size();
  logits.assign(p.w.dec_b.begin(), p.w.dec_b.end());
  const double* w = p.w.dec_w.data();
  for (std::size_t i = 0; i < p.dim; ++i) {
    const double zi = z[i];
    const double* row = w + i * v;
    for (std::size_t t = 0; t < v; ++t) logits[t] += zi * row[t];
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - mx);
  return mx + std::log(sum);
}

double decoder_from_logits(const ModelParams& p, const PreparedSketch& s,
                           const std::vector<double>& logits, double lse) {
  double out = log_length_prob(p, s.length);
  for (const auto& [id, c] : s.token_counts) out += c * (logits[id] - lse);
  return out;
}

void check_dim(const ModelParams& p, std::size_t n) {
  if (n != p.dim) throw DimensionMismatch(p.dim, n);
}

ElboTerms elbo_impl(const ModelParams& p, const PreparedContext& x, const PreparedSketch& s,
                    std::uint64_t seed, std::size_t z_samples, double scale, ModelWeights* grad) {
  const std::size_t d = p.dim;
  const std::size_t vocab = p.sketch_vocab.size();
  const FusedEvidence fe = fuse(p, x);
  const double var_x = 1.0 / fe.precision;
  const ReverseOut q = reverse_forward(p, s);

  ElboTerms terms;
  std::vector<double> q_var(d);
  for (std::size_t i = 0; i < d; ++i) {
    q_var[i] = std::exp(q.log_var[i]);
    const double diff = fe.mean[i] - q.mean[i];
    terms.kl_q_px += 0.5 * (std::log(var_x) - q.log_var[i] - 1.0 + q_var[i] / var_x +
                            diff * diff / var_x);
    terms.kl_px_p0 += 0.5 * (-std::log(var_x) - 1.0 + var_x + fe.mean[i] * fe.mean[i]);
  }

  std::vector<double> g_mean_x(d, 0.0);
  double g_var_x = 0.0;
  const double sd_x = std::sqrt(var_x);
  const double inv_s = 1.0 / static_cast<double>(std::max<std::size_t>(z_samples, 1));
  Rng rng(seed);
  std::vector<double> eps(d), z(d), logits, g_logits(vocab);
  for (std::size_t smp = 0; smp < z_samples; ++smp) {
    for (std::size_t i = 0; i < d; ++i) {
      eps[i] = rng.normal();
      z[i] = fe.mean[i] + sd_x * eps[i];
    }
    const double lse = decoder_logits(p, z, logits);
    terms.reconstruction += inv_s * decoder_from_logits(p, s, logits, lse);
    if (grad == nullptr) continue;

    // d/dlogits = counts - L softmax(logits)
    const double len = static_cast<double>(s.length);
    for (std::size_t t = 0; t < vocab; ++t) g_logits[t] = -len * std::exp(logits[t] - lse);
    for (const auto& [id, c] : s.token_counts) g_logits[id] += c;

    const double k = scale * inv_s;
    for (std::size_t t = 0; t < vocab; ++t) grad->dec_b[t] += k * g_logits[t];
    for (std::size_t i = 0; i < d; ++i) {
      const double* wrow = p.w.dec_w.data() + i * vocab;
      double* grow = grad->dec_w.data() + i * vocab;
      double gz = 0.0;
      const double kz = k * z[i];
      for (std::size_t t = 0; t < vocab; ++t) {
        gz += wrow[t] * g_logits[t];
        grow[t] += kz * g_logits[t];
      }
      g_mean_x[i] += inv_s * gz;
      g_var_x += inv_s * gz * eps[i] / (2.0 * sd_x);
    }
  }
  if (grad == nullptr) {
    terms.reconstruction += 0.0;
    return terms;
  }

  // Length model.
  {
    const double r = p.length_rate();
    grad->length_logit += scale * (static_cast<double>(s.length - 1) * (1.0 - r) - r);
  }

  // KL terms w.r.t. the reverse encoder outputs and the fused posterior.
  std::vector<double> g_q_mean(d), g_q_logvar(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = fe.mean[i] - q.mean[i];
    g_q_mean[i] = diff / var_x;
    g_q_logvar[i] = 0.5 * (1.0 - q_var[i] / var_x);
    g_mean_x[i] += -diff / var_x - fe.mean[i];
    g_var_x += -0.5 * (1.0 / var_x - q_var[i] / (var_x * var_x) - diff * diff / (var_x * var_x));
    g_var_x += 0.5 * (1.0 / var_x - 1.0);
  }

  for (const auto& [f, val] : s.features) {
    double* mw = grad->enc_mean_w.data() + static_cast<std::size_t>(f) * d;
    double* lw = grad->enc_logvar_w.data() + static_cast<std::size_t>(f) * d;
    for (std::size_t i = 0; i < d; ++i) {
      mw[i] += scale * val * g_q_mean[i];
      lw[i] += scale * val * g_q_logvar[i];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    grad->enc_mean_b[i] += scale * g_q_mean[i];
    grad->enc_logvar_b[i] += scale * g_q_logvar[i];
  }

  // Through mean_x = S / P and var_x = 1 / P.
  const double inv_p = 1.0 / fe.precision;
  for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
    const auto& insts = x.instances[j];
    if (insts.empty()) continue;
    const double n_j = static_cast<double>(insts.size());
    const double w_j = fe.weight[j];
    double g_w = g_var_x * (-n_j * var_x * var_x);
    for (std::size_t i = 0; i < d; ++i)
      g_w += g_mean_x[i] * (fe.type_sums[j][i] - n_j * fe.mean[i]) * inv_p;
    grad->log_var[j] += scale * g_w * (-w_j);

    double* table = grad->embeddings[j].data();
    for (const auto& ids : insts) {
      const double coef = scale * w_j * inv_p / static_cast<double>(ids.size());
      for (auto id : ids) {
        double* row = table + static_cast<std::size_t>(id) * d;
        for (std::size_t i = 0; i < d; ++i) row[i] += coef * g_mean_x[i];
      }
    }
  }
  return terms;
}

}  // namespace

DiagGaussian encode_evidence(const ModelParams& p, const PreparedContext& x) {
  const FusedEvidence fe = fuse(p, x);
  return DiagGaussian::isotropic(fe.mean, 1.0 / fe.precision);
}

DiagGaussian encode_evidence(const ModelParams& p, const ContextBundle& x) {
  return encode_evidence(p, prepare_context(p, x));
}

DiagGaussian reverse_encode(const ModelParams& p, const PreparedSketch& s) {
  ReverseOut r = reverse_forward(p, s);
  std::vector<double> var(r.log_var.size());
  for (std::size_t i = 0; i < var.size(); ++i) var[i] = std::exp(r.log_var[i]);
  return DiagGaussian(std::move(r.mean), std::move(var));
}

DiagGaussian reverse_encode(const ModelParams& p, const SketchAst& s) {
  return reverse_encode(p, prepare_sketch(p, s));
}

double decoder_log_prob(const ModelParams& p, const PreparedSketch& s, std::span<const double> z) {
  check_dim(p, z.size());
  std::vector<double> logits;
  const double lse = decoder_logits(p, z, logits);
  return decoder_from_logits(p, s, logits, lse);
}

double decoder_log_prob(const ModelParams& p, const SketchAst& s, std::span<const double> z) {
  return decoder_log_prob(p, prepare_sketch(p, s), z);
}

std::vector<double> decoder_grad_z(const ModelParams& p, const PreparedSketch& s,
                                   std::span<const double> z) {
  check_dim(p, z.size());
  const std::size_t vocab = p.sketch_vocab.size();
  std::vector<double> logits;
  const double lse = decoder_logits(p, z, logits);
  std::vector<double> g(vocab);
  const double len = static_cast<double>(s.length);
  for (std::size_t t = 0; t < vocab; ++t) g[t] = -len * std::exp(logits[t] - lse);
  for (const auto& [id, c] : s.token_counts) g[id] += c;
  std::vector<double> out(p.dim, 0.0);
  for (std::size_t i = 0; i < p.dim; ++i) {
    const double* row = p.w.dec_w.data() + i * vocab;
    for (std::size_t t = 0; t < vocab; ++t) out[i] += row[t] * g[t];
  }
  return out;
}

ElboTerms elbo_terms(const ModelParams& p, const PreparedContext& x, const PreparedSketch& s,
                     std::uint64_t seed, std::size_t z_samples) {
  return elbo_impl(p, x, s, seed, z_samples, 0.0, nullptr);
}

double elbo(const ModelParams& p, const ContextBundle& x, const SketchAst& s, std::uint64_t seed,
            std::size_t z_samples) {
  return elbo_terms(p, prepare_context(p, x), prepare_sketch(p, s), seed, z_samples).value();
}

double elbo_with_gradient(const ModelParams& p, const PreparedContext& x,
                          const PreparedSketch& s, std::uint64_t seed, std::size_t z_samples,
                          double scale, ModelWeights& grad) {
  return elbo_impl(p, x, s, seed, z_samples, scale, &grad).value();
}

McEstimate log_mean_exp(std::span<const double> log_values) {
  McEstimate out;
  if (log_values.empty()) return out;
  const double mx = *std::max_element(log_values.begin(), log_values.end());
  if (!std::isfinite(mx)) {
    out.log_mean = mx;
    return out;
  }
  const double n = static_cast<double>(log_values.size());
  double sum = 0.0;
  for (double l : log_values) sum += std::exp(l - mx);
  const double mean = sum / n;
  out.log_mean = mx + std::log(mean);
  if (log_values.size() > 1) {
    double ss = 0.0;
    for (double l : log_values) {
      const double dv = std::exp(l - mx) - mean;
      ss += dv * dv;
    }
    const double var = ss / (n - 1.0);
    out.std_error = std::sqrt(var / n) / mean;
  }
  return out;
}

McEstimate estimate_log_py_detail(const ModelParams& p, const PreparedSketch& s, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) throw UsageError("estimate_log_py: n must be >= 1");
  const DiagGaussian q = reverse_encode(p, s);
  const DiagGaussian prior = DiagGaussian::standard(p.dim);
  std::vector<double> sd(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) sd[i] = std::sqrt(q.variance()[i]);
  Rng rng(seed);
  std::vector<double> z(p.dim), logits, lw(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < p.dim; ++i) z[i] = q.mean()[i] + sd[i] * rng.normal();
    const double lse = decoder_logits(p, z, logits);
    lw[j] = log_density(prior, z) + decoder_from_logits(p, s, logits, lse) - log_density(q, z);
  }
  return log_mean_exp(lw);
}

double estimate_log_py(const ModelParams& p, const SketchAst& s, std::size_t n,
                       std::uint64_t seed) {
  return estimate_log_py_detail(p, prepare_sketch(p, s), n, seed).log_mean;
}

McEstimate mc_score_detail(const ModelParams& p, const DiagGaussian& gx, const PreparedSketch& s,
                           std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("mc_score: n must be >= 1");
  check_dim(p, gx.dim());
  std::vector<double> sd(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) sd[i] = std::sqrt(gx.variance()[i]);
  Rng rng(seed);
  std::vector<double> z(p.dim), logits, lv(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < p.dim; ++i) z[i] = gx.mean()[i] + sd[i] * rng.normal();
    const double lse = decoder_logits(p, z, logits);
    lv[j] = decoder_from_logits(p, s, logits, lse);
  }
  return log_mean_exp(lv);
}

double mc_score(const ModelParams& p, const DiagGaussian& gx, const SketchAst& s, std::size_t n,
                std::uint64_t seed) {
  return mc_score_detail(p, gx, prepare_sketch(p, s), n, seed).log_mean;
}

}  // namespace codec

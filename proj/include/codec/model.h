#pragma once

// Latent-Gaussian model linking contexts X and sketches Y through Z ~ N(0, I):
//
//   P(X|Z) = prod_{j,k} N(f_j(X_jk); Z, s_j^2 I)   -> P(Z|X) by conjugacy
//   Q(Z|Y) = N(mu(Y), diag exp(logvar(Y)))         reverse encoder (affine)
//   P(Y|Z) = Geom(L) prod_t softmax(W^T Z + b)[y_t] factorized token decoder
//
// f_j averages the embeddings of an instance's tokens. Training maximizes
//   -KL(Q(Z|Y) || P(Z|X)) - KL(P(Z|X) || P(Z)) + E_{P(Z|X)} log P(Y|Z)
// with reparameterized samples and exact gradients.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "codec/context.h"
#include "codec/gauss.h"
#include "codec/sketch.h"

namespace codec {

class Vocab {
 public:
  static constexpr std::uint32_t kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocab();

  std::uint32_t add(std::string_view token);
  // kUnk for tokens outside the vocabulary.
  std::uint32_t id(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Every trainable number. Also serves as the gradient container.
struct ModelWeights {
  std::array<std::vector<double>, kNumEvidenceTypes> embeddings;  // vocab_j x dim
  std::array<double, kNumEvidenceTypes> log_var{};                // ln s_j^2
  std::vector<double> enc_mean_w;    // feature_dim x dim
  std::vector<double> enc_mean_b;    // dim
  std::vector<double> enc_logvar_w;  // feature_dim x dim
  std::vector<double> enc_logvar_b;  // dim
  std::vector<double> dec_w;         // dim x sketch_vocab
  std::vector<double> dec_b;         // sketch_vocab
  double length_logit = 0.0;         // geometric length rate = sigmoid(length_logit)

  bool operator==(const ModelWeights&) const = default;
};

struct NamedBlock {
  std::string name;
  std::span<double> values;
};
// Fixed order; this is also the checkpoint order.
std::vector<NamedBlock> weight_blocks(ModelWeights& w);
ModelWeights zeros_like(const ModelWeights& w);

struct ModelParams {
  std::size_t dim = 0;
  std::array<Vocab, kNumEvidenceTypes> evidence_vocab;
  Vocab sketch_vocab;
  ModelWeights w;

  std::size_t feature_dim() const noexcept { return sketch_vocab.size() + kDepthBins; }
  double length_rate() const;

  bool operator==(const ModelParams&) const = default;
};

// Vocabularies from the training data; weights drawn from N(0, init_scale^2),
// biases and log-variances zero, length rate 0.9.
ModelParams init_params(std::size_t dim,
                        const std::vector<std::pair<ContextBundle, SketchAst>>& dataset,
                        std::uint64_t seed, double init_scale = 0.01);

// Token ids resolved against the model's vocabularies.
struct PreparedContext {
  std::array<std::vector<std::vector<std::uint32_t>>, kNumEvidenceTypes> instances;
};

struct PreparedSketch {
  std::vector<std::pair<std::uint32_t, double>> features;      // sparse reverse-encoder input
  std::vector<std::pair<std::uint32_t, double>> token_counts;  // sparse counts over sketch vocab
  std::size_t length = 0;                                      // total token count
};

PreparedContext prepare_context(const ModelParams& p, const ContextBundle& x);
PreparedSketch prepare_sketch(const ModelParams& p, const SketchAst& s);

// P(Z|X): mean sum_jk f_jk / s_j^2 / (1 + sum_j |X_j| / s_j^2), variance 1 / (same).
DiagGaussian encode_evidence(const ModelParams& p, const ContextBundle& x);
DiagGaussian encode_evidence(const ModelParams& p, const PreparedContext& x);

// Q(Z|Y).
DiagGaussian reverse_encode(const ModelParams& p, const SketchAst& s);
DiagGaussian reverse_encode(const ModelParams& p, const PreparedSketch& s);

// log P(Y|z).
double decoder_log_prob(const ModelParams& p, const SketchAst& s, std::span<const double> z);
double decoder_log_prob(const ModelParams& p, const PreparedSketch& s, std::span<const double> z);
// d/dz log P(Y|z).
std::vector<double> decoder_grad_z(const ModelParams& p, const PreparedSketch& s,
                                   std::span<const double> z);

struct ElboTerms {
  double kl_q_px = 0.0;   // KL(Q(Z|Y) || P(Z|X))
  double kl_px_p0 = 0.0;  // KL(P(Z|X) || P(Z))
  double reconstruction = 0.0;
  double value() const { return -kl_q_px - kl_px_p0 + reconstruction; }
};

// Deterministic given seed; z_samples reparameterized draws from P(Z|X).
ElboTerms elbo_terms(const ModelParams& p, const PreparedContext& x, const PreparedSketch& s,
                     std::uint64_t seed, std::size_t z_samples = 1);
double elbo(const ModelParams& p, const ContextBundle& x, const SketchAst& s,
            std::uint64_t seed, std::size_t z_samples = 1);

// Adds scale * d ELBO / d weights to grad and returns the ELBO. Uses the same
// draws as elbo_terms for the same seed.
double elbo_with_gradient(const ModelParams& p, const PreparedContext& x,
                          const PreparedSketch& s, std::uint64_t seed, std::size_t z_samples,
                          double scale, ModelWeights& grad);

// Log of a Monte-Carlo mean of likelihood ratios with its delta-method
// standard error.
struct McEstimate {
  double log_mean = 0.0;
  double std_error = 0.0;  // standard error of log_mean
};

// log P(Y) by importance sampling with Q(Z|Y) as proposal.
McEstimate estimate_log_py_detail(const ModelParams& p, const PreparedSketch& s, std::size_t n,
                                  std::uint64_t seed);
double estimate_log_py(const ModelParams& p, const SketchAst& s, std::size_t n,
                       std::uint64_t seed);

// log (1/n) sum_j P(Y|Z_j), Z_j ~ gx: plain Monte Carlo estimate of P(Y|X).
McEstimate mc_score_detail(const ModelParams& p, const DiagGaussian& gx, const PreparedSketch& s,
                           std::size_t n, std::uint64_t seed);
double mc_score(const ModelParams& p, const DiagGaussian& gx, const SketchAst& s, std::size_t n,
                std::uint64_t seed);

// log-mean-exp with a delta-method standard error.
McEstimate log_mean_exp(std::span<const double> log_values);

// ---- training --------------------------------------------------------------

enum class Optimizer { kGradientAscent, kAdam };

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t steps = 2000;
  std::size_t batch_size = 0;  // 0 = full dataset
  std::size_t z_samples = 1;
  std::uint64_t seed = 1;
  double clip_norm = 10.0;
  Optimizer optimizer = Optimizer::kGradientAscent;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> objective_trace;  // mean batch ELBO before each step
};

// Throws UsageError on an empty dataset or invalid config and NumericError if
// the objective becomes non-finite.
TrainResult train(ModelParams initial,
                  const std::vector<std::pair<ContextBundle, SketchAst>>& dataset,
                  const TrainConfig& cfg);

// ---- checkpoint ------------------------------------------------------------

// Binary layout (little-endian):
//   "CDMP" u32 version u32 dim u32 n_types u32 vocab_size[n_types] u32 sketch_vocab
//   f64 blocks in weight_blocks() order
//   vocabularies: per vocab, per token u32 byte length + bytes
//   u64 FNV-1a checksum of everything before it
std::string serialize_checkpoint(const ModelParams& p);
ModelParams deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace codec

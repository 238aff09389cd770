#include <gtest/gtest.h>

#include <cmath>

#include "codec/corpus.h"
#include "codec/error.h"
#include "codec/model.h"
#include "oracles.h"
#include "test_util.h"

using namespace codec;
using codec::testing::dataset_of;

namespace {

using Dataset = std::vector<std::pair<ContextBundle, SketchAst>>;

const Dataset& fixture_dataset() {
  static const Dataset data =
      dataset_of(records_from_classes(load_mj_directory(codec::testing::corpus_dir())));
  return data;
}

ModelParams zero_model(std::size_t dim) {
  ModelParams p = init_params(dim, fixture_dataset(), 1);
  p.w = zeros_like(p.w);
  p.w.length_logit = std::log(9.0);
  return p;
}

std::size_t emb_index(const ModelParams& p, EvidenceType t, const std::string& tok) {
  return static_cast<std::size_t>(p.evidence_vocab[static_cast<std::size_t>(t)].id(tok)) * p.dim;
}

ContextBundle bundle_of(EvidenceType t, std::vector<std::vector<std::string>> insts) {
  ContextBundle b;
  b[t] = std::move(insts);
  return b;
}

}  // namespace

TEST(Encode, EmptyBundleIsPrior) {
  const auto p = init_params(5, fixture_dataset(), 3, 0.5);
  EXPECT_EQ(encode_evidence(p, ContextBundle{}), DiagGaussian::standard(5));
}

TEST(Encode, OneAndTwoInstances) {
  auto p = zero_model(3);
  const std::vector<double> v1{1.0, -2.0, 0.5}, v2{0.25, 4.0, -1.0};
  const auto t = EvidenceType::kSurroundingMethodNames;
  const auto i1 = emb_index(p, t, "read");
  const auto i2 = emb_index(p, t, "write");
  ASSERT_NE(i1, 0u);
  ASSERT_NE(i2, 0u);
  auto& table = p.w.embeddings[static_cast<std::size_t>(t)];
  std::copy(v1.begin(), v1.end(), table.begin() + i1);
  std::copy(v2.begin(), v2.end(), table.begin() + i2);

  const auto one = encode_evidence(p, bundle_of(t, {{"read"}}));
  const auto two = encode_evidence(p, bundle_of(t, {{"read"}, {"write"}}));
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(one.mean()[i], v1[i] / 2);
    EXPECT_DOUBLE_EQ(one.variance()[i], 0.5);
    EXPECT_NEAR(two.mean()[i], (v1[i] + v2[i]) / 3, 1e-15);
    EXPECT_NEAR(two.variance()[i], 1.0 / 3, 1e-15);
  }
  // An instance averages its tokens.
  const auto avg = encode_evidence(p, bundle_of(t, {{"read", "write"}}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(avg.mean()[i], (v1[i] + v2[i]) / 4, 1e-15);
}

TEST(Encode, ConjugacyMatchesGridPosterior) {
  Rng rng(17);
  auto p = init_params(1, fixture_dataset(), 2);
  for (int rep = 0; rep < 100; ++rep) {
    for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
      p.w.log_var[j] = 3.0 * rng.uniform() - 1.5;
      for (auto& x : p.w.embeddings[j]) x = 4.0 * rng.uniform() - 2.0;
    }
    ContextBundle x;
    std::vector<std::pair<double, double>> obs;  // (f_jk, s_j^2)
    const auto n_inst = 1 + rng.below(6);
    for (std::uint64_t k = 0; k < n_inst; ++k) {
      const auto j = rng.below(kNumEvidenceTypes);
      const auto& vocab = p.evidence_vocab[j];
      if (vocab.size() < 2) continue;
      std::vector<std::string> inst;
      double f = 0.0;
      const auto len = 1 + rng.below(3);
      for (std::uint64_t t = 0; t < len; ++t) {
        const auto id = 1 + rng.below(vocab.size() - 1);
        inst.push_back(vocab.tokens()[id]);
        f += p.w.embeddings[j][id];
      }
      obs.emplace_back(f / static_cast<double>(len), std::exp(p.w.log_var[j]));
      x.evidences[j].push_back(inst);
    }
    const auto [mean, var] = oracle::grid_posterior(obs);
    const auto post = encode_evidence(p, x);
    EXPECT_NEAR(post.mean()[0], mean, 1e-4);
    EXPECT_NEAR(post.variance()[0], var, 1e-4);
  }
}

TEST(Encode, PosteriorContraction) {
  auto p = init_params(4, fixture_dataset(), 9, 0.5);
  Rng rng(4);
  for (auto& lv : p.w.log_var) lv = 2.0 * rng.normal();
  for (const auto& [x, s] : fixture_dataset()) {
    ContextBundle grow;
    double prev = encode_evidence(p, grow).variance()[0];
    for (std::size_t j = 0; j < kNumEvidenceTypes; ++j) {
      for (const auto& inst : x.evidences[j]) {
        grow.evidences[j].push_back(inst);
        const double v = encode_evidence(p, grow).variance()[0];
        EXPECT_LE(v, prev);
        prev = v;
      }
    }
  }
}

TEST(ReverseEncoder, ZeroWeightsGivePrior) {
  const auto p = zero_model(6);
  for (const auto& [x, s] : fixture_dataset())
    EXPECT_EQ(reverse_encode(p, s), DiagGaussian::standard(6));
}

TEST(ReverseEncoder, AffineInFeatures) {
  const auto p = init_params(4, fixture_dataset(), 5, 0.3);
  const auto& data = fixture_dataset();
  const auto& s1 = data[0].second;
  const auto& s2 = data[1].second;
  EXPECT_EQ(reverse_encode(p, s1), reverse_encode(p, SketchAst(s1)));

  auto dense = [&](const SketchAst& s) {
    std::vector<double> f(p.feature_dim(), 0.0);
    for (const auto& [i, v] : prepare_sketch(p, s).features) f[i] = v;
    return f;
  };
  const auto f1 = dense(s1), f2 = dense(s2);
  const auto g1 = reverse_encode(p, s1), g2 = reverse_encode(p, s2);
  for (std::size_t k = 0; k < p.dim; ++k) {
    double dm = 0, dl = 0;
    for (std::size_t i = 0; i < p.feature_dim(); ++i) {
      dm += (f2[i] - f1[i]) * p.w.enc_mean_w[i * p.dim + k];
      dl += (f2[i] - f1[i]) * p.w.enc_logvar_w[i * p.dim + k];
    }
    EXPECT_NEAR(g2.mean()[k] - g1.mean()[k], dm, 1e-12);
    EXPECT_NEAR(std::log(g2.variance()[k]) - std::log(g1.variance()[k]), dl, 1e-12);
  }
}

TEST(Decoder, ZIndependentWhenWIsZero) {
  auto p = init_params(3, fixture_dataset(), 6, 0.3);
  std::fill(p.w.dec_w.begin(), p.w.dec_w.end(), 0.0);
  const auto& s = fixture_dataset()[3].second;
  const std::vector<double> z1{0, 0, 0}, z2{5, -3, 1};
  EXPECT_EQ(decoder_log_prob(p, s, z1), decoder_log_prob(p, s, z2));

  // With b = 0 too, every token costs ln V.
  std::fill(p.w.dec_b.begin(), p.w.dec_b.end(), 0.0);
  const auto toks = sketch_tokens(s).tokens;
  const double L = static_cast<double>(toks.size());
  const double r = p.length_rate();
  const double want = std::log(1 - r) + (L - 1) * std::log(r) -
                      L * std::log(static_cast<double>(p.sketch_vocab.size()));
  EXPECT_NEAR(decoder_log_prob(p, s, z2), want, 1e-10);
}

TEST(Decoder, GradZMatchesFiniteDifferences) {
  const auto p = init_params(4, fixture_dataset(), 8, 0.5);
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ps = prepare_sketch(p, fixture_dataset()[rep * 7].second);
    std::vector<double> z(4);
    for (auto& v : z) v = rng.normal();
    const auto g = decoder_grad_z(p, ps, z);
    for (std::size_t i = 0; i < 4; ++i) {
      const double h = 1e-5;
      auto zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (decoder_log_prob(p, ps, zp) - decoder_log_prob(p, ps, zm)) / (2 * h);
      EXPECT_LE(std::abs(fd - g[i]), 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Elbo, PriorEverywhereGivesZeroKl) {
  const auto p = zero_model(4);
  const auto x = prepare_context(p, ContextBundle{});
  const auto s = prepare_sketch(p, fixture_dataset()[0].second);
  const auto t = elbo_terms(p, x, s, 1);
  EXPECT_NEAR(t.kl_q_px, 0.0, 1e-15);
  EXPECT_NEAR(t.kl_px_p0, 0.0, 1e-15);
}

TEST(Elbo, OneZeroEmbeddingInstance) {
  const std::size_t d = 4;
  const auto p = zero_model(d);
  const auto x = prepare_context(p, bundle_of(EvidenceType::kClassName, {{"io"}}));
  const auto s = prepare_sketch(p, fixture_dataset()[0].second);
  EXPECT_NEAR(elbo_terms(p, x, s, 1).kl_px_p0, d / 2.0 * (std::log(2.0) - 0.5), 1e-14);
}

TEST(Elbo, DeterministicGivenSeed) {
  const auto p = init_params(4, fixture_dataset(), 8, 0.3);
  const auto& [x, s] = fixture_dataset()[5];
  EXPECT_EQ(elbo(p, x, s, 42, 3), elbo(p, x, s, 42, 3));
  EXPECT_NE(elbo(p, x, s, 42, 3), elbo(p, x, s, 43, 3));
}

TEST(Elbo, GradientMatchesFiniteDifferencesEveryBlock) {
  auto p = init_params(4, fixture_dataset(), 21, 0.3);
  Rng rng(21);
  for (auto& lv : p.w.log_var) lv = 0.5 * rng.normal();
  for (auto& b : p.w.enc_mean_b) b = 0.3 * rng.normal();
  for (auto& b : p.w.enc_logvar_b) b = 0.3 * rng.normal();
  for (auto& b : p.w.dec_b) b = 0.3 * rng.normal();
  p.w.length_logit = 1.3;

  for (std::size_t pick : {2u, 17u, 40u}) {
    const auto& [bx, bs] = fixture_dataset()[pick];
    const auto x = prepare_context(p, bx);
    const auto s = prepare_sketch(p, bs);
    const std::uint64_t seed = 1000 + pick;
    const std::size_t zs = 2;

    const auto checks = oracle::check_elbo_gradient(p, x, s, seed, zs);
    ASSERT_EQ(checks.size(), weight_blocks(p.w).size());
    for (const auto& c : checks) {
      EXPECT_GT(c.size, 0u) << c.name;
      EXPECT_LE(c.worst, 1e-4) << c.name;
    }
  }
}

TEST(Estimators, LogMeanExp) {
  const std::vector<double> same{-3.0, -3.0, -3.0};
  const auto e = log_mean_exp(same);
  EXPECT_NEAR(e.log_mean, -3.0, 1e-15);
  EXPECT_NEAR(e.std_error, 0.0, 1e-15);
  const std::vector<double> two{0.0, std::log(3.0)};
  EXPECT_NEAR(log_mean_exp(two).log_mean, std::log(2.0), 1e-15);
}

TEST(Estimators, ZIndependentDecoderIsExact) {
  auto p = init_params(3, fixture_dataset(), 6, 0.3);
  codec::testing::make_z_independent(p);
  const auto& s = fixture_dataset()[9].second;
  const std::vector<double> z0(3, 0.0);
  const double want = decoder_log_prob(p, s, z0);
  const auto ps = prepare_sketch(p, s);
  for (std::size_t n : {1u, 7u, 100u}) {
    const auto est = estimate_log_py_detail(p, ps, n, n);
    EXPECT_NEAR(est.log_mean, want, 1e-12);
    EXPECT_NEAR(est.std_error, 0.0, 1e-12);
    const auto gx = DiagGaussian({0.3, -1.0, 2.0}, {0.5, 0.2, 1.0});
    EXPECT_NEAR(mc_score(p, gx, s, n, 5), want, 1e-12);
  }
}

TEST(Estimators, ImportanceSamplerMatchesQuadratureAtD1) {
  auto p = init_params(1, fixture_dataset(), 12, 0.4);
  p.w.enc_mean_b[0] = 0.2;
  const auto& s = fixture_dataset()[11].second;
  auto f = [&](double z) { return std::exp(oracle::log_normal_1d(z, 0, 1) + decoder_log_prob(p, s, {&z, 1})); };
  // Integrate relative to the peak of the integrand to stay in range.
  double lpeak = -INFINITY;
  for (double z = -10; z <= 10; z += 0.01)
    lpeak = std::max(lpeak, oracle::log_normal_1d(z, 0, 1) + decoder_log_prob(p, s, {&z, 1}));
  auto g = [&](double z) { return f(z) * std::exp(-lpeak); };
  const double quad =
      std::log(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -12, 12, 20, 1e-14)) +
      lpeak;
  EXPECT_NEAR(estimate_log_py(p, s, 100'000, 3), quad, 1e-2);
}

TEST(Estimators, SelfConsistentAcrossSeedsAndSizes) {
  const auto p = init_params(4, fixture_dataset(), 13, 0.3);
  const auto& [x, s] = fixture_dataset()[20];
  const auto ps = prepare_sketch(p, s);
  const auto a = estimate_log_py_detail(p, ps, 10'000, 1);
  const auto b = estimate_log_py_detail(p, ps, 10'000, 2);
  EXPECT_LE(std::abs(a.log_mean - b.log_mean),
            3 * std::hypot(a.std_error, b.std_error));
  const auto small = estimate_log_py_detail(p, ps, 1000, 3);
  EXPECT_LE(std::abs(small.log_mean - a.log_mean), 3 * std::hypot(small.std_error, a.std_error));

  const auto gx = encode_evidence(p, x);
  const auto m1 = mc_score_detail(p, gx, ps, 10'000, 1);
  const auto m2 = mc_score_detail(p, gx, ps, 10'000, 2);
  EXPECT_LE(std::abs(m1.log_mean - m2.log_mean), 3 * std::hypot(m1.std_error, m2.std_error));
}

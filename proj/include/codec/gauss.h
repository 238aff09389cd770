#pragma once

// Diagonal-covariance Gaussian algebra in log space.
//
// Every density is handled through its exponentiated-quadratic form
//   log N(z; mu, s2) = A z^2 + B z + C   (per dimension)
// with A = -1/(2 s2), B = mu/s2, C = -mu^2/(2 s2) - ln(2 pi)/2 - ln(s2)/2.
// Products and quotients of such forms stay in the family, which is what
// lets the search score  P(Y) * Int P(Z|X) Q(Z|Y) / P(Z) dZ  be evaluated
// in closed form against the unit-normal prior.

#include <cstddef>
#include <span>
#include <vector>

namespace codec {

class DiagGaussian {
 public:
  DiagGaussian() = default;
  // Throws UsageError unless mean/variance are equal-length, non-empty,
  // finite, and every variance is strictly positive.
  DiagGaussian(std::vector<double> mean, std::vector<double> variance);

  static DiagGaussian standard(std::size_t dim);
  // Same variance on every dimension.
  static DiagGaussian isotropic(std::vector<double> mean, double variance);

  std::size_t dim() const noexcept { return mean_.size(); }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& variance() const noexcept { return variance_; }

  bool operator==(const DiagGaussian&) const = default;

 private:
  std::vector<double> mean_;
  std::vector<double> variance_;
};

struct NormalFormCoeffs {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
};

// Diagnostic split of a convolution score; total == log_py + log_ratio_term + quad_terms.
struct ScoreBreakdown {
  double total = 0.0;
  double log_py = 0.0;
  double log_ratio_term = 0.0;
  double quad_terms = 0.0;
};

NormalFormCoeffs to_normal_form(const DiagGaussian& g);

// Recovers the Gaussian from A and B; C is ignored (it is implied by A, B for
// a normalized density, see normalized_constant). Throws NonIntegrableError
// if any A component is >= 0.
DiagGaussian from_normal_form(const NormalFormCoeffs& coeffs);

// The constant term of a normalized density with coefficients (a, b):
//   c = b^2/(4a) + ln(-a/pi)/2.
double normalized_constant(double a, double b);

double log_density(const DiagGaussian& g, std::span<const double> z);

// KL(g1 || g2).
double kl_divergence(const DiagGaussian& g1, const DiagGaussian& g2);

// log P(Y|X) = log_py + log Int N(z; gx) N(z; gy) / N(z; 0, I) dz.
// Throws NonIntegrableError when a_x + a_y + 1/2 >= 0 in some dimension.
ScoreBreakdown convolution_score(const DiagGaussian& gx, const DiagGaussian& gy,
                                 double log_py);

// Query-side precomputation of convolution_score for scanning many entries.
// Holds only O(d) state; score() performs no allocation.
class ConvolutionKernel {
 public:
  explicit ConvolutionKernel(const DiagGaussian& gx);

  std::size_t dim() const noexcept { return a_x_.size(); }

  // Same value as convolution_score(gx, N(mu_y, var_y), log_py).total up to
  // rounding. Returns NaN if the convolution is not integrable. Spans must
  // have length dim(); this is not checked.
  double score(const double* mu_y, const double* var_y, double log_py) const noexcept;

 private:
  std::vector<double> a_x_;
  std::vector<double> b_x_;
  double query_const_ = 0.0;
};

}  // namespace codec

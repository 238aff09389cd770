#include "codec/gauss.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "codec/error.h"

namespace codec {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

void check_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch(a, b);
}

}  // namespace

DiagGaussian::DiagGaussian(std::vector<double> mean, std::vector<double> variance)
    : mean_(std::move(mean)), variance_(std::move(variance)) {
  if (mean_.empty()) throw UsageError("DiagGaussian: dimension must be >= 1");
  check_same_dim(mean_.size(), variance_.size());
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    if (!std::isfinite(mean_[i]))
      throw UsageError("DiagGaussian: non-finite mean at dimension " + std::to_string(i));
    if (!(variance_[i] > 0.0) || !std::isfinite(variance_[i]))
      throw UsageError("DiagGaussian: variance must be positive and finite at dimension " +
                       std::to_string(i));
  }
}

DiagGaussian DiagGaussian::standard(std::size_t dim) {
  return DiagGaussian(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

DiagGaussian DiagGaussian::isotropic(std::vector<double> mean, double variance) {
  const std::size_t d = mean.size();
  return DiagGaussian(std::move(mean), std::vector<double>(d, variance));
}

NormalFormCoeffs to_normal_form(const DiagGaussian& g) {
  const std::size_t d = g.dim();
  NormalFormCoeffs out{std::vector<double>(d), std::vector<double>(d), std::vector<double>(d)};
  for (std::size_t i = 0; i < d; ++i) {
    const double mu = g.mean()[i];
    const double s2 = g.variance()[i];
    out.a[i] = -1.0 / (2.0 * s2);
    out.b[i] = mu / s2;
    out.c[i] = -mu * mu / (2.0 * s2) - 0.5 * kLog2Pi - 0.5 * std::log(s2);
  }
  return out;
}

DiagGaussian from_normal_form(const NormalFormCoeffs& coeffs) {
  check_same_dim(coeffs.a.size(), coeffs.b.size());
  const std::size_t d = coeffs.a.size();
  std::vector<double> mean(d), var(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double a = coeffs.a[i];
    if (!(a < 0.0))
      throw NonIntegrableError("normal form: A[" + std::to_string(i) + "] = " +
                               std::to_string(a) + " is not negative");
    mean[i] = -coeffs.b[i] / (2.0 * a);
    var[i] = -1.0 / (2.0 * a);
  }
  return DiagGaussian(std::move(mean), std::move(var));
}

double normalized_constant(double a, double b) {
  return b * b / (4.0 * a) + 0.5 * std::log(-a / std::numbers::pi);
}

double log_density(const DiagGaussian& g, std::span<const double> z) {
  check_same_dim(g.dim(), z.size());
  double quad = 0.0;
  double log_det = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double diff = z[i] - g.mean()[i];
    quad += diff * diff / g.variance()[i];
    log_det += std::log(g.variance()[i]);
  }
  return -0.5 * quad - 0.5 * static_cast<double>(z.size()) * kLog2Pi - 0.5 * log_det;
}

double kl_divergence(const DiagGaussian& g1, const DiagGaussian& g2) {
  check_same_dim(g1.dim(), g2.dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < g1.dim(); ++i) {
    const double v1 = g1.variance()[i];
    const double v2 = g2.variance()[i];
    const double diff = g2.mean()[i] - g1.mean()[i];
    sum += std::log(v2) - std::log(v1) - 1.0 + v1 / v2 + diff * diff / v2;
  }
  return 0.5 * sum;
}

ScoreBreakdown convolution_score(const DiagGaussian& gx, const DiagGaussian& gy,
                                 double log_py) {
  check_same_dim(gx.dim(), gy.dim());
  ScoreBreakdown out;
  out.log_py = log_py;
  for (std::size_t i = 0; i < gx.dim(); ++i) {
    const double a_x = -1.0 / (2.0 * gx.variance()[i]);
    const double a_y = -1.0 / (2.0 * gy.variance()[i]);
    const double b_x = gx.mean()[i] / gx.variance()[i];
    const double b_y = gy.mean()[i] / gy.variance()[i];
    const double a_sum = a_x + a_y + 0.5;
    if (!(a_sum < 0.0))
      throw NonIntegrableError("convolution not integrable in dimension " +
                               std::to_string(i) + " (a_x + a_y + 1/2 = " +
                               std::to_string(a_sum) + ")");
    out.log_ratio_term += 0.5 * std::log(-2.0 * a_x * a_y / a_sum);
    const double b_sum = b_x + b_y;
    out.quad_terms += b_x * b_x / (4.0 * a_x) + b_y * b_y / (4.0 * a_y) -
                      b_sum * b_sum / (4.0 * a_sum);
  }
  out.total = out.log_py + out.log_ratio_term + out.quad_terms;
  return out;
}

ConvolutionKernel::ConvolutionKernel(const DiagGaussian& gx)
    : a_x_(gx.dim()), b_x_(gx.dim()) {
  for (std::size_t i = 0; i < gx.dim(); ++i) {
    const double a = -1.0 / (2.0 * gx.variance()[i]);
    const double b = gx.mean()[i] / gx.variance()[i];
    a_x_[i] = a;
    b_x_[i] = b;
    query_const_ += 0.5 * std::log(-2.0 * a) + b * b / (4.0 * a);
  }
}

// Per dimension the score splits into a query-only part (folded into
// query_const_) and
//   ln(a_y / A)/2 - mu_y^2/(2 var_y) - (b_x + b_y)^2 / (4 A),   A = a_x + a_y + 1/2.
// The log is taken once per block of ratios; a block whose product leaves
// the normal range is redone term by term.
double ConvolutionKernel::score(const double* mu_y, const double* var_y,
                                double log_py) const noexcept {
  constexpr std::size_t kBlock = 8;
  const std::size_t d = a_x_.size();
  const double* a_x = a_x_.data();
  const double* b_x = b_x_.data();

  double quad = 0.0;
  double log_ratio = 0.0;
  double max_a_sum = -std::numeric_limits<double>::infinity();

  std::size_t i = 0;
  while (i < d) {
    const std::size_t end = std::min(d, i + kBlock);
    double prod = 1.0;
    for (std::size_t j = i; j < end; ++j) {
      const double inv = 1.0 / var_y[j];
      const double a_y = -0.5 * inv;
      const double b_sum = b_x[j] + mu_y[j] * inv;
      const double a_sum = a_x[j] + a_y + 0.5;
      max_a_sum = std::max(max_a_sum, a_sum);
      prod *= a_y / a_sum;
      quad += -0.5 * mu_y[j] * mu_y[j] * inv - b_sum * b_sum / (4.0 * a_sum);
    }
    if (prod > 1e-290 && prod < 1e290) {
      log_ratio += std::log(prod);
    } else {
      for (std::size_t j = i; j < end; ++j) {
        const double a_y = -0.5 / var_y[j];
        log_ratio += std::log(a_y / (a_x[j] + a_y + 0.5));
      }
    }
    i = end;
  }
  if (!(max_a_sum < 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return log_py + query_const_ + 0.5 * log_ratio + quad;
}

}  // namespace codec

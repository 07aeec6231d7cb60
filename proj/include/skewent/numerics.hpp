// Copyright 2026 The skewent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dense symmetric linear algebra and normal-distribution kernels shared by
// the rest of the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "skewent/error.hpp"
#include "skewent/quadrature.hpp"
#include "skewent/rng.hpp"

namespace skewent {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

/// Symmetric positive definite matrix with its Cholesky factor and log
/// determinant cached. Only chol_decompose() builds one.
class SymPosDefMatrix {
 public:
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
  [[nodiscard]] const Matrix& chol() const noexcept { return chol_; }
  [[nodiscard]] double logdet() const noexcept { return logdet_; }
  /// Smallest pivot d_i = L_ii^2 seen during factorization.
  [[nodiscard]] double min_pivot() const noexcept { return min_pivot_; }
  [[nodiscard]] bool is_diagonal() const noexcept { return diagonal_; }

  /// Solves A x = b through the cached factor.
  [[nodiscard]] Vector solve(const Vector& b) const {
    Vector y = chol_.triangularView<Eigen::Lower>().solve(b);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

 private:
  friend SymPosDefMatrix chol_decompose(const Matrix&, double, const std::string&);
  Matrix entries_;
  Matrix chol_;
  double logdet_ = 0.0;
  double min_pivot_ = 0.0;
  bool diagonal_ = true;
};

/// Cholesky factorization A = L L'. Pivots (the values whose square roots
/// become L_ii) must exceed `min_pivot`; a pivot <= 0 is always rejected.
inline SymPosDefMatrix chol_decompose(const Matrix& a, double min_pivot = 0.0,
                                      const std::string& context = "matrix is not positive definite") {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::DimensionMismatch, "Cholesky needs a non-empty square matrix, got " +
                                                  std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  const Eigen::Index n = a.rows();
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (!(std::abs(a(i, j) - a(j, i)) <= 1e-12 * scale))
        throw Error(ErrorKind::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                 ") and (" + std::to_string(j) + "," + std::to_string(i) +
                                                 ") differ");
  if (!a.allFinite()) throw Error(ErrorKind::InvalidParameter, "matrix has non-finite entries");

  SymPosDefMatrix out;
  out.entries_ = 0.5 * (a + a.transpose());
  out.chol_ = Matrix::Zero(n, n);
  out.min_pivot_ = kInf;
  Matrix& l = out.chol_;
  const Matrix& s = out.entries_;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0) || pivot <= min_pivot)
      throw NotPositiveDefiniteError(static_cast<std::size_t>(j), pivot, context);
    out.min_pivot_ = std::min(out.min_pivot_, pivot);
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
      if (s(i, j) != 0.0) out.diagonal_ = false;
    }
  }
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(l(i, i));
  out.logdet_ = 2.0 * logdet;
  return out;
}

/// Symmetric square root S (S = S', S S = A) by eigendecomposition.
inline Matrix sym_sqrt(const SymPosDefMatrix& a) {
  if (a.is_diagonal()) return a.matrix().diagonal().cwiseSqrt().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix());
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveDefiniteError(0, eig.eigenvalues().minCoeff(), "symmetric square root needs a PD matrix");
  const Matrix& v = eig.eigenvectors();
  Matrix root = v * eig.eigenvalues().cwiseSqrt().asDiagonal() * v.transpose();
  return 0.5 * (root + root.transpose());
}

// ---------------------------------------------------------------------------
// Univariate standard normal

inline double std_normal_log_pdf(double x) noexcept { return -0.5 * (kLog2Pi + x * x); }

inline double std_normal_pdf(double x) noexcept { return std::exp(std_normal_log_pdf(x)); }

inline double std_normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

/// ln Phi(x), accurate deep into the lower tail (asymptotic series below -30)
/// and near 1 in the upper tail.
inline double log_std_normal_cdf(double x) noexcept {
  if (std::isnan(x)) return x;
  if (x == kInf) return 0.0;
  if (x == -kInf) return -kInf;
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x * std::numbers::sqrt2 / 2.0));
  if (x > -30.0) return std::log(std_normal_cdf(x));
  const double r = 1.0 / (x * x);
  // 1 - r + 3r^2 - 15r^3 + ... ; terms shrink fast for |x| >= 30.
  double series = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -static_cast<double>(2 * k - 1) * r;
    series += term;
  }
  return -0.5 * x * x - std::log(-x) - 0.5 * kLog2Pi + std::log(series);
}

/// Normal quantile: Wichura's AS241 (PPND16) followed by one Newton step.
inline double std_normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidParameter, "quantile needs p in [0,1]");
  if (p == 0.0) return -kInf;
  if (p == 1.0) return kInf;
  const double q = p - 0.5;
  double x;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    x = q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
             4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
             2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
  } else {
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e+0) * r + 3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
    } else {
      r -= 5.0;
      x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
    }
    if (q < 0.0) x = -x;
  }
  // Newton refinement on Phi(x) = p, using whichever tail is smaller.
  const double pdf = std_normal_pdf(x);
  if (pdf > 0.0) {
    const double err = (p < 0.5) ? std_normal_cdf(x) - p : (1.0 - p) - std_normal_cdf(-x);
    x -= (p < 0.5 ? err : -err) / pdf;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Multivariate normal CDF

struct GaussianKernelResult {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Log-scale counterpart; error_bound stays on the probability scale.
struct LogKernelResult {
  double log_value = 0.0;
  double error_bound = 0.0;
};

struct MvnOptions {
  /// Bound the bivariate quadrature must meet (it runs at 1e-12 relative).
  double bivariate_target = 1e-6;
  /// 3-sigma target for the randomized lattice rule (m >= 3).
  double qmc_target = 1e-4;
  std::size_t qmc_shifts = 12;
  std::size_t qmc_min_points = 32;
  std::size_t qmc_max_points = 1u << 16;
  std::uint64_t qmc_seed = 0x2545f4914f6cdd1dULL;
};

namespace detail {

/// P(X <= h, Y <= k) for standard normals with correlation rho, |rho| < 1.
/// Uses the single-integral reduction in theta = asin(r): for rho >= 0 the
/// integral runs up from the independent case, for rho < 0 up from the
/// rho = -1 limit, so both pieces are nonnegative and nothing cancels.
inline GaussianKernelResult bivariate_cdf(double h, double k, double rho) {
  if (h == -kInf || k == -kInf) return {0.0, 0.0};
  if (h == kInf) return {std_normal_cdf(k), 0.0};
  if (k == kInf) return {std_normal_cdf(h), 0.0};
  const double hk = h * k;
  const double sq = h * h + k * k;
  auto integrand = [&](double theta) {
    const double s = std::sin(theta);
    const double c2 = 1.0 - s * s;
    const double num = sq - 2.0 * hk * s;
    if (num <= 0.0) return 1.0 / (2.0 * std::numbers::pi);
    if (c2 <= 0.0) return 0.0;
    return std::exp(-0.5 * num / c2) / (2.0 * std::numbers::pi);
  };
  const double upper = std::asin(rho);
  double base;
  double lower;
  if (rho >= 0.0) {
    base = std_normal_cdf(h) * std_normal_cdf(k);
    lower = 0.0;
  } else {
    // Phi_2(h,k;-1) = max(0, Phi(h) + Phi(k) - 1).
    if (h + k <= 0.0) {
      base = 0.0;
    } else if (h > 0.0 && k > 0.0) {
      base = 1.0 - (std_normal_cdf(-h) + std_normal_cdf(-k));
    } else {
      base = std::max(0.0, h > 0.0 ? std_normal_cdf(k) - std_normal_cdf(-h)
                                   : std_normal_cdf(h) - std_normal_cdf(-k));
    }
    lower = -std::numbers::pi / 2.0;
  }
  quadrature::Tolerance tol;
  tol.abs = 1e-300;
  tol.rel = 1e-12;
  tol.max_subdivisions = 200;
  const auto r = quadrature::integrate(integrand, lower, upper, tol);
  return {std::clamp(base + r.value, 0.0, 1.0), r.error + 1e-16 * (base + r.value)};
}

/// Richtmyer generator: fractional parts of square roots of primes.
inline std::vector<double> richtmyer_generator(std::size_t dim) {
  static constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                                    47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107};
  std::vector<double> z(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double r = std::sqrt(static_cast<double>(kPrimes[i % std::size(kPrimes)]));
    z[i] = r - std::floor(r);
  }
  return z;
}

}  // namespace detail

/// Orthant probability P(X <= upper) for X ~ N_m(0, cov), bound to one
/// covariance so repeated evaluations reuse the factorization.
///   m = 1 or diagonal cov: exact product of univariate CDFs;
///   m = 2: deterministic adaptive quadrature;
///   m >= 3: separation-of-variables with a randomized lattice rule.
/// Infinite upper limits are removed by marginalization first.
class MvnCdf {
 public:
  explicit MvnCdf(const SymPosDefMatrix& cov, MvnOptions options = {})
      : cov_(cov), options_(options) {
    const auto m = cov.matrix().rows();
    sd_ = cov.matrix().diagonal().cwiseSqrt();
    if (m == 2) rho_ = cov.matrix()(0, 1) / (sd_(0) * sd_(1));
  }

  [[nodiscard]] std::size_t dim() const noexcept { return cov_.dim(); }

  [[nodiscard]] GaussianKernelResult evaluate(const Vector& upper) const {
    check(upper);
    if ((upper.array() == -kInf).any()) return {0.0, 0.0};
    if ((upper.array() == kInf).any()) return reduced(upper).evaluate(finite_part(upper));
    const auto m = upper.size();
    if (m == 1 || cov_.is_diagonal()) {
      double p = 1.0;
      for (Eigen::Index i = 0; i < m; ++i) p *= std_normal_cdf(upper(i) / sd_(i));
      return {p, 0.0};
    }
    if (m == 2) {
      auto r = detail::bivariate_cdf(upper(0) / sd_(0), upper(1) / sd_(1), rho_);
      if (r.error_bound > options_.bivariate_target)
        throw Error(ErrorKind::NonConvergent, "bivariate normal CDF quadrature missed its error target");
      return r;
    }
    return lattice(upper);
  }

  [[nodiscard]] LogKernelResult log_evaluate(const Vector& upper) const {
    check(upper);
    if ((upper.array() == -kInf).any()) return {-kInf, 0.0};
    if ((upper.array() == kInf).any()) return reduced(upper).log_evaluate(finite_part(upper));
    const auto m = upper.size();
    if (m == 1 || cov_.is_diagonal()) {
      double lp = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) lp += log_std_normal_cdf(upper(i) / sd_(i));
      return {lp, 0.0};
    }
    const auto r = evaluate(upper);
    return {r.value > 0.0 ? std::log(r.value) : -kInf, r.error_bound};
  }

 private:
  void check(const Vector& upper) const {
    if (static_cast<std::size_t>(upper.size()) != cov_.dim())
      throw Error(ErrorKind::DimensionMismatch, "upper limit has length " + std::to_string(upper.size()) +
                                                    ", covariance is " + std::to_string(cov_.dim()) + "-dimensional");
    if (upper.array().isNaN().any()) throw Error(ErrorKind::InvalidParameter, "upper limit contains NaN");
  }

  [[nodiscard]] MvnCdf reduced(const Vector& upper) const {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < upper.size(); ++i)
      if (upper(i) != kInf) keep.push_back(i);
    const auto k = static_cast<Eigen::Index>(keep.size());
    if (k == 0) return MvnCdf();
    Matrix sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) sub(i, j) = cov_.matrix()(keep[i], keep[j]);
    return MvnCdf(chol_decompose(sub), options_);
  }

  [[nodiscard]] static Vector finite_part(const Vector& upper) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < upper.size(); ++i)
      if (upper(i) != kInf) v.push_back(upper(i));
    return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  // Empty marginal: every coordinate was unbounded.
  MvnCdf() = default;

  [[nodiscard]] GaussianKernelResult lattice(const Vector& upper) const {
    const Matrix& l = cov_.chol();
    const auto m = upper.size();
    const auto gen = detail::richtmyer_generator(static_cast<std::size_t>(m - 1));
    std::mt19937_64 shift_engine(options_.qmc_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> y(static_cast<std::size_t>(m));
    std::vector<double> w(static_cast<std::size_t>(m - 1));

    auto integrand = [&](const std::vector<double>& point) {
      double e = std_normal_cdf(upper(0) / l(0, 0));
      double f = e;
      for (Eigen::Index i = 1; i < m && f > 0.0; ++i) {
        const double u = std::clamp(point[static_cast<std::size_t>(i - 1)] * e, 1e-300, 1.0 - 1e-16);
        y[static_cast<std::size_t>(i - 1)] = std_normal_quantile(u);
        double s = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) s += l(i, j) * y[static_cast<std::size_t>(j)];
        e = std_normal_cdf((upper(i) - s) / l(i, i));
        f *= e;
      }
      return f;
    };

    const std::size_t shifts = std::max<std::size_t>(options_.qmc_shifts, 2);
    std::size_t points = options_.qmc_min_points;
    double value = 0.0;
    double bound = kInf;
    while (true) {
      std::vector<double> shift_means(shifts, 0.0);
      for (std::size_t s = 0; s < shifts; ++s) {
        std::vector<double> shift(static_cast<std::size_t>(m - 1));
        for (auto& v : shift) v = unif(shift_engine);
        double sum = 0.0;
        for (std::size_t k = 1; k <= points; ++k) {
          for (std::size_t d = 0; d < w.size(); ++d) {
            double x = static_cast<double>(k) * gen[d] + shift[d];
            x -= std::floor(x);
            w[d] = std::abs(2.0 * x - 1.0);  // baker's transform
          }
          const double a = integrand(w);
          for (auto& v : w) v = 1.0 - v;
          sum += 0.5 * (a + integrand(w));
        }
        shift_means[s] = sum / static_cast<double>(points);
      }
      double mean = 0.0;
      for (double v : shift_means) mean += v;
      mean /= static_cast<double>(shifts);
      double var = 0.0;
      for (double v : shift_means) var += (v - mean) * (v - mean);
      var /= static_cast<double>(shifts * (shifts - 1));
      value = mean;
      bound = 3.0 * std::sqrt(var);
      if (bound <= options_.qmc_target || points >= options_.qmc_max_points) break;
      points *= 2;
    }
    return {std::clamp(value, 0.0, 1.0), bound};
  }

  SymPosDefMatrix cov_;
  MvnOptions options_;
  Vector sd_;
  double rho_ = 0.0;

};

/// P(X <= upper) for X ~ N_m(0, cov).
inline GaussianKernelResult mvn_cdf(const Vector& upper, const SymPosDefMatrix& cov,
                                    const MvnOptions& options = {}) {
  if (static_cast<std::size_t>(upper.size()) != cov.dim())
    throw Error(ErrorKind::DimensionMismatch, "upper limit and covariance dimensions differ");
  bool all_unbounded = (upper.array() == kInf).all();
  if (all_unbounded) return {1.0, 0.0};
  return MvnCdf(cov, options).evaluate(upper);
}

inline LogKernelResult mvn_log_cdf(const Vector& upper, const SymPosDefMatrix& cov,
                                   const MvnOptions& options = {}) {
  if (static_cast<std::size_t>(upper.size()) != cov.dim())
    throw Error(ErrorKind::DimensionMismatch, "upper limit and covariance dimensions differ");
  if ((upper.array() == kInf).all()) return {0.0, 0.0};
  return MvnCdf(cov, options).log_evaluate(upper);
}

/// mean + scale_root * z with z i.i.d. standard normal from `rs`.
inline Vector mvn_sample(RandomStream& rs, const Vector& mean, const Matrix& scale_root) {
  if (scale_root.rows() != mean.size() || scale_root.cols() != mean.size())
    throw Error(ErrorKind::DimensionMismatch, "scale root must be " + std::to_string(mean.size()) + "x" +
                                                  std::to_string(mean.size()));
  Vector z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rs.normal();
  return mean + scale_root * z;
}

}  // namespace skewent

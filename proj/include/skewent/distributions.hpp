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

// Parameter types, log-densities, exact samplers, moments and marginals for
// the Normal, Log-Normal, Skew-Normal, Log-Skew-Normal, multivariate Normal,
// CFUSN and LCFUSN families.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "skewent/error.hpp"
#include "skewent/numerics.hpp"
#include "skewent/rng.hpp"

namespace skewent {

inline constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

/// Smallest admissible pivot of I - Delta'Delta.
inline constexpr double kSkewPivotFloor = 1e-10;

namespace detail {
inline void require_finite(double v, std::string_view name) {
  if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, std::string(name) + " must be finite");
}
inline void require_positive(double v, std::string_view name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw Error(ErrorKind::InvalidParameter, std::string(name) + " must be positive and finite");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Univariate families. `sigma` is always the scale (standard deviation of
// the normal kernel), never the variance.

struct Normal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct SkewNormal {
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 0.0;
};

struct LogSkewNormal {
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 0.0;
};

/// delta = alpha / sqrt(1 + alpha^2)
inline double alpha_to_delta(double alpha) noexcept { return alpha / std::hypot(1.0, alpha); }

/// alpha = delta / sqrt(1 - delta^2)
inline double delta_to_alpha(double delta) noexcept { return delta / std::sqrt((1.0 - delta) * (1.0 + delta)); }

// ---------------------------------------------------------------------------
// Multivariate parameter blocks

/// n x m skewness matrix Delta. Valid iff ||Delta a|| < 1 for every unit a,
/// checked as positive definiteness of I_m - Delta'Delta with pivots above
/// kSkewPivotFloor.
class SkewnessMatrix {
 public:
  static SkewnessMatrix create(const Matrix& delta, const MvnOptions& cdf_options = {}) {
    if (delta.rows() == 0 || delta.cols() == 0)
      throw Error(ErrorKind::DimensionMismatch, "skewness matrix must be non-empty");
    if (!delta.allFinite()) throw Error(ErrorKind::InvalidParameter, "skewness matrix has non-finite entries");
    SkewnessMatrix out;
    out.delta_ = delta;
    const auto m = delta.cols();
    const auto n = delta.rows();
    Matrix dstar = Matrix::Identity(m, m) - delta.transpose() * delta;
    dstar = 0.5 * (dstar + dstar.transpose());
    if (m == 1) {
      // 1 - |d|^2 as (1 - |d|)(1 + |d|) keeps relative accuracy near |d| = 1.
      const double norm = delta.norm();
      dstar(0, 0) = (1.0 - norm) * (1.0 + norm);
    }
    out.delta_star_ = chol_decompose(
        dstar, kSkewPivotFloor,
        "invalid skewness matrix: ||Delta a|| < 1 must hold for every unit vector a, "
        "i.e. I_m - Delta'Delta must be positive definite");
    Matrix resid = Matrix::Identity(n, n) - delta * delta.transpose();
    resid = 0.5 * (resid + resid.transpose());
    out.residual_root_ = sym_sqrt(chol_decompose(resid, 0.0, "I_n - Delta Delta' is not positive definite"));
    out.cdf_.emplace(out.delta_star_, cdf_options);
    out.zero_ = delta.isZero(0.0);
    return out;
  }

  static SkewnessMatrix zero(std::size_t n, std::size_t m) {
    return create(Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m)));
  }

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(delta_.rows()); }
  [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(delta_.cols()); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return delta_; }
  /// I_m - Delta'Delta
  [[nodiscard]] const SymPosDefMatrix& delta_star() const noexcept { return delta_star_; }
  /// (I_n - Delta Delta')^{1/2}, used by the sampler.
  [[nodiscard]] const Matrix& residual_root() const noexcept { return residual_root_; }
  [[nodiscard]] bool is_zero() const noexcept { return zero_; }

  /// ln Phi_m(Delta'z | Delta*)
  [[nodiscard]] LogKernelResult log_skew_cdf(const Vector& z) const {
    if (zero_) return cdf_->log_evaluate(Vector::Zero(delta_.cols()));
    return cdf_->log_evaluate(delta_.transpose() * z);
  }

  [[nodiscard]] const MvnCdf& cdf() const { return *cdf_; }

  /// Row block [first, first + count).
  [[nodiscard]] SkewnessMatrix row_block(std::size_t first, std::size_t count) const {
    return create(delta_.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count)));
  }

  /// Draw of CFUSN_{n,m}(Delta): Delta|U| + (I - Delta Delta')^{1/2} V.
  [[nodiscard]] Vector draw_canonical(RandomStream& rs) const {
    const auto n = delta_.rows();
    const auto m = delta_.cols();
    Vector u(m);
    for (Eigen::Index j = 0; j < m; ++j) u(j) = std::abs(rs.normal());
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rs.normal();
    return delta_ * u + residual_root_ * v;
  }

 private:
  Matrix delta_;
  SymPosDefMatrix delta_star_;
  Matrix residual_root_;
  std::optional<MvnCdf> cdf_;
  bool zero_ = false;
};

/// Location vector mu and scale matrix Sigma with its symmetric root cached.
class LocationScale {
 public:
  static LocationScale create(const Vector& mu, const Matrix& sigma) {
    if (mu.size() == 0) throw Error(ErrorKind::DimensionMismatch, "location vector must be non-empty");
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
      throw Error(ErrorKind::DimensionMismatch, "scale matrix must be " + std::to_string(mu.size()) + "x" +
                                                    std::to_string(mu.size()));
    if (!mu.allFinite()) throw Error(ErrorKind::InvalidParameter, "location vector has non-finite entries");
    LocationScale out;
    out.mu_ = mu;
    out.sigma_ = chol_decompose(sigma, 0.0, "scale matrix Sigma is not positive definite");
    out.root_ = sym_sqrt(out.sigma_);
    out.inv_root_ = out.root_.inverse();
    out.inv_root_ = 0.5 * (out.inv_root_ + out.inv_root_.transpose());
    out.canonical_ = mu.isZero(0.0) && sigma.isIdentity(0.0);
    return out;
  }

  static LocationScale canonical(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return create(Vector::Zero(k), Matrix::Identity(k, k));
  }

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mu_.size()); }
  [[nodiscard]] const Vector& mu() const noexcept { return mu_; }
  [[nodiscard]] const SymPosDefMatrix& sigma() const noexcept { return sigma_; }
  /// Symmetric Sigma^{1/2}.
  [[nodiscard]] const Matrix& root() const noexcept { return root_; }
  /// Sigma^{-1/2} = (Sigma^{1/2})^{-1}.
  [[nodiscard]] const Matrix& inv_root() const noexcept { return inv_root_; }
  [[nodiscard]] bool is_canonical() const noexcept { return canonical_; }

  /// Sigma^{-1/2}(x - mu)
  [[nodiscard]] Vector standardize(const Vector& x) const { return inv_root_ * (x - mu_); }

 private:
  Vector mu_;
  SymPosDefMatrix sigma_;
  Matrix root_;
  Matrix inv_root_;
  bool canonical_ = false;
};

struct MvNormal {
  LocationScale ls;
};

struct Cfusn {
  LocationScale ls;
  SkewnessMatrix delta;
};

struct Lcfusn {
  LocationScale ls;
  SkewnessMatrix delta;
};

using DistributionSpec = std::variant<Normal, LogNormal, SkewNormal, LogSkewNormal, MvNormal, Cfusn, Lcfusn>;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Construction helpers (validated)

inline Normal make_normal(double mu, double sigma) {
  detail::require_finite(mu, "mu");
  detail::require_positive(sigma, "sigma");
  return {mu, sigma};
}
inline LogNormal make_lognormal(double mu, double sigma) {
  detail::require_finite(mu, "mu");
  detail::require_positive(sigma, "sigma");
  return {mu, sigma};
}
inline SkewNormal make_skew_normal(double mu, double sigma, double alpha) {
  detail::require_finite(mu, "mu");
  detail::require_positive(sigma, "sigma");
  detail::require_finite(alpha, "alpha");
  return {mu, sigma, alpha};
}
inline LogSkewNormal make_log_skew_normal(double mu, double sigma, double alpha) {
  detail::require_finite(mu, "mu");
  detail::require_positive(sigma, "sigma");
  detail::require_finite(alpha, "alpha");
  return {mu, sigma, alpha};
}

inline Cfusn make_cfusn(const Vector& mu, const Matrix& sigma, const Matrix& delta) {
  auto ls = LocationScale::create(mu, sigma);
  auto d = SkewnessMatrix::create(delta);
  if (d.rows() != ls.dim())
    throw Error(ErrorKind::DimensionMismatch, "Delta has " + std::to_string(d.rows()) + " rows but mu has length " +
                                                  std::to_string(ls.dim()));
  return {std::move(ls), std::move(d)};
}

inline Lcfusn make_lcfusn(const Vector& mu, const Matrix& sigma, const Matrix& delta) {
  auto c = make_cfusn(mu, sigma, delta);
  return {std::move(c.ls), std::move(c.delta)};
}

inline Cfusn make_canonical_cfusn(const Matrix& delta) {
  const auto n = delta.rows();
  return make_cfusn(Vector::Zero(n), Matrix::Identity(n, n), delta);
}

/// SN(mu, sigma, alpha) as CFUSN_{1,1}(mu, sigma^2, delta).
inline Cfusn to_cfusn(const SkewNormal& sn) {
  return make_cfusn(make_vector({sn.mu}), Matrix::Constant(1, 1, sn.sigma * sn.sigma),
                    Matrix::Constant(1, 1, alpha_to_delta(sn.alpha)));
}

/// CFUSN_{1,1} back to SN; any other shape is Unsupported.
inline SkewNormal to_skew_normal(const Cfusn& c) {
  if (c.ls.dim() != 1 || c.delta.cols() != 1)
    throw Error(ErrorKind::Unsupported, "only CFUSN_{1,1} maps onto a univariate skew-normal");
  return make_skew_normal(c.ls.mu()(0), std::sqrt(c.ls.sigma().matrix()(0, 0)),
                          delta_to_alpha(c.delta.matrix()(0, 0)));
}

// ---------------------------------------------------------------------------
// Queries

inline std::string_view family_name(const DistributionSpec& spec) {
  return std::visit(Overloaded{[](const Normal&) { return std::string_view("normal"); },
                               [](const LogNormal&) { return std::string_view("lognormal"); },
                               [](const SkewNormal&) { return std::string_view("sn"); },
                               [](const LogSkewNormal&) { return std::string_view("lsn"); },
                               [](const MvNormal&) { return std::string_view("mvnormal"); },
                               [](const Cfusn&) { return std::string_view("cfusn"); },
                               [](const Lcfusn&) { return std::string_view("lcfusn"); }},
                    spec);
}

inline std::size_t dimension(const DistributionSpec& spec) {
  return std::visit(Overloaded{[](const MvNormal& d) { return d.ls.dim(); },
                               [](const Cfusn& d) { return d.ls.dim(); },
                               [](const Lcfusn& d) { return d.ls.dim(); },
                               [](const auto&) { return std::size_t{1}; }},
                    spec);
}

/// Column count m of the skewness matrix; 1 for SN/LSN, 0 for symmetric families.
inline std::size_t skew_dimension(const DistributionSpec& spec) {
  return std::visit(Overloaded{[](const Cfusn& d) { return d.delta.cols(); },
                               [](const Lcfusn& d) { return d.delta.cols(); },
                               [](const SkewNormal&) { return std::size_t{1}; },
                               [](const LogSkewNormal&) { return std::size_t{1}; },
                               [](const auto&) { return std::size_t{0}; }},
                    spec);
}

/// LogNormal, LSN and LCFUSN live on the positive orthant.
inline bool positive_support(const DistributionSpec& spec) {
  return std::holds_alternative<LogNormal>(spec) || std::holds_alternative<LogSkewNormal>(spec) ||
         std::holds_alternative<Lcfusn>(spec);
}

// ---------------------------------------------------------------------------
// Log-density

namespace detail {

inline double normal_log_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std_normal_log_pdf(z) - std::log(sigma);
}

inline double skew_normal_log_pdf(double x, double mu, double sigma, double alpha) {
  const double z = (x - mu) / sigma;
  return kLn2 - std::log(sigma) + std_normal_log_pdf(z) + log_std_normal_cdf(alpha * z);
}

inline double cfusn_log_pdf(const LocationScale& ls, const SkewnessMatrix& delta, const Vector& w) {
  const Vector z = ls.standardize(w);
  const double m = static_cast<double>(delta.cols());
  const double n = static_cast<double>(ls.dim());
  return m * kLn2 - 0.5 * ls.sigma().logdet() - 0.5 * (n * kLog2Pi + z.squaredNorm()) +
         delta.log_skew_cdf(z).log_value;
}

inline double mvnormal_log_pdf(const LocationScale& ls, const Vector& w) {
  const Vector z = ls.standardize(w);
  const double n = static_cast<double>(ls.dim());
  return -0.5 * ls.sigma().logdet() - 0.5 * (n * kLog2Pi + z.squaredNorm());
}

/// Positive-orthant check. -inf on the boundary, OutOfSupport below it.
inline std::optional<double> log_support_check(const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isnan(x(i))) throw Error(ErrorKind::InvalidParameter, "evaluation point contains NaN");
    if (x(i) < 0.0)
      throw Error(ErrorKind::OutOfSupport, "coordinate " + std::to_string(i) + " is negative; support is (0, inf)");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) == 0.0) return -kInf;
  return std::nullopt;
}

}  // namespace detail

inline double log_pdf(const DistributionSpec& spec, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != dimension(spec))
    throw Error(ErrorKind::DimensionMismatch, "point has length " + std::to_string(x.size()) + ", distribution is " +
                                                  std::to_string(dimension(spec)) + "-dimensional");
  if (positive_support(spec)) {
    if (auto boundary = detail::log_support_check(x)) return *boundary;
  }
  return std::visit(
      Overloaded{
          [&](const Normal& d) { return detail::normal_log_pdf(x(0), d.mu, d.sigma); },
          [&](const LogNormal& d) { return detail::normal_log_pdf(std::log(x(0)), d.mu, d.sigma) - std::log(x(0)); },
          [&](const SkewNormal& d) { return detail::skew_normal_log_pdf(x(0), d.mu, d.sigma, d.alpha); },
          [&](const LogSkewNormal& d) {
            const double lx = std::log(x(0));
            return detail::skew_normal_log_pdf(lx, d.mu, d.sigma, d.alpha) - lx;
          },
          [&](const MvNormal& d) { return detail::mvnormal_log_pdf(d.ls, x); },
          [&](const Cfusn& d) { return detail::cfusn_log_pdf(d.ls, d.delta, x); },
          [&](const Lcfusn& d) {
            const Vector lx = x.array().log().matrix();
            return detail::cfusn_log_pdf(d.ls, d.delta, lx) - lx.sum();
          }},
      spec);
}

inline double log_pdf(const DistributionSpec& spec, double x) { return log_pdf(spec, make_vector({x})); }

// ---------------------------------------------------------------------------
// Sampling

/// One draw as an n-vector.
inline Vector sample_one(const DistributionSpec& spec, RandomStream& rs) {
  return std::visit(
      Overloaded{[&](const Normal& d) { return make_vector({d.mu + d.sigma * rs.normal()}); },
                 [&](const LogNormal& d) { return make_vector({std::exp(d.mu + d.sigma * rs.normal())}); },
                 [&](const SkewNormal& d) {
                   const double delta = alpha_to_delta(d.alpha);
                   const double u = std::abs(rs.normal());
                   const double v = rs.normal();
                   return make_vector({d.mu + d.sigma * (delta * u + v / std::hypot(1.0, d.alpha))});
                 },
                 [&](const LogSkewNormal& d) {
                   const double delta = alpha_to_delta(d.alpha);
                   const double u = std::abs(rs.normal());
                   const double v = rs.normal();
                   return make_vector({std::exp(d.mu + d.sigma * (delta * u + v / std::hypot(1.0, d.alpha)))});
                 },
                 [&](const MvNormal& d) { return mvn_sample(rs, d.ls.mu(), d.ls.root()); },
                 [&](const Cfusn& d) { return Vector(d.ls.mu() + d.ls.root() * d.delta.draw_canonical(rs)); },
                 [&](const Lcfusn& d) {
                   return Vector((d.ls.mu() + d.ls.root() * d.delta.draw_canonical(rs)).array().exp().matrix());
                 }},
      spec);
}

/// count x n matrix of i.i.d. draws.
inline Matrix sample(const DistributionSpec& spec, RandomStream& rs, std::size_t count) {
  if (count == 0) throw Error(ErrorKind::InvalidParameter, "sample count must be positive");
  const auto n = static_cast<Eigen::Index>(dimension(spec));
  Matrix out(static_cast<Eigen::Index>(count), n);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = sample_one(spec, rs).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Moments (closed form; log families are Unsupported)

inline Vector mean(const DistributionSpec& spec) {
  return std::visit(
      Overloaded{[](const Normal& d) { return make_vector({d.mu}); },
                 [](const SkewNormal& d) { return make_vector({d.mu + d.sigma * kSqrt2OverPi * alpha_to_delta(d.alpha)}); },
                 [](const MvNormal& d) { return d.ls.mu(); },
                 [](const Cfusn& d) {
                   const Vector ones = Vector::Ones(static_cast<Eigen::Index>(d.delta.cols()));
                   return Vector(d.ls.mu() + kSqrt2OverPi * d.ls.root() * (d.delta.matrix() * ones));
                 },
                 [](const auto&) -> Vector {
                   throw Error(ErrorKind::Unsupported, "closed-form mean is not available for log families");
                 }},
      spec);
}

inline Matrix variance(const DistributionSpec& spec) {
  return std::visit(
      Overloaded{[](const Normal& d) { return Matrix(Matrix::Constant(1, 1, d.sigma * d.sigma)); },
                 [](const SkewNormal& d) {
                   const double delta = alpha_to_delta(d.alpha);
                   return Matrix(Matrix::Constant(1, 1, d.sigma * d.sigma * (1.0 - 2.0 * delta * delta / std::numbers::pi)));
                 },
                 [](const MvNormal& d) { return d.ls.sigma().matrix(); },
                 [](const Cfusn& d) {
                   const Matrix sd = d.ls.root() * d.delta.matrix();
                   return Matrix(d.ls.sigma().matrix() - (2.0 / std::numbers::pi) * sd * sd.transpose());
                 },
                 [](const auto&) -> Matrix {
                   throw Error(ErrorKind::Unsupported, "closed-form variance is not available for log families");
                 }},
      spec);
}

// ---------------------------------------------------------------------------
// Partitions and marginals

/// Split of an n-vector into a leading block of n1 and a trailing block of n2.
class Partition {
 public:
  static Partition create(std::size_t n, std::size_t n1) {
    if (n1 == 0 || n1 >= n)
      throw Error(ErrorKind::InvalidPartition, "partition needs 1 <= n1 < n, got n1=" + std::to_string(n1) +
                                                   " for n=" + std::to_string(n));
    return Partition(n1, n - n1);
  }

  [[nodiscard]] std::size_t n1() const noexcept { return n1_; }
  [[nodiscard]] std::size_t n2() const noexcept { return n2_; }
  [[nodiscard]] std::size_t n() const noexcept { return n1_ + n2_; }
  /// First index of block 1 or 2.
  [[nodiscard]] std::size_t offset(int which) const { return which == 1 ? 0 : n1_; }
  [[nodiscard]] std::size_t size(int which) const { return which == 1 ? n1_ : n2_; }

  [[nodiscard]] Vector block(const Vector& x, int which) const {
    return x.segment(static_cast<Eigen::Index>(offset(which)), static_cast<Eigen::Index>(size(which)));
  }

 private:
  Partition(std::size_t n1, std::size_t n2) : n1_(n1), n2_(n2) {}
  std::size_t n1_;
  std::size_t n2_;
};

namespace detail {
template <class Family>
Family marginal_block(const Family& d, const Partition& part, int which) {
  if (which != 1 && which != 2) throw Error(ErrorKind::InvalidPartition, "block selector must be 1 or 2");
  if (part.n() != d.ls.dim())
    throw Error(ErrorKind::InvalidPartition, "partition covers " + std::to_string(part.n()) +
                                                 " coordinates, distribution has " + std::to_string(d.ls.dim()));
  if (!d.ls.sigma().is_diagonal())
    throw Error(ErrorKind::Unsupported,
                "marginals are only available when Sigma is diagonal (canonical case included)");
  const auto off = static_cast<Eigen::Index>(part.offset(which));
  const auto k = static_cast<Eigen::Index>(part.size(which));
  Vector mu = d.ls.mu().segment(off, k);
  Matrix sigma = d.ls.sigma().matrix().block(off, off, k, k);
  return Family{LocationScale::create(mu, sigma), d.delta.row_block(part.offset(which), part.size(which))};
}
}  // namespace detail

/// Marginal law of block `which` (1 or 2). The skew dimension m is kept.
inline DistributionSpec marginal(const DistributionSpec& spec, const Partition& part, int which) {
  if (const auto* c = std::get_if<Cfusn>(&spec)) return detail::marginal_block(*c, part, which);
  if (const auto* l = std::get_if<Lcfusn>(&spec)) return detail::marginal_block(*l, part, which);
  throw Error(ErrorKind::Unsupported, "marginal() applies to CFUSN and LCFUSN only");
}

}  // namespace skewent

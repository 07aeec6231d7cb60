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

// Mutual information between the two blocks of a canonical LCFUSN vector and
// relative entropy between LCFUSN and the multivariate log-skew-normal.

#include <cmath>
#include <string>

#include "skewent/distributions.hpp"
#include "skewent/entropy.hpp"
#include "skewent/error.hpp"
#include "skewent/numerics.hpp"
#include "skewent/rng.hpp"

namespace skewent {

// ---------------------------------------------------------------------------
// Multivariate log-skew-normal LSN_n(mu, Sigma, alpha)

/// Density at w > 0:
///   2 (prod w)^{-1} |Sigma|^{-1/2} phi_n(Sigma^{-1/2}(ln w - mu)) Phi(alpha' omega^{-1}(ln w - mu))
/// with omega = diag(Sigma)^{1/2}.
class LsnSpec {
 public:
  static LsnSpec create(const Vector& mu, const Matrix& sigma, const Vector& alpha) {
    LsnSpec out;
    out.ls_ = LocationScale::create(mu, sigma);
    if (alpha.size() != mu.size())
      throw Error(ErrorKind::DimensionMismatch, "alpha must have " + std::to_string(mu.size()) + " entries");
    if (!alpha.allFinite()) throw Error(ErrorKind::InvalidParameter, "alpha has non-finite entries");
    out.alpha_ = alpha;
    out.omega_ = out.ls_.sigma().matrix().diagonal().cwiseSqrt();
    out.slant_ = out.alpha_.cwiseQuotient(out.omega_);
    return out;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return ls_.dim(); }
  [[nodiscard]] const LocationScale& ls() const noexcept { return ls_; }
  [[nodiscard]] const Vector& mu() const noexcept { return ls_.mu(); }
  [[nodiscard]] const SymPosDefMatrix& sigma() const noexcept { return ls_.sigma(); }
  [[nodiscard]] const Vector& alpha() const noexcept { return alpha_; }
  /// Diagonal of omega.
  [[nodiscard]] const Vector& omega() const noexcept { return omega_; }

  /// lambda = Sigma^{1/2} omega^{-1} alpha, the slant in standardized coordinates.
  [[nodiscard]] Vector lambda() const { return ls_.root() * slant_; }

  /// omega^{-1} alpha
  [[nodiscard]] const Vector& slant() const noexcept { return slant_; }

  /// The same law written as LCFUSN_{n,1}(mu, Sigma, lambda / sqrt(1 + lambda'lambda)).
  [[nodiscard]] Lcfusn as_lcfusn() const {
    const Vector lam = lambda();
    Matrix d = lam / std::sqrt(1.0 + lam.squaredNorm());
    return Lcfusn{ls_, SkewnessMatrix::create(d)};
  }

 private:
  LocationScale ls_;
  Vector alpha_;
  Vector omega_;
  Vector slant_;
};

inline double log_pdf(const LsnSpec& y, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != y.dim())
    throw Error(ErrorKind::DimensionMismatch, "point has " + std::to_string(w.size()) + " coordinates, expected " +
                                                  std::to_string(y.dim()));
  if (auto edge = detail::log_support_check(w)) return *edge;
  const Vector x = w.array().log().matrix();
  const Vector c = x - y.mu();
  const Vector z = y.ls().inv_root() * c;
  const double n = static_cast<double>(y.dim());
  return kLn2 - x.sum() - 0.5 * y.sigma().logdet() - 0.5 * (n * kLog2Pi + z.squaredNorm()) +
         log_std_normal_cdf(y.slant().dot(c));
}

inline Vector sample_one(const LsnSpec& y, RandomStream& rs) { return sample_one(y.as_lcfusn(), rs); }

/// omega Sigma^{-1/2} Delta / sqrt(1 - Delta'Delta): the alpha for which
/// LSN_n(mu, Sigma, alpha) and LCFUSN_{n,1}(mu, Sigma, Delta) coincide.
inline Vector matching_lsn_alpha(const LocationScale& ls, const SkewnessMatrix& delta) {
  if (delta.cols() != 1) throw Error(ErrorKind::Unsupported, "the matching alpha exists only for m = 1");
  const Vector d = delta.matrix().col(0);
  const Vector omega = ls.sigma().matrix().diagonal().cwiseSqrt();
  const Vector lam = d / std::sqrt(delta.delta_star().matrix()(0, 0));
  return omega.cwiseProduct(ls.inv_root() * lam);
}

// ---------------------------------------------------------------------------
// Mutual information

/// True when each column of Delta is zero on at least one of the two blocks.
/// The CFUSN density then splits into a product over the blocks, so the
/// blocks are independent.
inline bool columns_separate(const Matrix& delta, const Partition& part) {
  const auto n1 = static_cast<Eigen::Index>(part.n1());
  const auto n2 = static_cast<Eigen::Index>(part.n2());
  for (Eigen::Index j = 0; j < delta.cols(); ++j) {
    const bool in1 = !delta.col(j).head(n1).isZero(0.0);
    const bool in2 = !delta.col(j).tail(n2).isZero(0.0);
    if (in1 && in2) return false;
  }
  return true;
}

/// Which block's marginal term is added first. The per-sample summand is
/// symmetric in the two blocks, so both orders give identical results.
enum class BlockOrder { FirstSecond, SecondFirst };

/// I(X1; X2) for X ~ CFUSN_{n,m}(Delta) (equivalently the canonical LCFUSN,
/// since the exponential acts coordinatewise):
///   E[ ln Phi_m(Delta'X | Delta*) - m ln 2 - ln Phi_m(Delta_1'X_1 | I - Delta_1'Delta_1)
///                                          - ln Phi_m(Delta_2'X_2 | I - Delta_2'Delta_2) ].
/// closed_form_part holds -m ln 2.
inline McEstimate mutual_information(const SkewnessMatrix& delta, const Partition& part, const RngStream& stream,
                                     const McOptions& options = {}, BlockOrder order = BlockOrder::FirstSecond) {
  detail::require_samples(options);
  if (part.n() != delta.rows())
    throw Error(ErrorKind::InvalidPartition, "partition covers " + std::to_string(part.n()) +
                                                 " coordinates, Delta has " + std::to_string(delta.rows()) + " rows");
  const double m = static_cast<double>(delta.cols());
  if (columns_separate(delta.matrix(), part)) {
    // every skewing direction touches only one block: the density factorizes
    McEstimate zero;
    zero.n_samples = options.n_samples;
    zero.closed_form_part = -m * kLn2;
    zero.mc_part = m * kLn2;
    return zero;
  }
  const SkewnessMatrix d1 = delta.row_block(part.offset(1), part.size(1));
  const SkewnessMatrix d2 = delta.row_block(part.offset(2), part.size(2));
  auto terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
    const Vector x = delta.draw_canonical(rs);
    const auto joint = delta.log_skew_cdf(x);
    const auto a = d1.log_skew_cdf(part.block(x, 1));
    const auto b = d2.log_skew_cdf(part.block(x, 2));
    const double margins = order == BlockOrder::FirstSecond ? a.log_value + b.log_value : b.log_value + a.log_value;
    double bias = 0.0;
    for (const auto* r : {&joint, &a, &b})
      if (r->error_bound > 0.0) bias += r->error_bound / std::exp(r->log_value);
    return detail::LogTerm{joint.log_value - margins, bias};
  });
  McEstimate out = detail::summarize_terms(terms);
  out.closed_form_part = -m * kLn2;
  out.value = out.closed_form_part + out.mc_part;
  return out;
}

/// Mutual information of a CFUSN / LCFUSN spec. Coordinatewise affine maps
/// leave it unchanged, so any diagonal Sigma reduces to the canonical case.
inline McEstimate mutual_information(const DistributionSpec& spec, const Partition& part, const RngStream& stream,
                                     const McOptions& options = {}) {
  const SkewnessMatrix* delta = nullptr;
  const LocationScale* ls = nullptr;
  if (const auto* c = std::get_if<Cfusn>(&spec)) {
    delta = &c->delta;
    ls = &c->ls;
  } else if (const auto* l = std::get_if<Lcfusn>(&spec)) {
    delta = &l->delta;
    ls = &l->ls;
  } else {
    throw Error(ErrorKind::Unsupported, "mutual information is implemented for CFUSN and LCFUSN");
  }
  if (!ls->sigma().is_diagonal())
    throw Error(ErrorKind::Unsupported, "mutual information needs a diagonal Sigma (canonical LCFUSN)");
  return mutual_information(*delta, part, stream, options);
}

// ---------------------------------------------------------------------------
// Relative entropy

enum class KlDirection {
  /// D(f_Z || f_Y): expectation under the LCFUSN law Z.
  LcfusnToLsn,
  /// D(f_Y || f_Z): expectation under the LSN law Y.
  LsnToLcfusn,
};

namespace detail {
struct LogTermPair {
  double z;
  double y;
  double bias;
};

inline bool same_location_scale(const LocationScale& a, const LocationScale& b) {
  if (a.dim() != b.dim()) return false;
  const double scale = std::max(1.0, a.sigma().matrix().cwiseAbs().maxCoeff());
  return (a.mu() - b.mu()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, a.mu().cwiseAbs().maxCoeff()) &&
         (a.sigma().matrix() - b.sigma().matrix()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}
}  // namespace detail

/// Relative entropy between Z ~ LCFUSN_{n,m}(mu, Sigma, Delta) and
/// Y ~ LSN_n(mu, Sigma, alpha). With lambda = Sigma^{1/2} omega^{-1} alpha,
///   D(f_Z||f_Y) = E_{X0 ~ CFUSN(Delta)}[ln 2^m Phi_m(Delta'X0|Delta*) - ln 2 Phi(lambda'X0)]
/// and the reverse direction averages the negated summand under
/// X0 ~ CFUSN_{n,1}(lambda / sqrt(1 + lambda'lambda)).
inline McEstimate kl_lcfusn_vs_lsn(const Lcfusn& z, const LsnSpec& y, const RngStream& stream,
                                   const McOptions& options = {},
                                   KlDirection direction = KlDirection::LcfusnToLsn) {
  detail::require_samples(options);
  if (!detail::same_location_scale(z.ls, y.ls()))
    throw Error(ErrorKind::MismatchedLocationScale,
                "LCFUSN and LSN must share mu and Sigma for this divergence; use kl_direct otherwise");
  const Vector lam = y.lambda();
  const SkewnessMatrix& delta = z.delta;
  const double m = static_cast<double>(delta.cols());
  auto summand = [&](const Vector& x0) {
    const auto skew = delta.log_skew_cdf(x0);
    const double bias = skew.error_bound > 0.0 ? skew.error_bound / std::exp(skew.log_value) : 0.0;
    return detail::LogTermPair{m * kLn2 + skew.log_value, kLn2 + log_std_normal_cdf(lam.dot(x0)), bias};
  };
  std::vector<detail::LogTerm> terms;
  if (direction == KlDirection::LcfusnToLsn) {
    terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
      const auto t = summand(delta.draw_canonical(rs));
      return detail::LogTerm{t.z - t.y, t.bias};
    });
  } else {
    const SkewnessMatrix lsn_delta = SkewnessMatrix::create(Matrix(lam / std::sqrt(1.0 + lam.squaredNorm())));
    terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
      const auto t = summand(lsn_delta.draw_canonical(rs));
      return detail::LogTerm{t.y - t.z, t.bias};
    });
  }
  return detail::summarize_terms(terms);
}

/// D(f || g) = E_f[ln f(X) - ln g(X)] straight from the two log-densities.
/// Works for any pair with log_pdf / sample_one overloads.
template <class F, class G>
McEstimate kl_direct(const F& f, const G& g, const RngStream& stream, const McOptions& options = {}) {
  detail::require_samples(options);
  auto terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
    const Vector x = sample_one(f, rs);
    const double lf = log_pdf(f, x);
    const double lg = log_pdf(g, x);
    if (std::isinf(lg) && lg < 0.0 && std::isfinite(lf))
      throw Error(ErrorKind::SupportMismatch, "g vanishes where f has mass; the divergence is infinite");
    return detail::LogTerm{lf - lg, 0.0};
  });
  return detail::summarize_terms(terms);
}

}  // namespace skewent

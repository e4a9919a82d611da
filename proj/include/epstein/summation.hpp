#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "epstein/lattice.hpp"
#include "epstein/special_functions.hpp"

namespace epstein {

struct SummationResult {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms_used = 0;
};

/// Compensated (Neumaier) accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Upper bound on the number of lattice points (zero included) in a closed ball:
/// the packing count (1 + 2r/lambda)^rank, tightened by the volume of the ball
/// of radius r + rho when det and the covering radius rho of a fundamental cell are known.
struct PointCounter {
  double lambda = 1.0;
  Index rank = 0;
  double det = 0.0;
  double rho = 0.0;

  PointCounter(double lambda_, Index rank_) : lambda(lambda_), rank(rank_) {}
  explicit PointCounter(const VectorEnumerator& en) : lambda(lambda1(en)), rank(en.rank()), det(en.det()) {
    rho = 0.5 * std::sqrt(en.gs_norms_sq().sum());
  }

  double operator()(double r) const {
    if (r < lambda) return 1.0;
    const double k = static_cast<double>(rank);
    const double packing = std::pow(1.0 + 2.0 * r / lambda, k);
    if (!(det > 0.0)) return packing;
    const double volume =
        std::exp(0.5 * k * std::log(std::numbers::pi) + k * std::log(r + rho) - std::lgamma(0.5 * k + 1.0) - std::log(det));
    return std::max(1.0, std::min(packing, volume));
  }
};

inline double point_count_bound(double r, double lambda, Index rank) { return PointCounter(lambda, rank)(r); }

/// Upper bound on the sum of f(|y|) over lattice points with |y| > r0, for f
/// nonnegative and nonincreasing on [r0, inf). count_r0 is a lower bound on the
/// number of points with |y| <= r0 (zero counts). Abel summation over shells
/// whose width keeps f within a factor 4 across each shell.
inline double radial_tail_bound(const std::function<double(double)>& f, double r0, double count_r0,
                                const PointCounter& count) {
  const double lambda = count.lambda;
  if (count.rank == 0) return 0.0;
  double r = r0;
  double fr = f(r);
  if (!(fr > 0.0)) return 0.0;
  double total = -count_r0 * fr;
  double h = std::max(lambda, r0) / 8.0;
  for (int k = 0; k < 200000; ++k) {
    while (h > 1e-9 * std::max(lambda, r) && f(r + h) < 0.25 * fr) h *= 0.5;
    while (h < 1e6 * std::max(lambda, r) && f(r + 2.0 * h) >= 0.25 * fr) h *= 2.0;
    const double rn = r + h;
    const double fn = f(rn);
    const double nb = count(rn);
    total += nb * (fr - fn);
    r = rn;
    fr = fn;
    const double env = count(r + h) * fr;
    if (fr == 0.0 || env <= 1e-10 * std::max(total, std::numeric_limits<double>::min()))
      return std::max(total + 2.0 * env, 0.0);
  }
  throw Error(ErrorKind::tolerance, "tail bound did not converge");
}

/// Radius r >= start, within 1% of the smallest found, with radial_tail_bound(f, r, 0, count) <= target.
inline double tail_radius(const std::function<double(double)>& f, double start, double target,
                          const PointCounter& count, const char* what) {
  auto ok = [&](double r) { return radial_tail_bound(f, r, 0.0, count) <= target; };
  double hi = start;
  for (int it = 0; !ok(hi); ++it) {
    if (it > 80) throw Error(ErrorKind::tolerance, what);
    hi *= std::sqrt(2.0);
  }
  if (hi == start) return hi;
  double lo = hi / std::sqrt(2.0);
  while (hi - lo > 0.01 * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

namespace detail {

inline double gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

/// int_0^t0 tau^(a-1) exp(-pi q tau) dtau, a > 0.
inline double lower_mellin(double a, double q, double t0) {
  if (q <= 0.0) return std::pow(t0, a) / a;
  const double x = std::numbers::pi * q * t0;
  return std::pow(t0, a) * boost::math::tgamma_lower(a, x) / std::pow(x, a);
}

inline void check_zeta_args(const LatticeBasis& b, double s, double q, double rel_tol, int weight_degree = 0) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw Error(ErrorKind::domain, "q must be >= 0");
  if (!(s > 0.5 * b.rank() + weight_degree)) throw Error(ErrorKind::divergence, "s must exceed rank/2");
  if (!(rel_tol > 0.0)) throw Error(ErrorKind::domain, "rel_tol must be > 0");
}

}  // namespace detail

/// Weight w(z) = (z^T form z)^power on ambient vectors, power in {0, 1, 2}.
struct QuadraticWeight {
  MatrixXd form;
  int power = 0;
};

/// Sum over z in L \ {0} of w(z) (|z|^2 + q)^(-sigma).
///
/// The summand is split with the Mellin integral at t0: the part with
/// tau > t0 is summed over L with incomplete-gamma damping, the part with
/// tau < t0 is replaced by its Gaussian-moment integral over span(L). The
/// discarded dual-lattice remainder and the primal truncation are both bounded.
inline SummationResult weighted_zeta_sum(const LatticeBasis& b, const QuadraticWeight& w, double sigma,
                                         double q, double rel_tol,
                                         std::size_t budget = kDefaultEnumerationBudget) {
  constexpr double pi = std::numbers::pi;
  const int p = w.power;
  if (p < 0 || p > 2) throw Error(ErrorKind::domain, "weight power must be 0, 1 or 2");
  detail::check_zeta_args(b, sigma, q, rel_tol, p);
  const Index n = b.rank();
  if (n == 0) return {};

  MatrixXd wf;
  if (p > 0) {
    if (w.form.rows() != b.ambient_dim() || w.form.cols() != b.ambient_dim())
      throw Error(ErrorKind::domain, "weight has the wrong shape");
    FramedBasis fb = full_rank_coordinates(b);
    wf = fb.frame.transpose() * (0.5 * (w.form + w.form.transpose())) * fb.frame;
  }
  double norm_w = 0.0, tr_w = 0.0, tr_w2 = 0.0;
  if (p > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(wf, Eigen::EigenvaluesOnly);
    norm_w = es.eigenvalues().cwiseAbs().maxCoeff();
    tr_w = es.eigenvalues().sum();
    tr_w2 = es.eigenvalues().squaredNorm();
  }

  VectorEnumerator primal(b, budget);
  VectorEnumerator dualen(dual(b), budget);
  const double det = primal.det();
  const PointCounter pc(primal);
  const PointCounter pcd(dualen);
  const double lam = pc.lambda;
  const double lam_d = pcd.lambda;
  const double hn = 0.5 * n;
  const double log_pref = sigma * std::log(pi) - std::lgamma(sigma);
  const double pref = std::exp(log_pref);

  const double wscale = p == 0 ? 1.0 : std::pow(norm_w * lam * lam, p);
  if (p > 0 && wscale == 0.0) return {};
  const double target = rel_tol * 2.0 * wscale * std::pow(lam * lam + q, -sigma);

  // Dual-side remainder polynomial coefficients c_j(r) * t0^(sigma - n/2 - j).
  auto smooth_envelope = [&](double t0) {
    return [=](double r) {
      const double r2 = r * r;
      double poly = 0.0;
      const double a = sigma - hn;
      if (p == 0) {
        poly = std::pow(t0, a);
      } else if (p == 1) {
        poly = std::abs(tr_w) / (2.0 * pi) * std::pow(t0, a - 1) + norm_w * r2 * std::pow(t0, a - 2);
      } else {
        poly = (tr_w * tr_w + 2.0 * tr_w2) / (4.0 * pi * pi) * std::pow(t0, a - 2) +
               (2.0 * std::abs(tr_w) * norm_w + 4.0 * norm_w * norm_w) * r2 / (2.0 * pi) * std::pow(t0, a - 3) +
               norm_w * norm_w * r2 * r2 * std::pow(t0, a - 4);
      }
      return std::exp(-pi * r2 / t0) * poly;
    };
  };

  double split = std::max({12.0, std::log(1.0 / rel_tol) + 5.0, hn + 2.0 * p + 3.0});
  double t0 = 0.0, smooth_err = 0.0;
  for (int it = 0;; ++it) {
    t0 = pi * lam_d * lam_d / split;
    smooth_err = pref / det *
                 radial_tail_bound(smooth_envelope(t0), lam_d * (1.0 - 1e-12), 1.0, pcd);
    if (smooth_err <= 0.5 * target) break;
    if (it > 60) throw Error(ErrorKind::tolerance, "cannot meet the tolerance on the dual side");
    split += 4.0;
  }

  auto direct_term = [&](double r2) {
    return std::pow(r2 + q, -sigma) * detail::gamma_q(sigma, pi * t0 * (r2 + q));
  };
  auto direct_envelope = [&](double r) {
    const double r2 = r * r;
    return (p == 0 ? 1.0 : std::pow(norm_w * r2, p)) * direct_term(r2);
  };

  const double radius = tail_radius(direct_envelope, std::sqrt(split / (pi * t0)), 0.5 * target, pc,
                                   "cannot meet the tolerance on the primal side");

  KahanSum acc;
  std::size_t count = 0;
  primal.for_each(radius, [&](std::span<const std::int64_t> x, double r2) {
    double wt = 1.0;
    if (p > 0) {
      const VectorXd z = primal.embed(x);
      const double zw = z.dot(w.form * z);
      wt = p == 1 ? zw : zw * zw;
    }
    acc.add(wt * direct_term(r2));
    ++count;
  });
  const double direct_tail = radial_tail_bound(direct_envelope, radius, static_cast<double>(count + 1), pc);

  const double a = sigma - hn - p;
  double moment = 1.0;
  if (p == 1) moment = tr_w / (2.0 * pi);
  if (p == 2) moment = (tr_w * tr_w + 2.0 * tr_w2) / (4.0 * pi * pi);
  double smooth = pref * moment / det * detail::lower_mellin(a, q, t0);
  if (p == 0) smooth -= pref * detail::lower_mellin(sigma, q, t0);

  SummationResult r;
  r.value = acc.value() + smooth;
  r.tail_bound = direct_tail + smooth_err;
  r.terms_used = count;
  return r;
}

/// zeta'_q(L, s) = sum over y in L \ {0} of (|y|^2 + q)^(-s).
inline SummationResult zeta_prime_direct(const LatticeBasis& b, double s, double q = 0.0,
                                         double rel_tol = 1e-12,
                                         std::size_t budget = kDefaultEnumerationBudget) {
  detail::check_zeta_args(b, s, q, rel_tol);
  return weighted_zeta_sum(b, QuadraticWeight{}, s, q, rel_tol, budget);
}

/// zeta_q(L, s) = zeta'_q(L, s) + q^(-s), q > 0.
inline SummationResult zeta_q(const LatticeBasis& b, double s, double q, double rel_tol = 1e-12,
                              std::size_t budget = kDefaultEnumerationBudget) {
  detail::check_zeta_args(b, s, q, rel_tol);
  if (!(q > 0.0)) throw Error(ErrorKind::domain, "zeta_q needs q > 0");
  SummationResult r = zeta_prime_direct(b, s, q, rel_tol, budget);
  r.value += std::pow(q, -s);
  r.terms_used += 1;
  return r;
}

/// Dual-lattice Bessel series for zeta_q, reusable across (sigma, q) with q >= q_min
/// and sigma - rank/2 <= alpha_max.
class PsfSeries {
 public:
  PsfSeries(const LatticeBasis& b, double alpha_max, double q_min, double rel_tol,
            std::size_t budget = kDefaultEnumerationBudget)
      : rank_(b.rank()) {
    if (!(q_min > 0.0)) throw Error(ErrorKind::domain, "the Bessel series needs q > 0");
    if (rank_ == 0) return;
    if (!(alpha_max > 0.0)) throw Error(ErrorKind::domain, "s must exceed rank/2");
    VectorEnumerator en(dual(b), budget);
    det_ = determinant(b);
    count_ = PointCounter(en);
    lam_d_ = count_.lambda;
    const double sq = std::sqrt(q_min);
    auto env = [&](double r) {
      return detail::kbar_unchecked(alpha_max, 2.0 * std::numbers::pi * sq * r) / std::tgamma(alpha_max);
    };
    radius_ = tail_radius(env, lam_d_, 0.1 * rel_tol, count_, "Bessel series tail does not converge");
    en.for_each(radius_, [&](std::span<const std::int64_t>, double r2) { norms_.push_back(std::sqrt(r2)); });
    std::sort(norms_.begin(), norms_.end());
  }

  /// zeta_q(L, sigma) with the zero dual vector's term included.
  SummationResult evaluate(double sigma, double q) const {
    constexpr double pi = std::numbers::pi;
    if (rank_ == 0) return {std::pow(q, -sigma), 0.0, 0};
    const double hn = 0.5 * rank_;
    const double alpha = sigma - hn;
    if (!(alpha > 0.0)) throw Error(ErrorKind::domain, "s must exceed rank/2");
    const double log_pref = hn * std::log(pi) + (hn - sigma) * std::log(q) - std::lgamma(sigma) - std::log(det_);
    const double sq = std::sqrt(q);
    KahanSum acc;
    for (auto it = norms_.rbegin(); it != norms_.rend(); ++it)
      acc.add(detail::kbar_unchecked(alpha, 2.0 * pi * sq * *it));
    acc.add(std::tgamma(alpha));
    auto env = [&](double r) { return detail::kbar_unchecked(alpha, 2.0 * pi * sq * r); };
    const double tail = radial_tail_bound(env, radius_, static_cast<double>(norms_.size() + 1), count_);
    const double pref = std::exp(log_pref);
    return {pref * acc.value(), pref * tail, norms_.size() + 1};
  }

  /// Sum over nonzero dual vectors of Kbar_alpha / Gamma(alpha), plus its tail bound.
  double nonzero_ratio(double alpha, double q) const {
    if (rank_ == 0) return 0.0;
    const double sq = std::sqrt(q);
    KahanSum acc;
    for (auto it = norms_.rbegin(); it != norms_.rend(); ++it)
      acc.add(detail::kbar_unchecked(alpha, 2.0 * std::numbers::pi * sq * *it));
    auto env = [&](double r) { return detail::kbar_unchecked(alpha, 2.0 * std::numbers::pi * sq * r); };
    acc.add(radial_tail_bound(env, radius_, static_cast<double>(norms_.size() + 1), count_));
    return acc.value() / std::tgamma(alpha);
  }

  double det() const { return det_; }

 private:
  Index rank_;
  double det_ = 1.0;
  double lam_d_ = 0.0;
  PointCounter count_{1.0, 0};
  double radius_ = 0.0;
  std::vector<double> norms_;
};

inline SummationResult zeta_q_psf(const LatticeBasis& b, double s, double q, double rel_tol = 1e-12,
                                  std::size_t budget = kDefaultEnumerationBudget) {
  if (!(s > 0.5 * b.rank())) throw Error(ErrorKind::domain, "s must exceed rank/2");
  detail::check_zeta_args(b, s, q, rel_tol);
  if (!(q > 0.0)) throw Error(ErrorKind::domain, "zeta_q_psf needs q > 0");
  PsfSeries series(b, s - 0.5 * b.rank(), q, rel_tol, budget);
  return series.evaluate(s, q);
}

/// Theta(L, tau) for all tau >= tau_min from one cached list of norms.
class ThetaSeries {
 public:
  ThetaSeries(const LatticeBasis& b, double tau_min, double rel_tol,
              std::size_t budget = kDefaultEnumerationBudget)
      : rank_(b.rank()), tau_min_(tau_min) {
    if (!(tau_min > 0.0)) throw Error(ErrorKind::domain, "tau must be > 0");
    if (rank_ == 0) return;
    VectorEnumerator en(b, budget);
    count_ = PointCounter(en);
    lam_ = count_.lambda;
    auto env = [tau_min](double r) { return std::exp(-std::numbers::pi * tau_min * r * r); };
    radius_ = tail_radius(env, lam_, 0.5 * rel_tol, count_, "theta tail does not converge");
    en.for_each(radius_, [&](std::span<const std::int64_t>, double r2) { norms_sq_.push_back(r2); });
    std::sort(norms_sq_.begin(), norms_sq_.end());
    tail_ = radial_tail_bound(env, radius_, static_cast<double>(norms_sq_.size() + 1), count_);
  }

  double operator()(double tau) const {
    if (tau < tau_min_ * (1.0 - 1e-15)) throw Error(ErrorKind::domain, "tau below the cached range");
    KahanSum acc;
    for (auto it = norms_sq_.rbegin(); it != norms_sq_.rend(); ++it)
      acc.add(std::exp(-std::numbers::pi * tau * *it));
    acc.add(1.0);
    return acc.value();
  }

  /// Bound on the omitted terms, valid for every tau >= tau_min.
  double tail_bound() const { return tail_; }
  std::size_t terms() const { return norms_sq_.size() + 1; }

 private:
  Index rank_;
  double tau_min_;
  double lam_ = 0.0;
  PointCounter count_{1.0, 0};
  double radius_ = 0.0;
  double tail_ = 0.0;
  std::vector<double> norms_sq_;
};

inline SummationResult theta(const LatticeBasis& b, double tau, double rel_tol = 1e-12,
                             std::size_t budget = kDefaultEnumerationBudget) {
  if (!(tau > 0.0)) throw Error(ErrorKind::domain, "tau must be > 0");
  ThetaSeries t(b, tau, rel_tol, budget);
  return {t(tau), t.tail_bound(), t.terms()};
}

/// zeta_q by numerical Mellin quadrature of the theta function, split at tau = 1.
/// On (0, 1) theta is traded for the dual theta at 1/tau.
inline SummationResult zeta_from_theta_quadrature(const LatticeBasis& b, double s, double q,
                                                  double rel_tol = 1e-10,
                                                  std::size_t budget = kDefaultEnumerationBudget) {
  detail::check_zeta_args(b, s, q, rel_tol);
  if (!(q > 0.0)) throw Error(ErrorKind::domain, "quadrature needs q > 0");
  constexpr double pi = std::numbers::pi;
  const double a = s - 0.5 * b.rank();
  const double det = determinant(b);
  ThetaSeries th(b, 1.0, 1e-16, budget);
  ThetaSeries thd(dual(b), 1.0, 1e-16, budget);
  const double qtol = std::min(rel_tol * 1e-2, 1e-10);

  boost::math::quadrature::exp_sinh<double> es;
  boost::math::quadrature::tanh_sinh<double> ts;
  double e1 = 0, e2 = 0, e3 = 0;
  const double i1 = es.integrate(
      [&](double u) {
        const double tau = 1.0 + u;
        return std::exp((s - 1.0) * std::log(tau) - pi * q * tau) * th(tau);
      },
      qtol, &e1);
  const double i2 = ts.integrate(
      [&](double tau) { return std::exp((a - 1.0) * std::log(tau) - pi * q * tau); }, 0.0, 1.0, qtol, &e2);
  const double i3 = es.integrate(
      [&](double v) {
        const double u = 1.0 + v;
        return std::exp((-a - 1.0) * std::log(u) - pi * q / u) * (thd(u) - 1.0);
      },
      qtol, &e3);
  const double pref = std::exp(s * std::log(pi) - std::lgamma(s));
  // Theta tails enter through int_1^inf tau^(s-1) e^(-pi q tau) and int_1^inf u^(-a-1).
  const double w1 = std::exp(std::lgamma(s)) * std::pow(pi * q, -s);
  const double tails = th.tail_bound() * w1 + thd.tail_bound() / (a * det);
  SummationResult r;
  r.value = pref * (i1 + (i2 + i3) / det);
  r.tail_bound = pref * (std::abs(e1) + (std::abs(e2) + std::abs(e3)) / det + tails);
  r.terms_used = th.terms() + thd.terms();
  return r;
}

/// (pi tau / s)^(-s) zeta_q(L, s; s / (pi tau)) for each s, which tends to Theta(L, tau).
inline std::vector<double> theta_from_zeta_limit(const LatticeBasis& b, double tau, const std::vector<double>& s_list,
                                                 double rel_tol = 1e-13,
                                                 std::size_t budget = kDefaultEnumerationBudget) {
  if (!(tau > 0.0)) throw Error(ErrorKind::domain, "tau must be > 0");
  std::vector<double> out;
  const Index n = b.rank();
  if (n == 0) {
    out.assign(s_list.size(), 1.0);
    return out;
  }
  VectorEnumerator en(b, budget);
  const PointCounter pc(en);
  const double lam = pc.lambda;
  for (double s : s_list) {
    if (!(s > 0.5 * n)) throw Error(ErrorKind::domain, "s must exceed rank/2");
    const double qs = s / (std::numbers::pi * tau);
    auto f = [&](double r) { return std::exp(-s * std::log1p(r * r / qs)); };
    const double radius = tail_radius(f, lam, rel_tol, pc, "theta limit tail does not converge");
    KahanSum acc;
    std::vector<double> terms;
    en.for_each(radius, [&](std::span<const std::int64_t>, double r2) { terms.push_back(r2); });
    std::sort(terms.begin(), terms.end(), std::greater<>());
    for (double r2 : terms) acc.add(std::exp(-s * std::log1p(r2 / qs)));
    acc.add(1.0);
    out.push_back(acc.value());
  }
  return out;
}

}  // namespace epstein

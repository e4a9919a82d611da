#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "epstein/error.hpp"

namespace epstein {

inline constexpr double kBesselMaxOrder = 30.0;
inline constexpr double kBesselMaxArg = 50.0;

inline double gamma(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::domain, "gamma needs alpha > 0");
  const double g = std::tgamma(alpha);
  if (!std::isfinite(g)) throw Error(ErrorKind::range, "gamma overflows");
  return g;
}

namespace detail {

// 1/Gamma(1+x) = sum c[k] x^k, accurate to ~1e-17 for |x| <= 1/2.
inline constexpr std::array<double, 29> kRecipGammaTaylor = {
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
    1.1866922547516003326e-18,
    1.4123806553180317816e-18,
    -2.2987456844353702066e-19};

// Temme's auxiliaries for |mu| <= 1/2: gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu),
// gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2, gampl = 1/G(1+mu), gammi = 1/G(1-mu).
struct TemmeGammas {
  double gam1, gam2, gampl, gammi;
};

inline TemmeGammas temme_gammas(double mu) {
  const double m2 = mu * mu;
  double even = 0.0, odd = 0.0, p = 1.0;
  for (std::size_t k = 0; k + 1 < kRecipGammaTaylor.size(); k += 2) {
    even += kRecipGammaTaylor[k] * p;
    odd += kRecipGammaTaylor[k + 1] * p;
    p *= m2;
  }
  even += kRecipGammaTaylor.back() * p;
  return {-odd, even, even + mu * odd, even - mu * odd};
}

// e^x K_mu(x) and e^x K_{mu+1}(x) for |mu| <= 1/2, x > 0.
inline void bessel_k_pair_scaled(double mu, double x, double& k0, double& k1) {
  constexpr double eps = 1e-17;
  constexpr double pi = std::numbers::pi;
  if (x < 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = pi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    const double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    const double dd = x2 * x2;
    double sum1 = p;
    for (int i = 1; i < 500; ++i) {
      const double fi = i;
      ff = (fi * ff + p + q) / (fi * fi - mu * mu);
      c *= dd / fi;
      p /= fi - mu;
      q /= fi + mu;
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - fi * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    const double ex = std::exp(x);
    k0 = sum * ex;
    k1 = sum1 * (2.0 / x) * ex;
  } else {
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu * mu;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 100000; ++i) {
      a -= 2.0 * (i - 1);
      c = -a * c / i;
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    k0 = std::sqrt(pi / (2.0 * x)) / s;
    k1 = k0 * (mu + x + 0.5 - h) / x;
  }
}

/// e^x Kbar_alpha(x) for alpha >= -1/2 and x > 0, by the upward recurrence
/// Kbar_{a+1} = a Kbar_a + (x^2/4) Kbar_{a-1}, which has no cancellation.
inline double kbar_scaled_nonneg(double alpha, double x) {
  const int nl = static_cast<int>(std::floor(alpha + 0.5));
  const double mu = alpha - nl;
  double k0, k1;
  bessel_k_pair_scaled(mu, x, k0, k1);
  const double lx = std::log(x);
  double b0 = std::exp((1.0 - mu) * std::numbers::ln2 + mu * lx) * k0;
  if (nl == 0) return b0;
  double b1 = std::exp(-mu * std::numbers::ln2 + (mu + 1.0) * lx) * k1;
  const double x24 = 0.25 * x * x;
  for (int i = 1; i < nl; ++i) {
    const double b2 = (mu + i) * b1 + x24 * b0;
    b0 = b1;
    b1 = b2;
  }
  return b1;
}

/// log K_nu(x) for any real nu and x > 0.
inline double log_bessel_k(double nu, double x) {
  const double a = std::abs(nu);
  return std::log(kbar_scaled_nonneg(a, x)) - x - (1.0 - a) * std::numbers::ln2 - a * std::log(x);
}

/// log Kbar_alpha(x), x > 0.
inline double log_kbar(double alpha, double x) {
  if (alpha >= -0.5) return std::log(kbar_scaled_nonneg(alpha, x)) - x;
  return (1.0 - alpha) * std::numbers::ln2 + alpha * std::log(x) + log_bessel_k(alpha, x);
}

/// Kbar_alpha(x) without envelope checks; kbar(alpha, 0) = Gamma(alpha) for alpha > 0.
inline double kbar_unchecked(double alpha, double x) {
  if (x == 0.0) return alpha > 0.0 ? std::tgamma(alpha) : std::numeric_limits<double>::infinity();
  return std::exp(log_kbar(alpha, x));
}

}  // namespace detail

inline double bessel_k(double alpha, double x) {
  if (!(x > 0.0)) throw Error(ErrorKind::domain, "bessel_k needs x > 0");
  if (!(std::abs(alpha) <= kBesselMaxOrder) || !(x <= kBesselMaxArg))
    throw Error(ErrorKind::range, "bessel_k argument outside the supported envelope");
  const double v = std::exp(detail::log_bessel_k(alpha, x));
  if (!std::isfinite(v)) throw Error(ErrorKind::range, "bessel_k overflows");
  return v;
}

/// Kbar_alpha(x) = 2^(1-alpha) x^alpha K_alpha(x), with Kbar_alpha(0) = Gamma(alpha).
inline double kbar(double alpha, double x) {
  if (x == 0.0) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::domain, "kbar(alpha, 0) needs alpha > 0");
    return gamma(alpha);
  }
  if (!(x > 0.0)) throw Error(ErrorKind::domain, "kbar needs x >= 0");
  if (!(std::abs(alpha) <= kBesselMaxOrder) || !(x <= kBesselMaxArg))
    throw Error(ErrorKind::range, "kbar argument outside the supported envelope");
  const double v = std::exp(detail::log_kbar(alpha, x));
  if (!std::isfinite(v)) throw Error(ErrorKind::range, "kbar overflows");
  return v;
}

/// Kbar_alpha(x) - (alpha - 1) Kbar_{alpha-1}(x), nonnegative for alpha > 1.
inline double kbar_recurrence_gap(double alpha, double x) {
  if (!(alpha > 1.0)) throw Error(ErrorKind::domain, "recurrence gap needs alpha > 1");
  if (!(x >= 0.0)) throw Error(ErrorKind::domain, "recurrence gap needs x >= 0");
  return kbar(alpha, x) - (alpha - 1.0) * kbar(alpha - 1.0, x);
}

}  // namespace epstein

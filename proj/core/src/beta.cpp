#include "varsig/beta.hpp"

#include <cmath>
#include <limits>

namespace varsig {
namespace {

constexpr int kMaxIterations = 10000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b) (Numerical Recipes betacf, modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

struct Tails {
  double lower;
  double upper;
};

Tails incomplete_beta_tails(double x, double a, double b) {
  if (!(x > 0.0)) return {0.0, 1.0};
  if (!(x < 1.0)) return {1.0, 0.0};
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    const double lower = std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
    return {lower, 1.0 - lower};
  }
  const double upper = std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
  return {1.0 - upper, upper};
}

template <class F>
double bisect_increasing(F&& f, double target) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace

double beta_cdf(double x, double a, double b) { return incomplete_beta_tails(x, a, b).lower; }

double beta_sf(double x, double a, double b) { return incomplete_beta_tails(x, a, b).upper; }

double log_beta_pdf(double x, double a, double b) {
  if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

double beta_pdf(double x, double a, double b) {
  if (x < 0.0 || x > 1.0) return 0.0;
  return std::exp(log_beta_pdf(x, a, b));
}

double beta_mass(double lo, double hi, double a, double b) {
  if (!(hi > lo)) return 0.0;
  const double mean = a / (a + b);
  if (0.5 * (lo + hi) > mean) {
    return std::max(0.0, beta_sf(lo, a, b) - beta_sf(hi, a, b));
  }
  return std::max(0.0, beta_cdf(hi, a, b) - beta_cdf(lo, a, b));
}

double beta_quantile(double p, double a, double b) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  if (p > 0.5) return beta_quantile_upper(1.0 - p, a, b);
  return bisect_increasing([&](double x) { return beta_cdf(x, a, b); }, p);
}

double beta_quantile_upper(double q, double a, double b) {
  if (q <= 0.0) return 1.0;
  if (q >= 1.0) return 0.0;
  // sf is decreasing; bisect on -sf.
  return bisect_increasing([&](double x) { return -beta_sf(x, a, b); }, -q);
}

}  // namespace varsig

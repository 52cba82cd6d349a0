#ifndef VARSIG_BETA_HPP
#define VARSIG_BETA_HPP

#include <random>

namespace varsig {

/// Regularized incomplete beta function I_x(a, b).
///
/// Continued fraction (modified Lentz) on whichever tail converges fast,
/// so both beta_cdf and beta_sf stay accurate deep in their own tails.
double beta_cdf(double x, double a, double b);

/// 1 - I_x(a, b), computed without cancellation.
double beta_sf(double x, double a, double b);

double beta_pdf(double x, double a, double b);
double log_beta_pdf(double x, double a, double b);

/// Beta(a, b) mass of [lo, hi], using the tail with fewer cancellations.
double beta_mass(double lo, double hi, double a, double b);

/// Smallest x with beta_cdf(x) >= p (bisection, ~1e-15 in x).
double beta_quantile(double p, double a, double b);

/// Smallest x with beta_sf(x) <= q; precise for q near 0.
double beta_quantile_upper(double q, double a, double b);

/// Draw from Beta(a, b) as a ratio of gammas.
template <class Rng>
double sample_beta(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  for (;;) {
    const double x = ga(rng);
    const double y = gb(rng);
    const double s = x + y;
    if (s > 0.0) {
      const double r = x / s;
      if (r > 0.0 && r < 1.0) return r;
    }
  }
}

}  // namespace varsig

#endif  // VARSIG_BETA_HPP

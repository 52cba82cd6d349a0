#include "varsig/pvalue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varsig/beta.hpp"
#include "varsig/errors.hpp"

namespace varsig {

double phi_statistic(const TimeSeries& series, const Window& window) {
  require_fits(window, series.size());
  double left = 0.0;
  double right = 0.0;
  for (Index t = window.begin(); t < window.tau_hat; ++t) {
    const double c = series[t] - series.mu();
    left += c * c;
  }
  for (Index t = window.tau_hat; t < window.end(); ++t) {
    const double c = series[t] - series.mu();
    right += c * c;
  }
  const double total = left + right;
  if (!(total > 0.0)) throw DegenerateInput("window sum of squares is zero");
  const double phi = left / total;
  if (!(phi > 0.0 && phi < 1.0)) {
    throw DegenerateInput("phi is " + std::to_string(phi) + "; a half-window has zero sum of squares");
  }
  return phi;
}

TwoSidedBounds two_sided_bounds(double phi_obs, Index /*h*/) {
  const double reflected = 1.0 - phi_obs;
  return {std::min(phi_obs, reflected), std::max(phi_obs, reflected)};
}

TwoSidedBounds two_sided_bounds(double phi_obs, double a, double b) {
  const double below = beta_cdf(phi_obs, a, b);
  const double above = beta_sf(phi_obs, a, b);
  // phi_* has cdf(phi_*) = above, i.e. sf(phi_*) = below.
  const double phi_star = above <= 0.5 ? beta_quantile(above, a, b) : beta_quantile_upper(below, a, b);
  return {std::min(phi_obs, phi_star), std::max(phi_obs, phi_star)};
}

double unconditional_p_value(const TwoSidedBounds& bounds, Index h) {
  const double a = null_shape(h);
  return std::min(1.0, beta_cdf(bounds.lower, a, a) + beta_sf(bounds.upper, a, a));
}

TruncatedMass truncated_beta_masses(const IntervalUnion& s, const TwoSidedBounds& bounds, Index h) {
  const double a = null_shape(h);
  TruncatedMass m{0.0, 0.0};
  for (const auto& piece : s.intervals()) {
    m.total += beta_mass(piece.lo, piece.hi, a, a);
    m.critical += beta_mass(piece.lo, std::min(piece.hi, bounds.lower), a, a);
    m.critical += beta_mass(std::max(piece.lo, bounds.upper), piece.hi, a, a);
  }
  return m;
}

double mass_ratio(double critical, double total) {
  if (!(total >= 1e-300)) {
    throw NumericalUnderflow("Beta mass of the selection set is " + std::to_string(total) +
                             ", below 1e-300");
  }
  return std::clamp(critical / total, 0.0, 1.0);
}

double truncated_beta_tail_prob(const IntervalUnion& s, const TwoSidedBounds& bounds, Index h) {
  const auto m = truncated_beta_masses(s, bounds, h);
  return mass_ratio(m.critical, m.total);
}

}  // namespace varsig

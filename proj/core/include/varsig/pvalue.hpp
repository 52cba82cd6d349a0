#ifndef VARSIG_PVALUE_HPP
#define VARSIG_PVALUE_HPP

#include <utility>

#include "varsig/types.hpp"

namespace varsig {

/// Share of the window's sum of squares that falls before the split,
/// computed on centred values. Beta(h/2, h/2) under no change.
///
/// Throws DegenerateInput when the window sum of squares is zero or the
/// ratio is exactly 0 or 1.
double phi_statistic(const TimeSeries& series, const Window& window);

/// Null law parameters of phi for half-width h.
inline double null_shape(Index h) { return 0.5 * static_cast<double>(h); }

struct TwoSidedBounds {
  double lower;
  double upper;
};

/// Two-sided critical bounds for phi_obs under Beta(h/2, h/2): the
/// symmetric reflection (phi_obs, 1 - phi_obs), ordered.
TwoSidedBounds two_sided_bounds(double phi_obs, Index h);

/// General form for a Beta(a, b) null: phi_* solves
/// cdf(phi_*) = 1 - cdf(phi_obs) by root finding.
TwoSidedBounds two_sided_bounds(double phi_obs, double a, double b);

/// Unconditional two-sided p-value Pr(phi <= lower or phi >= upper).
double unconditional_p_value(const TwoSidedBounds& bounds, Index h);

/// Beta(h/2,h/2) masses of S and of S intersected with the critical region.
struct TruncatedMass {
  double critical;
  double total;
};
TruncatedMass truncated_beta_masses(const IntervalUnion& s, const TwoSidedBounds& bounds, Index h);

/// Pr(phi <= lower or phi >= upper | phi in S) for phi ~ Beta(h/2, h/2).
///
/// Throws NumericalUnderflow when the Beta mass of S is below 1e-300.
double truncated_beta_tail_prob(const IntervalUnion& s, const TwoSidedBounds& bounds, Index h);

/// Ratio of summed critical masses to summed totals, clamped to [0, 1].
/// Throws NumericalUnderflow for a vanishing denominator.
double mass_ratio(double critical, double total);

}  // namespace varsig

#endif  // VARSIG_PVALUE_HPP

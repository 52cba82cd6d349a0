#ifndef VARSIG_PERTURB_HPP
#define VARSIG_PERTURB_HPP

#include <vector>

#include "varsig/detect.hpp"
#include "varsig/types.hpp"

namespace varsig {

/// c0 + c1 * phi.
struct LinearForm {
  double offset = 0.0;
  double slope = 0.0;

  double at(double phi) const noexcept { return offset + slope * phi; }
};

/// The one-parameter family X'(phi): the left half-window rescaled by
/// sqrt(phi / phi_obs), the right half by sqrt((1 - phi) / (1 - phi_obs)),
/// everything else fixed. The window sum of squares is the same for every phi.
///
/// Squares along the path are affine in phi, X'_j(phi)^2 = a_j + b_j phi;
/// the path keeps prefix sums of a and b for constant-time range forms.
class PhiPath {
 public:
  PhiPath(TimeSeries base, Window window);

  const TimeSeries& base() const noexcept { return base_; }
  const Window& window() const noexcept { return window_; }
  double phi_obs() const noexcept { return phi_obs_; }
  Index size() const noexcept { return base_.size(); }

  /// Centred squares of the base series.
  const std::vector<double>& squares() const noexcept { return squares_; }
  double offset(Index j) const noexcept { return offset_[j]; }
  double slope(Index j) const noexcept { return slope_[j]; }

  /// sum_{j in [begin, end)} (a_j + b_j phi).
  LinearForm sum(Index begin, Index end) const noexcept {
    return {prefix_offset_[end] - prefix_offset_[begin], prefix_slope_[end] - prefix_slope_[begin]};
  }

  /// Centred squares of X'(phi).
  std::vector<double> squares_at(double phi) const;

 private:
  TimeSeries base_;
  Window window_;
  double phi_obs_;
  std::vector<double> squares_;
  std::vector<double> offset_;
  std::vector<double> slope_;
  std::vector<double> prefix_offset_;
  std::vector<double> prefix_slope_;
};

/// X'(phi) as a series. Returns the base series unchanged at phi_obs.
TimeSeries perturb_series(const PhiPath& path, double phi);

/// Nested-ratio reparameterisation of the tested window.
struct PhiFrame {
  double phi_obs = 0.5;
  double c0_sq = 0.0;
  /// W^l_i = C^2(first i of left half) / C^2(first i+1), i = 1..h-1.
  std::vector<double> w_left;
  /// Same for the right half, starting at tau_hat + 1.
  std::vector<double> w_right;
  Window window;
};

PhiFrame decompose_w(const TimeSeries& series, const Window& window);

/// The 2h window squares implied by a frame, left half first.
std::vector<double> reconstruct_squares(const PhiFrame& frame);

/// G_{s,e}(phi, t) = alpha_t + beta_t phi for every admissible CUSUM split
/// of `segment`, entry k holding split segment.begin + 1 + k.
std::vector<LinearForm> cusum_phi_coeffs(const PhiPath& path, const Segment& segment);
LinearForm cusum_phi_coeff(const PhiPath& path, const Segment& segment, Index split);

/// Sum of X'(phi)^2 over `range` as A phi + B, from the closed-form case
/// table over the position of the range relative to the window.
LinearForm window_affine_sum(const PhiPath& path, const Segment& range);

/// Affine sums needed for Lambda(tau, phi) on one interval.
struct LrPhiCoeffs {
  Segment segment;
  LinearForm total;
  /// Entry k is the left-piece sum for split segment.begin + 1 + k.
  std::vector<LinearForm> left;
};

LrPhiCoeffs lr_phi_coeffs(const PhiPath& path, const Segment& segment);

/// Profile LR statistic of X'(phi) on the coefficient's segment at `split`.
/// Throws DegenerateSegment when an affine sum is not positive at phi.
double lr_stat_phi(const LrPhiCoeffs& coeffs, Index split, double phi);

}  // namespace varsig

#endif  // VARSIG_PERTURB_HPP

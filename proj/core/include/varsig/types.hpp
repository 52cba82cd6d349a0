#ifndef VARSIG_TYPES_HPP
#define VARSIG_TYPES_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace varsig {

using Index = std::size_t;

/// Observed series X_1..X_T with its known mean.
///
/// Values are stored raw; every statistic works on the centred values
/// X_t - mu. Construction enforces T >= 2 and finiteness.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> values, double mu);

  std::span<const double> values() const noexcept { return values_; }
  double mu() const noexcept { return mu_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index i) const noexcept { return values_[i]; }

  /// (X_t - mu)^2 for every t.
  std::vector<double> centered_squares() const;

 private:
  std::vector<double> values_;
  double mu_;
};

/// Tested window around a changepoint: positions tau_hat-h .. tau_hat+h-1
/// (0-based), i.e. the h points before the split and the h points after.
/// tau_hat counts the points before the split, so it equals the 1-based
/// index of the last pre-change observation.
struct Window {
  Index tau_hat = 0;
  Index h = 0;

  Index begin() const noexcept { return tau_hat - h; }
  Index end() const noexcept { return tau_hat + h; }
  bool fits(Index series_length) const noexcept {
    return h >= 1 && tau_hat >= h && tau_hat + h <= series_length;
  }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Throws DegenerateInput unless the window fits a series of length T.
void require_fits(const Window& window, Index series_length);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint, sorted subintervals of [0, 1].
///
/// Construction sorts, clips to [0,1], drops empty pieces and merges
/// overlapping or touching pieces.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> pieces);

  static IntervalUnion unit() { return IntervalUnion({{0.0, 1.0}}); }

  const std::vector<Interval>& intervals() const noexcept { return pieces_; }
  bool empty() const noexcept { return pieces_.empty(); }
  std::size_t size() const noexcept { return pieces_.size(); }
  bool contains(double x) const noexcept;
  double measure() const noexcept;

  /// Every piece in both unions.
  bool is_subset_of(const IntervalUnion& other) const noexcept;

 private:
  std::vector<Interval> pieces_;
};

enum class PValueMethod { exact_cusum, mc_gp, mc_gp_is, mc_naive };
enum class Conditioning { tau_in_model, full_model };

std::string_view to_string(PValueMethod m);
std::string_view to_string(Conditioning c);
PValueMethod parse_method(std::string_view s);
Conditioning parse_conditioning(std::string_view s);

struct PValueReport {
  Index tau_hat = 0;
  double p_value = 1.0;
  double phi_obs = 0.5;
  double phi_lower = 0.5;
  double phi_upper = 0.5;
  PValueMethod method = PValueMethod::exact_cusum;
  Conditioning conditioning = Conditioning::tau_in_model;
  std::map<std::string, double> diagnostics;
};

}  // namespace varsig

#endif  // VARSIG_TYPES_HPP

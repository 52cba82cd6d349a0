#include "varsig/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varsig/errors.hpp"

namespace varsig {

TimeSeries::TimeSeries(std::vector<double> values, double mu) : values_(std::move(values)), mu_(mu) {
  if (values_.size() < 2) throw DegenerateInput("time series needs at least 2 values");
  if (!std::isfinite(mu_)) throw DegenerateInput("mean must be finite");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DegenerateInput("non-finite value at position " + std::to_string(i + 1));
    }
  }
}

std::vector<double> TimeSeries::centered_squares() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [this](double x) {
    const double c = x - mu_;
    return c * c;
  });
  return out;
}

void require_fits(const Window& window, Index series_length) {
  if (!window.fits(series_length)) {
    throw DegenerateInput("window tau_hat=" + std::to_string(window.tau_hat) + ", h=" +
                          std::to_string(window.h) + " does not fit a series of length " +
                          std::to_string(series_length));
  }
}

IntervalUnion::IntervalUnion(std::vector<Interval> pieces) {
  for (auto& p : pieces) {
    p.lo = std::clamp(p.lo, 0.0, 1.0);
    p.hi = std::clamp(p.hi, 0.0, 1.0);
  }
  std::erase_if(pieces, [](const Interval& p) { return !(p.hi > p.lo); });
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& p : pieces) {
    if (!pieces_.empty() && p.lo <= pieces_.back().hi) {
      pieces_.back().hi = std::max(pieces_.back().hi, p.hi);
    } else {
      pieces_.push_back(p);
    }
  }
}

bool IntervalUnion::contains(double x) const noexcept {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                             [](double v, const Interval& p) { return v < p.lo; });
  if (it == pieces_.begin()) return false;
  return std::prev(it)->contains(x);
}

double IntervalUnion::measure() const noexcept {
  double m = 0.0;
  for (const auto& p : pieces_) m += p.width();
  return m;
}

bool IntervalUnion::is_subset_of(const IntervalUnion& other) const noexcept {
  return std::all_of(pieces_.begin(), pieces_.end(), [&](const Interval& p) {
    return std::any_of(other.pieces_.begin(), other.pieces_.end(),
                       [&](const Interval& q) { return q.lo <= p.lo && p.hi <= q.hi; });
  });
}

std::string_view to_string(PValueMethod m) {
  switch (m) {
    case PValueMethod::exact_cusum: return "exact-cusum";
    case PValueMethod::mc_gp: return "mc-gp";
    case PValueMethod::mc_gp_is: return "mc-gp-is";
    case PValueMethod::mc_naive: return "mc-naive";
  }
  return "unknown";
}

std::string_view to_string(Conditioning c) {
  return c == Conditioning::tau_in_model ? "tau-in-model" : "full-model";
}

PValueMethod parse_method(std::string_view s) {
  if (s == "exact-cusum") return PValueMethod::exact_cusum;
  if (s == "mc-gp") return PValueMethod::mc_gp;
  if (s == "mc-gp-is") return PValueMethod::mc_gp_is;
  if (s == "mc-naive") return PValueMethod::mc_naive;
  throw ConfigError("unknown p-value method '" + std::string(s) + "'");
}

Conditioning parse_conditioning(std::string_view s) {
  if (s == "tau-in-model") return Conditioning::tau_in_model;
  if (s == "full-model") return Conditioning::full_model;
  throw ConfigError("unknown conditioning '" + std::string(s) + "'");
}

}  // namespace varsig

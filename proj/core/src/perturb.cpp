#include "varsig/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "varsig/errors.hpp"
#include "varsig/pvalue.hpp"

namespace varsig {

PhiPath::PhiPath(TimeSeries base, Window window)
    : base_(std::move(base)), window_(window), phi_obs_(phi_statistic(base_, window_)) {
  squares_ = base_.centered_squares();
  const Index n = squares_.size();
  offset_.assign(n, 0.0);
  slope_.assign(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    if (j < window_.begin() || j >= window_.end()) {
      offset_[j] = squares_[j];
    } else if (j < window_.tau_hat) {
      slope_[j] = squares_[j] / phi_obs_;
    } else {
      offset_[j] = squares_[j] / (1.0 - phi_obs_);
      slope_[j] = -offset_[j];
    }
  }
  prefix_offset_.assign(n + 1, 0.0);
  prefix_slope_.assign(n + 1, 0.0);
  for (Index j = 0; j < n; ++j) {
    prefix_offset_[j + 1] = prefix_offset_[j] + offset_[j];
    prefix_slope_[j + 1] = prefix_slope_[j] + slope_[j];
  }
}

std::vector<double> PhiPath::squares_at(double phi) const {
  if (phi == phi_obs_) return squares_;
  std::vector<double> out(squares_.size());
  for (Index j = 0; j < out.size(); ++j) out[j] = offset_[j] + slope_[j] * phi;
  return out;
}

TimeSeries perturb_series(const PhiPath& path, double phi) {
  if (phi == path.phi_obs()) return path.base();
  if (!(phi > 0.0 && phi < 1.0)) throw DegenerateInput("phi must lie in (0, 1)");
  const auto& w = path.window();
  const double mu = path.base().mu();
  const double left = std::sqrt(phi / path.phi_obs());
  const double right = std::sqrt((1.0 - phi) / (1.0 - path.phi_obs()));
  std::vector<double> values(path.base().values().begin(), path.base().values().end());
  for (Index t = w.begin(); t < w.tau_hat; ++t) values[t] = mu + left * (values[t] - mu);
  for (Index t = w.tau_hat; t < w.end(); ++t) values[t] = mu + right * (values[t] - mu);
  return TimeSeries(std::move(values), mu);
}

namespace {

std::vector<double> nested_ratios(std::span<const double> half) {
  std::vector<double> w(half.size() - 1);
  double running = half[0];
  for (std::size_t i = 0; i + 1 < half.size(); ++i) {
    const double next = running + half[i + 1];
    if (!(running > 0.0)) throw DegenerateInput("zero nested partial sum of squares in window");
    w[i] = running / next;
    running = next;
  }
  return w;
}

// (1 - W_{i-1}) prod_{k=i}^{h-1} W_k * scale, i = 1..h, with W_0 = 0.
void cascade(const std::vector<double>& w, double scale, std::vector<double>& out) {
  const std::size_t h = w.size() + 1;
  std::vector<double> block(h);
  double tail = scale;  // prod_{k=i}^{h-1} W_k * scale, built from the top
  for (std::size_t i = h; i >= 1; --i) {
    const double w_prev = i >= 2 ? w[i - 2] : 0.0;
    block[i - 1] = (1.0 - w_prev) * tail;
    if (i >= 2) tail *= w[i - 2];
  }
  out.insert(out.end(), block.begin(), block.end());
}

}  // namespace

PhiFrame decompose_w(const TimeSeries& series, const Window& window) {
  PhiFrame f;
  f.window = window;
  f.phi_obs = phi_statistic(series, window);
  const auto sq = series.centered_squares();
  std::span<const double> all(sq);
  const auto left = all.subspan(window.begin(), window.h);
  const auto right = all.subspan(window.tau_hat, window.h);
  f.c0_sq = 0.0;
  for (double v : left) f.c0_sq += v;
  for (double v : right) f.c0_sq += v;
  f.w_left = nested_ratios(left);
  f.w_right = nested_ratios(right);
  return f;
}

std::vector<double> reconstruct_squares(const PhiFrame& frame) {
  std::vector<double> out;
  out.reserve(2 * frame.window.h);
  cascade(frame.w_left, frame.c0_sq * frame.phi_obs, out);
  cascade(frame.w_right, frame.c0_sq * (1.0 - frame.phi_obs), out);
  return out;
}

LinearForm cusum_phi_coeff(const PhiPath& path, const Segment& segment, Index split) {
  const double nl = static_cast<double>(split - segment.begin);
  const double nr = static_cast<double>(segment.end - split);
  const double g0 = std::sqrt(nl * nr / static_cast<double>(segment.length()));
  const auto l = path.sum(segment.begin, split);
  const auto r = path.sum(split, segment.end);
  return {g0 * (l.offset / nl - r.offset / nr), g0 * (l.slope / nl - r.slope / nr)};
}

std::vector<LinearForm> cusum_phi_coeffs(const PhiPath& path, const Segment& segment) {
  std::vector<LinearForm> out;
  if (segment.length() < 2) return out;
  out.reserve(segment.length() - 1);
  for (Index t = segment.begin + 1; t < segment.end; ++t) out.push_back(cusum_phi_coeff(path, segment, t));
  return out;
}

LinearForm window_affine_sum(const PhiPath& path, const Segment& range) {
  if (range.length() == 0) return {};
  const auto& sq = path.squares();
  // 1-based inclusive bounds; L = last point before the window, R = last in it.
  const Index s = range.begin + 1;
  const Index e = range.end;
  const Index tau = path.window().tau_hat;
  const Index lo = tau - path.window().h;
  const Index hi = tau + path.window().h;
  const double po = path.phi_obs();
  const auto c2 = [&](Index from, Index to) {
    double acc = 0.0;
    for (Index j = from; j <= to; ++j) acc += sq[j - 1];
    return acc;
  };
  double a = 0.0;
  double b = 0.0;
  // Slope A_{s,e}.
  if (e <= lo) {
    a = 0.0;
  } else if (s <= lo && e <= tau) {
    a = c2(lo + 1, e) / po;
  } else if (s <= lo && e <= hi) {
    a = c2(lo + 1, tau) / po - c2(tau + 1, e) / (1.0 - po);
  } else if (s <= lo) {
    a = c2(lo + 1, tau) / po - c2(tau + 1, hi) / (1.0 - po);
  } else if (s <= tau && e <= tau) {
    a = c2(s, e) / po;
  } else if (s <= tau) {
    a = c2(s, tau) / po - c2(tau + 1, std::min(hi, e)) / (1.0 - po);
  } else if (s <= hi) {
    a = -c2(s, std::min(hi, e)) / (1.0 - po);
  } else {
    a = 0.0;
  }
  // Offset B_{s,e}.
  if (s <= lo && e <= tau) {
    b = c2(s, std::min(e, lo));
  } else if (s <= lo && e <= hi) {
    b = c2(s, lo) + c2(tau + 1, e) / (1.0 - po);
  } else if (s <= lo) {
    b = c2(s, lo) + c2(tau + 1, hi) / (1.0 - po) + c2(hi + 1, e);
  } else if (s <= tau && e <= tau) {
    b = 0.0;
  } else if (s <= tau && e <= hi) {
    b = c2(tau + 1, e) / (1.0 - po);
  } else if (s <= tau) {
    b = c2(tau + 1, hi) / (1.0 - po) + c2(hi + 1, e);
  } else if (s <= hi && e <= hi) {
    b = c2(s, e) / (1.0 - po);
  } else if (s <= hi) {
    b = c2(s, hi) / (1.0 - po) + c2(hi + 1, e);
  } else {
    b = c2(s, e);
  }
  return {b, a};
}

LrPhiCoeffs lr_phi_coeffs(const PhiPath& path, const Segment& segment) {
  LrPhiCoeffs c;
  c.segment = segment;
  c.total = window_affine_sum(path, segment);
  if (segment.length() >= 2) {
    c.left.reserve(segment.length() - 1);
    for (Index t = segment.begin + 1; t < segment.end; ++t) c.left.push_back(window_affine_sum(path, {segment.begin, t}));
  }
  return c;
}

double lr_stat_phi(const LrPhiCoeffs& coeffs, Index split, double phi) {
  const auto& seg = coeffs.segment;
  const auto& left_form = coeffs.left.at(split - seg.begin - 1);
  const double total = coeffs.total.at(phi);
  const double left = left_form.at(phi);
  const double right = (coeffs.total.offset - left_form.offset) + (coeffs.total.slope - left_form.slope) * phi;
  if (!(total > 0.0 && left > 0.0 && right > 0.0)) {
    throw DegenerateSegment("non-positive affine sum of squares at phi=" + std::to_string(phi));
  }
  return segment_cost(total, seg.length()) - segment_cost(left, split - seg.begin) -
         segment_cost(right, seg.end - split);
}

}  // namespace varsig

#ifndef VARSIG_POWER_HPP
#define VARSIG_POWER_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "varsig/detect.hpp"
#include "varsig/mc.hpp"
#include "varsig/perturb.hpp"
#include "varsig/types.hpp"

namespace varsig {

enum class WProvenance { observed, sampled };

struct WSample {
  std::vector<double> w_left;
  std::vector<double> w_right;
  WProvenance provenance = WProvenance::sampled;
};

/// The observed W of `path` followed by n_w - 1 draws with
/// W_i ~ Beta(i/2, 1/2) on each side.
std::vector<WSample> sample_w(const PhiPath& path, Index n_w, std::uint64_t seed);

/// n_w - 1 null draws of (W^l, W^r) for a window of half-width h.
std::vector<WSample> draw_null_w(Index h, Index n_w_minus_one, std::uint64_t seed);

enum class PowerEngine { exact, mc };

std::string_view to_string(PowerEngine e);

/// Base series with the window replaced by the data implied by a W sample;
/// phi_obs and C0^2 are kept, signs come from the observed window.
TimeSeries rebuild_series(const PhiPath& path, const WSample& w);

struct PowerConfig {
  PowerEngine engine = PowerEngine::exact;
  /// MC engine only. With more than one W sample each GP uses N/2 points.
  SamplerConfig sampler;
};

/// p = sum_j Pr(critical, selected | W_j) / sum_j Pr(selected | W_j).
PValueReport power_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning,
                           const std::vector<WSample>& samples, const PowerConfig& config);

}  // namespace varsig

#endif  // VARSIG_POWER_HPP

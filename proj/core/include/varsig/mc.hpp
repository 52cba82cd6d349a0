#ifndef VARSIG_MC_HPP
#define VARSIG_MC_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <span>
#include <vector>

#include "varsig/detect.hpp"
#include "varsig/perturb.hpp"
#include "varsig/pvalue.hpp"
#include "varsig/rng.hpp"
#include "varsig/types.hpp"

namespace varsig {

/// Selection indicator phi -> 1{event holds for X'(phi)}, evaluated by
/// re-running the detector. Thread-safe; counts its evaluations.
///
/// Runs stop early once the answer is known: under tau-in-model as soon
/// as tau_hat is accepted, under full-model as soon as a change outside
/// the observed model is accepted. WBS intervals that miss the window are
/// scanned once at construction and reused.
class SelectionOracle {
 public:
  SelectionOracle(const PhiPath& path, DetectorConfig config, std::vector<Index> observed_model,
                  Conditioning conditioning, bool early_stop = true);

  bool operator()(double phi) const;
  std::size_t evaluations() const noexcept { return evaluations_.load(); }
  const PhiPath& path() const noexcept { return *path_; }

 private:
  const PhiPath* path_;
  DetectorConfig config_;
  std::vector<Index> observed_model_;
  Conditioning conditioning_;
  bool early_stop_;
  ScanCache cache_;
  mutable std::atomic<std::size_t> evaluations_{0};
};

/// One-shot form of SelectionOracle.
bool indicator(const PhiPath& path, const DetectorConfig& config, std::span<const Index> observed_model,
               Conditioning conditioning, double phi);

struct BetaLaw {
  double a = 1.0;
  double b = 1.0;
};

enum class PhiDistribution { uniform01, null_beta };

/// One draw per stratum: z_i ~ U((i-1)/N, i/N), phi_i = F^{-1}(z_i). Sorted.
std::vector<double> stratified_sample(Index n, const BetaLaw& law, Rng& rng);
/// N independent draws from the law, sorted.
std::vector<double> iid_sample(Index n, const BetaLaw& law, Rng& rng);
/// Stratified draws from U(0,1) or the Beta(h/2, h/2) null of phi.
std::vector<double> stratified_phis(Index n, PhiDistribution dist, Index h, std::uint64_t seed);

/// Self-normalised estimate of Pr(critical | selected): weighted share of
/// selected samples inside the critical region. Empty weights mean unit
/// weights (plain ratio over draws from the null).
double importance_p_hat(std::span<const double> phis, std::span<const char> selected, std::span<const double> weights,
                        const TwoSidedBounds& bounds);

/// Ratio estimator over draws from the null law.
double naive_p_hat(std::span<const double> phis, std::span<const char> selected, const TwoSidedBounds& bounds);

/// Weighted estimate from N draws of a Beta proposal g (stratified or
/// i.i.d.), each selected draw weighted by pi/g with pi = Beta(h/2, h/2).
double proposal_p_hat(const SelectionOracle& oracle, const TwoSidedBounds& bounds, const BetaLaw& proposal, Index n,
                      bool stratified, Rng& rng);

/// Posterior mean of a zero-mean GP with kernel exp(-|x - y| / (2 l^2))
/// conditioned on noiseless 0/1 observations.
///
/// The kernel is Markov, so between neighbouring design points the mean
/// depends only on those two observations; evaluation is O(log N).
class GpSurrogate {
 public:
  /// Design must be strictly increasing with gaps >= 1e-12.
  GpSurrogate(std::vector<double> design, std::vector<double> observations, double length_scale);

  double mean(double phi) const;
  const std::vector<double>& design() const noexcept { return design_; }
  const std::vector<double>& observations() const noexcept { return obs_; }
  double length_scale() const noexcept { return length_scale_; }
  double rate() const noexcept { return rate_; }

 private:
  std::vector<double> design_;
  std::vector<double> obs_;
  double length_scale_;
  double rate_;
};

/// Sorts (phi, indicator) pairs by phi and builds the surrogate.
GpSurrogate fit_gp(std::span<const double> design, std::span<const char> selected, double length_scale);

/// q(phi) ~ p_hat(phi) pi(phi) on a fixed 4096-cell midpoint grid, with
/// pi = Beta(h/2, h/2). The piecewise-constant cell density doubles as a
/// samplable proposal.
class ConditionedDensity {
 public:
  static constexpr Index kCells = 4096;

  ConditionedDensity(const GpSurrogate& surrogate, Index h);

  /// Unnormalised integral of p_hat * pi over [lo, hi] (cells cut at the ends).
  double unnormalized_mass(double lo, double hi) const;
  double normalizer() const noexcept { return normalizer_; }
  /// Piecewise-constant normalised density of the proposal at phi.
  double proposal_density(double phi) const;
  double sample(Rng& rng) const;
  Index h() const noexcept { return h_; }
  const GpSurrogate& surrogate() const noexcept { return surrogate_; }

 private:
  GpSurrogate surrogate_;
  Index h_;
  std::vector<double> cell_mass_;
  std::vector<double> cumulative_;
  double normalizer_;
};

struct CriticalMass {
  double critical;
  double total;
};
CriticalMass gp_masses(const ConditionedDensity& density, const TwoSidedBounds& bounds);

/// q-hat mass of the critical region.
double gp_direct_p(const ConditionedDensity& density, const TwoSidedBounds& bounds);

struct IsResult {
  double p_value;
  Index selected;
  Index evaluated;
};

/// Self-normalised importance sampling with q-hat as proposal: draws
/// `n_tilde` phis from q-hat, evaluates the oracle, weights by pi/q-hat.
/// With `pool_design` the design points join in, every sample then being
/// weighted against the mixture of the uniform design and q-hat.
IsResult gp_is_p(const ConditionedDensity& density, const SelectionOracle& oracle, const TwoSidedBounds& bounds,
                 Index n_tilde, Rng& rng, bool pool_design, Index workers = 1);

enum class SamplerMode { gp_direct, gp_is, naive, naive_stratified };

std::string_view to_string(SamplerMode m);
SamplerMode parse_sampler_mode(std::string_view s);

struct SamplerConfig {
  Index n = 100;
  Index n_tilde = 100;
  double length_scale = 100.0;
  SamplerMode mode = SamplerMode::gp_direct;
  std::uint64_t seed = 0;
  bool early_stop = true;
  bool pool_design = true;
  Index workers = 1;
};

/// Evaluated GP design: stratified U(0,1) points plus phi_obs.
struct GpDesign {
  std::vector<double> phis;
  std::vector<char> selected;
};

/// `phi_obs_selected`: known indicator at phi_obs (observed data); when
/// empty the oracle is evaluated there too.
GpDesign evaluate_design(const SelectionOracle& oracle, Index n, std::uint64_t seed, std::optional<bool> phi_obs_selected,
                         Index workers);

/// Monte Carlo post-selection p-value for any detector.
PValueReport mc_p_value(const PhiPath& path, const DetectionResult& observed, Conditioning conditioning,
                        const SamplerConfig& sampler);

}  // namespace varsig

#endif  // VARSIG_MC_HPP

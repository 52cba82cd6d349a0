#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "varsig/beta.hpp"
#include "varsig/errors.hpp"
#include "varsig/exact.hpp"
#include "varsig/mc.hpp"
#include "varsig/pvalue.hpp"

using namespace varsig;

namespace {

struct Instance {
  TimeSeries series;
  DetectionResult run;
  PhiPath path;
};

Instance make_instance(StatKind stat, unsigned seed, double sd2 = 2.0, Index h = 20) {
  TimeSeries s(oracle::two_regime(200, 100, sd2, seed), 0.0);
  DetectorConfig cfg;
  cfg.stat = stat;
  cfg.stop = FixedCount{1};
  auto run = run_detector(s, cfg);
  Index tau = run.changepoints.front();
  tau = std::clamp<Index>(tau, h, 200 - h);
  if (!run.contains(tau)) throw std::runtime_error("instance changepoint near the boundary");
  PhiPath path(s, Window{tau, h});
  return {s, run, path};
}

double dense_gp_mean(const std::vector<double>& x, const std::vector<double>& y, double l, double phi) {
  const double rate = 1.0 / (2.0 * l * l);
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd obs(n), kx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    obs(i) = y[i];
    kx(i) = std::exp(-rate * std::abs(phi - x[i]));
    for (Eigen::Index j = 0; j < n; ++j) k(i, j) = std::exp(-rate * std::abs(x[i] - x[j]));
  }
  const Eigen::VectorXd alpha = k.fullPivLu().solve(obs);
  return kx.dot(alpha);
}

}  // namespace

TEST_SUITE("mc") {
  TEST_CASE("selection indicator") {
    const auto inst = make_instance(StatKind::likelihood_ratio, 3, 3.0);
    const auto cfg = replay_config(inst.run);
    CHECK(indicator(inst.path, cfg, inst.run.changepoints, Conditioning::tau_in_model, inst.path.phi_obs()));
    CHECK_THROWS_AS(indicator(inst.path, cfg, inst.run.changepoints, Conditioning::tau_in_model, 1.0), DegenerateInput);

    const SelectionOracle tau(inst.path, cfg, inst.run.changepoints, Conditioning::tau_in_model);
    const SelectionOracle full(inst.path, cfg, inst.run.changepoints, Conditioning::full_model);
    const SelectionOracle slow(inst.path, cfg, inst.run.changepoints, Conditioning::tau_in_model, false);
    std::vector<int> ones;
    for (int i = 1; i < 400; ++i) {
      const double phi = i / 400.0;
      const bool t = tau(phi);
      CHECK(t == slow(phi));
      CHECK(full(phi) <= t);
      if (t) ones.push_back(i);
    }
    REQUIRE_FALSE(ones.empty());
    // one contiguous block that brackets phi_obs
    CHECK(ones.back() - ones.front() + 1 == static_cast<int>(ones.size()));
    CHECK(ones.front() / 400.0 <= inst.path.phi_obs() + 1.0 / 400);
    CHECK(ones.back() / 400.0 >= inst.path.phi_obs() - 1.0 / 400);
    CHECK(tau.evaluations() == 399);
  }

  TEST_CASE("wbs oracle agrees with plain replays") {
    TimeSeries s(oracle::two_regime(150, 80, 2.5, 19), 0.0);
    const auto run = wild_binary_segmentation(s, StatKind::likelihood_ratio, FixedCount{2}, 60, 3);
    const Index tau = run.changepoints.front();
    const Window w{tau, std::min<Index>({10, tau, 150 - tau})};
    const PhiPath path(s, w);
    const SelectionOracle oracle(path, replay_config(run), run.changepoints, Conditioning::tau_in_model);
    for (int i = 1; i < 200; ++i) {
      const double phi = i / 200.0;
      const bool direct = detect_squares(path.squares_at(phi), replay_config(run)).contains(tau);
      CHECK(oracle(phi) == direct);
    }
  }

  TEST_CASE("stratified sampling") {
    Rng rng(1);
    const auto one = stratified_sample(1, BetaLaw{}, rng);
    REQUIRE(one.size() == 1);
    CHECK(one[0] > 0.0);
    CHECK(one[0] < 1.0);
    CHECK(beta_quantile(0.5, 1.0, 1.0) == doctest::Approx(0.5));

    const auto u = stratified_phis(500, PhiDistribution::uniform01, 10, 7);
    for (std::size_t i = 0; i < u.size(); ++i) {
      CHECK(u[i] >= i / 500.0);
      CHECK(u[i] < (i + 1) / 500.0);
    }
    CHECK(stratified_phis(50, PhiDistribution::uniform01, 10, 7) == stratified_phis(50, PhiDistribution::uniform01, 10, 7));

    const auto b = stratified_phis(10000, PhiDistribution::null_beta, 20, 9);
    double ks = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double f = beta_cdf(b[i], 10, 10);
      ks = std::max({ks, (i + 1.0) / b.size() - f, f - double(i) / b.size()});
    }
    CHECK(ks < 0.01);
  }

  TEST_CASE("ratio estimators") {
    const std::vector<double> phis{0.05, 0.1, 0.3, 0.5, 0.6, 0.85, 0.95};
    const TwoSidedBounds bounds{0.2, 0.8};
    const std::vector<char> all(phis.size(), 1);
    CHECK(naive_p_hat(phis, all, bounds) == doctest::Approx(4.0 / 7.0));
    const std::vector<char> tails{1, 1, 0, 0, 0, 1, 1};
    CHECK(naive_p_hat(phis, tails, bounds) == doctest::Approx(1.0));
    const std::vector<char> none(phis.size(), 0);
    CHECK_THROWS_AS(naive_p_hat(phis, none, bounds), NumericalUnderflow);
    const std::vector<double> w{1, 1, 1, 1, 1, 1, 3};
    CHECK(importance_p_hat(phis, all, w, bounds) == doctest::Approx(6.0 / 9.0));
  }

  TEST_CASE("naive sampler approaches the exact answer") {
    const auto inst = make_instance(StatKind::cusum_squares, 11, 1.0);
    const double exact = exact_p_value(inst.path, inst.run, Conditioning::tau_in_model).p_value;
    SamplerConfig sc;
    sc.mode = SamplerMode::naive_stratified;
    sc.n = 2000;
    sc.seed = 4;
    CHECK(std::abs(mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc).p_value - exact) <= 0.03);
  }

  TEST_CASE("gp surrogate") {
    SUBCASE("interpolates its design") {
      const std::vector<double> x{0.1, 0.25, 0.4, 0.7, 0.71, 0.9};
      const std::vector<char> y{0, 1, 1, 0, 1, 1};
      for (double l : {0.1, 1.0, 100.0}) {
        const auto gp = fit_gp(x, y, l);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(gp.mean(x[i]) == doctest::Approx(double(y[i])).epsilon(1e-12));
        for (int i = 0; i <= 1000; ++i) {
          const double m = gp.mean(i / 1000.0);
          CHECK(m >= 0.0);
          CHECK(m <= 1.0);
        }
      }
    }
    SUBCASE("all ones stays positive and near one by the design") {
      const auto x = stratified_phis(100, PhiDistribution::uniform01, 10, 3);
      const auto gp = fit_gp(x, std::vector<char>(x.size(), 1), 1.0);
      for (int i = 0; i <= 1000; ++i) {
        const double m = gp.mean(i / 1000.0);
        CHECK(m > 0.0);
        CHECK(m <= 1.0);
        CHECK(m > 0.98);
      }
    }
    SUBCASE("unsorted input and duplicates") {
      const std::vector<double> x{0.7, 0.2, 0.5};
      const std::vector<char> y{1, 0, 1};
      const auto gp = fit_gp(x, y, 1.0);
      const auto sorted = fit_gp(std::vector<double>{0.2, 0.5, 0.7}, std::vector<char>{0, 1, 1}, 1.0);
      for (int i = 0; i <= 100; ++i) CHECK(gp.mean(i / 100.0) == sorted.mean(i / 100.0));
      CHECK_THROWS_AS(fit_gp(std::vector<double>{0.2, 0.2}, std::vector<char>{0, 1}, 1.0), ConfigError);
      CHECK_THROWS_AS(fit_gp(x, y, 0.0), ConfigError);
    }
    SUBCASE("markov evaluator matches a dense solve") {
      std::mt19937_64 rng(17);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> x(50);
        std::vector<char> y(50);
        for (auto& v : x) v = u(rng);
        for (auto& v : y) v = u(rng) < 0.5;
        const double l = rep % 3 == 0 ? 0.05 : (rep % 3 == 1 ? 0.3 : 1.0);
        const auto gp = fit_gp(x, y, l);
        std::vector<double> yd(y.begin(), y.end());
        for (int i = 0; i < 40; ++i) {
          const double phi = u(rng) * 1.2 - 0.1;
          CHECK(std::abs(gp.mean(phi) - dense_gp_mean(x, yd, l, phi)) < 1e-8);
        }
      }
    }
    SUBCASE("length-scale has little effect once l >= 1") {
      const auto inst = make_instance(StatKind::likelihood_ratio, 23, 2.0);
      const SelectionOracle oracle(inst.path, replay_config(inst.run), inst.run.changepoints,
                                   Conditioning::tau_in_model);
      const auto design = evaluate_design(oracle, 100, 5, true, 1);
      std::vector<GpSurrogate> gps;
      for (double l : {1.0, 10.0, 100.0, 1000.0}) gps.push_back(fit_gp(design.phis, design.selected, l));
      double sup = 0.0;
      for (int i = 0; i <= 10000; ++i) {
        const double phi = i / 10000.0;
        for (std::size_t a = 0; a < gps.size(); ++a) {
          for (std::size_t b = a + 1; b < gps.size(); ++b) sup = std::max(sup, std::abs(gps[a].mean(phi) - gps[b].mean(phi)));
        }
      }
      CHECK(sup <= 0.05);
    }
  }

  TEST_CASE("conditioned density") {
    SUBCASE("flat surrogate gives the null law") {
      const auto x = stratified_phis(400, PhiDistribution::uniform01, 10, 3);
      const auto gp = fit_gp(x, std::vector<char>(x.size(), 1), 1e4);
      const ConditionedDensity q(gp, 10);
      CHECK(q.normalizer() == doctest::Approx(1.0).epsilon(1e-6));
      for (double phi : {0.1, 0.33, 0.5, 0.81}) {
        const double cell = (std::floor(phi * 4096) + 0.5) / 4096;
        CHECK(q.proposal_density(phi) == doctest::Approx(oracle::beta_density(cell, 5, 5)).epsilon(1e-6));
      }
      const TwoSidedBounds b{0.3, 0.7};
      CHECK(gp_direct_p(q, b) == doctest::Approx(unconditional_p_value(b, 10)).epsilon(1e-6));
    }
    SUBCASE("indicator-shaped surrogate against quadrature") {
      std::vector<double> x;
      std::vector<char> y;
      for (int i = 1; i < 500; ++i) {
        x.push_back(i / 500.0);
        y.push_back(x.back() >= 0.6 && x.back() <= 0.9);
      }
      const auto gp = fit_gp(x, y, 1.0);
      const ConditionedDensity q(gp, 8);
      const auto f = [&](double v) { return gp.mean(v) * oracle::beta_density(v, 4, 4); };
      double norm = 0.0;
      for (int i = 0; i < 500; ++i) norm += oracle::integrate(f, i / 500.0, (i + 1) / 500.0, 3, 1e-10);
      CHECK(q.normalizer() == doctest::Approx(norm).epsilon(1e-5));
      double inside = 0.0;
      for (int i = 300; i < 450; ++i) inside += oracle::integrate(f, i / 500.0, (i + 1) / 500.0, 3, 1e-10);
      const double trunc = oracle::beta_mass(0.6, 0.9, 4, 4);
      CHECK(q.unnormalized_mass(0.6, 0.9) == doctest::Approx(inside).epsilon(1e-5));
      CHECK(std::abs(q.unnormalized_mass(0.6, 0.9) / q.normalizer() - 1.0) < 0.01);
      CHECK(std::abs(norm - trunc) / trunc < 0.01);
      // normalised density sums to one on the grid
      double total = 0.0;
      for (Index k = 0; k < ConditionedDensity::kCells; ++k) {
        total += q.proposal_density((k + 0.5) / ConditionedDensity::kCells) / ConditionedDensity::kCells;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
      Rng rng(2);
      int inside_draws = 0;
      for (int i = 0; i < 2000; ++i) {
        const double d = q.sample(rng);
        inside_draws += d >= 0.59 && d <= 0.91;
      }
      CHECK(inside_draws >= 1980);
    }
    SUBCASE("vanishing surrogate is an error") {
      const auto gp = fit_gp(std::vector<double>{0.2, 0.8}, std::vector<char>{0, 0}, 1.0);
      CHECK_THROWS_AS(ConditionedDensity(gp, 10), NumericalUnderflow);
    }
  }

  TEST_CASE("gp estimators against the exact engine") {
    int close = 0;
    int total = 0;
    for (unsigned seed = 0; seed < 8; ++seed) {
      const auto inst = make_instance(StatKind::cusum_squares, 200 + seed, 1.6);
      const double exact = exact_p_value(inst.path, inst.run, Conditioning::tau_in_model).p_value;
      SamplerConfig sc;
      sc.n = 200;
      sc.seed = seed;
      const double gp = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc).p_value;
      ++total;
      close += std::abs(gp - exact) <= 0.05;
    }
    CHECK(close >= 7);

    SUBCASE("dense exact design reproduces the exact p") {
      const auto inst = make_instance(StatKind::cusum_squares, 5, 1.8);
      const auto set = selection_set(inst.path, replay_config(inst.run), inst.run.changepoints,
                                     Conditioning::tau_in_model);
      std::vector<double> x;
      std::vector<char> y;
      for (int i = 0; i < 1000; ++i) {
        x.push_back((i + 0.5) / 1000.0);
        y.push_back(set.contains(x.back()));
      }
      const auto gp = fit_gp(x, y, 100.0);
      const ConditionedDensity q(gp, 20);
      const double exact = exact_p_value(inst.path, inst.run, Conditioning::tau_in_model).p_value;
      CHECK(std::abs(gp_direct_p(q, two_sided_bounds(inst.path.phi_obs(), 20)) - exact) < 0.01);
    }
  }

  TEST_CASE("importance sampling") {
    SUBCASE("null proposal with every draw selected") {
      Rng rng(3);
      const auto phis = iid_sample(1000, {5, 5}, rng);
      const TwoSidedBounds b{0.35, 0.65};
      double frac = 0.0;
      for (double p : phis) frac += p <= 0.35 || p >= 0.65;
      CHECK(importance_p_hat(phis, std::vector<char>(phis.size(), 1), {}, b) == doctest::Approx(frac / 1000.0));
    }
    SUBCASE("agrees with the direct estimate") {
      for (unsigned seed = 0; seed < 4; ++seed) {
        const auto inst = make_instance(StatKind::likelihood_ratio, 400 + seed, 1.7);
        SamplerConfig sc;
        sc.n = 200;
        sc.n_tilde = 200;
        sc.seed = seed;
        const double direct = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc).p_value;
        sc.mode = SamplerMode::gp_is;
        const double is = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc).p_value;
        CHECK(std::abs(direct - is) <= 0.05);
        sc.pool_design = false;
        const double unpooled = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc).p_value;
        CHECK(std::abs(direct - unpooled) <= 0.08);
      }
    }
    SUBCASE("skewed proposals: stratification reduces spread") {
      const auto inst = make_instance(StatKind::likelihood_ratio, 31, 1.7, 10);
      const SelectionOracle oracle(inst.path, replay_config(inst.run), inst.run.changepoints,
                                   Conditioning::tau_in_model);
      const auto bounds = two_sided_bounds(inst.path.phi_obs(), 10);
      for (double k : {1.0, 5.0}) {
        const BetaLaw g{5.0 / k, 5.0 / k};
        std::vector<double> plain, strat;
        for (unsigned r = 0; r < 40; ++r) {
          Rng a(derive_seed(r, 1));
          Rng b(derive_seed(r, 2));
          plain.push_back(proposal_p_hat(oracle, bounds, g, 200, false, a));
          strat.push_back(proposal_p_hat(oracle, bounds, g, 200, true, b));
        }
        const auto var = [](const std::vector<double>& v) {
          const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
          double s = 0.0;
          for (double x : v) s += (x - m) * (x - m);
          return s / (v.size() - 1);
        };
        CHECK(var(strat) < var(plain));
      }
    }
  }

  TEST_CASE("determinism across worker counts") {
    const auto inst = make_instance(StatKind::likelihood_ratio, 77, 1.9);
    SamplerConfig sc;
    sc.mode = SamplerMode::gp_is;
    sc.seed = 12;
    const auto a = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc);
    sc.workers = 3;
    const auto b = mc_p_value(inst.path, inst.run, Conditioning::tau_in_model, sc);
    CHECK(a.p_value == b.p_value);
  }

  TEST_CASE("sampler mode names") {
    for (auto m : {SamplerMode::gp_direct, SamplerMode::gp_is, SamplerMode::naive, SamplerMode::naive_stratified}) {
      CHECK(parse_sampler_mode(to_string(m)) == m);
    }
    CHECK_THROWS_AS(parse_sampler_mode("bogus"), ConfigError);
  }
}

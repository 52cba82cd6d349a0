#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "varsig/beta.hpp"
#include "varsig/detect.hpp"
#include "varsig/perturb.hpp"
#include "varsig/pvalue.hpp"

using namespace varsig;

namespace {

double window_sum(const TimeSeries& s, const Window& w) {
  double acc = 0.0;
  for (Index t = w.begin(); t < w.end(); ++t) acc += (s[t] - s.mu()) * (s[t] - s.mu());
  return acc;
}

double raw_sum(const TimeSeries& s, const Segment& r) {
  double acc = 0.0;
  for (Index t = r.begin; t < r.end; ++t) acc += (s[t] - s.mu()) * (s[t] - s.mu());
  return acc;
}

}  // namespace

TEST_SUITE("perturb") {
  TEST_CASE("perturbed series") {
    const TimeSeries base(oracle::two_regime(80, 40, 2.0, 12), 0.3);
    const Window w{40, 15};
    const PhiPath path(base, w);
    SUBCASE("identity at phi_obs") {
      const auto same = perturb_series(path, path.phi_obs());
      for (Index t = 0; t < base.size(); ++t) CHECK(same[t] == base[t]);
      CHECK(path.squares_at(path.phi_obs()) == base.centered_squares());
    }
    SUBCASE("phi of the perturbed series is phi") {
      for (double phi : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        CHECK(phi_statistic(perturb_series(path, phi), w) == doctest::Approx(phi).epsilon(1e-12));
      }
    }
    SUBCASE("window sum of squares is conserved") {
      const double c0 = window_sum(base, w);
      std::mt19937_64 rng(3);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int i = 0; i < 200; ++i) {
        const double phi = u(rng);
        CHECK(window_sum(perturb_series(path, phi), w) == doctest::Approx(c0).epsilon(1e-10));
      }
    }
    SUBCASE("pulling phi towards one half shrinks the quiet side") {
      REQUIRE(path.phi_obs() < 0.5);
      const auto x = perturb_series(path, 0.5);
      for (Index t = w.begin(); t < w.tau_hat; ++t) CHECK(std::abs(x[t] - x.mu()) >= std::abs(base[t] - base.mu()));
      for (Index t = w.tau_hat; t < w.end(); ++t) CHECK(std::abs(x[t] - x.mu()) <= std::abs(base[t] - base.mu()));
      const TimeSeries flipped(oracle::two_regime(80, 40, 0.5, 12), 0.0);
      const PhiPath p2(flipped, w);
      REQUIRE(p2.phi_obs() > 0.5);
      const auto y = perturb_series(p2, 0.5);
      for (Index t = w.begin(); t < w.tau_hat; ++t) CHECK(std::abs(y[t]) < std::abs(flipped[t]));
      for (Index t = w.tau_hat; t < w.end(); ++t) CHECK(std::abs(y[t]) > std::abs(flipped[t]));
    }
    SUBCASE("outside the window nothing moves") {
      const auto x = perturb_series(path, 0.9);
      for (Index t = 0; t < w.begin(); ++t) CHECK(x[t] == base[t]);
      for (Index t = w.end(); t < base.size(); ++t) CHECK(x[t] == base[t]);
    }
  }

  TEST_CASE("W reparameterisation") {
    SUBCASE("hand example") {
      const TimeSeries s({1.0, 1.0, 2.0, 5.0}, 0.0);
      const auto f = decompose_w(s, Window{2, 2});
      REQUIRE(f.w_left.size() == 1);
      CHECK(f.w_left[0] == doctest::Approx(0.5));
      CHECK(f.w_right[0] == doctest::Approx(4.0 / 29.0));
    }
    SUBCASE("all W one half, h = 3") {
      PhiFrame f;
      f.window = Window{3, 3};
      f.phi_obs = 0.4;
      f.c0_sq = 10.0;
      f.w_left = {0.5, 0.5};
      f.w_right = {0.5, 0.5};
      const auto sq = reconstruct_squares(f);
      // left block 4: x1 = W1 W2 C, x2 = (1 - W1) W2 C, x3 = (1 - W2) C
      const std::vector<double> expect{1.0, 1.0, 2.0, 1.5, 1.5, 3.0};
      REQUIRE(sq.size() == 6);
      for (int i = 0; i < 6; ++i) CHECK(sq[i] == doctest::Approx(expect[i]));
    }
    SUBCASE("roundtrip on random windows") {
      std::mt19937_64 rng(21);
      std::uniform_int_distribution<int> hd(1, 40);
      std::normal_distribution<double> z(0.0, 1.0);
      for (int rep = 0; rep < 1000; ++rep) {
        const Index h = hd(rng);
        std::vector<double> x(2 * h + 6);
        const double scale = std::exp(3.0 * z(rng));
        for (auto& v : x) v = 1.5 + scale * z(rng);
        const TimeSeries s(x, 1.5);
        const Window w{h + 3, h};
        const auto f = decompose_w(s, w);
        const auto sq = reconstruct_squares(f);
        const auto orig = s.centered_squares();
        // relative to the window's mean square; W cannot carry more for tiny entries
        const double unit = f.c0_sq / (2.0 * h);
        double left = 0.0, total = 0.0;
        for (Index k = 0; k < 2 * h; ++k) {
          CHECK(std::abs(sq[k] - orig[w.begin() + k]) <= 1e-10 * unit);
          total += sq[k];
          if (k < h) left += sq[k];
        }
        CHECK(total == doctest::Approx(f.c0_sq).epsilon(1e-10));
        CHECK(left == doctest::Approx(f.phi_obs * f.c0_sq).epsilon(1e-10));
      }
    }
    SUBCASE("null W coordinates follow their Beta laws") {
      const Index h = 6;
      std::vector<std::vector<double>> draws(h - 1);
      for (unsigned rep = 0; rep < 10000; ++rep) {
        const TimeSeries s(oracle::normals(2 * h, 9000 + rep), 0.0);
        const auto f = decompose_w(s, Window{h, h});
        for (Index i = 0; i + 1 < h; ++i) draws[i].push_back(f.w_left[i]);
      }
      for (Index i = 0; i + 1 < h; ++i) {
        auto& d = draws[i];
        std::sort(d.begin(), d.end());
        double ks = 0.0;
        const double a = 0.5 * static_cast<double>(i + 1);
        for (std::size_t k = 0; k < d.size(); ++k) {
          const double f = beta_cdf(d[k], a, 0.5);
          ks = std::max({ks, (k + 1.0) / d.size() - f, f - double(k) / d.size()});
        }
        CHECK(ks < 0.03);
      }
    }
    SUBCASE("W, phi and C0 are uncorrelated under the null") {
      const Index h = 4;
      std::vector<std::vector<double>> cols(2 * (h - 1) + 2);
      for (unsigned rep = 0; rep < 10000; ++rep) {
        const TimeSeries s(oracle::normals(2 * h, 40000 + rep), 0.0);
        const auto f = decompose_w(s, Window{h, h});
        std::size_t c = 0;
        for (double v : f.w_left) cols[c++].push_back(v);
        for (double v : f.w_right) cols[c++].push_back(v);
        cols[c++].push_back(f.phi_obs);
        cols[c++].push_back(f.c0_sq);
      }
      const auto corr = [](const std::vector<double>& a, const std::vector<double>& b) {
        const double n = static_cast<double>(a.size());
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          ma += a[i];
          mb += b[i];
        }
        ma /= n;
        mb /= n;
        double sab = 0, saa = 0, sbb = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          sab += (a[i] - ma) * (b[i] - mb);
          saa += (a[i] - ma) * (a[i] - ma);
          sbb += (b[i] - mb) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
      };
      for (std::size_t i = 0; i < cols.size(); ++i) {
        for (std::size_t j = i + 1; j < cols.size(); ++j) CHECK(std::abs(corr(cols[i], cols[j])) < 0.05);
      }
    }
  }

  TEST_CASE("cusum coefficients are linear in phi") {
    const TimeSeries base(oracle::two_regime(90, 50, 1.8, 31), 0.0);
    const Window w{50, 12};
    const PhiPath path(base, w);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (Segment seg : {Segment{0, 90}, Segment{10, 45}, Segment{40, 80}, Segment{55, 90}, Segment{0, 30}}) {
      const auto coeffs = cusum_phi_coeffs(path, seg);
      REQUIRE(coeffs.size() == seg.length() - 1);
      const bool disjoint = seg.end <= w.begin() || seg.begin >= w.end();
      for (Index k = 0; k < coeffs.size(); ++k) {
        const Index t = seg.begin + 1 + k;
        if (disjoint) CHECK(coeffs[k].slope == 0.0);
        CHECK(coeffs[k].at(path.phi_obs()) ==
              doctest::Approx(cusum_stat(base.centered_squares(), seg, t)).epsilon(1e-9));
      }
      for (int rep = 0; rep < 20; ++rep) {
        const double phi = u(rng);
        const auto sq = perturb_series(path, phi).centered_squares();
        for (Index k = 0; k < coeffs.size(); ++k) {
          const double direct = cusum_stat(sq, seg, seg.begin + 1 + k);
          CHECK(std::abs(coeffs[k].at(phi) - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
        }
      }
    }
  }

  TEST_CASE("closed-form window sums") {
    // every (s, e) on a small series exercises each placement relative to the window
    const TimeSeries base(oracle::normals(24, 77), 0.0);
    const Window w{12, 5};
    const PhiPath path(base, w);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (Index b = 0; b < 24; ++b) {
      for (Index e = b + 1; e <= 24; ++e) {
        const auto form = window_affine_sum(path, {b, e});
        const auto via_prefix = path.sum(b, e);
        CHECK(std::abs(form.offset - via_prefix.offset) <= 1e-9 * std::max(1.0, std::abs(via_prefix.offset)));
        CHECK(std::abs(form.slope - via_prefix.slope) <= 1e-9 * std::max(1.0, std::abs(via_prefix.slope)));
        if (e <= w.begin() || b >= w.end()) {
          CHECK(form.slope == 0.0);
          CHECK(form.offset == doctest::Approx(raw_sum(base, {b, e})));
        }
        for (int rep = 0; rep < 3; ++rep) {
          const double phi = u(rng);
          const double direct = raw_sum(perturb_series(path, phi), {b, e});
          CHECK(std::abs(form.at(phi) - direct) <= 1e-9 * std::max(1.0, direct));
        }
      }
    }
    SUBCASE("split forms add up") {
      for (Segment seg : {Segment{0, 24}, Segment{3, 15}, Segment{9, 20}}) {
        const auto c = lr_phi_coeffs(path, seg);
        for (Index t = seg.begin + 1; t < seg.end; ++t) {
          const auto right = window_affine_sum(path, {t, seg.end});
          const auto& left = c.left[t - seg.begin - 1];
          CHECK(left.slope + right.slope == doctest::Approx(c.total.slope).epsilon(1e-12));
          CHECK(left.offset + right.offset == doctest::Approx(c.total.offset).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("likelihood ratio along the path") {
    const TimeSeries base(oracle::two_regime(70, 35, 2.2, 41), 0.0);
    const PhiPath path(base, Window{35, 10});
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (Segment seg : {Segment{0, 70}, Segment{20, 50}, Segment{0, 22}, Segment{47, 70}}) {
      const auto c = lr_phi_coeffs(path, seg);
      const auto range = admissible_splits(StatKind::likelihood_ratio, seg);
      for (Index t = range.first; t <= range.last; ++t) {
        CHECK(lr_stat_phi(c, t, path.phi_obs()) == doctest::Approx(lr_stat(base, seg, t)).epsilon(1e-9));
      }
      const bool disjoint = seg.end <= 25 || seg.begin >= 45;
      for (int rep = 0; rep < 20; ++rep) {
        const double phi = u(rng);
        const auto x = perturb_series(path, phi);
        for (Index t = range.first; t <= range.last; ++t) {
          const double direct = lr_stat(x, seg, t);
          CHECK(std::abs(lr_stat_phi(c, t, phi) - direct) <= 1e-9 * std::max(1.0, std::abs(direct)));
          if (disjoint) CHECK(lr_stat_phi(c, t, phi) == doctest::Approx(lr_stat(base, seg, t)));
        }
      }
    }
  }
}

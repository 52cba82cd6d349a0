#ifndef VARSIG_TEST_ORACLES_HPP
#define VARSIG_TEST_ORACLES_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "varsig/types.hpp"

namespace oracle {

inline double beta_density(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0) / boost::math::beta(a, b);
}

template <class F>
double integrate(F f, double lo, double hi, unsigned depth = 15, double tol = 1e-13) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, depth, tol);
}

inline double beta_mass(double lo, double hi, double a, double b) {
  return integrate([&](double x) { return beta_density(x, a, b); }, lo, hi);
}

/// CUSUM straight from its definition, 1-based inclusive s..e, split after t.
inline double cusum(const std::vector<double>& y, std::size_t s, std::size_t e, std::size_t t) {
  double left = 0.0;
  double right = 0.0;
  for (std::size_t i = s; i <= t; ++i) left += y[i - 1];
  for (std::size_t i = t + 1; i <= e; ++i) right += y[i - 1];
  const double nl = static_cast<double>(t - s + 1);
  const double nr = static_cast<double>(e - t);
  return std::sqrt(nl * nr / (nl + nr)) * (left / nl - right / nr);
}

inline std::vector<double> normals(std::size_t n, unsigned seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> out(n);
  for (auto& x : out) x = z(rng);
  return out;
}

inline std::vector<double> two_regime(std::size_t n, std::size_t split, double sd2, unsigned seed) {
  auto x = normals(n, seed);
  for (std::size_t i = split; i < n; ++i) x[i] *= sd2;
  return x;
}

}  // namespace oracle

#endif

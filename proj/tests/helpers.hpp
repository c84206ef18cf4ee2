#pragma once

#include <initializer_list>
#include <random>
#include <vector>

#include "sortarm/types.hpp"

namespace test_helpers {

inline sortarm::JointVector make_joints(std::initializer_list<double> vals) {
  sortarm::JointVector j(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) j(i++) = v;
  return j;
}

/// Inverse-CDF Weibull sampler (independent of the fitting code under test).
inline std::vector<double> sample_weibull(std::mt19937_64& rng, double shape,
                                          double scale, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double q = u(rng);
    if (q >= 1.0) q = std::nextafter(1.0, 0.0);
    out.push_back(scale * std::pow(-std::log(1.0 - q), 1.0 / shape));
  }
  return out;
}

}  // namespace test_helpers

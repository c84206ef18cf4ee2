#pragma once

#include <cstddef>
#include <vector>

#include "sortarm/errors.hpp"
#include "sortarm/types.hpp"

namespace sortarm::stats {

/// Signed end-effector-minus-target components (cm) with their norms.
struct ErrorSample {
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double euclid_xy = 0.0, euclid_xyz = 0.0;

  static ErrorSample from_delta(const Vec3& delta);
};

/// Mean / sample standard deviation (n-1 divisor) / extremes of one series.
struct FieldSummary {
  double mean = 0.0, std_dev = 0.0, max = 0.0, min = 0.0;
};

/// Per-field aggregates over a set of error samples.
struct ErrorSummary {
  std::size_t count = 0;
  FieldSummary x, y, z, euclid_xy, euclid_xyz;
};

/// Aggregates one series; throws InsufficientDataError below 2 values.
FieldSummary summarize_series(const std::vector<double>& values);

/// Aggregates all five error fields; throws InsufficientDataError below
/// 2 samples.
ErrorSummary summarize(const std::vector<ErrorSample>& samples);

/// Probability-density histogram: density * bin_width sums to 1.
struct Histogram {
  double bin_width = 0.0;
  std::vector<double> edges;    ///< bins + 1 edges, starting at 0
  std::vector<double> density;  ///< 1/cm per bin

  double integral() const;
  double center(std::size_t bin) const {
    return 0.5 * (edges[bin] + edges[bin + 1]);
  }
};

/// Bins samples into [0, max] with the given width; density is
/// count / (n * bin_width). Throws InsufficientDataError on empty input and
/// std::invalid_argument for bin_width <= 0 or negative samples.
Histogram histogram_pdf(const std::vector<double>& samples, double bin_width);

/// Two-parameter Weibull fit.
struct WeibullFit {
  double shape = 0.0;           ///< k
  double scale = 0.0;           ///< lambda, cm
  double log_likelihood = 0.0;  ///< at (shape, scale) on the fitted samples
};

/// Log-likelihood of samples under Weibull(k, lambda).
double weibull_log_likelihood(const std::vector<double>& samples, double k,
                              double lambda);

/// Maximum-likelihood fit: 1-D bisection on the profile equation for the
/// shape, then the closed-form scale. Throws std::invalid_argument on
/// nonpositive samples, InsufficientDataError below 10 samples, and
/// NumericError (with an iterate dump) when the profile equation has no
/// root in the search bracket (e.g. constant samples).
WeibullFit weibull_fit(const std::vector<double>& samples);

/// P(X <= t) = 1 - exp(-(t/lambda)^k).
double weibull_cdf(const WeibullFit& fit, double t);

struct SuccessEstimate {
  double empirical = 0.0;    ///< fraction of samples strictly below threshold
  double weibull_cdf = 0.0;  ///< fitted-model CDF at the threshold
};

/// Both success-probability estimates at the threshold; propagates
/// weibull_fit errors. Throws std::invalid_argument for threshold <= 0.
SuccessEstimate success_probability(const std::vector<double>& samples,
                                    double threshold = 1.2);

}  // namespace sortarm::stats

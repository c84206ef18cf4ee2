#include "sortarm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sortarm::stats {

ErrorSample ErrorSample::from_delta(const Vec3& delta) {
  ErrorSample s;
  s.dx = delta.x();
  s.dy = delta.y();
  s.dz = delta.z();
  s.euclid_xy = std::hypot(delta.x(), delta.y());
  s.euclid_xyz = delta.norm();
  return s;
}

FieldSummary summarize_series(const std::vector<double>& values) {
  if (values.size() < 2)
    throw InsufficientDataError("summarize: needs at least 2 samples, got " +
                                std::to_string(values.size()));
  const double n = static_cast<double>(values.size());
  FieldSummary out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std_dev = std::sqrt(ss / (n - 1.0));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.min = *lo;
  out.max = *hi;
  return out;
}

ErrorSummary summarize(const std::vector<ErrorSample>& samples) {
  if (samples.size() < 2)
    throw InsufficientDataError("summarize: needs at least 2 samples, got " +
                                std::to_string(samples.size()));
  auto series = [&](auto pick) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const ErrorSample& s : samples) v.push_back(pick(s));
    return summarize_series(v);
  };
  ErrorSummary out;
  out.count = samples.size();
  out.x = series([](const ErrorSample& s) { return s.dx; });
  out.y = series([](const ErrorSample& s) { return s.dy; });
  out.z = series([](const ErrorSample& s) { return s.dz; });
  out.euclid_xy = series([](const ErrorSample& s) { return s.euclid_xy; });
  out.euclid_xyz = series([](const ErrorSample& s) { return s.euclid_xyz; });
  return out;
}

double Histogram::integral() const {
  return std::accumulate(density.begin(), density.end(), 0.0) * bin_width;
}

Histogram histogram_pdf(const std::vector<double>& samples, double bin_width) {
  if (samples.empty())
    throw InsufficientDataError("histogram_pdf: no samples");
  if (!(bin_width > 0.0))
    throw std::invalid_argument("histogram_pdf: bin_width must be > 0");
  double max_value = 0.0;
  for (double v : samples) {
    if (v < 0.0)
      throw std::invalid_argument("histogram_pdf: negative sample");
    max_value = std::max(max_value, v);
  }
  const std::size_t bins = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(max_value / bin_width - 1e-12)));

  Histogram h;
  h.bin_width = bin_width;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = static_cast<double>(i) * bin_width;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : samples) {
    auto bin = static_cast<std::size_t>(v / bin_width);
    if (bin >= bins) bin = bins - 1;  // the maximum lands in the last bin
    ++counts[bin];
  }
  const double norm = static_cast<double>(samples.size()) * bin_width;
  h.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i)
    h.density[i] = static_cast<double>(counts[i]) / norm;
  return h;
}

double weibull_log_likelihood(const std::vector<double>& samples, double k,
                              double lambda) {
  const double n = static_cast<double>(samples.size());
  double sum_log = 0.0, sum_pow = 0.0;
  for (double v : samples) {
    sum_log += std::log(v);
    sum_pow += std::pow(v / lambda, k);
  }
  return n * std::log(k) - n * k * std::log(lambda) + (k - 1.0) * sum_log -
         sum_pow;
}

WeibullFit weibull_fit(const std::vector<double>& samples) {
  if (samples.size() < 10)
    throw InsufficientDataError("weibull_fit: needs at least 10 samples, got " +
                                std::to_string(samples.size()));
  double max_value = 0.0;
  for (double v : samples) {
    if (!(v > 0.0))
      throw std::invalid_argument("weibull_fit: samples must be positive");
    max_value = std::max(max_value, v);
  }

  // Work on samples scaled by their maximum: the shape is scale-invariant
  // and powers of values <= 1 cannot overflow for large trial shapes.
  const double n = static_cast<double>(samples.size());
  std::vector<double> scaled;
  scaled.reserve(samples.size());
  double mean_log = 0.0;
  for (double v : samples) {
    scaled.push_back(v / max_value);
    mean_log += std::log(v / max_value);
  }
  mean_log /= n;

  // Profile equation g(k) = sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x);
  // g is increasing with g -> -inf as k -> 0+.
  auto profile = [&](double k) {
    double num = 0.0, den = 0.0;
    for (double v : scaled) {
      const double p = std::pow(v, k);
      num += p * std::log(v);
      den += p;
    }
    return num / den - 1.0 / k - mean_log;
  };

  double lo = 1e-3, hi = 1e3;
  const double g_hi = profile(hi);
  if (!(g_hi > 0.0)) {
    std::ostringstream msg;
    msg << "weibull_fit: profile equation has no root in [" << lo << ", " << hi
        << "]; g(" << hi << ") = " << g_hi
        << " (degenerate or near-constant samples)";
    throw NumericError(msg.str());
  }

  double k = 0.0, g_mid = 0.0;
  bool converged = false;
  std::ostringstream iterates;
  for (int iter = 0; iter < 500; ++iter) {
    k = 0.5 * (lo + hi);
    g_mid = profile(k);
    if (iter < 64) iterates << (iter ? " " : "") << k;
    if (std::abs(g_mid) < 1e-10) {
      converged = true;
      break;
    }
    (g_mid > 0.0 ? hi : lo) = k;
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "weibull_fit: bisection stalled at k = " << k << ", g(k) = " << g_mid
        << "; iterates: " << iterates.str();
    throw NumericError(msg.str());
  }

  double mean_pow = 0.0;
  for (double v : scaled) mean_pow += std::pow(v, k);
  mean_pow /= n;

  WeibullFit fit;
  fit.shape = k;
  fit.scale = max_value * std::pow(mean_pow, 1.0 / k);
  fit.log_likelihood = weibull_log_likelihood(samples, fit.shape, fit.scale);
  return fit;
}

double weibull_cdf(const WeibullFit& fit, double t) {
  if (t <= 0.0) return 0.0;
  return 1.0 - std::exp(-std::pow(t / fit.scale, fit.shape));
}

SuccessEstimate success_probability(const std::vector<double>& samples,
                                    double threshold) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("success_probability: threshold must be > 0");
  if (samples.empty())
    throw InsufficientDataError("success_probability: no samples");
  SuccessEstimate out;
  const auto below = std::count_if(samples.begin(), samples.end(),
                                   [&](double v) { return v < threshold; });
  out.empirical =
      static_cast<double>(below) / static_cast<double>(samples.size());
  out.weibull_cdf = weibull_cdf(weibull_fit(samples), threshold);
  return out;
}

}  // namespace sortarm::stats

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hsicreg {

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
[[nodiscard]] double ks_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Asymptotic two-sample KS critical value c(alpha) sqrt((m + n) / (m n)),
/// c(alpha) = sqrt(-log(alpha / 2) / 2).
[[nodiscard]] double ks_critical_value(double alpha, std::size_t m, std::size_t n);

/// One-sample KS distance against Uniform(0, 1).
[[nodiscard]] double ks_uniform_distance(const Eigen::Ref<const Eigen::VectorXd>& sample);

/// Equal-tailed exact binomial acceptance band for the rejection RATE of a
/// level-p test over `reps` trials at the given confidence.
[[nodiscard]] std::pair<double, double> binomial_band(double p, std::size_t reps, double confidence = 0.99);

/// Linear-interpolation sample quantile (R type 7).
[[nodiscard]] double quantile(const Eigen::Ref<const Eigen::VectorXd>& sample, double q);

struct Histogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
};

/// Equal-width histogram over [lo, hi]; values outside are clamped into the end bins.
[[nodiscard]] Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& sample, double lo, double hi,
                                  std::size_t bins);

}  // namespace hsicreg

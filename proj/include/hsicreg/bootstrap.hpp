#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "hsicreg/kernel.hpp"
#include "hsicreg/linreg.hpp"
#include "hsicreg/rng.hpp"

namespace hsicreg {

struct BootstrapConfig {
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0 = hardware concurrency; never affects results
};

struct TestResult {
    double statistic = 0.0;  // n * T_n
    double t_n = 0.0;
    Eigen::Index n = 0;
    Eigen::VectorXd null_draws;  // n * T_n^*, indexed by replicate
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
    Eigen::VectorXd beta_hat;
    double gram_condition = 0.0;
    KernelSpec kernel_x;
    KernelSpec kernel_e;
    double bandwidth_x = 0.0;
    double bandwidth_e = 0.0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::size_t redraws = 0;  // replicates whose first resample had a singular design
};

/// (1 + #{draws >= statistic}) / (B + 1)
[[nodiscard]] double pvalue_from_draws(double statistic, const Eigen::Ref<const Eigen::VectorXd>& draws);

/// Index streams for one bootstrap resample: predictor rows and centered
/// residuals are drawn from separate, independently keyed streams.
struct ResampleIndices {
    std::vector<Eigen::Index> rows;
    std::vector<Eigen::Index> errors;
};

[[nodiscard]] ResampleIndices resample_indices(std::uint64_t seed, std::size_t replicate, unsigned attempt,
                                               Eigen::Index n);

/// Draws of n * T_n^* under the product-measure residual bootstrap:
///   1. X*_i iid from the observed rows, eta*_i iid from the centered residuals;
///   2. Y*_i = g(X*_i)' beta_hat + eta*_i with beta_hat from the original fit;
///   3. refit by least squares, giving residuals e*_i;
///   4. record n * T_n^* computed from (X*, e*).
/// Kernel bandwidths are resolved once from the original data. A replicate
/// whose resampled design is singular is redrawn once; a second failure throws.
[[nodiscard]] Eigen::VectorXd bootstrap_null_draws(const Dataset& data, const DesignSpec& design,
                                                   const KernelSpec& kx, const KernelSpec& ke,
                                                   const BootstrapConfig& cfg);

/// Observed statistic, bootstrap null draws, p-value and one-sided decision.
[[nodiscard]] TestResult run_test(const Dataset& data, const DesignSpec& design, const KernelSpec& kx,
                                  const KernelSpec& ke, const BootstrapConfig& cfg, double alpha);

/// Permutation p-value for the HSIC between raw paired samples. Valid for
/// observed iid pairs; not for regression residuals, whose joint law with X is
/// not permutation invariant.
[[nodiscard]] double permutation_pvalue(const Eigen::Ref<const Eigen::MatrixXd>& u_points,
                                        const Eigen::Ref<const Eigen::MatrixXd>& v_points, const KernelSpec& ku,
                                        const KernelSpec& kv, const BootstrapConfig& cfg);

/// A simulated regression sample with its true errors.
struct SimulatedSample {
    Dataset data;
    Eigen::VectorXd eta;
};

using Sampler = std::function<SimulatedSample(Eigen::Index n, Stream& rng)>;

struct ContrastOptions {
    std::optional<DesignSpec> design;  // default: intercept + all predictors
    KernelSpec kernel_x;
    KernelSpec kernel_e;
    bool standardize = true;
    /// Replace the residual arm by true-error statistics on independent
    /// datasets, so both arms share one distribution.
    bool same_distribution_control = false;
};

struct ContrastResult {
    Eigen::VectorXd residual_stats;    // n * T_n(X, e)
    Eigen::VectorXd true_error_stats;  // n * theta_n(X, eta)
    double ks_distance = 0.0;
    double ks_critical_01 = 0.0;  // two-sample KS critical value at level 0.01
    bool under_sampled = false;
};

inline constexpr std::size_t kMinContrastReps = 30;

/// Null distributions of n T_n with residuals versus with the true errors,
/// over `reps` independent datasets from `sampler`.
[[nodiscard]] ContrastResult null_distribution_contrast(const Sampler& sampler, Eigen::Index n, std::size_t reps,
                                                        const BootstrapConfig& cfg,
                                                        const ContrastOptions& options = {});

}  // namespace hsicreg

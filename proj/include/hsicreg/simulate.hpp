#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsicreg/bootstrap.hpp"
#include "hsicreg/kernel.hpp"
#include "hsicreg/linreg.hpp"
#include "hsicreg/rng.hpp"

namespace hsicreg {

enum class ModelId {
    Model1,  // Y = 2 + 5 X1 - X2 + a X1 X2 + eta, X ~ U(0,1)^d0
    Model2,  // Y = X1 + a X2^2 + 2 X4 + eta, (X1,X2,X3) equicorrelated normal, X4 ~ Bernoulli(0.4)
    Custom,  // Y = 1 + X1 + ... + Xd0 + eta, X ~ N(0, I)
};

[[nodiscard]] std::string to_string(ModelId id);
[[nodiscard]] ModelId parse_model_id(const std::string& name);

/// Simulation design. For every model the error law is
///   eta | X1 ~ N(0, noise_sd^2 (10 + lambda |X1|) / 10),
/// i.e. (10 + lambda |X1|) / 10 scales the VARIANCE.
struct ModelSpec {
    ModelId model = ModelId::Model1;
    Eigen::Index n = 100;
    double a = 0.0;
    double lambda = 0.0;
    Eigen::Index d0 = 4;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

[[nodiscard]] SimulatedSample simulate_model1(const ModelSpec& spec, Stream& rng);
[[nodiscard]] SimulatedSample simulate_model2(const ModelSpec& spec, Stream& rng);
[[nodiscard]] SimulatedSample simulate_custom(const ModelSpec& spec, Stream& rng);
[[nodiscard]] SimulatedSample simulate(const ModelSpec& spec, Stream& rng);

/// Dataset drawn from the stream keyed by spec.seed alone.
[[nodiscard]] SimulatedSample simulate(const ModelSpec& spec);

/// Sampler for null_distribution_contrast bound to a model.
[[nodiscard]] Sampler make_sampler(ModelSpec spec);

/// Working linear model fitted in the studies: intercept plus main effects,
/// which omits the a-term and so is misspecified iff a != 0.
[[nodiscard]] DesignSpec working_design(const ModelSpec& spec);

struct PowerRow {
    ModelId model = ModelId::Model1;
    Eigen::Index n = 0;
    double a = 0.0;
    double lambda = 0.0;
    std::size_t reps = 0;  // completed trials
    std::size_t rejections = 0;
    std::size_t aborted = 0;
    double rejection_rate = 0.0;
    double monte_carlo_se = 0.0;
};

struct PowerTable {
    std::vector<PowerRow> rows;
    double alpha = 0.05;
    std::size_t bootstrap_replicates = 0;
};

struct PowerOptions {
    KernelSpec kernel_x;
    KernelSpec kernel_e;
    bool standardize = true;
};

/// Runs `reps` independent simulate -> standardize -> run_test trials per grid
/// cell. Trial r of a cell draws its data from Stream(cell.seed, r) and its
/// bootstrap from a seed derived from (cell.seed, r). Trials run in parallel
/// on cfg.workers threads; cfg.seed is unused.
[[nodiscard]] PowerTable power_study(const std::vector<ModelSpec>& grid, double alpha, const BootstrapConfig& cfg,
                                     std::size_t reps, const PowerOptions& options = {});

[[nodiscard]] PowerRow make_power_row(const ModelSpec& spec, std::size_t reps, std::size_t rejections,
                                      std::size_t aborted = 0);

struct MonotonicityViolation {
    std::size_t from_row = 0;  // indices into PowerTable::rows
    std::size_t to_row = 0;
    std::string axis;          // "lambda", "a" or "n"
    double drop = 0.0;         // rate(from) - rate(to)
    double standard_errors = 0.0;
};

/// Adjacent cells along the lambda, a or n axis (others held fixed) where the
/// estimated power drops by more than two combined Monte Carlo standard errors.
[[nodiscard]] std::vector<MonotonicityViolation> monotonicity_report(const PowerTable& table);

/// Published rejection percentages of the HSIC residual test at alpha = 0.05.
namespace reference {
inline constexpr std::array<double, 7> kLambdaGrid{0, 5, 10, 15, 20, 25, 50};
inline constexpr std::array<double, 7> kModel1LambdaN100{5, 15, 26, 31, 32, 36, 44};
inline constexpr std::array<double, 7> kModel1LambdaN200{5, 40, 68, 74, 78, 81, 88};
inline constexpr std::array<double, 7> kModel2LambdaN100{6, 27, 30, 34, 34, 34, 37};
inline constexpr std::array<double, 7> kModel2LambdaN200{5, 49, 63, 69, 71, 71, 75};
inline constexpr std::array<double, 8> kModel1AGrid{0, 1, 2, 3, 4, 5, 7, 10};
inline constexpr std::array<double, 8> kModel1AN100{4, 6, 11, 20, 34, 57, 89, 100};
inline constexpr std::array<double, 11> kModel2AGrid{0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.50, 0.60};
inline constexpr std::array<double, 11> kModel2AN100{6, 7, 10, 14, 22, 31, 43, 57, 69, 81, 92};
}  // namespace reference

}  // namespace hsicreg

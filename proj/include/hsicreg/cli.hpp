#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hsicreg/kernel.hpp"
#include "hsicreg/linreg.hpp"
#include "hsicreg/simulate.hpp"

namespace hsicreg::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsageError = 2,      // input, configuration or data error
    kNumericalError = 3,  // singular design or degenerate sample
};

inline constexpr int kSchemaVersion = 1;

enum class Format { Json, Csv };

struct RunConfig {
    std::string command;  // test | simulate | power | contrast

    // Input: a CSV file or a built-in model (exactly one for `test`).
    std::optional<std::string> input;
    std::string response = "y";
    std::vector<std::string> predictors;
    std::optional<std::string> design;
    std::optional<std::string> model;
    std::vector<long> n{100};
    std::vector<double> a{0.0};
    std::vector<double> lambda{0.0};
    std::optional<double> noise_sd;  // model default when unset
    long d0 = 0;  // 0 = model default
    std::optional<std::string> table;  // power grid preset

    KernelSpec kernel_x;
    KernelSpec kernel_e;
    std::optional<std::size_t> replicates;  // B; 1000 for test, 500 for power
    std::optional<std::size_t> reps;        // 300 for power, 500 for contrast
    std::uint64_t seed = 1;
    double alpha = 0.05;
    unsigned workers = 0;
    Format format = Format::Json;
    std::optional<std::string> out;
    bool standardize = true;
    bool control = false;
    std::size_t bins = 30;
};

/// Parses a design formula such as "1 + x1 + x2 + x1*x2 + x2^2" against the
/// predictor names. "1" adds the intercept; a*b is a product, a^2 a square.
[[nodiscard]] DesignSpec parse_design(const std::string& formula, const std::vector<std::string>& names);

/// Parses the "gaussian" kernel family and a bandwidth: a positive number
/// (fixed), "scaled" (dimension-scaled unit kernel) or "median".
[[nodiscard]] KernelSpec parse_kernel(const std::string& family, const std::string& bandwidth);

/// Power grid for a table preset (table1..table4) or the cartesian product of
/// cfg.n x cfg.a x cfg.lambda for cfg.model. Cell seeds derive from cfg.seed.
[[nodiscard]] std::vector<ModelSpec> power_grid(const RunConfig& cfg);

int cmd_test(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_power(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_contrast(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Full command line (args[0] is the program name). Output goes to `out`
/// unless --out is given; diagnostics and the run log go to `log`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& log);

}  // namespace hsicreg::cli

#include "hsicreg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "hsicreg/errors.hpp"
#include "hsicreg/parallel.hpp"

namespace hsicreg {

namespace {

constexpr std::uint64_t kDataChannel = 10;
constexpr std::uint64_t kTrialBootstrapChannel = 11;

double error_draw(const ModelSpec& spec, double x1, Stream& rng) {
    const double variance = spec.noise_sd * spec.noise_sd * (10.0 + spec.lambda * std::abs(x1)) / 10.0;
    return std::sqrt(variance) * rng.normal();
}

}  // namespace

std::string to_string(ModelId id) {
    switch (id) {
        case ModelId::Model1: return "model1";
        case ModelId::Model2: return "model2";
        case ModelId::Custom: return "custom";
    }
    return "unknown";
}

ModelId parse_model_id(const std::string& name) {
    if (name == "model1") return ModelId::Model1;
    if (name == "model2") return ModelId::Model2;
    if (name == "custom" || name == "linear") return ModelId::Custom;
    fail(ErrorKind::Config, "unknown model '" + name + "' (expected model1, model2 or custom)");
}

void ModelSpec::validate() const {
    if (n < 1) fail(ErrorKind::Config, "model: n must be at least 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::Config, "model: lambda must be >= 0");
    if (!std::isfinite(a)) fail(ErrorKind::Config, "model: a must be finite");
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) fail(ErrorKind::Config, "model: noise_sd must be positive");
    if (model == ModelId::Model1 && d0 < 2) fail(ErrorKind::Config, "model1 needs d0 >= 2");
    if (model == ModelId::Model2 && d0 != 4) fail(ErrorKind::Config, "model2 has exactly 4 predictors");
    if (model == ModelId::Custom && d0 < 1) fail(ErrorKind::Config, "custom model needs d0 >= 1");
}

SimulatedSample simulate_model1(const ModelSpec& spec, Stream& rng) {
    spec.validate();
    Eigen::MatrixXd x(spec.n, spec.d0);
    Eigen::VectorXd y(spec.n);
    Eigen::VectorXd eta(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        for (Eigen::Index j = 0; j < spec.d0; ++j) x(i, j) = rng.uniform();
        eta(i) = error_draw(spec, x(i, 0), rng);
        y(i) = 2.0 + 5.0 * x(i, 0) - x(i, 1) + spec.a * x(i, 0) * x(i, 1) + eta(i);
    }
    return {Dataset::make(std::move(x), std::move(y)), std::move(eta)};
}

SimulatedSample simulate_model2(const ModelSpec& spec, Stream& rng) {
    spec.validate();
    Eigen::Matrix3d corr;
    corr << 1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0;
    const Eigen::Matrix3d chol = corr.llt().matrixL();

    Eigen::MatrixXd x(spec.n, 4);
    Eigen::VectorXd y(spec.n);
    Eigen::VectorXd eta(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        Eigen::Vector3d z;
        for (int k = 0; k < 3; ++k) z(k) = rng.normal();
        x.row(i).head<3>() = (chol * z).transpose();
        x(i, 3) = rng.bernoulli(0.4) ? 1.0 : 0.0;
        eta(i) = error_draw(spec, x(i, 0), rng);
        y(i) = x(i, 0) + spec.a * x(i, 1) * x(i, 1) + 2.0 * x(i, 3) + eta(i);
    }
    return {Dataset::make(std::move(x), std::move(y)), std::move(eta)};
}

SimulatedSample simulate_custom(const ModelSpec& spec, Stream& rng) {
    spec.validate();
    Eigen::MatrixXd x(spec.n, spec.d0);
    Eigen::VectorXd y(spec.n);
    Eigen::VectorXd eta(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        for (Eigen::Index j = 0; j < spec.d0; ++j) x(i, j) = rng.normal();
        eta(i) = error_draw(spec, x(i, 0), rng);
        y(i) = 1.0 + x.row(i).sum() + eta(i);
    }
    return {Dataset::make(std::move(x), std::move(y)), std::move(eta)};
}

SimulatedSample simulate(const ModelSpec& spec, Stream& rng) {
    switch (spec.model) {
        case ModelId::Model1: return simulate_model1(spec, rng);
        case ModelId::Model2: return simulate_model2(spec, rng);
        case ModelId::Custom: return simulate_custom(spec, rng);
    }
    fail(ErrorKind::Config, "unknown model");
}

SimulatedSample simulate(const ModelSpec& spec) {
    Stream rng(spec.seed, 0, 0, kDataChannel);
    return simulate(spec, rng);
}

Sampler make_sampler(ModelSpec spec) {
    spec.validate();
    return [spec](Eigen::Index n, Stream& rng) {
        ModelSpec s = spec;
        s.n = n;
        return simulate(s, rng);
    };
}

DesignSpec working_design(const ModelSpec& spec) { return DesignSpec::linear(spec.d0); }

PowerRow make_power_row(const ModelSpec& spec, std::size_t reps, std::size_t rejections, std::size_t aborted) {
    PowerRow row{spec.model, spec.n, spec.a, spec.lambda, reps, rejections, aborted, 0.0, 0.0};
    if (reps > 0) {
        row.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
        row.monte_carlo_se = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / static_cast<double>(reps));
    }
    return row;
}

PowerTable power_study(const std::vector<ModelSpec>& grid, double alpha, const BootstrapConfig& cfg,
                       std::size_t reps, const PowerOptions& options) {
    if (reps < 1) fail(ErrorKind::Config, "power study needs reps >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "alpha must lie in (0, 1)");
    if (cfg.replicates < 1) fail(ErrorKind::Config, "bootstrap needs at least one replicate");
    for (const auto& cell : grid) cell.validate();

    enum Outcome : char { kAccept = 0, kReject = 1, kAborted = 2 };
    std::vector<char> outcome(grid.size() * reps, kAccept);

    parallel_for(outcome.size(), cfg.workers, [&](std::size_t t) {
        const ModelSpec& cell = grid[t / reps];
        const std::size_t r = t % reps;
        Stream rng(cell.seed, r, 0, kDataChannel);
        const SimulatedSample sample = simulate(cell, rng);
        const BootstrapConfig trial_cfg{cfg.replicates, derive_key(cell.seed, r, 0, kTrialBootstrapChannel), 1};
        try {
            const Dataset data = options.standardize ? standardize_dataset(sample.data).data : sample.data;
            const TestResult res =
                run_test(data, working_design(cell), options.kernel_x, options.kernel_e, trial_cfg, alpha);
            outcome[t] = res.reject ? kReject : kAccept;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Singular && e.kind() != ErrorKind::Degenerate) throw;
            outcome[t] = kAborted;
        }
    });

    PowerTable table;
    table.alpha = alpha;
    table.bootstrap_replicates = cfg.replicates;
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto first = outcome.begin() + static_cast<std::ptrdiff_t>(c * reps);
        const auto last = first + static_cast<std::ptrdiff_t>(reps);
        const auto rejections = static_cast<std::size_t>(std::count(first, last, kReject));
        const auto aborted = static_cast<std::size_t>(std::count(first, last, kAborted));
        table.rows.push_back(make_power_row(grid[c], reps - aborted, rejections, aborted));
    }
    return table;
}

std::vector<MonotonicityViolation> monotonicity_report(const PowerTable& table) {
    using Key = std::tuple<int, Eigen::Index, double, double>;
    std::vector<MonotonicityViolation> out;
    const auto& rows = table.rows;

    // Groups rows that agree on every field but `axis`, ordered along `axis`.
    auto scan = [&](const std::string& axis, auto key_of, auto coord_of) {
        std::map<Key, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < rows.size(); ++i) groups[key_of(rows[i])].push_back(i);
        for (auto& [key, members] : groups) {
            std::stable_sort(members.begin(), members.end(),
                             [&](std::size_t l, std::size_t r) { return coord_of(rows[l]) < coord_of(rows[r]); });
            for (std::size_t k = 1; k < members.size(); ++k) {
                const PowerRow& lo = rows[members[k - 1]];
                const PowerRow& hi = rows[members[k]];
                if (coord_of(lo) == coord_of(hi)) continue;
                const double se = std::hypot(lo.monte_carlo_se, hi.monte_carlo_se);
                const double drop = lo.rejection_rate - hi.rejection_rate;
                if (drop > 0.0 && drop > 2.0 * se) {
                    out.push_back({members[k - 1], members[k], axis, drop, se > 0.0 ? drop / se : INFINITY});
                }
            }
        }
    };

    auto model = [](const PowerRow& r) { return static_cast<int>(r.model); };
    scan("lambda", [&](const PowerRow& r) { return Key{model(r), r.n, r.a, 0.0}; },
         [](const PowerRow& r) { return r.lambda; });
    scan("a", [&](const PowerRow& r) { return Key{model(r), r.n, r.lambda, 0.0}; },
         [](const PowerRow& r) { return std::abs(r.a); });
    scan("n", [&](const PowerRow& r) { return Key{model(r), 0, r.a, r.lambda}; },
         [](const PowerRow& r) { return static_cast<double>(r.n); });
    return out;
}

}  // namespace hsicreg

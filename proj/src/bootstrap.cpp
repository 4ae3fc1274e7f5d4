#include "hsicreg/bootstrap.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hsicreg/errors.hpp"
#include "hsicreg/hsic.hpp"
#include "hsicreg/parallel.hpp"
#include "hsicreg/stats.hpp"

namespace hsicreg {

namespace {

// Stream channels under one (seed, replicate, attempt) key.
constexpr std::uint64_t kRowChannel = 0;
constexpr std::uint64_t kErrorChannel = 1;
constexpr std::uint64_t kPermutationChannel = 2;
constexpr std::uint64_t kContrastChannel = 3;
constexpr std::uint64_t kControlChannel = 4;

void check_config(const BootstrapConfig& cfg) {
    if (cfg.replicates < 1) fail(ErrorKind::Config, "bootstrap needs at least one replicate");
}

std::vector<Eigen::Index> draw_indices(Stream& rng, Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    return idx;
}

// Read-only state shared by all replicates.
struct Snapshot {
    Eigen::MatrixXd design;
    Eigen::MatrixXd gram_x;
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd centered_residuals;
    double bandwidth_e = 1.0;
};

struct Replicate {
    double value = 0.0;
    bool redrawn = false;
};

Replicate bootstrap_replicate(const Snapshot& snap, const BootstrapConfig& cfg, std::size_t b) {
    const Eigen::Index n = snap.design.rows();
    for (unsigned attempt = 0; attempt < 2; ++attempt) {
        const ResampleIndices idx = resample_indices(cfg.seed, b, attempt, n);
        const Eigen::MatrixXd design = snap.design(idx.rows, Eigen::all);
        const Eigen::VectorXd response = design * snap.beta_hat + snap.centered_residuals(idx.errors);
        FittedModel refit;
        try {
            refit = fit_ols(design, response);
        } catch (const SingularDesignError& e) {
            if (attempt == 1) {
                throw SingularDesignError("bootstrap replicate " + std::to_string(b) +
                                              ": resampled design singular on two draws; " + e.what(),
                                          e.columns(), e.condition());
            }
            continue;
        }
        // k(X*_i, X*_j) is an entry of the original Gram matrix.
        const Eigen::MatrixXd gram_x = snap.gram_x(idx.rows, idx.rows);
        const auto stat = hsic_vstat(gram_x, gaussian_gram(refit.residuals, snap.bandwidth_e));
        return {stat.scaled, attempt > 0};
    }
    return {};
}

}  // namespace

double pvalue_from_draws(double statistic, const Eigen::Ref<const Eigen::VectorXd>& draws) {
    const auto exceed = (draws.array() >= statistic).count();
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(draws.size()) + 1.0);
}

ResampleIndices resample_indices(std::uint64_t seed, std::size_t replicate, unsigned attempt, Eigen::Index n) {
    Stream rows(seed, replicate, attempt, kRowChannel);
    Stream errors(seed, replicate, attempt, kErrorChannel);
    return {draw_indices(rows, n), draw_indices(errors, n)};
}

namespace {

struct Prepared {
    Snapshot snap;
    FittedModel fit;
    double bandwidth_x = 0.0;
    HsicValue<double> observed;
};

Prepared prepare(const Dataset& data, const DesignSpec& design, const KernelSpec& kx, const KernelSpec& ke) {
    Prepared p;
    p.snap.design = build_design(data, design);
    p.fit = fit_ols(p.snap.design, data.response);
    p.bandwidth_x = resolve_bandwidth(data.predictors, kx);
    p.snap.bandwidth_e = resolve_bandwidth(p.fit.residuals, ke);
    p.snap.gram_x = gaussian_gram(data.predictors, p.bandwidth_x);
    p.snap.beta_hat = p.fit.beta_hat;
    p.snap.centered_residuals = p.fit.centered_residuals;
    p.observed = hsic_vstat(p.snap.gram_x, gaussian_gram(p.fit.residuals, p.snap.bandwidth_e));
    return p;
}

Eigen::VectorXd draw_all(const Snapshot& snap, const BootstrapConfig& cfg, std::size_t* redraws) {
    check_config(cfg);
    Eigen::VectorXd draws(static_cast<Eigen::Index>(cfg.replicates));
    std::vector<char> redrawn(cfg.replicates, 0);
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t b) {
        const Replicate r = bootstrap_replicate(snap, cfg, b);
        draws(static_cast<Eigen::Index>(b)) = r.value;
        redrawn[b] = r.redrawn ? 1 : 0;
    });
    if (redraws != nullptr) *redraws = static_cast<std::size_t>(std::count(redrawn.begin(), redrawn.end(), 1));
    return draws;
}

}  // namespace

Eigen::VectorXd bootstrap_null_draws(const Dataset& data, const DesignSpec& design, const KernelSpec& kx,
                                     const KernelSpec& ke, const BootstrapConfig& cfg) {
    check_config(cfg);
    return draw_all(prepare(data, design, kx, ke).snap, cfg, nullptr);
}

TestResult run_test(const Dataset& data, const DesignSpec& design, const KernelSpec& kx, const KernelSpec& ke,
                    const BootstrapConfig& cfg, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::Config, "alpha must lie in (0, 1)");
    check_config(cfg);
    const Prepared p = prepare(data, design, kx, ke);

    TestResult r;
    r.n = data.n();
    r.t_n = p.observed.t_n;
    r.statistic = p.observed.scaled;
    r.null_draws = draw_all(p.snap, cfg, &r.redraws);
    r.p_value = pvalue_from_draws(r.statistic, r.null_draws);
    r.alpha = alpha;
    r.reject = r.p_value <= alpha;
    r.beta_hat = p.fit.beta_hat;
    r.gram_condition = p.fit.gram_condition;
    r.kernel_x = kx;
    r.kernel_e = ke;
    r.bandwidth_x = p.bandwidth_x;
    r.bandwidth_e = p.snap.bandwidth_e;
    r.replicates = cfg.replicates;
    r.seed = cfg.seed;
    return r;
}

double permutation_pvalue(const Eigen::Ref<const Eigen::MatrixXd>& u_points,
                          const Eigen::Ref<const Eigen::MatrixXd>& v_points, const KernelSpec& ku,
                          const KernelSpec& kv, const BootstrapConfig& cfg) {
    check_config(cfg);
    if (u_points.rows() != v_points.rows()) fail(ErrorKind::Input, "permutation_pvalue: samples differ in length");
    const Eigen::Index n = u_points.rows();
    const Eigen::MatrixXd gram_u = gram_matrix(u_points, ku);
    const Eigen::MatrixXd gram_v = gram_matrix(v_points, kv);
    const double observed = hsic_vstat(gram_u, gram_v).t_n;

    Eigen::VectorXd draws(static_cast<Eigen::Index>(cfg.replicates));
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t b) {
        Stream rng(cfg.seed, b, 0, kPermutationChannel);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.below(i)]);
        }
        const Eigen::MatrixXd permuted = gram_v(perm, perm);
        draws(static_cast<Eigen::Index>(b)) = hsic_vstat(gram_u, permuted).t_n;
    });
    return pvalue_from_draws(observed, draws);
}

ContrastResult null_distribution_contrast(const Sampler& sampler, Eigen::Index n, std::size_t reps,
                                          const BootstrapConfig& cfg, const ContrastOptions& options) {
    if (reps < 1) fail(ErrorKind::Config, "contrast needs at least one repetition");
    if (!sampler) fail(ErrorKind::Config, "contrast: no sampler");

    auto draw = [&](std::uint64_t channel, std::size_t r) {
        Stream rng(cfg.seed, r, 0, channel);
        SimulatedSample s = sampler(n, rng);
        if (options.standardize) {
            const StandardizedDataset sd = standardize_dataset(s.data);
            s.eta /= sd.response_sd;
            s.data = sd.data;
        }
        return s;
    };

    ContrastResult out;
    out.residual_stats.resize(static_cast<Eigen::Index>(reps));
    out.true_error_stats.resize(static_cast<Eigen::Index>(reps));
    parallel_for(reps, cfg.workers, [&](std::size_t r) {
        const auto i = static_cast<Eigen::Index>(r);
        const SimulatedSample s = draw(kContrastChannel, r);
        out.true_error_stats(i) = hsic_pairs_stat(s.data.predictors, s.eta, options.kernel_x, options.kernel_e).scaled;
        if (options.same_distribution_control) {
            const SimulatedSample other = draw(kControlChannel, r);
            out.residual_stats(i) =
                hsic_pairs_stat(other.data.predictors, other.eta, options.kernel_x, options.kernel_e).scaled;
        } else {
            const DesignSpec design = options.design ? *options.design : DesignSpec::linear(s.data.dim());
            out.residual_stats(i) = residual_hsic_stat(s.data, design, options.kernel_x, options.kernel_e).value.scaled;
        }
    });

    out.ks_distance = ks_distance(out.residual_stats, out.true_error_stats);
    out.ks_critical_01 = ks_critical_value(0.01, reps, reps);
    out.under_sampled = reps < kMinContrastReps;
    return out;
}

}  // namespace hsicreg

#include "hsicreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hsicreg/bootstrap.hpp"
#include "hsicreg/csv.hpp"
#include "hsicreg/errors.hpp"
#include "hsicreg/stats.hpp"

namespace hsicreg::cli {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(trim(item));
    return parts;
}

ordered_json to_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

// `resolved` is null when the bandwidth depends on the data of each trial.
ordered_json kernel_json(const KernelSpec& spec, const ordered_json& resolved) {
    ordered_json j = {{"family", "gaussian"}, {"rule", to_string(spec.rule)}};
    if (spec.rule == BandwidthRule::DimensionScaled) j["scale"] = spec.bandwidth;
    j["bandwidth"] = resolved;
    return j;
}

ordered_json study_kernel_json(const KernelSpec& spec) {
    return kernel_json(spec, spec.rule == BandwidthRule::Fixed ? ordered_json(spec.bandwidth) : ordered_json());
}

ModelSpec model_spec(const RunConfig& cfg, const std::string& fallback, std::size_t which_n = 0,
                     std::size_t which_a = 0, std::size_t which_lambda = 0) {
    ModelSpec spec;
    spec.model = parse_model_id(cfg.model.value_or(fallback));
    spec.d0 = spec.model == ModelId::Custom ? 1 : 4;
    if (cfg.d0 > 0) spec.d0 = cfg.d0;
    spec.noise_sd = cfg.noise_sd.value_or(spec.model == ModelId::Custom ? std::sqrt(0.1) : 1.0);
    spec.n = cfg.n.at(which_n);
    spec.a = cfg.a.at(which_a);
    spec.lambda = cfg.lambda.at(which_lambda);
    spec.seed = cfg.seed;
    spec.validate();
    return spec;
}

ordered_json model_json(const ModelSpec& spec) {
    return {{"model", to_string(spec.model)}, {"n", spec.n},          {"a", spec.a},
            {"lambda", spec.lambda},          {"d0", spec.d0},        {"noise_sd", spec.noise_sd}};
}

// Writes to --out when given, otherwise to `out`.
void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& write) {
    if (!cfg.out) {
        write(out);
        return;
    }
    std::ofstream file(*cfg.out, std::ios::binary);
    if (!file) fail(ErrorKind::Input, "cannot write '" + *cfg.out + "'");
    write(file);
    if (!file) fail(ErrorKind::Input, "failed writing '" + *cfg.out + "'");
}

void write_json(std::ostream& os, const ordered_json& doc) { os << doc.dump(2) << '\n'; }

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Singular:
        case ErrorKind::Degenerate: return kNumericalError;
        default: return kUsageError;
    }
}

}  // namespace

DesignSpec parse_design(const std::string& formula, const std::vector<std::string>& names) {
    auto index_of = [&](const std::string& name) -> Eigen::Index {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) fail(ErrorKind::Config, "design: unknown predictor '" + name + "'");
        return static_cast<Eigen::Index>(it - names.begin());
    };

    DesignSpec spec;
    for (const std::string& term : split(formula, '+')) {
        if (term.empty()) fail(ErrorKind::Config, "design: empty term in '" + formula + "'");
        if (term == "1") {
            spec.terms.push_back(DesignTerm::intercept());
        } else if (const auto star = term.find('*'); star != std::string::npos) {
            const std::string lhs = trim(term.substr(0, star));
            const std::string rhs = trim(term.substr(star + 1));
            spec.terms.push_back(DesignTerm::product(index_of(lhs), index_of(rhs), lhs + "*" + rhs));
        } else if (const auto caret = term.find('^'); caret != std::string::npos) {
            if (trim(term.substr(caret + 1)) != "2") fail(ErrorKind::Config, "design: only ^2 is supported");
            const std::string base = trim(term.substr(0, caret));
            spec.terms.push_back(DesignTerm::square(index_of(base), base + "^2"));
        } else {
            spec.terms.push_back(DesignTerm::coordinate(index_of(term), term));
        }
    }
    if (spec.terms.empty()) fail(ErrorKind::Config, "design: no terms");
    return spec;
}

KernelSpec parse_kernel(const std::string& family, const std::string& bandwidth) {
    if (family != "gaussian") fail(ErrorKind::Config, "unknown kernel family '" + family + "'");
    if (bandwidth == "median") return KernelSpec::gaussian_median();
    if (bandwidth == "scaled") return KernelSpec::gaussian_scaled();
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(bandwidth, &used);
        if (used != bandwidth.size()) throw std::invalid_argument(bandwidth);
    } catch (const std::exception&) {
        fail(ErrorKind::Config,
             "bandwidth must be a positive number, 'scaled' or 'median', got '" + bandwidth + "'");
    }
    KernelSpec spec = KernelSpec::gaussian(value);
    spec.validate();
    return spec;
}

std::vector<ModelSpec> power_grid(const RunConfig& cfg) {
    RunConfig grid_cfg = cfg;
    if (cfg.table) {
        const std::string& t = *cfg.table;
        const std::vector<double> lambdas(reference::kLambdaGrid.begin(), reference::kLambdaGrid.end());
        if (t == "table1" || t == "table2") {
            grid_cfg.model = t == "table1" ? "model1" : "model2";
            grid_cfg.n = {100, 200};
            grid_cfg.a = {0.0};
            grid_cfg.lambda = lambdas;
        } else if (t == "table3") {
            grid_cfg.model = "model1";
            grid_cfg.n = {100};
            grid_cfg.a.assign(reference::kModel1AGrid.begin(), reference::kModel1AGrid.end());
            grid_cfg.lambda = {0.0};
        } else if (t == "table4") {
            grid_cfg.model = "model2";
            grid_cfg.n = {100};
            grid_cfg.a.assign(reference::kModel2AGrid.begin(), reference::kModel2AGrid.end());
            grid_cfg.lambda = {0.0};
        } else {
            fail(ErrorKind::Config, "unknown table preset '" + t + "' (expected table1..table4)");
        }
    }

    std::vector<ModelSpec> grid;
    for (std::size_t i = 0; i < grid_cfg.n.size(); ++i) {
        for (std::size_t j = 0; j < grid_cfg.a.size(); ++j) {
            for (std::size_t k = 0; k < grid_cfg.lambda.size(); ++k) {
                ModelSpec spec = model_spec(grid_cfg, "model1", i, j, k);
                spec.seed = derive_key(cfg.seed, grid.size());
                grid.push_back(spec);
            }
        }
    }
    if (grid.empty()) fail(ErrorKind::Config, "power: empty grid");
    return grid;
}

int cmd_test(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    if (cfg.input.has_value() == cfg.model.has_value()) {
        fail(ErrorKind::Config, "test: give exactly one of --input or --model");
    }
    ordered_json source;
    Dataset data;
    if (cfg.input) {
        data = load_csv(*cfg.input, cfg.response, cfg.predictors);
        std::string cols;
        for (const auto& name : data.names) cols += (cols.empty() ? "" : ",") + name;
        log << "loaded " << data.n() << " rows from " << *cfg.input << "; response " << cfg.response
            << "; predictors " << cols << '\n';
        source = {{"type", "csv"}, {"path", *cfg.input}, {"response", cfg.response}};
    } else {
        const ModelSpec spec = model_spec(cfg, "model1");
        data = simulate(spec).data;
        source = {{"type", "model"}, {"spec", model_json(spec)}};
    }

    if (cfg.standardize) data = standardize_dataset(data).data;
    const DesignSpec design = cfg.design ? parse_design(*cfg.design, data.names) : DesignSpec::linear(data.dim());
    if (data.n() < design.size() + 2) {
        fail(ErrorKind::Input, "test: " + std::to_string(data.n()) + " observations for " +
                                   std::to_string(design.size()) + " design terms");
    }

    const BootstrapConfig boot{cfg.replicates.value_or(1000), cfg.seed, cfg.workers};
    const TestResult r = run_test(data, design, cfg.kernel_x, cfg.kernel_e, boot, cfg.alpha);
    if (r.redraws > 0) log << r.redraws << " bootstrap replicate(s) redrawn after a singular resample\n";

    const std::vector<std::string> terms = design.names();
    if (cfg.format == Format::Csv) {
        emit(cfg, out, [&](std::ostream& os) {
            os << "n,statistic,t_n,p_value,alpha,reject,B,seed,bandwidth_x,bandwidth_e";
            for (const auto& t : terms) os << ",beta[" << t << ']';
            os << '\n';
            os << r.n << ',' << format_double(r.statistic) << ',' << format_double(r.t_n) << ','
               << format_double(r.p_value) << ',' << format_double(r.alpha) << ',' << (r.reject ? "true" : "false")
               << ',' << r.replicates << ',' << r.seed << ',' << format_double(r.bandwidth_x) << ','
               << format_double(r.bandwidth_e);
            for (Eigen::Index j = 0; j < r.beta_hat.size(); ++j) os << ',' << format_double(r.beta_hat(j));
            os << '\n';
        });
        return kOk;
    }

    ordered_json beta = ordered_json::object();
    for (std::size_t j = 0; j < terms.size(); ++j) beta[terms[j]] = r.beta_hat(static_cast<Eigen::Index>(j));
    const ordered_json doc = {
        {"schema_version", kSchemaVersion},
        {"command", "test"},
        {"source", source},
        {"n", r.n},
        {"predictors", data.names},
        {"design", terms},
        {"standardized", cfg.standardize},
        {"kernel_x", kernel_json(r.kernel_x, r.bandwidth_x)},
        {"kernel_e", kernel_json(r.kernel_e, r.bandwidth_e)},
        {"bootstrap", {{"B", r.replicates}, {"seed", r.seed}, {"redraws", r.redraws}}},
        {"statistic", r.statistic},
        {"t_n", r.t_n},
        {"p_value", r.p_value},
        {"alpha", r.alpha},
        {"reject", r.reject},
        {"beta_hat", beta},
        {"gram_condition", r.gram_condition},
        {"null_quantiles",
         {{"0.50", quantile(r.null_draws, 0.50)},
          {"0.90", quantile(r.null_draws, 0.90)},
          {"0.95", quantile(r.null_draws, 0.95)},
          {"0.99", quantile(r.null_draws, 0.99)}}},
    };
    emit(cfg, out, [&](std::ostream& os) { write_json(os, doc); });
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const ModelSpec spec = model_spec(cfg, "model1");
    const SimulatedSample sample = simulate(spec);
    log << "simulated " << spec.n << " rows from " << to_string(spec.model) << '\n';
    if (cfg.format == Format::Csv) {
        emit(cfg, out, [&](std::ostream& os) { write_sample_csv(os, sample); });
        return kOk;
    }
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < sample.data.n(); ++i) {
        ordered_json row = ordered_json::object();
        for (Eigen::Index j = 0; j < sample.data.dim(); ++j) {
            row[sample.data.names[static_cast<std::size_t>(j)]] = sample.data.predictors(i, j);
        }
        row["y"] = sample.data.response(i);
        row["eta"] = sample.eta(i);
        rows.push_back(std::move(row));
    }
    const ordered_json doc = {{"schema_version", kSchemaVersion},
                              {"command", "simulate"},
                              {"spec", model_json(spec)},
                              {"seed", spec.seed},
                              {"rows", rows}};
    emit(cfg, out, [&](std::ostream& os) { write_json(os, doc); });
    return kOk;
}

int cmd_power(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const std::vector<ModelSpec> grid = power_grid(cfg);
    const BootstrapConfig boot{cfg.replicates.value_or(500), cfg.seed, cfg.workers};
    const std::size_t reps = cfg.reps.value_or(300);
    log << "power study: " << grid.size() << " cells x " << reps << " reps, B = " << boot.replicates << '\n';
    const PowerTable table = power_study(grid, cfg.alpha, boot, reps, {cfg.kernel_x, cfg.kernel_e, cfg.standardize});
    const auto violations = monotonicity_report(table);

    if (cfg.format == Format::Csv) {
        emit(cfg, out, [&](std::ostream& os) {
            os << "model,n,a,lambda,reps,rejections,aborted,rejection_rate,monte_carlo_se\n";
            for (const auto& row : table.rows) {
                os << to_string(row.model) << ',' << row.n << ',' << format_double(row.a) << ','
                   << format_double(row.lambda) << ',' << row.reps << ',' << row.rejections << ',' << row.aborted
                   << ',' << format_double(row.rejection_rate) << ',' << format_double(row.monte_carlo_se) << '\n';
            }
        });
        return kOk;
    }

    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
        rows.push_back({{"model", to_string(row.model)},
                        {"n", row.n},
                        {"a", row.a},
                        {"lambda", row.lambda},
                        {"reps", row.reps},
                        {"rejections", row.rejections},
                        {"aborted", row.aborted},
                        {"rejection_rate", row.rejection_rate},
                        {"monte_carlo_se", row.monte_carlo_se}});
    }
    ordered_json viol = ordered_json::array();
    for (const auto& v : violations) {
        viol.push_back({{"from_row", v.from_row},
                        {"to_row", v.to_row},
                        {"axis", v.axis},
                        {"drop", v.drop},
                        {"standard_errors", v.standard_errors}});
    }
    const ordered_json doc = {{"schema_version", kSchemaVersion},
                              {"command", "power"},
                              {"alpha", table.alpha},
                              {"B", table.bootstrap_replicates},
                              {"seed", cfg.seed},
                              {"standardized", cfg.standardize},
                              {"kernel_x", study_kernel_json(cfg.kernel_x)},
                              {"kernel_e", study_kernel_json(cfg.kernel_e)},
                              {"rows", rows},
                              {"monotonicity_violations", viol}};
    emit(cfg, out, [&](std::ostream& os) { write_json(os, doc); });
    return kOk;
}

int cmd_contrast(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
    const ModelSpec spec = model_spec(cfg, "custom");
    const std::size_t reps = cfg.reps.value_or(500);
    ContrastOptions options;
    options.kernel_x = cfg.kernel_x;
    options.kernel_e = cfg.kernel_e;
    options.standardize = cfg.standardize;
    options.same_distribution_control = cfg.control;
    if (cfg.design) {
        std::vector<std::string> names;
        for (Eigen::Index j = 0; j < spec.d0; ++j) names.push_back("x" + std::to_string(j + 1));
        options.design = parse_design(*cfg.design, names);
    }
    const ContrastResult r =
        null_distribution_contrast(make_sampler(spec), spec.n, reps, {1, cfg.seed, cfg.workers}, options);
    if (r.under_sampled) log << "warning: " << reps << " repetitions is too few for a meaningful KS comparison\n";

    if (cfg.format == Format::Csv) {
        emit(cfg, out, [&](std::ostream& os) {
            os << "rep,residual_stat,true_error_stat\n";
            for (Eigen::Index i = 0; i < r.residual_stats.size(); ++i) {
                os << i << ',' << format_double(r.residual_stats(i)) << ',' << format_double(r.true_error_stats(i))
                   << '\n';
            }
        });
        return kOk;
    }

    const double lo = std::min(r.residual_stats.minCoeff(), r.true_error_stats.minCoeff());
    double hi = std::max(r.residual_stats.maxCoeff(), r.true_error_stats.maxCoeff());
    if (!(hi > lo)) hi = lo + 1.0;
    const Histogram h_res = histogram(r.residual_stats, lo, hi, cfg.bins);
    const Histogram h_true = histogram(r.true_error_stats, lo, hi, cfg.bins);
    const ordered_json doc = {{"schema_version", kSchemaVersion},
                              {"command", "contrast"},
                              {"spec", model_json(spec)},
                              {"seed", cfg.seed},
                              {"reps", reps},
                              {"standardized", cfg.standardize},
                              {"control", cfg.control},
                              {"kernel_x", study_kernel_json(cfg.kernel_x)},
                              {"kernel_e", study_kernel_json(cfg.kernel_e)},
                              {"ks_distance", r.ks_distance},
                              {"ks_critical_01", r.ks_critical_01},
                              {"distinct", r.ks_distance > r.ks_critical_01},
                              {"under_sampled", r.under_sampled},
                              {"histogram",
                               {{"edges", h_res.edges},
                                {"residual_counts", h_res.counts},
                                {"true_error_counts", h_true.counts}}},
                              {"residual_stats", to_json(r.residual_stats)},
                              {"true_error_stats", to_json(r.true_error_stats)}};
    emit(cfg, out, [&](std::ostream& os) { write_json(os, doc); });
    return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& log) {
    CLI::App app{"HSIC residual test for independence and goodness-of-fit of linear models", "hsicreg"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string kernel_x = "gaussian";
    std::string kernel_e = "gaussian";
    std::string bandwidth_x = "scaled";
    std::string bandwidth_e = "scaled";
    std::string format = "json";
    bool no_standardize = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", cfg.seed, "Seed for all randomness")->capture_default_str();
        sub->add_option("--workers", cfg.workers, "Worker threads (0 = all cores); never changes output");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", cfg.out, "Output file (default stdout)");
    };
    auto add_model = [&](CLI::App* sub, bool grid) {
        sub->add_option("--model", cfg.model, "Built-in model: model1, model2 or custom");
        auto* n = sub->add_option("--n", cfg.n, "Sample size");
        auto* a = sub->add_option("--a", cfg.a, "Misspecification coefficient a");
        auto* l = sub->add_option("--lambda", cfg.lambda, "Heteroscedasticity parameter lambda");
        if (grid) {
            n->delimiter(',');
            a->delimiter(',');
            l->delimiter(',');
        } else {
            n->expected(1);
            a->expected(1);
            l->expected(1);
        }
        sub->add_option("--noise-sd", cfg.noise_sd, "Base error standard deviation");
        sub->add_option("--d0", cfg.d0, "Predictor dimension (model1, custom)");
    };
    auto add_kernels = [&](CLI::App* sub) {
        sub->add_option("--kernel-x", kernel_x, "Predictor kernel family")->check(CLI::IsMember({"gaussian"}));
        sub->add_option("--kernel-e", kernel_e, "Residual kernel family")->check(CLI::IsMember({"gaussian"}));
        sub->add_option("--bandwidth-x", bandwidth_x, "Predictor kernel bandwidth: a number, 'scaled' or 'median'")
            ->capture_default_str();
        sub->add_option("--bandwidth-e", bandwidth_e, "Residual kernel bandwidth: a number, 'scaled' or 'median'")
            ->capture_default_str();
        sub->add_flag("--no-standardize", no_standardize, "Skip standardizing predictors and response");
    };
    auto add_bootstrap = [&](CLI::App* sub) {
        sub->add_option("--B", cfg.replicates, "Bootstrap replicates");
        sub->add_option("--alpha", cfg.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    };

    auto* test = app.add_subcommand("test", "Run the residual HSIC test on a CSV file or simulated model");
    test->add_option("--input", cfg.input, "CSV file with a header row");
    test->add_option("--response", cfg.response, "Response column")->capture_default_str();
    test->add_option("--predictors", cfg.predictors, "Predictor columns (default: all others)")->delimiter(',');
    test->add_option("--design", cfg.design, "Design formula, e.g. '1 + x1 + x2 + x1*x2 + x2^2'");
    add_model(test, false);
    add_kernels(test);
    add_bootstrap(test);
    add_common(test);

    auto* simulate_cmd = app.add_subcommand("simulate", "Write a simulated dataset");
    add_model(simulate_cmd, false);
    add_common(simulate_cmd);

    auto* power = app.add_subcommand("power", "Monte Carlo size/power study");
    power->add_option("--table", cfg.table, "Grid preset: table1, table2, table3 or table4");
    power->add_option("--reps", cfg.reps, "Monte Carlo trials per cell");
    add_model(power, true);
    add_kernels(power);
    add_bootstrap(power);
    add_common(power);

    auto* contrast = app.add_subcommand("contrast", "Null law of n*T_n with residuals vs true errors");
    contrast->add_option("--reps", cfg.reps, "Independent datasets");
    contrast->add_option("--design", cfg.design, "Design formula over x1..xd0");
    contrast->add_flag("--control", cfg.control, "Compare true-error statistics on independent datasets instead");
    contrast->add_option("--bins", cfg.bins, "Histogram bins");
    add_model(contrast, false);
    add_kernels(contrast);
    add_common(contrast);

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, log) == 0 ? kOk : kUsageError;
    }

    try {
        cfg.format = format == "csv" ? Format::Csv : Format::Json;
        cfg.standardize = !no_standardize;
        cfg.kernel_x = parse_kernel(kernel_x, bandwidth_x);
        cfg.kernel_e = parse_kernel(kernel_e, bandwidth_e);
        if (cfg.replicates && *cfg.replicates < 1) fail(ErrorKind::Config, "--B must be at least 1");

        cfg.command = app.get_subcommands().front()->get_name();
        if (test->parsed()) return cmd_test(cfg, out, log);
        if (simulate_cmd->parsed()) return cmd_simulate(cfg, out, log);
        if (power->parsed()) return cmd_power(cfg, out, log);
        return cmd_contrast(cfg, out, log);
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kUsageError;
    }
}

}  // namespace hsicreg::cli

#include <doctest.h>

#include <cmath>
#include <vector>

#include "hsicreg/simulate.hpp"
#include "hsicreg/stats.hpp"

using namespace hsicreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double sample_var(const VectorXd& v) {
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

double corr(const VectorXd& a, const VectorXd& b) {
    const VectorXd ac = a.array() - a.mean();
    const VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

PowerTable table_from(const std::vector<double>& lambdas, const std::vector<double>& pct, std::size_t reps) {
    PowerTable t;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        ModelSpec s;
        s.lambda = lambdas[i];
        t.rows.push_back(make_power_row(s, reps, static_cast<std::size_t>(std::lround(pct[i] * reps / 100.0))));
    }
    return t;
}

}  // namespace

TEST_CASE("error variance under the null law") {
    ModelSpec spec;
    spec.n = 100000;
    spec.seed = 1;
    const SimulatedSample s = simulate(spec);
    CHECK(std::abs(sample_var(s.eta) - 1.0) < 0.02);
    CHECK(std::abs(s.eta.mean()) < 0.02);

    spec.noise_sd = std::sqrt(0.1);
    spec.model = ModelId::Custom;
    spec.d0 = 1;
    CHECK(std::abs(sample_var(simulate(spec).eta) / 0.1 - 1.0) < 0.02);
}

TEST_CASE("response formulas") {
    SUBCASE("model 1") {
        ModelSpec spec;
        spec.n = 50;
        spec.a = 2.5;
        spec.seed = 3;
        const SimulatedSample s = simulate(spec);
        const MatrixXd& x = s.data.predictors;
        CHECK(x.cols() == 4);
        CHECK(x.minCoeff() > 0.0);
        CHECK(x.maxCoeff() < 1.0);
        const VectorXd m = 2.0 + 5.0 * x.col(0).array() - x.col(1).array() + 2.5 * x.col(0).array() * x.col(1).array();
        CHECK((s.data.response - m - s.eta).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("model 2") {
        ModelSpec spec;
        spec.model = ModelId::Model2;
        spec.n = 50;
        spec.a = 0.4;
        spec.seed = 3;
        const SimulatedSample s = simulate(spec);
        const MatrixXd& x = s.data.predictors;
        const VectorXd m = x.col(0).array() + 0.4 * x.col(1).array().square() + 2.0 * x.col(3).array();
        CHECK((s.data.response - m - s.eta).cwiseAbs().maxCoeff() < 1e-12);
        for (Eigen::Index i = 0; i < 50; ++i) CHECK((x(i, 3) == 0.0 || x(i, 3) == 1.0));
    }
    SUBCASE("custom") {
        ModelSpec spec;
        spec.model = ModelId::Custom;
        spec.d0 = 3;
        spec.n = 20;
        const SimulatedSample s = simulate(spec);
        const VectorXd m = 1.0 + s.data.predictors.rowwise().sum().array();
        CHECK((s.data.response - m - s.eta).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("heteroscedastic error law") {
    ModelSpec spec;
    spec.n = 100000;
    spec.lambda = 50;
    spec.seed = 4;
    const SimulatedSample s = simulate(spec);
    double hi = 0, lo = 0;
    std::size_t nhi = 0, nlo = 0;
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const double x1 = s.data.predictors(i, 0);
        const double e2 = s.eta(i) * s.eta(i);
        if (x1 >= 0.9) {
            hi += e2;
            ++nhi;
        } else if (x1 <= 0.1) {
            lo += e2;
            ++nlo;
        }
    }
    const double ratio = (hi / static_cast<double>(nhi)) / (lo / static_cast<double>(nlo));
    const double expected = (10 + 50 * 0.95) / (10 + 50 * 0.05);
    CHECK(std::abs(ratio / expected - 1.0) < 0.15);
}

TEST_CASE("model 2 predictor law") {
    ModelSpec spec;
    spec.model = ModelId::Model2;
    spec.n = 100000;
    spec.seed = 5;
    const MatrixXd x = simulate(spec).data.predictors;
    for (int j = 0; j < 3; ++j) {
        CHECK(std::abs(x.col(j).mean()) < 0.02);
        CHECK(std::abs(sample_var(x.col(j)) - 1.0) < 0.02);
        for (int k = j + 1; k < 3; ++k) CHECK(std::abs(corr(x.col(j), x.col(k)) - 0.5) < 0.02);
        CHECK(std::abs(corr(x.col(j), x.col(3))) < 0.02);
    }
    CHECK(std::abs(x.col(3).mean() - 0.4) < 0.01);
}

TEST_CASE("model 1 predictors are uniform") {
    ModelSpec spec;
    spec.n = 5000;
    spec.seed = 6;
    const MatrixXd x = simulate(spec).data.predictors;
    const double crit = 1.628 / std::sqrt(5000.0);  // one-sample KS, level 0.01
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(ks_uniform_distance(x.col(j)) < crit);
}

TEST_CASE("seeded reproducibility and sampler") {
    ModelSpec spec;
    spec.model = ModelId::Model2;
    spec.n = 30;
    spec.seed = 77;
    const SimulatedSample a = simulate(spec);
    const SimulatedSample b = simulate(spec);
    CHECK(a.data.predictors == b.data.predictors);
    CHECK(a.data.response == b.data.response);
    spec.seed = 78;
    CHECK(simulate(spec).data.response != a.data.response);

    const Sampler draw = make_sampler(spec);
    Stream r1(1), r2(1);
    const SimulatedSample s1 = draw(12, r1);
    CHECK(s1.data.n() == 12);
    CHECK(s1.data.response == draw(12, r2).data.response);
}

TEST_CASE("model validation") {
    ModelSpec spec;
    spec.lambda = -1;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = {};
    spec.n = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = {};
    spec.model = ModelId::Model2;
    spec.d0 = 3;
    CHECK_THROWS_AS(spec.validate(), Error);
    CHECK(parse_model_id("model2") == ModelId::Model2);
    CHECK(to_string(parse_model_id("linear")) == "custom");
    CHECK_THROWS_AS((void)parse_model_id("model3"), Error);
    CHECK(working_design(ModelSpec{}).size() == 5);
}

TEST_CASE("make_power_row") {
    const PowerRow r = make_power_row(ModelSpec{}, 200, 50, 3);
    CHECK(r.rejection_rate == 0.25);
    CHECK(r.monte_carlo_se == doctest::Approx(std::sqrt(0.25 * 0.75 / 200)));
    CHECK(r.aborted == 3);
    const PowerRow none = make_power_row(ModelSpec{}, 0, 0, 5);
    CHECK(none.rejection_rate == 0.0);
}

TEST_CASE("monotonicity_report") {
    const std::vector<double> lambdas(reference::kLambdaGrid.begin(), reference::kLambdaGrid.end());
    SUBCASE("published lambda rows are monotone") {
        const std::vector<double> n100(reference::kModel1LambdaN100.begin(), reference::kModel1LambdaN100.end());
        CHECK(monotonicity_report(table_from(lambdas, n100, 500)).empty());
        const std::vector<double> m2(reference::kModel2LambdaN200.begin(), reference::kModel2LambdaN200.end());
        CHECK(monotonicity_report(table_from(lambdas, m2, 500)).empty());
    }
    SUBCASE("constant rates") {
        CHECK(monotonicity_report(table_from(lambdas, std::vector<double>(7, 40.0), 300)).empty());
    }
    SUBCASE("an injected dip is reported once") {
        std::vector<double> pct(reference::kModel1LambdaN200.begin(), reference::kModel1LambdaN200.end());
        PowerTable t = table_from(lambdas, pct, 300);
        // drop lambda = 20 far below lambda = 15
        t.rows[4] = make_power_row(ModelSpec{ModelId::Model1, 100, 0.0, 20.0}, 300, 120);
        const auto v = monotonicity_report(t);
        REQUIRE(v.size() == 1);
        CHECK(v[0].from_row == 3);
        CHECK(v[0].to_row == 4);
        CHECK(v[0].axis == "lambda");
        CHECK(v[0].standard_errors > 2.0);
    }
    SUBCASE("n and a axes") {
        PowerTable t;
        t.rows.push_back(make_power_row(ModelSpec{ModelId::Model1, 100, 5.0, 0.0}, 300, 170));
        t.rows.push_back(make_power_row(ModelSpec{ModelId::Model1, 200, 5.0, 0.0}, 300, 100));
        t.rows.push_back(make_power_row(ModelSpec{ModelId::Model1, 100, 7.0, 0.0}, 300, 270));
        const auto v = monotonicity_report(t);
        REQUIRE(v.size() == 1);
        CHECK(v[0].axis == "n");
    }
}

TEST_CASE("power_study") {
    ModelSpec null_cell;
    null_cell.n = 40;
    null_cell.seed = 5;
    ModelSpec alt = null_cell;
    alt.a = 10;
    alt.seed = 6;
    BootstrapConfig cfg;
    cfg.replicates = 40;
    cfg.workers = 1;
    const PowerTable t = power_study({null_cell, alt}, 0.05, cfg, 10);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.bootstrap_replicates == 40);
    for (const auto& row : t.rows) {
        CHECK(row.reps + row.aborted == 10);
        CHECK(row.rejections <= row.reps);
        CHECK(row.rejection_rate >= 0.0);
        CHECK(row.rejection_rate <= 1.0);
    }
    cfg.workers = 4;
    const PowerTable again = power_study({null_cell, alt}, 0.05, cfg, 10);
    CHECK(again.rows[0].rejections == t.rows[0].rejections);
    CHECK(again.rows[1].rejections == t.rows[1].rejections);
    CHECK_THROWS_AS((void)power_study({null_cell}, 0.05, cfg, 0), Error);
}

TEST_CASE("stats helpers") {
    VectorXd a(4), b(4);
    a << 1, 2, 3, 4;
    b << 5, 6, 7, 8;
    CHECK(ks_distance(a, b) == 1.0);
    CHECK(ks_distance(a, a) == 0.0);
    b << 2.5, 3.5, 4.5, 5.5;
    CHECK(ks_distance(a, b) == doctest::Approx(0.5));
    CHECK(ks_critical_value(0.01, 500, 500) == doctest::Approx(1.6276 * std::sqrt(2.0 / 500)).epsilon(1e-3));

    CHECK(quantile(a, 0.0) == 1.0);
    CHECK(quantile(a, 1.0) == 4.0);
    CHECK(quantile(a, 0.5) == 2.5);
    CHECK(quantile(a, 0.25) == doctest::Approx(1.75));

    const auto [lo, hi] = binomial_band(0.05, 300);
    CHECK(lo < 0.05);
    CHECK(hi > 0.05);
    CHECK(lo == doctest::Approx(0.02).epsilon(0.3));
    CHECK(hi == doctest::Approx(0.09).epsilon(0.15));

    const Histogram h = histogram(a, 0.0, 4.0, 4);
    CHECK(h.edges.size() == 5);
    CHECK(h.counts == std::vector<std::size_t>{0, 1, 1, 2});
}

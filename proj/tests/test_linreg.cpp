#include <doctest.h>

#include <cmath>

#include "hsicreg/errors.hpp"
#include "hsicreg/linreg.hpp"
#include "hsicreg/rng.hpp"

using namespace hsicreg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_design(Eigen::Index n, Eigen::Index d, Stream& rng) {
    MatrixXd g(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < d; ++j) g(i, j) = rng.normal();
    }
    return g;
}

// Normal equations solved by explicit inversion of G'G.
VectorXd brute_beta(const MatrixXd& g, const VectorXd& y) { return (g.transpose() * g).inverse() * g.transpose() * y; }

}  // namespace

TEST_CASE("Dataset validation") {
    CHECK_THROWS_AS((void)Dataset::make(MatrixXd::Zero(3, 2), VectorXd::Zero(4)), Error);
    MatrixXd x = MatrixXd::Zero(3, 1);
    x(1, 0) = std::nan("");
    CHECK_THROWS_AS((void)Dataset::make(x, VectorXd::Zero(3)), Error);
    const Dataset d = Dataset::make(MatrixXd::Zero(3, 2), VectorXd::Zero(3));
    CHECK(d.names == std::vector<std::string>{"x1", "x2"});
}

TEST_CASE("build_design") {
    MatrixXd x(2, 2);
    x << 2, 3, -1, 4;
    const Dataset data = Dataset::make(x, VectorXd::Zero(2));

    DesignSpec icpt;
    icpt.terms = {DesignTerm::intercept()};
    CHECK(build_design(data, icpt) == MatrixXd::Ones(2, 1));

    const MatrixXd lin = build_design(data, DesignSpec::linear(2));
    CHECK(lin.row(0) == Eigen::RowVector3d(1, 2, 3));

    DesignSpec inter = DesignSpec::linear(2);
    inter.terms.push_back(DesignTerm::product(0, 1));
    const MatrixXd g = build_design(data, inter);
    CHECK(g.row(0) == Eigen::RowVector4d(1, 2, 3, 6));
    CHECK(inter.names() == std::vector<std::string>{"1", "x1", "x2", "x1*x2"});

    DesignSpec sq;
    sq.terms = {DesignTerm::square(1)};
    CHECK(build_design(data, sq)(1, 0) == 16.0);

    DesignSpec bad;
    bad.terms = {DesignTerm::coordinate(5)};
    CHECK_THROWS_AS((void)build_design(data, bad), Error);

    DesignSpec nonfinite;
    DesignTerm logx{DesignTerm::Kind::Custom, 0, 0, "log(x1)", [](const auto& r) { return std::log(r(0)); }};
    nonfinite.terms = {logx};
    try {
        (void)build_design(data, nonfinite);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("fit_ols examples") {
    SUBCASE("exact linear response") {
        Stream rng(1);
        const MatrixXd g = random_design(30, 3, rng);
        const VectorXd beta(Eigen::Vector3d(1.5, -2, 0.25));
        const FittedModel fit = fit_ols(g, g * beta);
        CHECK((fit.beta_hat - beta).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("intercept only") {
        VectorXd y(4);
        y << 1, 5, 2, 8;
        const FittedModel fit = fit_ols(MatrixXd::Ones(4, 1), y);
        CHECK(fit.beta_hat(0) == doctest::Approx(4.0));
        CHECK((fit.residuals - (y.array() - 4.0).matrix()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((fit.centered_residuals - fit.residuals).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("three points") {
        // Normal equations: [[3,3],[3,5]] b = [4,7] -> b = (-1/6, 3/2)
        MatrixXd g(3, 2);
        g << 1, 0, 1, 1, 1, 2;
        const VectorXd y = Eigen::Vector3d(0, 1, 3);
        const FittedModel fit = fit_ols(g, y);
        CHECK(fit.beta_hat(0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
        CHECK(fit.beta_hat(1) == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(fit.residuals(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
        CHECK(fit.residuals(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
        CHECK(fit.residuals(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    }
}

TEST_CASE("fit_ols singular designs") {
    MatrixXd g(5, 3);
    g << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10;
    const VectorXd y = VectorXd::LinSpaced(5, 0, 1);
    try {
        (void)fit_ols(g, y);
        FAIL("expected throw");
    } catch (const SingularDesignError& e) {
        CHECK(e.kind() == ErrorKind::Singular);
        CHECK(e.columns().size() == 1);
        CHECK((e.columns()[0] == 1 || e.columns()[0] == 2));
        CHECK(std::string(e.what()).find("dependent column") != std::string::npos);
    }
    CHECK_THROWS_AS((void)fit_ols(MatrixXd::Ones(2, 3), VectorXd::Zero(2)), Error);
    CHECK_THROWS_AS((void)fit_ols(MatrixXd::Ones(3, 1), VectorXd::Zero(4)), Error);
}

TEST_CASE("fit_ols properties on random instances") {
    Stream rng(99);
    for (int t = 0; t < 200; ++t) {
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(4));
        const Eigen::Index n = d + 2 + static_cast<Eigen::Index>(rng.below(49 - static_cast<std::uint64_t>(d)));
        const MatrixXd g = random_design(n, d, rng);
        VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = rng.normal() * 3 + g.row(i).sum();

        const FittedModel fit = fit_ols(g, y);
        const VectorXd brute = brute_beta(g, y);
        CHECK((fit.beta_hat - brute).norm() <= 1e-8 * std::max(1.0, brute.norm()));

        CHECK((y - g * fit.beta_hat - fit.residuals).cwiseAbs().maxCoeff() <= 1e-8 * y.cwiseAbs().maxCoeff());
        CHECK((g.transpose() * fit.residuals).cwiseAbs().maxCoeff() <= 1e-7 * g.norm() * y.norm());
        CHECK(std::abs(fit.centered_residuals.sum()) <= 1e-8 * static_cast<double>(n));
        CHECK(fit.gram_condition >= 1.0);

        const FittedModel again = fit_ols(g, fit.fitted);
        CHECK((again.beta_hat - fit.beta_hat).norm() <= 1e-8 * std::max(1.0, fit.beta_hat.norm()));
    }
}

TEST_CASE("standardize") {
    SUBCASE("two points") {
        const Standardization s = standardize(VectorXd(Eigen::Vector2d(0, 2)));
        CHECK(s.matrix(0, 0) == doctest::Approx(-std::sqrt(0.5)));
        CHECK(s.matrix(1, 0) == doctest::Approx(std::sqrt(0.5)));
        CHECK(s.sds(0) == doctest::Approx(std::sqrt(2.0)));
    }
    SUBCASE("moments recomputed") {
        const VectorXd col = Eigen::Vector4d(1, 2, 3, 4);
        const Standardization s = standardize(col);
        const VectorXd z = s.matrix.col(0);
        CHECK(std::abs(z.mean()) < 1e-12);
        const double var = (z.array() - z.mean()).square().sum() / 3.0;
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-8);
        const Standardization again = standardize(s.matrix);
        CHECK((again.matrix - s.matrix).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("binary column and exemption") {
        MatrixXd m(4, 2);
        m << 1, 0, 1, 1, 1, 0, 1, 1;
        CHECK_THROWS_AS((void)standardize(m), Error);
        const std::vector<Eigen::Index> exempt{0};
        const Standardization s = standardize(m, exempt);
        CHECK(s.matrix.col(0) == VectorXd::Ones(4));
        CHECK(std::abs(s.matrix.col(1).mean()) < 1e-14);
    }
    SUBCASE("dataset") {
        MatrixXd x(3, 1);
        x << 1, 2, 4;
        const StandardizedDataset sd = standardize_dataset(Dataset::make(x, Eigen::Vector3d(10, 20, 60)));
        CHECK(sd.response_mean == doctest::Approx(30.0));
        CHECK(std::abs(sd.data.response.mean()) < 1e-14);
        CHECK(sd.data.names == std::vector<std::string>{"x1"});
    }
}

#include "hsicreg/linreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsicreg/errors.hpp"

namespace hsicreg {

Dataset Dataset::make(Eigen::MatrixXd predictors, Eigen::VectorXd response, std::vector<std::string> names) {
    if (predictors.rows() != response.size()) {
        fail(ErrorKind::Input, "dataset: " + std::to_string(predictors.rows()) + " predictor rows but " +
                                   std::to_string(response.size()) + " responses");
    }
    if (!predictors.allFinite() || !response.allFinite()) {
        fail(ErrorKind::Data, "dataset contains non-finite values");
    }
    if (names.empty()) {
        for (Eigen::Index j = 0; j < predictors.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    } else if (static_cast<Eigen::Index>(names.size()) != predictors.cols()) {
        fail(ErrorKind::Input, "dataset: predictor name count does not match column count");
    }
    return Dataset{std::move(predictors), std::move(response), std::move(names)};
}

DesignTerm DesignTerm::coordinate(Eigen::Index i, std::string name) {
    if (name.empty()) name = "x" + std::to_string(i + 1);
    return {Kind::Coordinate, i, i, std::move(name), {}};
}

DesignTerm DesignTerm::product(Eigen::Index i, Eigen::Index j, std::string name) {
    if (name.empty()) name = "x" + std::to_string(i + 1) + "*x" + std::to_string(j + 1);
    return {Kind::Product, i, j, std::move(name), {}};
}

DesignTerm DesignTerm::square(Eigen::Index i, std::string name) {
    if (name.empty()) name = "x" + std::to_string(i + 1) + "^2";
    return {Kind::Square, i, i, std::move(name), {}};
}

double DesignTerm::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    switch (kind) {
        case Kind::Intercept: return 1.0;
        case Kind::Coordinate: return x(first);
        case Kind::Product: return x(first) * x(second);
        case Kind::Square: return x(first) * x(first);
        case Kind::Custom: return custom(x);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

DesignSpec DesignSpec::linear(Eigen::Index d0, bool intercept) {
    DesignSpec spec;
    if (intercept) spec.terms.push_back(DesignTerm::intercept());
    for (Eigen::Index j = 0; j < d0; ++j) spec.terms.push_back(DesignTerm::coordinate(j));
    return spec;
}

std::vector<std::string> DesignSpec::names() const {
    std::vector<std::string> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.name);
    return out;
}

Eigen::MatrixXd build_design(const Dataset& data, const DesignSpec& spec) {
    if (spec.terms.empty()) fail(ErrorKind::Config, "design has no terms");
    const Eigen::Index d0 = data.dim();
    for (const auto& t : spec.terms) {
        const bool uses_coords = t.kind != DesignTerm::Kind::Intercept && t.kind != DesignTerm::Kind::Custom;
        if (uses_coords && (t.first < 0 || t.first >= d0 || t.second < 0 || t.second >= d0)) {
            fail(ErrorKind::Config, "design term '" + t.name + "' refers to a predictor outside 1.." +
                                        std::to_string(d0));
        }
        if (t.kind == DesignTerm::Kind::Custom && !t.custom) {
            fail(ErrorKind::Config, "design term '" + t.name + "' has no function");
        }
    }

    Eigen::MatrixXd design(data.n(), spec.size());
    for (Eigen::Index j = 0; j < spec.size(); ++j) {
        const auto& term = spec.terms[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const double v = term(data.predictors.row(i));
            if (!std::isfinite(v)) {
                fail(ErrorKind::Data, "design term '" + term.name + "' is not finite at row " + std::to_string(i + 1));
            }
            design(i, j) = v;
        }
    }
    return design;
}

FittedModel fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::Ref<const Eigen::VectorXd>& response) {
    const Eigen::Index n = design.rows();
    const Eigen::Index d = design.cols();
    if (response.size() != n) fail(ErrorKind::Input, "fit_ols: design and response row counts differ");
    if (d < 1) fail(ErrorKind::Config, "fit_ols: empty design");
    if (n < d) {
        fail(ErrorKind::Input, "fit_ols: " + std::to_string(n) + " observations for " + std::to_string(d) +
                                   " coefficients");
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
    const double ratio = sv(d - 1) > 0.0 ? sv(0) / sv(d - 1) : std::numeric_limits<double>::infinity();
    const double condition = ratio * ratio;  // cond(G'G) = cond(G)^2

    if (!(condition <= kSingularCondition)) {
        // Pivoted QR pushes dependent columns to the end.
        const Eigen::Index rank = std::min(qr.rank(), d - 1);
        std::vector<long> columns;
        for (Eigen::Index k = rank; k < d; ++k) columns.push_back(qr.colsPermutation().indices()(k));
        std::sort(columns.begin(), columns.end());
        std::ostringstream msg;
        msg << "singular design: condition number of G'G/n is " << condition << " (limit "
            << kSingularCondition << "); dependent column(s):";
        for (long c : columns) msg << ' ' << (c + 1);
        throw SingularDesignError(msg.str(), std::move(columns), condition);
    }

    FittedModel fit;
    fit.beta_hat = qr.solve(response);
    fit.fitted = design * fit.beta_hat;
    fit.residuals = response - fit.fitted;
    fit.residual_mean = fit.residuals.mean();
    fit.centered_residuals = fit.residuals.array() - fit.residual_mean;
    fit.gram_condition = condition;
    return fit;
}

Standardization standardize(const Eigen::Ref<const Eigen::MatrixXd>& matrix, std::span<const Eigen::Index> exempt) {
    const Eigen::Index n = matrix.rows();
    if (n < 2) fail(ErrorKind::Input, "standardize: need at least 2 rows");

    Standardization out{matrix, Eigen::RowVectorXd::Zero(matrix.cols()), Eigen::RowVectorXd::Ones(matrix.cols())};
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
        if (std::find(exempt.begin(), exempt.end(), j) != exempt.end()) continue;
        const double mean = matrix.col(j).mean();
        const double sd = std::sqrt((matrix.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean))) {
            fail(ErrorKind::Degenerate, "standardize: column " + std::to_string(j + 1) + " is constant");
        }
        out.matrix.col(j) = (matrix.col(j).array() - mean) / sd;
        out.means(j) = mean;
        out.sds(j) = sd;
    }
    return out;
}

StandardizedDataset standardize_dataset(const Dataset& data) {
    StandardizedDataset out;
    out.predictors = standardize(data.predictors);
    const Standardization y = standardize(data.response);
    out.response_mean = y.means(0);
    out.response_sd = y.sds(0);
    out.data = Dataset{out.predictors.matrix, y.matrix.col(0), data.names};
    return out;
}

}  // namespace hsicreg

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hsicreg {

/// Regression sample: predictor rows X_i (n x d0) and responses Y_i.
struct Dataset {
    Eigen::MatrixXd predictors;
    Eigen::VectorXd response;
    std::vector<std::string> names;  // predictor names; defaults to x1..xd0

    [[nodiscard]] Eigen::Index n() const { return response.size(); }
    [[nodiscard]] Eigen::Index dim() const { return predictors.cols(); }

    /// Checks row agreement and finiteness; fills default names.
    static Dataset make(Eigen::MatrixXd predictors, Eigen::VectorXd response, std::vector<std::string> names = {});
};

/// One predictor function g_j : R^d0 -> R.
struct DesignTerm {
    enum class Kind { Intercept, Coordinate, Product, Square, Custom };

    Kind kind = Kind::Intercept;
    Eigen::Index first = 0;
    Eigen::Index second = 0;
    std::string name;
    std::function<double(const Eigen::Ref<const Eigen::RowVectorXd>&)> custom;

    static DesignTerm intercept() { return {Kind::Intercept, 0, 0, "1", {}}; }
    static DesignTerm coordinate(Eigen::Index i, std::string name = {});
    static DesignTerm product(Eigen::Index i, Eigen::Index j, std::string name = {});
    static DesignTerm square(Eigen::Index i, std::string name = {});

    [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

/// The working model's predictor functions g = (g_1, ..., g_d).
struct DesignSpec {
    std::vector<DesignTerm> terms;

    /// Intercept plus every raw coordinate x_1..x_d0.
    static DesignSpec linear(Eigen::Index d0, bool intercept = true);

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(terms.size()); }
    [[nodiscard]] std::vector<std::string> names() const;
};

/// n x d matrix with entry (i, j) = g_j(X_i).
[[nodiscard]] Eigen::MatrixXd build_design(const Dataset& data, const DesignSpec& spec);

struct FittedModel {
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;           // e_i = Y_i - g(X_i)' beta_hat
    Eigen::VectorXd centered_residuals;  // e_i - mean(e)
    double residual_mean = 0.0;
    double gram_condition = 0.0;  // 2-norm condition number of A_n = G'G / n
};

/// Condition numbers of A_n above this are treated as singular.
inline constexpr double kSingularCondition = 1e12;

/// Least squares by column-pivoted Householder QR of the design.
/// Throws SingularDesignError when A_n is numerically singular.
[[nodiscard]] FittedModel fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::Ref<const Eigen::VectorXd>& response);

struct Standardization {
    Eigen::MatrixXd matrix;
    Eigen::RowVectorXd means;
    Eigen::RowVectorXd sds;  // divisor n - 1
};

/// Column-wise (x - mean) / sd. Columns listed in `exempt` pass through
/// unchanged (recorded with mean 0, sd 1). Constant columns are an error.
[[nodiscard]] Standardization standardize(const Eigen::Ref<const Eigen::MatrixXd>& matrix,
                                          std::span<const Eigen::Index> exempt = {});

struct StandardizedDataset {
    Dataset data;
    Standardization predictors;
    double response_mean = 0.0;
    double response_sd = 1.0;
};

/// Standardizes every predictor column and the response.
[[nodiscard]] StandardizedDataset standardize_dataset(const Dataset& data);

}  // namespace hsicreg

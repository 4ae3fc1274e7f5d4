#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsicreg/errors.hpp"

namespace hsicreg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Dense n x n kernel matrix. Points are always passed as the ROWS of a
/// matrix; a vector is treated as n one-dimensional points.
template <typename Scalar>
using GramMatrix = Matrix<Scalar>;

enum class KernelFamily { Gaussian };
/// Fixed: the bandwidth as given.
/// DimensionScaled: bandwidth * sqrt(2 p) for p-dimensional points, i.e.
///   exp(-|u - v|^2 / (2 p s^2)), a unit-scale kernel on standardized data
///   whose width does not shrink as coordinates are added.
/// MedianHeuristic: median pairwise distance of the points.
enum class BandwidthRule { Fixed, DimensionScaled, MedianHeuristic };

struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    BandwidthRule rule = BandwidthRule::DimensionScaled;
    double bandwidth = 1.0;  // the bandwidth (Fixed) or the scale s (DimensionScaled)

    static KernelSpec gaussian(double bandwidth) { return {KernelFamily::Gaussian, BandwidthRule::Fixed, bandwidth}; }
    static KernelSpec gaussian_scaled(double scale = 1.0) {
        return {KernelFamily::Gaussian, BandwidthRule::DimensionScaled, scale};
    }
    static KernelSpec gaussian_median() { return {KernelFamily::Gaussian, BandwidthRule::MedianHeuristic, 0.0}; }

    void validate() const {
        if (rule != BandwidthRule::MedianHeuristic && !(bandwidth > 0.0 && std::isfinite(bandwidth))) {
            fail(ErrorKind::Config, "kernel bandwidth must be positive and finite, got " + std::to_string(bandwidth));
        }
    }

    bool operator==(const KernelSpec&) const = default;
};

[[nodiscard]] inline std::string to_string(BandwidthRule rule) {
    switch (rule) {
        case BandwidthRule::Fixed: return "fixed";
        case BandwidthRule::DimensionScaled: return "scaled";
        case BandwidthRule::MedianHeuristic: return "median";
    }
    return "unknown";
}

namespace detail {

template <typename Scalar>
void check_bandwidth(Scalar bandwidth) {
    if (!(bandwidth > Scalar(0)) || !std::isfinite(static_cast<double>(bandwidth))) {
        fail(ErrorKind::Config, "kernel bandwidth must be positive and finite");
    }
}

}  // namespace detail

/// exp(-|u - v|^2 / bandwidth^2)
template <typename DerivedU, typename DerivedV>
[[nodiscard]] typename DerivedU::Scalar gaussian_kernel(const Eigen::MatrixBase<DerivedU>& u,
                                                        const Eigen::MatrixBase<DerivedV>& v,
                                                        typename DerivedU::Scalar bandwidth) {
    using Scalar = typename DerivedU::Scalar;
    if (u.size() != v.size()) {
        fail(ErrorKind::Input, "gaussian_kernel: points have dimensions " + std::to_string(u.size()) + " and " +
                                   std::to_string(v.size()));
    }
    detail::check_bandwidth(bandwidth);
    Scalar sq = 0;
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        const Scalar diff = u.derived().coeff(k) - v.derived().coeff(k);
        sq += diff * diff;
    }
    return std::exp(-sq / (bandwidth * bandwidth));
}

/// Squared Euclidean distances between all pairs of rows. Built coordinate by
/// coordinate from explicit differences, so the result is exactly symmetric and
/// unaffected (beyond rounding of the inputs) by translations.
template <typename Derived>
[[nodiscard]] Matrix<typename Derived::Scalar> pairwise_sq_distances(const Eigen::MatrixBase<Derived>& points) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = points.rows();
    Matrix<Scalar> sq = Matrix<Scalar>::Zero(n, n);
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        const Vector<Scalar> x = points.col(c);
        sq.array() += (x.rowwise().replicate(n) - x.transpose().colwise().replicate(n)).array().square();
    }
    return sq;
}

/// Median of the n(n-1)/2 pairwise Euclidean distances between rows. For an
/// even number of pairs the two middle values are averaged.
template <typename Derived>
[[nodiscard]] typename Derived::Scalar median_heuristic(const Eigen::MatrixBase<Derived>& points) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = points.rows();
    if (n < 2) fail(ErrorKind::Degenerate, "median heuristic needs at least 2 points");

    std::vector<Scalar> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    bool any_positive = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const Scalar d = (points.row(i) - points.row(j)).norm();
            any_positive = any_positive || d > Scalar(0);
            dist.push_back(d);
        }
    }
    if (!any_positive) fail(ErrorKind::Degenerate, "median heuristic: all points are identical");

    auto median_of = [](std::vector<Scalar>& v) {
        const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        Scalar median = *mid;
        if (v.size() % 2 == 0) median = (median + *std::max_element(v.begin(), mid)) / Scalar(2);
        return median;
    };
    const Scalar median = median_of(dist);
    if (median > Scalar(0)) return median;

    // Mostly tied points: fall back to the median over distinct pairs.
    std::erase_if(dist, [](Scalar d) { return !(d > Scalar(0)); });
    return median_of(dist);
}

/// Bandwidth actually used for `points` under `spec`.
template <typename Derived>
[[nodiscard]] typename Derived::Scalar resolve_bandwidth(const Eigen::MatrixBase<Derived>& points,
                                                         const KernelSpec& spec) {
    using Scalar = typename Derived::Scalar;
    spec.validate();
    switch (spec.rule) {
        case BandwidthRule::MedianHeuristic: return median_heuristic(points);
        case BandwidthRule::DimensionScaled:
            return static_cast<Scalar>(spec.bandwidth * std::sqrt(2.0 * static_cast<double>(points.cols())));
        case BandwidthRule::Fixed: break;
    }
    return static_cast<Scalar>(spec.bandwidth);
}

/// Gaussian Gram matrix of the rows of `points` at a resolved bandwidth.
template <typename Derived>
[[nodiscard]] GramMatrix<typename Derived::Scalar> gaussian_gram(const Eigen::MatrixBase<Derived>& points,
                                                                 typename Derived::Scalar bandwidth) {
    detail::check_bandwidth(bandwidth);
    const auto scale = typename Derived::Scalar(-1) / (bandwidth * bandwidth);
    return (pairwise_sq_distances(points).array() * scale).exp().matrix();
}

template <typename Derived>
[[nodiscard]] GramMatrix<typename Derived::Scalar> gram_matrix(const Eigen::MatrixBase<Derived>& points,
                                                               const KernelSpec& spec) {
    if (points.rows() < 1) fail(ErrorKind::Input, "gram_matrix: no points");
    return gaussian_gram(points, resolve_bandwidth(points, spec));
}

/// HKH with H = I - 11'/n, by row/column/grand-mean subtraction.
template <typename Derived>
[[nodiscard]] Matrix<typename Derived::Scalar> center_gram(const Eigen::MatrixBase<Derived>& gram) {
    using Scalar = typename Derived::Scalar;
    if (gram.rows() != gram.cols()) fail(ErrorKind::Input, "center_gram: matrix is not square");
    const Vector<Scalar> row_mean = gram.rowwise().mean();
    const Vector<Scalar> col_mean = gram.colwise().mean().transpose();
    const Scalar grand = row_mean.mean();
    Matrix<Scalar> centered = gram;
    centered.colwise() -= row_mean;
    centered.rowwise() -= col_mean.transpose();
    centered.array() += grand;
    return centered;
}

}  // namespace hsicreg

#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hsicreg/errors.hpp"
#include "hsicreg/kernel.hpp"
#include "hsicreg/linreg.hpp"

namespace hsicreg {

/// Empirical HSIC between two samples, i.e. the V-statistic estimate of
///
///   theta(U, V) = E[k(U,U') l(V,V')] + E[k(U,U')] E[l(V,V')] - 2 E[k(U,U') l(V,V'')]
///
/// which is zero iff U and V are independent when both kernels are
/// characteristic. When V holds regression residuals, t_n is the test
/// statistic and `scaled` = n * t_n is what gets compared to its bootstrap law.
template <typename Scalar>
struct HsicValue {
    Scalar t_n = 0;
    Eigen::Index n = 0;
    Scalar scaled = 0;

    static HsicValue make(Scalar t, Eigen::Index n) { return {t, n, static_cast<Scalar>(n) * t}; }
};

/// Neumaier-compensated running sum.
template <typename Scalar>
class CompensatedSum {
public:
    void add(Scalar x) {
        const Scalar t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] Scalar value() const { return sum_ + comp_; }

private:
    Scalar sum_ = 0;
    Scalar comp_ = 0;
};

namespace detail {

template <typename DK, typename DL>
void check_same_square(const Eigen::MatrixBase<DK>& k, const Eigen::MatrixBase<DL>& l, const char* who) {
    if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows() || k.rows() < 1) {
        fail(ErrorKind::Input, std::string(who) + ": Gram matrices must be square, non-empty and the same size (got " +
                                   std::to_string(k.rows()) + "x" + std::to_string(k.cols()) + " and " +
                                   std::to_string(l.rows()) + "x" + std::to_string(l.cols()) + ")");
    }
}

}  // namespace detail

/// n^-2 trace(KHLH), evaluated in O(n^2) as n^-2 sum_ij (HKH)_ij L_ij with
/// HKH formed on the fly from row, column and grand means of K.
template <typename DK, typename DL>
[[nodiscard]] HsicValue<typename DK::Scalar> hsic_vstat(const Eigen::MatrixBase<DK>& gram_k,
                                                        const Eigen::MatrixBase<DL>& gram_l) {
    using Scalar = typename DK::Scalar;
    detail::check_same_square(gram_k, gram_l, "hsic_vstat");
    const Eigen::Index n = gram_k.rows();
    const auto& k = gram_k.derived();
    const auto& l = gram_l.derived();

    const Vector<Scalar> row_mean = k.rowwise().mean();
    const Vector<Scalar> col_mean = k.colwise().mean().transpose();
    const Scalar grand = row_mean.mean();

    CompensatedSum<Scalar> acc;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar shift = grand - col_mean(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            acc.add((k.coeff(i, j) - row_mean(i) + shift) * l.coeff(i, j));
        }
    }
    const auto nn = static_cast<Scalar>(n);
    return HsicValue<Scalar>::make(acc.value() / (nn * nn), n);
}

/// The three-term sum form
///   n^-2 sum k_ij l_ij + n^-4 sum k_ij l_qr - 2 n^-3 sum k_ij l_iq
/// with the triple and quadruple sums factored through marginal sums and all
/// accumulation in long double. Meant as a cross-check for small n.
template <typename DK, typename DL>
[[nodiscard]] HsicValue<typename DK::Scalar> hsic_sums(const Eigen::MatrixBase<DK>& gram_k,
                                                       const Eigen::MatrixBase<DL>& gram_l) {
    using Scalar = typename DK::Scalar;
    using Wide = long double;
    detail::check_same_square(gram_k, gram_l, "hsic_sums");
    const Eigen::Index n = gram_k.rows();

    Wide paired = 0;
    Wide total_k = 0;
    Wide total_l = 0;
    Wide cross = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Wide row_k = 0;
        Wide row_l = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Wide kij = gram_k.derived().coeff(i, j);
            const Wide lij = gram_l.derived().coeff(i, j);
            paired += kij * lij;
            row_k += kij;
            row_l += lij;
        }
        total_k += row_k;
        total_l += row_l;
        cross += row_k * row_l;
    }
    const Wide nn = static_cast<Wide>(n);
    const Wide value = paired / (nn * nn) + total_k * total_l / (nn * nn * nn * nn) - 2 * cross / (nn * nn * nn);
    return HsicValue<Scalar>::make(static_cast<Scalar>(value), n);
}

/// HSIC between two raw samples (rows are points).
template <typename DU, typename DV>
[[nodiscard]] HsicValue<typename DU::Scalar> hsic_pairs_stat(const Eigen::MatrixBase<DU>& u_points,
                                                             const Eigen::MatrixBase<DV>& v_points,
                                                             const KernelSpec& ku, const KernelSpec& kv) {
    if (u_points.rows() != v_points.rows()) {
        fail(ErrorKind::Input, "hsic_pairs_stat: samples have lengths " + std::to_string(u_points.rows()) + " and " +
                                   std::to_string(v_points.rows()));
    }
    return hsic_vstat(gram_matrix(u_points, ku), gram_matrix(v_points, kv));
}

struct ResidualHsic {
    HsicValue<double> value;
    FittedModel fit;
    double bandwidth_x = 0.0;  // resolved kernel bandwidths
    double bandwidth_e = 0.0;
};

/// Fits `design` to `data` by least squares and returns the HSIC between the
/// predictor rows and the observed residuals. No standardization happens here.
[[nodiscard]] ResidualHsic residual_hsic_stat(const Dataset& data, const DesignSpec& design, const KernelSpec& kx,
                                              const KernelSpec& ke);

}  // namespace hsicreg

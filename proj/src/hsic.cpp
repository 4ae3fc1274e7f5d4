#include "hsicreg/hsic.hpp"

namespace hsicreg {

ResidualHsic residual_hsic_stat(const Dataset& data, const DesignSpec& design, const KernelSpec& kx,
                                const KernelSpec& ke) {
    ResidualHsic out;
    out.fit = fit_ols(build_design(data, design), data.response);
    out.bandwidth_x = resolve_bandwidth(data.predictors, kx);
    out.bandwidth_e = resolve_bandwidth(out.fit.residuals, ke);
    out.value = hsic_vstat(gaussian_gram(data.predictors, out.bandwidth_x),
                           gaussian_gram(out.fit.residuals, out.bandwidth_e));
    return out;
}

}  // namespace hsicreg

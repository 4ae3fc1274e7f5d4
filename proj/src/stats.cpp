#include "hsicreg/stats.hpp"

#include <algorithm>
#include <cmath>

#include "hsicreg/errors.hpp"

namespace hsicreg {

namespace {

std::vector<double> sorted(const Eigen::Ref<const Eigen::VectorXd>& v) {
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

// log P(X = k) for X ~ Binomial(n, p)
double log_binomial_pmf(std::size_t k, std::size_t n, double p) {
    const auto kk = static_cast<double>(k);
    const auto nn = static_cast<double>(n);
    double log_p = std::lgamma(nn + 1) - std::lgamma(kk + 1) - std::lgamma(nn - kk + 1);
    if (k > 0) log_p += kk * std::log(p);
    if (k < n) log_p += (nn - kk) * std::log1p(-p);
    return log_p;
}

}  // namespace

double ks_distance(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    if (a.size() == 0 || b.size() == 0) fail(ErrorKind::Input, "ks_distance: empty sample");
    const std::vector<double> x = sorted(a);
    const std::vector<double> y = sorted(b);
    const auto m = static_cast<double>(x.size());
    const auto n = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double t = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= t) ++i;
        while (j < y.size() && y[j] <= t) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n));
    }
    return d;
}

double ks_critical_value(double alpha, std::size_t m, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0) || m == 0 || n == 0) fail(ErrorKind::Config, "ks_critical_value: bad arguments");
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    const auto mm = static_cast<double>(m);
    const auto nn = static_cast<double>(n);
    return c * std::sqrt((mm + nn) / (mm * nn));
}

double ks_uniform_distance(const Eigen::Ref<const Eigen::VectorXd>& sample) {
    const std::vector<double> x = sorted(sample);
    const auto n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = std::clamp(x[i], 0.0, 1.0);
        d = std::max({d, static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n});
    }
    return d;
}

std::pair<double, double> binomial_band(double p, std::size_t reps, double confidence) {
    if (!(p > 0.0 && p < 1.0) || reps == 0 || !(confidence > 0.0 && confidence < 1.0)) {
        fail(ErrorKind::Config, "binomial_band: bad arguments");
    }
    const double tail = (1.0 - confidence) / 2.0;
    double cdf = 0.0;
    std::size_t lo = 0;
    for (std::size_t k = 0; k <= reps; ++k) {
        cdf += std::exp(log_binomial_pmf(k, reps, p));
        if (cdf >= tail) {
            lo = k;
            break;
        }
    }
    double upper_tail = 0.0;
    std::size_t hi = reps;
    for (std::size_t k = reps + 1; k-- > 0;) {
        upper_tail += std::exp(log_binomial_pmf(k, reps, p));
        if (upper_tail >= tail) {
            hi = k;
            break;
        }
    }
    const auto r = static_cast<double>(reps);
    return {static_cast<double>(lo) / r, static_cast<double>(hi) / r};
}

double quantile(const Eigen::Ref<const Eigen::VectorXd>& sample, double q) {
    if (sample.size() == 0) fail(ErrorKind::Input, "quantile: empty sample");
    const std::vector<double> x = sorted(sample);
    const double h = (static_cast<double>(x.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& sample, double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(hi > lo)) fail(ErrorKind::Config, "histogram: need bins > 0 and hi > lo");
    Histogram h;
    h.counts.assign(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    for (Eigen::Index i = 0; i < sample.size(); ++i) {
        const double pos = (sample(i) - lo) / width;
        const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        ++h.counts[b];
    }
    return h;
}

}  // namespace hsicreg

#include "affest/summary.hpp"

#include <algorithm>
#include <cmath>

#include "affest/errors.hpp"

namespace affest {

namespace {

void require_size(std::span<const double> xs, std::size_t n, const char* what) {
    if (xs.size() < n) {
        throw Error(ErrorCode::Config, std::string(what) + ": sample too small");
    }
}

double central_moment(std::span<const double> xs, double mu, int order) {
    double acc = 0.0;
    for (double x : xs) acc += std::pow(x - mu, order);
    return acc / static_cast<double>(xs.size());
}

}  // namespace

double mean(std::span<const double> xs) {
    require_size(xs, 1, "mean");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
    require_size(xs, 2, "sample_variance");
    const double mu = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(xs.size() - 1);
}

double skewness(std::span<const double> xs) {
    require_size(xs, 3, "skewness");
    const double mu = mean(xs);
    const double m2 = central_moment(xs, mu, 2);
    return central_moment(xs, mu, 3) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> xs) {
    require_size(xs, 4, "excess_kurtosis");
    const double mu = mean(xs);
    const double m2 = central_moment(xs, mu, 2);
    return central_moment(xs, mu, 4) / (m2 * m2) - 3.0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic_standard_normal(std::span<const double> zs) {
    require_size(zs, 1, "ks_statistic");
    std::vector<double> sorted(zs.begin(), zs.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic_fitted_normal(std::span<const double> xs) {
    const double mu = mean(xs);
    const double sd = std::sqrt(sample_variance(xs));
    std::vector<double> zs(xs.size());
    std::transform(xs.begin(), xs.end(), zs.begin(), [&](double x) { return (x - mu) / sd; });
    return ks_statistic_standard_normal(zs);
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    // The alternating series converges slowly for small lambda; use the
    // theta-function form there.
    if (lambda < 1.0) {
        const double pi = std::acos(-1.0);
        double acc = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            acc += std::exp(-odd * odd * pi * pi / (8.0 * lambda * lambda));
        }
        return 1.0 - std::sqrt(2.0 * pi) / lambda * acc;
    }
    double acc = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        acc += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * acc, 0.0, 1.0);
}

TwoSampleKs ks_two_sample(std::span<const double> a, std::span<const double> b) {
    require_size(a, 1, "ks_two_sample");
    require_size(b, 1, "ks_two_sample");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const auto na = static_cast<double>(sa.size());
    const auto nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] <= v) ++i;
        while (j < sb.size() && sb[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double sq = std::sqrt(ne);
    // Stephens' small-sample correction.
    const double lambda = (sq + 0.12 + 0.11 / sq) * d;
    return {d, kolmogorov_survival(lambda)};
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "correlation: length mismatch");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace affest

#pragma once

#include <span>
#include <vector>

namespace affest {

double mean(std::span<const double> xs);
// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);
double skewness(std::span<const double> xs);
double excess_kurtosis(std::span<const double> xs);

double normal_cdf(double z);

// sup |F_n - Phi((x - mu)/sigma)| with mu, sigma the sample mean and sd.
double ks_statistic_fitted_normal(std::span<const double> xs);

// sup |F_n - Phi| for an already standardized sample.
double ks_statistic_standard_normal(std::span<const double> zs);

struct TwoSampleKs {
    double statistic = 0.0;
    double p_value = 0.0;  // asymptotic Kolmogorov distribution
};

TwoSampleKs ks_two_sample(std::span<const double> a, std::span<const double> b);

// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_survival(double lambda);

// Pearson correlation.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace affest

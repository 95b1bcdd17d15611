#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affest/model.hpp"
#include "affest/path_stats.hpp"

namespace affest {

struct MleFull {
    double a_hat = 0.0;
    double b_hat = 0.0;
    double m_hat = 0.0;
    double theta_hat = 0.0;
    double denom_ab = 0.0;      // int Y ds * int 1/Y ds - T^2
    double denom_mtheta = 0.0;  // int X^2/Y ds * int 1/Y ds - (int X/Y ds)^2
};

struct LseFull {
    double m_hat = 0.0;
    double theta_hat = 0.0;
    double denom = 0.0;  // T int X^2 ds - (int X ds)^2
};

struct DiscreteLse {
    std::optional<double> m_hat;  // set by the joint variant only
    double theta_hat = 0.0;
    double denom = 0.0;
};

// MLE of theta with m known. Requires int X^2/Y ds > 0.
double mle_theta_known_m(const SufficientStats& s, double m);

// Joint MLE of (a, b, m, theta); both 2x2 blocks solved by Cramer's rule.
MleFull mle_full(const SufficientStats& s);

// Continuous-observation LSE of theta with m known. Requires int X^2 ds > 0.
double lse_theta_known_m(const SufficientStats& s, double m);

// Continuous-observation LSE of (m, theta).
LseFull lse_full(const SufficientStats& s);

// LSE from observations X_0..X_n of the regression
//   X_i - X_{i-1} = m - theta X_{i-1} + noise.
// With `m` given only theta is fitted. The estimates are per observation
// step: for spacing h they target m (1 - e^{-theta h}) / theta and
// 1 - e^{-theta h}, see discrete_lse_target.
DiscreteLse lse_discrete(std::span<const double> x_obs, std::optional<double> m = std::nullopt);

// Limit of lse_discrete for observations spaced h apart: (m_h, theta_h).
std::pair<double, double> discrete_lse_target(const ModelParams& p, double h);

// Every k-th value of path.x with k = spacing / dt.
std::vector<double> observations_at_spacing(const SamplePath& path, double spacing);

// Log-likelihood ratio against the reference parameters (1, 0, 0, 0).
double loglik(const SufficientStats& s, const ModelParams& p);

enum class EstimatorKind { MleTheta, MleFull, LseTheta, LseFull, LseDiscrete };

const char* to_string(EstimatorKind k);
EstimatorKind estimator_from_string(const std::string& name);
const std::vector<EstimatorKind>& all_estimators();

// Parameter names estimated by each kind, in output order.
std::vector<std::string> estimated_names(EstimatorKind k, bool m_known);

// Uniform result record used by the CLI and the experiment harness.
struct Estimate {
    std::string estimator;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, double>> denominators;
    bool valid = false;
};

struct EstimateInputs {
    std::optional<double> m_known;
    // Observation spacing for the discrete LSE.
    double obs_spacing = 1.0;
};

// Computes one estimator from a path. Degenerate denominators propagate as
// Error(DegenerateDenominator); `valid` is true on return.
Estimate run_estimator(EstimatorKind kind, const SamplePath& path, const SufficientStats& stats,
                       const EstimateInputs& in);

}  // namespace affest

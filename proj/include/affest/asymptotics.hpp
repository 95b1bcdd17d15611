#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affest/model.hpp"
#include "affest/rng.hpp"
#include "affest/simulation.hpp"

namespace affest {

struct MomentSimulationOptions {
    double t_total = 1e4;
    double dt = 1e-2;
    double burn_in = 50.0;
    Scheme scheme = Scheme::ExactCIR_CondGaussX;
    // Number of contiguous batches for the batch-means standard errors.
    int n_batches = 50;
};

// Ergodic time averages of the nine moment functionals along one
// stationary-start path. Fields with a closed form carry it in `reference`.
// When a <= 1/2 the inverse-moment averages are still computed but flagged in
// `warnings`; a non-positive Y sample leaves them Unavailable.
struct SimulatedMoments {
    StationaryMoments moments;
    std::vector<std::string> warnings;
};

SimulatedMoments moments_by_simulation(const ModelParams& p, const MomentSimulationOptions& opt,
                                       const RngStream& rng);

// Block-diagonal asymptotic covariance of sqrt(T)(MLE - truth) for
// (a, b, m, theta).
struct MleCovariance {
    Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
};

// Asymptotic covariance of sqrt(T)(LSE - truth) for (m, theta).
struct LseCovariance {
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
};

MleCovariance sigma_mle(const StationaryMoments& mom);
LseCovariance sigma_lse(const StationaryMoments& mom);

// Asymptotic variances of the known-m theta estimators.
double mle_theta_variance(const StationaryMoments& mom);
double lse_theta_variance(const StationaryMoments& mom);

struct OrderingCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool strict = false;
    bool holds = false;
    double margin = 0.0;  // rhs - lhs
};

struct OrderingReport {
    std::vector<OrderingCheck> checks;

    const OrderingCheck& at(const std::string& name) const;
};

// Variance comparisons between the estimators:
//   mle_known_m_vs_joint   1/E(X^2/Y) <= Sigma_MLE[theta,theta]
//   mle_vs_lse_known_m     1/E(X^2/Y) <  E(X^2 Y)/E(X^2)^2
//   lse_known_m_vs_joint_11, lse_known_m_vs_joint_22
//                          E(X^2 Y)/E(X^2)^2 against both diagonal entries
//                          of Sigma_LSE
OrderingReport variance_orderings(const StationaryMoments& mom);

}  // namespace affest

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "affest/asymptotics.hpp"
#include "affest/estimators.hpp"
#include "affest/json_io.hpp"
#include "affest/model.hpp"
#include "affest/simulation.hpp"

namespace affest {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
    ModelParams params;
    double y0 = 1.0;
    double x0 = 0.0;
    bool stationary_start = false;
    double burn_in = 20.0;
    std::vector<double> horizons = {50.0, 200.0, 500.0};
    double dt = 1e-2;
    std::size_t n_replicates = 200;
    std::uint64_t seed = 20240601;
    std::vector<EstimatorKind> estimators = all_estimators();
    // Used by the theta-only estimators; defaults to params.m.
    std::optional<double> m_known;
    Scheme scheme = Scheme::ExactCIR_CondGaussX;
    double obs_spacing = 1.0;
    // Long-run simulation that supplies E(X/Y), E(X^2/Y) for the theoretical
    // MLE covariances.
    MomentSimulationOptions moment_sim;

    double m_for_known() const { return m_known.value_or(params.m); }
};

// Throws Error(Config) on any violated invariant.
void validate(const ExperimentConfig& cfg);

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

// FNV-1a over the canonical JSON form of the config.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct EstimatorSummary {
    EstimatorKind kind = EstimatorKind::MleTheta;
    double T = 0.0;
    std::vector<std::string> names;
    std::vector<double> truth;
    // One row per replicate; empty when the replicate was degenerate.
    std::vector<std::vector<double>> estimates;
    std::size_t degenerate_count = 0;
    std::size_t n_valid = 0;
    std::vector<double> mean;
    std::vector<double> bias;
    std::vector<double> bias_se;
    std::vector<double> rmse;
    // Covariance of sqrt(T)(estimate - truth) over valid replicates.
    Eigen::MatrixXd empirical_cov;
    // Same quantity's sampling standard error, entrywise.
    Eigen::MatrixXd empirical_cov_se;
    std::optional<Eigen::MatrixXd> theoretical_cov;
    std::vector<double> ks;
    std::vector<double> skewness;
    std::vector<double> excess_kurtosis;
};

struct ConsistencyVerdict {
    EstimatorKind kind = EstimatorKind::MleTheta;
    bool rmse_decreasing = false;
    bool final_bias_within_3se = false;
    std::size_t degenerate_total = 0;
    bool pass = false;
};

struct ReplicateSeed {
    double T = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

struct ExperimentReport {
    std::string kind;  // "consistency" or "normality"
    ExperimentConfig config;
    std::vector<EstimatorSummary> results;
    std::vector<ConsistencyVerdict> verdicts;
    std::optional<StationaryMoments> moments;
    std::vector<std::string> warnings;
    std::vector<ReplicateSeed> replicate_seeds;

    const EstimatorSummary& find(EstimatorKind k, double T) const;
};

// Stream id of replicate r at horizon index h.
std::uint64_t replicate_stream_id(std::size_t horizon_index, std::size_t replicate);

// Runs every horizon of the ladder and judges the RMSE decay per estimator.
ExperimentReport run_consistency(const ExperimentConfig& cfg);

// Runs the final horizon only and attaches theoretical covariances.
ExperimentReport run_normality(const ExperimentConfig& cfg);

// Theoretical covariance moments for a config: closed forms plus the
// simulated inverse moments when any MLE estimator is requested.
StationaryMoments theory_moments(const ExperimentConfig& cfg, std::vector<std::string>& warnings);

// The report's JSON form; `timestamp` is the only non-reproducible field.
Json to_json(const ExperimentReport& r, const std::string& timestamp);

// Runs fn(i) for i in [0, n) over a pool sized by AFFEST_THREADS (default:
// hardware concurrency). Results must be written by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);
std::size_t thread_count();

}  // namespace affest

// Command-line front end: simulate paths, estimate parameters, evaluate
// stationary moments and the characteristic function, run experiments.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "affest/asymptotics.hpp"
#include "affest/errors.hpp"
#include "affest/estimators.hpp"
#include "affest/experiment.hpp"
#include "affest/json_io.hpp"
#include "affest/model.hpp"
#include "affest/path_stats.hpp"
#include "affest/simulation.hpp"

namespace {

using namespace affest;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDegenerate = 2;

void add_param_flags(CLI::App* cmd, ModelParams& p) {
    cmd->add_option("--a", p.a, "drift level of Y (> 0)")->capture_default_str();
    cmd->add_option("--b", p.b, "mean-reversion rate of Y")->capture_default_str();
    cmd->add_option("--m", p.m, "drift level of X")->capture_default_str();
    cmd->add_option("--theta", p.theta, "mean-reversion rate of X")->capture_default_str();
}

void write_text(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream os(out);
    if (!os) throw Error(ErrorCode::Config, "cannot open '" + out + "' for writing");
    os << text << '\n';
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"affest: simulation and drift estimation for the CIR-driven two-factor affine diffusion"};
    app.require_subcommand(1);

    // simulate
    ModelParams sim_p;
    double sim_y0 = 1.0, sim_x0 = 0.0, sim_T = 10.0, sim_dt = 1e-2;
    std::string sim_scheme = "exact", sim_out;
    std::uint64_t sim_seed = 1, sim_stream = 0;
    bool sim_stationary = false;
    double sim_burn = 0.0;
    auto* simulate_cmd = app.add_subcommand("simulate", "simulate one path and write it as CSV (t,y,x)");
    add_param_flags(simulate_cmd, sim_p);
    simulate_cmd->add_option("--y0", sim_y0, "initial Y")->capture_default_str();
    simulate_cmd->add_option("--x0", sim_x0, "initial X")->capture_default_str();
    simulate_cmd->add_option("--T", sim_T, "horizon")->capture_default_str();
    simulate_cmd->add_option("--dt", sim_dt, "grid step")->capture_default_str();
    simulate_cmd->add_option("--scheme", sim_scheme, "exact | euler")->capture_default_str();
    simulate_cmd->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    simulate_cmd->add_option("--stream", sim_stream, "RNG stream id")->capture_default_str();
    simulate_cmd->add_flag("--stationary", sim_stationary, "draw the start from the stationary law");
    simulate_cmd->add_option("--burn-in", sim_burn, "burn-in time with --stationary")->capture_default_str();
    simulate_cmd->add_option("--out", sim_out, "output CSV path (stdout if omitted)");

    // estimate
    std::string est_in, est_name = "mle_full";
    std::optional<double> est_m;
    double est_spacing = 1.0;
    bool est_stats = false;
    auto* estimate_cmd = app.add_subcommand("estimate", "estimate parameters from a path CSV");
    estimate_cmd->add_option("--in", est_in, "input CSV path")->required();
    estimate_cmd->add_option("--estimator", est_name,
                             "mle_theta | mle_full | lse_theta | lse_full | lse_discrete")
        ->capture_default_str();
    estimate_cmd->add_option("--m-known", est_m, "known value of m (theta-only estimators)");
    estimate_cmd->add_option("--obs-spacing", est_spacing, "observation spacing for lse_discrete")
        ->capture_default_str();
    estimate_cmd->add_flag("--stats", est_stats, "also print the sufficient statistics");

    // moments
    ModelParams mom_p;
    bool mom_closed = false, mom_simulate = false;
    MomentSimulationOptions mom_opt;
    std::uint64_t mom_seed = 1;
    auto* moments_cmd = app.add_subcommand("moments", "stationary moments and asymptotic covariances");
    add_param_flags(moments_cmd, mom_p);
    moments_cmd->add_flag("--closed", mom_closed, "closed-form moments only");
    moments_cmd->add_flag("--simulate", mom_simulate, "ergodic averages along one long path");
    moments_cmd->add_option("--T", mom_opt.t_total, "simulated horizon")->capture_default_str();
    moments_cmd->add_option("--dt", mom_opt.dt, "grid step")->capture_default_str();
    moments_cmd->add_option("--burn-in", mom_opt.burn_in, "burn-in time")->capture_default_str();
    moments_cmd->add_option("--seed", mom_seed, "RNG seed")->capture_default_str();

    // experiment
    std::string exp_config, exp_out, exp_mode = "consistency", exp_timestamp;
    auto* experiment_cmd = app.add_subcommand("experiment", "run a Monte Carlo experiment from a JSON config");
    experiment_cmd->add_option("--config", exp_config, "config JSON path")->required();
    experiment_cmd->add_option("--out", exp_out, "report JSON path (stdout if omitted)");
    experiment_cmd->add_option("--mode", exp_mode, "consistency | normality")->capture_default_str();
    experiment_cmd->add_option("--timestamp", exp_timestamp, "override the report timestamp");

    // char
    ModelParams char_p;
    double lambda1 = 0.0, lambda2 = 0.0;
    CharOptions char_opt;
    auto* char_cmd = app.add_subcommand("char", "stationary joint Laplace/Fourier transform");
    add_param_flags(char_cmd, char_p);
    char_cmd->add_option("--lambda1", lambda1, "Laplace argument for Y (>= 0)")->capture_default_str();
    char_cmd->add_option("--lambda2", lambda2, "Fourier argument for X")->capture_default_str();
    char_cmd->add_option("--rk-step", char_opt.h, "Runge-Kutta step")->capture_default_str();
    char_cmd->add_option("--t-max", char_opt.t_max, "truncation time (default max(20/b, 20/theta))");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*simulate_cmd) {
            const GridSpec grid = GridSpec::make(sim_T, sim_dt);
            const RngStream rng{sim_seed, sim_stream};
            const Scheme scheme = scheme_from_string(sim_scheme);
            const SamplePath path = sim_stationary
                                        ? simulate_stationary_start(sim_p, grid, sim_burn, scheme, rng)
                                        : simulate(sim_p, sim_y0, sim_x0, grid, scheme, rng);
            if (sim_out.empty() || sim_out == "-") {
                write_path_csv(path, std::cout);
            } else {
                write_path_csv(path, sim_out);
            }
        } else if (*estimate_cmd) {
            const SamplePath path = read_path_csv(est_in);
            const SufficientStats stats = sufficient_stats(path);
            const EstimatorKind kind = estimator_from_string(est_name);
            const Estimate e = run_estimator(kind, path, stats, EstimateInputs{est_m, est_spacing});
            Json out = to_json(e);
            if (est_stats) out["stats"] = to_json(stats);
            std::cout << dump_json(out) << '\n';
        } else if (*moments_cmd) {
            if (mom_closed == mom_simulate) {
                throw Error(ErrorCode::Config, "moments: pass exactly one of --closed or --simulate");
            }
            Json out;
            out["params"] = to_json(mom_p);
            StationaryMoments mom;
            if (mom_closed) {
                mom = stationary_moments_closed(mom_p);
                out["moments"] = to_json(mom);
            } else {
                const SimulatedMoments sim = moments_by_simulation(mom_p, mom_opt, RngStream{mom_seed, 0});
                mom = sim.moments;
                out["moments"] = to_json(mom);
                out["warnings"] = sim.warnings;
            }
            out["criticality"] = to_string(classify(mom_p));
            out["sigma_lse"] = to_json(sigma_lse(mom), mom);
            out["lse_theta_variance"] = lse_theta_variance(mom);
            if (mom.complete()) {
                out["sigma_mle"] = to_json(sigma_mle(mom), mom);
                out["mle_theta_variance"] = mle_theta_variance(mom);
                out["variance_orderings"] = to_json(variance_orderings(mom));
            }
            std::cout << dump_json(out) << '\n';
        } else if (*experiment_cmd) {
            std::ifstream is(exp_config);
            if (!is) throw Error(ErrorCode::Config, "cannot open '" + exp_config + "'");
            Json j;
            try {
                j = Json::parse(is);
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
            }
            const ExperimentConfig cfg = config_from_json(j);
            ExperimentReport report;
            if (exp_mode == "consistency") {
                report = run_consistency(cfg);
            } else if (exp_mode == "normality") {
                report = run_normality(cfg);
            } else {
                throw Error(ErrorCode::Config, "experiment: --mode must be consistency or normality");
            }
            const std::string ts = exp_timestamp.empty() ? utc_timestamp() : exp_timestamp;
            write_text(dump_json(to_json(report, ts)), exp_out);
        } else if (*char_cmd) {
            const CharResult r = stationary_char(char_p, lambda1, lambda2, char_opt);
            const Json out = {{"params", to_json(char_p)},
                              {"lambda1", lambda1},
                              {"lambda2", lambda2},
                              {"re", r.value.real()},
                              {"im", r.value.imag()},
                              {"t_max", r.t_max},
                              {"tail_bound", r.tail_bound}};
            std::cout << dump_json(out) << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return is_degenerate_input(e.code()) ? kExitDegenerate : kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

#include "affest/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "affest/errors.hpp"
#include "affest/path_stats.hpp"
#include "affest/summary.hpp"

namespace affest {

// ---------------------------------------------------------------------------
// Configuration

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, "experiment config: " + msg); };
    try {
        validate(cfg.params);
    } catch (const Error& e) {
        fail(e.what());
    }
    if (cfg.n_replicates < 1) fail("n_replicates must be >= 1");
    if (!(cfg.dt > 0.0)) fail("dt must be > 0");
    if (cfg.horizons.empty()) fail("horizons must be non-empty");
    for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
        if (!(cfg.horizons[i] > 0.0)) fail("horizons must be > 0");
        if (i > 0 && !(cfg.horizons[i] > cfg.horizons[i - 1])) fail("horizons must be strictly ascending");
        GridSpec::make(cfg.horizons[i], cfg.dt);
    }
    if (cfg.estimators.empty()) fail("estimators must be non-empty");
    if (!cfg.stationary_start && !(cfg.y0 >= 0.0)) fail("y0 must be >= 0");
    if (cfg.stationary_start && !(cfg.burn_in >= 0.0)) fail("burn_in must be >= 0");
    if (!(cfg.obs_spacing > 0.0)) fail("obs_spacing must be > 0");
}

namespace {

const std::set<std::string> kConfigKeys = {
    "params", "y0", "x0", "stationary_start", "burn_in", "horizons", "dt", "n_replicates",
    "seed", "estimators", "m_known", "scheme", "obs_spacing", "moment_sim"};

const std::set<std::string> kMomentSimKeys = {"t_total", "dt", "burn_in", "n_batches"};

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Config, std::string("experiment config: field '") + key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "experiment config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!kConfigKeys.count(it.key())) {
            throw Error(ErrorCode::Config, "experiment config: unknown field '" + it.key() + "'");
        }
    }
    if (!j.contains("params")) throw Error(ErrorCode::Config, "experiment config: missing 'params'");

    ExperimentConfig cfg;
    cfg.params = params_from_json(j.at("params"));
    cfg.y0 = get_or(j, "y0", cfg.y0);
    cfg.x0 = get_or(j, "x0", cfg.x0);
    cfg.stationary_start = get_or(j, "stationary_start", cfg.stationary_start);
    cfg.burn_in = get_or(j, "burn_in", cfg.burn_in);
    cfg.horizons = get_or(j, "horizons", cfg.horizons);
    cfg.dt = get_or(j, "dt", cfg.dt);
    cfg.n_replicates = get_or<std::size_t>(j, "n_replicates", cfg.n_replicates);
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    if (j.contains("estimators")) {
        cfg.estimators.clear();
        for (const auto& name : get_or<std::vector<std::string>>(j, "estimators", {})) {
            cfg.estimators.push_back(estimator_from_string(name));
        }
    }
    if (j.contains("m_known") && !j.at("m_known").is_null()) cfg.m_known = get_or(j, "m_known", 0.0);
    if (j.contains("scheme")) cfg.scheme = scheme_from_string(get_or<std::string>(j, "scheme", ""));
    cfg.obs_spacing = get_or(j, "obs_spacing", cfg.obs_spacing);
    if (j.contains("moment_sim")) {
        const Json& ms = j.at("moment_sim");
        if (!ms.is_object()) throw Error(ErrorCode::Config, "experiment config: 'moment_sim' must be an object");
        for (auto it = ms.begin(); it != ms.end(); ++it) {
            if (!kMomentSimKeys.count(it.key())) {
                throw Error(ErrorCode::Config, "experiment config: unknown moment_sim field '" + it.key() + "'");
            }
        }
        cfg.moment_sim.t_total = get_or(ms, "t_total", cfg.moment_sim.t_total);
        cfg.moment_sim.dt = get_or(ms, "dt", cfg.moment_sim.dt);
        cfg.moment_sim.burn_in = get_or(ms, "burn_in", cfg.moment_sim.burn_in);
        cfg.moment_sim.n_batches = get_or(ms, "n_batches", cfg.moment_sim.n_batches);
    }
    cfg.moment_sim.scheme = cfg.scheme;
    validate(cfg);
    return cfg;
}

Json to_json(const ExperimentConfig& cfg) {
    Json est = Json::array();
    for (EstimatorKind k : cfg.estimators) est.push_back(to_string(k));
    return {
        {"params", to_json(cfg.params)},
        {"y0", cfg.y0},
        {"x0", cfg.x0},
        {"stationary_start", cfg.stationary_start},
        {"burn_in", cfg.burn_in},
        {"horizons", cfg.horizons},
        {"dt", cfg.dt},
        {"n_replicates", cfg.n_replicates},
        {"seed", cfg.seed},
        {"estimators", est},
        {"m_known", cfg.m_known ? Json(*cfg.m_known) : Json(nullptr)},
        {"scheme", to_string(cfg.scheme)},
        {"obs_spacing", cfg.obs_spacing},
        {"moment_sim",
         {{"t_total", cfg.moment_sim.t_total},
          {"dt", cfg.moment_sim.dt},
          {"burn_in", cfg.moment_sim.burn_in},
          {"n_batches", cfg.moment_sim.n_batches}}},
    };
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = dump_json(to_json(cfg), -1);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Parallel execution

std::size_t thread_count() {
    if (const char* env = std::getenv("AFFEST_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Replicates

std::uint64_t replicate_stream_id(std::size_t horizon_index, std::size_t replicate) {
    return (static_cast<std::uint64_t>(horizon_index) << 32) | static_cast<std::uint64_t>(replicate);
}

namespace {

constexpr std::uint64_t kMomentStream = 0xFFFFFFFF00000000ull;

bool uses_mle(const ExperimentConfig& cfg) {
    return std::any_of(cfg.estimators.begin(), cfg.estimators.end(), [](EstimatorKind k) {
        return k == EstimatorKind::MleTheta || k == EstimatorKind::MleFull;
    });
}

std::vector<double> truth_for(EstimatorKind k, const ExperimentConfig& cfg) {
    const ModelParams& p = cfg.params;
    switch (k) {
        case EstimatorKind::MleTheta:
        case EstimatorKind::LseTheta: return {p.theta};
        case EstimatorKind::MleFull: return {p.a, p.b, p.m, p.theta};
        case EstimatorKind::LseFull: return {p.m, p.theta};
        case EstimatorKind::LseDiscrete: {
            const auto [mh, th] = discrete_lse_target(p, cfg.obs_spacing);
            return {mh, th};
        }
    }
    return {};
}

std::optional<Eigen::MatrixXd> theory_for(EstimatorKind k, const StationaryMoments& mom) {
    try {
        switch (k) {
            case EstimatorKind::MleTheta:
                return Eigen::MatrixXd::Constant(1, 1, mle_theta_variance(mom));
            case EstimatorKind::LseTheta:
                return Eigen::MatrixXd::Constant(1, 1, lse_theta_variance(mom));
            case EstimatorKind::MleFull: return Eigen::MatrixXd(sigma_mle(mom).sigma);
            case EstimatorKind::LseFull: return Eigen::MatrixXd(sigma_lse(mom).sigma);
            case EstimatorKind::LseDiscrete: return std::nullopt;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateMoments) throw;
    }
    return std::nullopt;
}

using ReplicateRow = std::vector<std::vector<double>>;  // per estimator, empty if degenerate

ReplicateRow run_replicate(const ExperimentConfig& cfg, double T, const RngStream& rng) {
    const GridSpec grid = GridSpec::make(T, cfg.dt);
    const SamplePath path = cfg.stationary_start
                                ? simulate_stationary_start(cfg.params, grid, cfg.burn_in, cfg.scheme, rng)
                                : simulate(cfg.params, cfg.y0, cfg.x0, grid, cfg.scheme, rng);
    std::optional<SufficientStats> stats;
    try {
        stats = sufficient_stats(path);
    } catch (const Error& e) {
        if (!is_degenerate_input(e.code())) throw;
    }

    ReplicateRow row(cfg.estimators.size());
    for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
        const EstimatorKind kind = cfg.estimators[k];
        EstimateInputs in;
        in.obs_spacing = cfg.obs_spacing;
        if (kind == EstimatorKind::MleTheta || kind == EstimatorKind::LseTheta) in.m_known = cfg.m_for_known();
        if (kind != EstimatorKind::LseDiscrete && !stats) continue;
        try {
            const Estimate e = run_estimator(kind, path, stats ? *stats : SufficientStats{}, in);
            for (const auto& [name, v] : e.values) row[k].push_back(v);
        } catch (const Error& e) {
            if (!is_degenerate_input(e.code())) throw;
        }
    }
    return row;
}

EstimatorSummary summarize(EstimatorKind kind, double T, const ExperimentConfig& cfg,
                           std::vector<std::vector<double>> estimates) {
    EstimatorSummary s;
    s.kind = kind;
    s.T = T;
    s.names = estimated_names(kind, false);
    s.truth = truth_for(kind, cfg);
    s.estimates = std::move(estimates);
    const std::size_t d = s.truth.size();

    std::vector<std::vector<double>> cols(d);
    for (const auto& row : s.estimates) {
        if (row.size() != d) {
            ++s.degenerate_count;
            continue;
        }
        for (std::size_t c = 0; c < d; ++c) cols[c].push_back(row[c]);
    }
    s.n_valid = cols.empty() ? 0 : cols[0].size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean.assign(d, nan);
    s.bias.assign(d, nan);
    s.bias_se.assign(d, nan);
    s.rmse.assign(d, nan);
    s.ks.assign(d, nan);
    s.skewness.assign(d, nan);
    s.excess_kurtosis.assign(d, nan);
    s.empirical_cov = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), nan);
    s.empirical_cov_se = s.empirical_cov;
    if (s.n_valid < 2) return s;

    const auto n = static_cast<double>(s.n_valid);
    const double root_t = std::sqrt(T);
    std::vector<std::vector<double>> scaled(d, std::vector<double>(s.n_valid));
    for (std::size_t c = 0; c < d; ++c) {
        s.mean[c] = mean(cols[c]);
        s.bias[c] = s.mean[c] - s.truth[c];
        s.bias_se[c] = std::sqrt(sample_variance(cols[c]) / n);
        double sq = 0.0;
        for (std::size_t r = 0; r < s.n_valid; ++r) {
            const double err = cols[c][r] - s.truth[c];
            sq += err * err;
            scaled[c][r] = root_t * err;
        }
        s.rmse[c] = std::sqrt(sq / n);
        if (s.n_valid >= 4) {
            s.ks[c] = ks_statistic_fitted_normal(cols[c]);
            s.skewness[c] = skewness(cols[c]);
            s.excess_kurtosis[c] = excess_kurtosis(cols[c]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        const double mi = mean(scaled[i]);
        for (std::size_t k = 0; k < d; ++k) {
            const double mk = mean(scaled[k]);
            double acc = 0.0, acc2 = 0.0;
            for (std::size_t r = 0; r < s.n_valid; ++r) {
                const double prod = (scaled[i][r] - mi) * (scaled[k][r] - mk);
                acc += prod;
                acc2 += prod * prod;
            }
            const double cov = acc / (n - 1.0);
            const double mean_prod = acc / n;
            const double var_prod = std::max(0.0, acc2 / n - mean_prod * mean_prod);
            s.empirical_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = cov;
            s.empirical_cov_se(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::sqrt(var_prod / n);
        }
    }
    return s;
}

std::vector<EstimatorSummary> run_horizon(const ExperimentConfig& cfg, std::size_t h,
                                          std::vector<ReplicateSeed>& seeds) {
    const double T = cfg.horizons[h];
    std::vector<ReplicateRow> rows(cfg.n_replicates);
    parallel_for(cfg.n_replicates, [&](std::size_t r) {
        rows[r] = run_replicate(cfg, T, RngStream{cfg.seed, replicate_stream_id(h, r)});
    });
    for (std::size_t r = 0; r < cfg.n_replicates; ++r) {
        seeds.push_back({T, cfg.seed, replicate_stream_id(h, r)});
    }
    std::vector<EstimatorSummary> out;
    for (std::size_t k = 0; k < cfg.estimators.size(); ++k) {
        std::vector<std::vector<double>> est(cfg.n_replicates);
        for (std::size_t r = 0; r < cfg.n_replicates; ++r) est[r] = std::move(rows[r][k]);
        out.push_back(summarize(cfg.estimators[k], T, cfg, std::move(est)));
    }
    return out;
}

void attach_theory(ExperimentReport& report) {
    report.moments = theory_moments(report.config, report.warnings);
    for (auto& s : report.results) s.theoretical_cov = theory_for(s.kind, *report.moments);
}

}  // namespace

StationaryMoments theory_moments(const ExperimentConfig& cfg, std::vector<std::string>& warnings) {
    StationaryMoments mom = stationary_moments_closed(cfg.params);
    if (!uses_mle(cfg)) return mom;
    const SimulatedMoments sim = moments_by_simulation(cfg.params, cfg.moment_sim, RngStream{cfg.seed, kMomentStream});
    warnings.insert(warnings.end(), sim.warnings.begin(), sim.warnings.end());
    mom.ex_over_y = sim.moments.ex_over_y;
    mom.ex2_over_y = sim.moments.ex2_over_y;
    if (!mom.e_inv_y.available()) mom.e_inv_y = sim.moments.e_inv_y;
    return mom;
}

const EstimatorSummary& ExperimentReport::find(EstimatorKind k, double T) const {
    for (const auto& s : results) {
        if (s.kind == k && s.T == T) return s;
    }
    throw Error(ErrorCode::Config, std::string("report has no result for ") + to_string(k));
}

ExperimentReport run_consistency(const ExperimentConfig& cfg) {
    validate(cfg);
    require_subcritical(cfg.params, "run_consistency");
    ExperimentReport report;
    report.kind = "consistency";
    report.config = cfg;
    if (uses_mle(cfg) && cfg.params.a <= 0.5) {
        report.warnings.emplace_back("a <= 1/2: MLE runs are outside validated territory");
    }
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
        auto part = run_horizon(cfg, h, report.replicate_seeds);
        report.results.insert(report.results.end(), part.begin(), part.end());
    }
    for (EstimatorKind kind : cfg.estimators) {
        ConsistencyVerdict v;
        v.kind = kind;
        v.rmse_decreasing = true;
        const EstimatorSummary* prev = nullptr;
        for (double T : cfg.horizons) {
            const EstimatorSummary& cur = report.find(kind, T);
            v.degenerate_total += cur.degenerate_count;
            if (prev) {
                for (std::size_t c = 0; c < cur.rmse.size(); ++c) {
                    if (!(cur.rmse[c] < prev->rmse[c])) v.rmse_decreasing = false;
                }
            }
            prev = &cur;
        }
        v.final_bias_within_3se = true;
        for (std::size_t c = 0; c < prev->bias.size(); ++c) {
            if (!(std::abs(prev->bias[c]) <= 3.0 * prev->bias_se[c])) v.final_bias_within_3se = false;
        }
        v.pass = v.rmse_decreasing && v.final_bias_within_3se && v.degenerate_total == 0;
        report.verdicts.push_back(v);
    }
    return report;
}

ExperimentReport run_normality(const ExperimentConfig& cfg) {
    validate(cfg);
    require_subcritical(cfg.params, "run_normality");
    ExperimentReport report;
    report.kind = "normality";
    report.config = cfg;
    if (uses_mle(cfg) && cfg.params.a <= 0.5) {
        report.warnings.emplace_back("a <= 1/2: MLE runs are outside validated territory");
    }
    report.results = run_horizon(cfg, cfg.horizons.size() - 1, report.replicate_seeds);
    attach_theory(report);
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

Json vector_json(const std::vector<double>& v) { return Json(v); }

Json summary_json(const EstimatorSummary& s) {
    Json estimates = Json::array();
    for (const auto& row : s.estimates) estimates.push_back(row.empty() ? Json(nullptr) : Json(row));
    return {
        {"estimator", to_string(s.kind)},
        {"T", s.T},
        {"names", s.names},
        {"truth", vector_json(s.truth)},
        {"n_replicates", s.estimates.size()},
        {"n_valid", s.n_valid},
        {"degenerate_count", s.degenerate_count},
        {"mean", vector_json(s.mean)},
        {"bias", vector_json(s.bias)},
        {"bias_se", vector_json(s.bias_se)},
        {"rmse", vector_json(s.rmse)},
        {"empirical_cov", matrix_to_json(s.empirical_cov)},
        {"empirical_cov_se", matrix_to_json(s.empirical_cov_se)},
        {"theoretical_cov", s.theoretical_cov ? matrix_to_json(*s.theoretical_cov) : Json(nullptr)},
        {"normality",
         {{"ks_fitted_normal", vector_json(s.ks)},
          {"skewness", vector_json(s.skewness)},
          {"excess_kurtosis", vector_json(s.excess_kurtosis)}}},
        {"estimates", estimates},
    };
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

Json to_json(const ExperimentReport& r, const std::string& timestamp) {
    Json results = Json::array();
    for (const auto& s : r.results) results.push_back(summary_json(s));
    Json verdicts = Json::array();
    for (const auto& v : r.verdicts) {
        verdicts.push_back({{"estimator", to_string(v.kind)},
                            {"rmse_decreasing", v.rmse_decreasing},
                            {"final_bias_within_3se", v.final_bias_within_3se},
                            {"degenerate_total", v.degenerate_total},
                            {"verdict", v.pass ? "PASS" : "FAIL"}});
    }
    Json seeds = Json::array();
    for (const auto& s : r.replicate_seeds) {
        seeds.push_back({{"T", s.T}, {"seed", s.seed}, {"stream_id", s.stream_id}});
    }
    return {
        {"kind", r.kind},
        {"timestamp", timestamp},
        {"versions",
         {{"affest", kVersion},
          {"model", kVersion},
          {"simulation", kVersion},
          {"path_stats", kVersion},
          {"estimators", kVersion},
          {"asymptotics", kVersion},
          {"experiment", kVersion}}},
        {"config", to_json(r.config)},
        {"config_hash", hex64(config_hash(r.config))},
        {"results", results},
        {"verdicts", verdicts},
        {"moments", r.moments ? to_json(*r.moments) : Json(nullptr)},
        {"warnings", r.warnings},
        {"replicates", seeds},
    };
}

}  // namespace affest

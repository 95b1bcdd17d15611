#include "affest/estimators.hpp"

#include <cmath>
#include <sstream>

#include "affest/errors.hpp"

namespace affest {

namespace {

void require_positive(double denom, const char* what) {
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": denominator " << denom << " is not positive";
        throw Error(ErrorCode::DegenerateDenominator, os.str());
    }
}

}  // namespace

double mle_theta_known_m(const SufficientStats& s, double m) {
    require_positive(s.int_x2_over_y_ds, "mle_theta_known_m");
    return (-s.int_x_over_y_dX + m * s.int_x_over_y_ds) / s.int_x2_over_y_ds;
}

MleFull mle_full(const SufficientStats& s) {
    MleFull r;
    r.denom_ab = s.int_y_ds * s.int_inv_y_ds - s.T * s.T;
    r.denom_mtheta = s.int_x2_over_y_ds * s.int_inv_y_ds - s.int_x_over_y_ds * s.int_x_over_y_ds;
    require_positive(r.denom_ab, "mle_full (a,b) block");
    require_positive(r.denom_mtheta, "mle_full (m,theta) block");

    r.a_hat = (s.int_y_ds * s.int_inv_y_dY - s.T * s.delta_y) / r.denom_ab;
    r.b_hat = (s.T * s.int_inv_y_dY - s.delta_y * s.int_inv_y_ds) / r.denom_ab;
    r.m_hat = (s.int_x2_over_y_ds * s.int_inv_y_dX - s.int_x_over_y_ds * s.int_x_over_y_dX) /
              r.denom_mtheta;
    r.theta_hat = (s.int_x_over_y_ds * s.int_inv_y_dX - s.int_inv_y_ds * s.int_x_over_y_dX) /
                  r.denom_mtheta;
    return r;
}

double lse_theta_known_m(const SufficientStats& s, double m) {
    require_positive(s.int_x2_ds, "lse_theta_known_m");
    return -(s.int_x_dX - m * s.int_x_ds) / s.int_x2_ds;
}

LseFull lse_full(const SufficientStats& s) {
    LseFull r;
    r.denom = s.T * s.int_x2_ds - s.int_x_ds * s.int_x_ds;
    require_positive(r.denom, "lse_full");
    r.m_hat = (s.delta_x * s.int_x2_ds - s.int_x_ds * s.int_x_dX) / r.denom;
    r.theta_hat = (s.delta_x * s.int_x_ds - s.T * s.int_x_dX) / r.denom;
    return r;
}

DiscreteLse lse_discrete(std::span<const double> x_obs, std::optional<double> m) {
    if (x_obs.size() < 2) {
        throw Error(ErrorCode::DegenerateDenominator, "lse_discrete: need at least two observations");
    }
    const auto n = static_cast<double>(x_obs.size() - 1);
    double sum_prev = 0.0, sum_prev2 = 0.0, sum_diff = 0.0, sum_diff_prev = 0.0;
    for (std::size_t i = 1; i < x_obs.size(); ++i) {
        const double prev = x_obs[i - 1];
        const double diff = x_obs[i] - prev;
        sum_prev += prev;
        sum_prev2 += prev * prev;
        sum_diff += diff;
        sum_diff_prev += diff * prev;
    }
    DiscreteLse r;
    if (m) {
        r.denom = sum_prev2;
        require_positive(r.denom, "lse_discrete (known m)");
        r.theta_hat = -(sum_diff_prev - *m * sum_prev) / r.denom;
        return r;
    }
    r.denom = n * sum_prev2 - sum_prev * sum_prev;
    require_positive(r.denom, "lse_discrete (joint)");
    r.m_hat = (sum_prev2 * sum_diff - sum_prev * sum_diff_prev) / r.denom;
    r.theta_hat = (sum_prev * sum_diff - n * sum_diff_prev) / r.denom;
    return r;
}

std::pair<double, double> discrete_lse_target(const ModelParams& p, double h) {
    const double theta_h = -std::expm1(-p.theta * h);
    return {p.m * exp_integral(p.theta, h), theta_h};
}

std::vector<double> observations_at_spacing(const SamplePath& path, double spacing) {
    const double ratio = spacing / path.grid.dt;
    const double k = std::round(ratio);
    if (k < 1.0 || std::abs(k - ratio) > 1e-9 * ratio) {
        std::ostringstream os;
        os << "observation spacing " << spacing << " is not a multiple of dt=" << path.grid.dt;
        throw Error(ErrorCode::Config, os.str());
    }
    const auto step = static_cast<std::size_t>(k);
    std::vector<double> out;
    out.reserve(path.x.size() / step + 1);
    for (std::size_t i = 0; i < path.x.size(); i += step) out.push_back(path.x[i]);
    return out;
}

double loglik(const SufficientStats& s, const ModelParams& p) {
    const double a = p.a, b = p.b, m = p.m, th = p.theta;
    return (a - 1.0) * s.int_inv_y_dY - b * s.delta_y + m * s.int_inv_y_dX -
           th * s.int_x_over_y_dX - 0.5 * (a * a - 1.0) * s.int_inv_y_ds + a * b * s.T -
           0.5 * b * b * s.int_y_ds - 0.5 * m * m * s.int_inv_y_ds + m * th * s.int_x_over_y_ds -
           0.5 * th * th * s.int_x2_over_y_ds;
}

const char* to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::MleTheta: return "mle_theta";
        case EstimatorKind::MleFull: return "mle_full";
        case EstimatorKind::LseTheta: return "lse_theta";
        case EstimatorKind::LseFull: return "lse_full";
        case EstimatorKind::LseDiscrete: return "lse_discrete";
    }
    return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
    for (EstimatorKind k : all_estimators()) {
        if (name == to_string(k)) return k;
    }
    throw Error(ErrorCode::Config, "unknown estimator '" + name +
                                       "' (expected mle_theta|mle_full|lse_theta|lse_full|lse_discrete)");
}

const std::vector<EstimatorKind>& all_estimators() {
    static const std::vector<EstimatorKind> kinds = {EstimatorKind::MleTheta, EstimatorKind::MleFull,
                                                     EstimatorKind::LseTheta, EstimatorKind::LseFull,
                                                     EstimatorKind::LseDiscrete};
    return kinds;
}

std::vector<std::string> estimated_names(EstimatorKind k, bool m_known) {
    switch (k) {
        case EstimatorKind::MleTheta:
        case EstimatorKind::LseTheta: return {"theta"};
        case EstimatorKind::MleFull: return {"a", "b", "m", "theta"};
        case EstimatorKind::LseFull: return {"m", "theta"};
        case EstimatorKind::LseDiscrete:
            if (m_known) return {"theta"};
            return {"m", "theta"};
    }
    return {};
}

namespace {

double require_m(const EstimateInputs& in, EstimatorKind k) {
    if (!in.m_known) {
        throw Error(ErrorCode::Config, std::string(to_string(k)) + " requires a known m (--m-known)");
    }
    return *in.m_known;
}

}  // namespace

Estimate run_estimator(EstimatorKind kind, const SamplePath& path, const SufficientStats& s,
                       const EstimateInputs& in) {
    Estimate e;
    e.estimator = to_string(kind);
    switch (kind) {
        case EstimatorKind::MleTheta: {
            const double m = require_m(in, kind);
            e.denominators = {{"int_x2_over_y_ds", s.int_x2_over_y_ds}};
            e.values = {{"theta", mle_theta_known_m(s, m)}};
            break;
        }
        case EstimatorKind::MleFull: {
            const MleFull r = mle_full(s);
            e.values = {{"a", r.a_hat}, {"b", r.b_hat}, {"m", r.m_hat}, {"theta", r.theta_hat}};
            e.denominators = {{"denom_ab", r.denom_ab}, {"denom_mtheta", r.denom_mtheta}};
            break;
        }
        case EstimatorKind::LseTheta: {
            const double m = require_m(in, kind);
            e.denominators = {{"int_x2_ds", s.int_x2_ds}};
            e.values = {{"theta", lse_theta_known_m(s, m)}};
            break;
        }
        case EstimatorKind::LseFull: {
            const LseFull r = lse_full(s);
            e.values = {{"m", r.m_hat}, {"theta", r.theta_hat}};
            e.denominators = {{"denom", r.denom}};
            break;
        }
        case EstimatorKind::LseDiscrete: {
            const std::vector<double> obs = observations_at_spacing(path, in.obs_spacing);
            const DiscreteLse r = lse_discrete(obs, in.m_known);
            if (r.m_hat) e.values.emplace_back("m", *r.m_hat);
            e.values.emplace_back("theta", r.theta_hat);
            e.denominators = {{"denom", r.denom}};
            break;
        }
    }
    e.valid = true;
    return e;
}

}  // namespace affest

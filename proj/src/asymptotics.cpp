#include "affest/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "affest/errors.hpp"

namespace affest {

namespace {

constexpr int kFunctionals = 9;

double evaluate(int k, double y, double x) {
    switch (k) {
        case 0: return y;
        case 1: return x;
        case 2: return y * y;
        case 3: return x * y;
        case 4: return x * x;
        case 5: return x * x * y;
        case 6: return 1.0 / y;
        case 7: return x / y;
        default: return x * x / y;
    }
}

const MomentValue& require(const MomentValue& v, const char* name) {
    if (!v.available() || !std::isfinite(v.value)) {
        throw Error(ErrorCode::DegenerateMoments, std::string("moment ") + name + " is not available");
    }
    return v;
}

}  // namespace

SimulatedMoments moments_by_simulation(const ModelParams& p, const MomentSimulationOptions& opt,
                                       const RngStream& rng) {
    validate(p);
    require_subcritical(p, "moments_by_simulation");
    if (opt.n_batches < 2) throw Error(ErrorCode::Config, "moments_by_simulation: n_batches must be >= 2");

    SimulatedMoments out;
    if (p.a <= 0.5) {
        out.warnings.emplace_back("a <= 1/2: E(1/Y) is infinite; inverse-moment averages do not converge");
    }
    const SamplePath path =
        simulate_stationary_start(p, GridSpec::make(opt.t_total, opt.dt), opt.burn_in, opt.scheme, rng);

    const std::size_t n = path.grid.n_steps;
    const auto batches = static_cast<std::size_t>(opt.n_batches);
    if (n < batches) throw Error(ErrorCode::Config, "moments_by_simulation: fewer steps than batches");

    bool y_positive = true;
    std::vector<std::vector<double>> batch_sum(kFunctionals, std::vector<double>(batches, 0.0));
    std::vector<double> batch_count(batches, 0.0);
    // Left-endpoint time averages over [0, t_total), matching time_integral.
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t bi = i * batches / n;
        const double y = path.y[i];
        const double x = path.x[i];
        batch_count[bi] += 1.0;
        const int limit = y > 0.0 ? kFunctionals : 6;
        if (y <= 0.0) y_positive = false;
        for (int k = 0; k < limit; ++k) batch_sum[k][bi] += evaluate(k, y, x);
    }
    if (!y_positive) {
        out.warnings.emplace_back("non-positive Y sample on the grid; inverse moments unavailable");
    }

    const StationaryMoments closed = stationary_moments_closed(p);
    const auto& fields = moment_fields();
    for (int k = 0; k < kFunctionals; ++k) {
        if (k >= 6 && !y_positive) continue;
        double total = 0.0;
        std::vector<double> means(batches);
        for (std::size_t bi = 0; bi < batches; ++bi) {
            total += batch_sum[k][bi];
            means[bi] = batch_sum[k][bi] / batch_count[bi];
        }
        const double mean = total / static_cast<double>(n);
        double ss = 0.0;
        for (double bm : means) ss += (bm - mean) * (bm - mean);
        const double se = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));

        MomentValue& v = out.moments.*(fields[static_cast<std::size_t>(k)].member);
        v.value = mean;
        v.source = Provenance::Simulated;
        v.std_error = se;
        const MomentValue& c = closed.*(fields[static_cast<std::size_t>(k)].member);
        if (c.available()) v.reference = c.value;
    }
    return out;
}

MleCovariance sigma_mle(const StationaryMoments& mom) {
    const double ey = require(mom.ey, "ey").value;
    const double inv = require(mom.e_inv_y, "e_inv_y").value;
    const double xoy = require(mom.ex_over_y, "ex_over_y").value;
    const double x2oy = require(mom.ex2_over_y, "ex2_over_y").value;

    const double d1 = inv * ey - 1.0;
    const double d2 = inv * x2oy - xoy * xoy;
    if (!(d1 > 0.0) || !(d2 > 0.0)) {
        std::ostringstream os;
        os << "sigma_mle: degenerate moments (E(1/Y)E(Y)-1=" << d1
           << ", E(1/Y)E(X^2/Y)-E(X/Y)^2=" << d2 << ")";
        throw Error(ErrorCode::DegenerateMoments, os.str());
    }
    MleCovariance c;
    c.sigma(0, 0) = ey / d1;
    c.sigma(0, 1) = c.sigma(1, 0) = 1.0 / d1;
    c.sigma(1, 1) = inv / d1;
    c.sigma(2, 2) = x2oy / d2;
    c.sigma(2, 3) = c.sigma(3, 2) = xoy / d2;
    c.sigma(3, 3) = inv / d2;
    return c;
}

LseCovariance sigma_lse(const StationaryMoments& mom) {
    const double ey = require(mom.ey, "ey").value;
    const double ex = require(mom.ex, "ex").value;
    const double exy = require(mom.exy, "exy").value;
    const double ex2 = require(mom.ex2, "ex2").value;
    const double ex2y = require(mom.ex2y, "ex2y").value;

    const double spread = ex2 - ex * ex;
    if (!(spread > 0.0)) {
        throw Error(ErrorCode::DegenerateMoments, "sigma_lse: E(X^2) - E(X)^2 must be > 0");
    }
    const double den = spread * spread;
    LseCovariance c;
    c.sigma(0, 0) = (ex * ex * ex2y - 2.0 * ex * ex2 * exy + ex2 * ex2 * ey) / den;
    c.sigma(0, 1) = c.sigma(1, 0) = (ex * (ex2y + ex2 * ey) - exy * (ex2 + ex * ex)) / den;
    c.sigma(1, 1) = (ex2y - 2.0 * ex * exy + ex * ex * ey) / den;
    return c;
}

double mle_theta_variance(const StationaryMoments& mom) {
    const double x2oy = require(mom.ex2_over_y, "ex2_over_y").value;
    if (!(x2oy > 0.0)) throw Error(ErrorCode::DegenerateMoments, "E(X^2/Y) must be > 0");
    return 1.0 / x2oy;
}

double lse_theta_variance(const StationaryMoments& mom) {
    const double ex2 = require(mom.ex2, "ex2").value;
    const double ex2y = require(mom.ex2y, "ex2y").value;
    if (!(ex2 > 0.0)) throw Error(ErrorCode::DegenerateMoments, "E(X^2) must be > 0");
    return ex2y / (ex2 * ex2);
}

const OrderingCheck& OrderingReport::at(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw Error(ErrorCode::Config, "no ordering check named '" + name + "'");
}

OrderingReport variance_orderings(const StationaryMoments& mom) {
    const double mle_known = mle_theta_variance(mom);
    const double lse_known = lse_theta_variance(mom);
    const MleCovariance mle = sigma_mle(mom);
    const LseCovariance lse = sigma_lse(mom);

    auto check = [](std::string name, double lhs, double rhs, bool strict) {
        OrderingCheck c{std::move(name), lhs, rhs, strict, false, rhs - lhs};
        // Non-strict comparisons accept equality up to round-off.
        c.holds = strict ? lhs < rhs : c.margin >= -1e-12 * std::abs(rhs);
        return c;
    };
    OrderingReport r;
    r.checks.push_back(check("mle_known_m_vs_joint", mle_known, mle.sigma(3, 3), false));
    r.checks.push_back(check("mle_vs_lse_known_m", mle_known, lse_known, true));
    r.checks.push_back(check("lse_known_m_vs_joint_11", lse_known, lse.sigma(0, 0), true));
    r.checks.push_back(check("lse_known_m_vs_joint_22", lse_known, lse.sigma(1, 1), true));
    return r;
}

}  // namespace affest

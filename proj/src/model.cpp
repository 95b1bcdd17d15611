#include "affest/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "affest/errors.hpp"

namespace affest {

void validate(const ModelParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.m) ||
        !std::isfinite(p.theta)) {
        throw Error(ErrorCode::InvalidParams, "model parameters must be finite");
    }
    if (!(p.a > 0.0)) {
        throw Error(ErrorCode::InvalidParams, "parameter a must be > 0");
    }
}

const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "subcritical";
        case Criticality::Critical: return "critical";
        case Criticality::Supercritical: return "supercritical";
    }
    return "unknown";
}

Criticality classify(const ModelParams& p) {
    if (p.b < 0.0 || p.theta < 0.0) return Criticality::Supercritical;
    if (p.b > 0.0 && p.theta > 0.0) return Criticality::Subcritical;
    return Criticality::Critical;
}

void require_subcritical(const ModelParams& p, const char* what) {
    if (classify(p) != Criticality::Subcritical) {
        std::ostringstream os;
        os << what << " requires b > 0 and theta > 0 (got b=" << p.b << ", theta=" << p.theta
           << ", " << to_string(classify(p)) << ")";
        throw Error(ErrorCode::NotSubcritical, os.str());
    }
}

double exp_integral(double c, double t) {
    if (std::abs(c) < 1e-12) return t;
    return -std::expm1(-c * t) / c;
}

std::pair<double, double> mean_at(const ModelParams& p, double ey0, double ex0, double t) {
    const double ey = std::exp(-p.b * t) * ey0 + p.a * exp_integral(p.b, t);
    const double ex = std::exp(-p.theta * t) * ex0 + p.m * exp_integral(p.theta, t);
    return {ey, ex};
}

const char* to_string(Provenance s) {
    switch (s) {
        case Provenance::Unavailable: return "unavailable";
        case Provenance::ClosedForm: return "closed_form";
        case Provenance::Simulated: return "simulated";
    }
    return "unknown";
}

const std::vector<MomentField>& moment_fields() {
    static const std::vector<MomentField> fields = {
        {"ey", &StationaryMoments::ey},
        {"ex", &StationaryMoments::ex},
        {"ey2", &StationaryMoments::ey2},
        {"exy", &StationaryMoments::exy},
        {"ex2", &StationaryMoments::ex2},
        {"ex2y", &StationaryMoments::ex2y},
        {"e_inv_y", &StationaryMoments::e_inv_y},
        {"ex_over_y", &StationaryMoments::ex_over_y},
        {"ex2_over_y", &StationaryMoments::ex2_over_y},
    };
    return fields;
}

bool StationaryMoments::complete() const {
    for (const auto& f : moment_fields()) {
        if (!(this->*f.member).available()) return false;
    }
    return true;
}

StationaryMoments make_moments(double ey, double ex, double ey2, double exy, double ex2,
                               double ex2y, double e_inv_y, double ex_over_y, double ex2_over_y) {
    auto closed = [](double v) { return MomentValue{v, Provenance::ClosedForm}; };
    StationaryMoments mom;
    mom.ey = closed(ey);
    mom.ex = closed(ex);
    mom.ey2 = closed(ey2);
    mom.exy = closed(exy);
    mom.ex2 = closed(ex2);
    mom.ex2y = closed(ex2y);
    mom.e_inv_y = closed(e_inv_y);
    mom.ex_over_y = closed(ex_over_y);
    mom.ex2_over_y = closed(ex2_over_y);
    return mom;
}

StationaryMoments stationary_moments_closed(const ModelParams& p) {
    validate(p);
    require_subcritical(p, "stationary_moments_closed");
    const double a = p.a, b = p.b, m = p.m, th = p.theta;
    auto closed = [](double v) { return MomentValue{v, Provenance::ClosedForm}; };

    StationaryMoments mom;
    mom.ey = closed(a / b);
    mom.ex = closed(m / th);
    mom.ey2 = closed(a * (2.0 * a + 1.0) / (2.0 * b * b));
    mom.exy = closed(m * a / (th * b));
    mom.ex2 = closed((a * th + 2.0 * b * m * m) / (2.0 * b * th * th));
    mom.ex2y = closed(a * (th * (a * b + 2.0 * a * th + th) + 2.0 * m * m * b * (2.0 * th + b)) /
                      ((b + 2.0 * th) * 2.0 * b * b * th * th));
    // Y is Gamma(shape 2a, rate 2b); E(1/Y) = rate / (shape - 1).
    if (a > 0.5) mom.e_inv_y = closed(2.0 * b / (2.0 * a - 1.0));
    return mom;
}

std::vector<std::string> moment_invariant_violations(const StationaryMoments& mom) {
    std::vector<std::string> out;
    auto have = [](std::initializer_list<const MomentValue*> vs) {
        return std::all_of(vs.begin(), vs.end(), [](const MomentValue* v) { return v->available(); });
    };
    if (have({&mom.ey}) && !(mom.ey.value > 0.0)) out.emplace_back("ey > 0");
    if (have({&mom.ey, &mom.ey2}) && !(mom.ey2.value > mom.ey.value * mom.ey.value))
        out.emplace_back("ey2 > ey^2");
    if (have({&mom.ex, &mom.ex2}) && !(mom.ex2.value > mom.ex.value * mom.ex.value))
        out.emplace_back("ex2 > ex^2");
    if (have({&mom.ey, &mom.e_inv_y}) && !(mom.e_inv_y.value * mom.ey.value > 1.0))
        out.emplace_back("e_inv_y * ey > 1");
    if (have({&mom.e_inv_y, &mom.ex_over_y, &mom.ex2_over_y}) &&
        !(mom.ex2_over_y.value * mom.e_inv_y.value > mom.ex_over_y.value * mom.ex_over_y.value))
        out.emplace_back("ex2_over_y * e_inv_y > ex_over_y^2");
    // E(XY)^2 = E(X sqrt(Y) sqrt(Y))^2 < E(X^2 Y) E(Y). The weaker-looking
    // E(X^2) E(Y) >= E(XY)^2 does not hold in general.
    if (have({&mom.ex2y, &mom.ey, &mom.exy}) &&
        !(mom.ex2y.value * mom.ey.value > mom.exy.value * mom.exy.value))
        out.emplace_back("ex2y * ey > exy^2");
    if (have({&mom.ex2_over_y, &mom.ex2y, &mom.ex2}) &&
        !(mom.ex2_over_y.value * mom.ex2y.value > mom.ex2.value * mom.ex2.value))
        out.emplace_back("ex2_over_y * ex2y > ex2^2");
    return out;
}

namespace {

struct RiccatiRhs {
    double b;
    double theta;
    double half_l2sq;

    double operator()(double t, double v) const {
        return -b * v - 0.5 * v * v + half_l2sq * std::exp(-2.0 * theta * t);
    }
};

struct RiccatiState {
    double v;
    double integral;  // int_0^t v_s ds
};

// Integrates the Riccati equation and the running integral of v jointly so
// that the quadrature has the same order as the stepper.
RiccatiState integrate_riccati(const ModelParams& p, double lambda1, double lambda2, double t,
                               double h, double negativity_tol) {
    if (!(lambda1 >= 0.0)) throw Error(ErrorCode::InvalidParams, "riccati: lambda1 must be >= 0");
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidParams, "riccati: t must be >= 0");
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidParams, "riccati: step h must be > 0");

    const RiccatiRhs f{p.b, p.theta, 0.5 * lambda2 * lambda2};
    const double tol = negativity_tol * std::max({1.0, lambda1, lambda2 * lambda2});
    RiccatiState s{lambda1, 0.0};
    if (t == 0.0) return s;

    const auto n = static_cast<long long>(std::ceil(t / h - 1e-9));
    const double step = t / static_cast<double>(n);
    for (long long i = 0; i < n; ++i) {
        const double t0 = step * static_cast<double>(i);
        const double k1 = f(t0, s.v);
        const double k2 = f(t0 + 0.5 * step, s.v + 0.5 * step * k1);
        const double k3 = f(t0 + 0.5 * step, s.v + 0.5 * step * k2);
        const double k4 = f(t0 + step, s.v + step * k3);
        // The integral's derivative is v itself, so its RK4 stages are the
        // stage values of v.
        const double v2 = s.v + 0.5 * step * k1;
        const double v3 = s.v + 0.5 * step * k2;
        const double v4 = s.v + step * k3;
        s.integral += step / 6.0 * (s.v + 2.0 * v2 + 2.0 * v3 + v4);
        s.v += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s.v < 0.0) {
            if (s.v < -tol) {
                std::ostringstream os;
                os << "riccati: solution went negative (" << s.v << ") at t=" << t0 + step
                   << "; step h=" << h << " is too coarse";
                throw Error(ErrorCode::StepTooLarge, os.str());
            }
            s.v = 0.0;
        }
    }
    return s;
}

}  // namespace

double riccati_v(const ModelParams& p, double lambda1, double lambda2, double t,
                 const RiccatiOptions& opt) {
    return integrate_riccati(p, lambda1, lambda2, t, opt.h, opt.negativity_tol).v;
}

CharResult stationary_char(const ModelParams& p, double lambda1, double lambda2,
                           const CharOptions& opt) {
    validate(p);
    require_subcritical(p, "stationary_char");
    const double t_max = opt.t_max > 0.0 ? opt.t_max : std::max(20.0 / p.b, 20.0 / p.theta);
    const RiccatiState s = integrate_riccati(p, lambda1, lambda2, t_max, opt.h, 1e-10);

    // For t >= t_max: v' <= -b v + lambda2^2 exp(-2 theta t)/2, hence
    // int_{t_max}^inf v <= v(t_max)/b + lambda2^2 exp(-2 theta t_max)/(4 theta b).
    const double tail = p.a * (s.v / p.b + lambda2 * lambda2 * std::exp(-2.0 * p.theta * t_max) /
                                               (4.0 * p.theta * p.b));
    if (tail > opt.tail_tol) {
        std::ostringstream os;
        os << "stationary_char: truncation tail bound " << tail << " exceeds " << opt.tail_tol
           << " at t_max=" << t_max;
        throw Error(ErrorCode::TruncationTooShort, os.str());
    }
    const std::complex<double> exponent(-p.a * s.integral, p.m / p.theta * lambda2);
    return CharResult{std::exp(exponent), t_max, tail};
}

}  // namespace affest

#pragma once

#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace affest {

// Drift parameters of the two-factor diffusion
//   dY = (a - b Y) dt + sqrt(Y) dL
//   dX = (m - theta X) dt + sqrt(Y) dB
// with L, B independent Wiener processes.
struct ModelParams {
    double a = 1.0;
    double b = 1.0;
    double m = 0.0;
    double theta = 1.0;
};

// Throws Error(InvalidParams) unless a > 0 and every field is finite.
void validate(const ModelParams& p);

enum class Criticality { Subcritical, Critical, Supercritical };

const char* to_string(Criticality c);

Criticality classify(const ModelParams& p);

// Throws Error(NotSubcritical) naming `what` when b <= 0 or theta <= 0.
void require_subcritical(const ModelParams& p, const char* what);

// int_0^t exp(-c s) ds, with the c -> 0 limit handled explicitly.
double exp_integral(double c, double t);

// (E Y_t, E X_t) given (E Y_0, E X_0).
std::pair<double, double> mean_at(const ModelParams& p, double ey0, double ex0, double t);

enum class Provenance { Unavailable, ClosedForm, Simulated };

const char* to_string(Provenance s);

struct MomentValue {
    double value = std::numeric_limits<double>::quiet_NaN();
    Provenance source = Provenance::Unavailable;
    // Batch-means standard error for simulated values, 0 otherwise.
    double std_error = 0.0;
    // Closed-form counterpart when a simulated value also has one, else NaN.
    double reference = std::numeric_limits<double>::quiet_NaN();

    bool available() const { return source != Provenance::Unavailable; }
};

// The nine stationary expectations that enter the asymptotic covariances.
struct StationaryMoments {
    MomentValue ey;          // E(Y)
    MomentValue ex;          // E(X)
    MomentValue ey2;         // E(Y^2)
    MomentValue exy;         // E(XY)
    MomentValue ex2;         // E(X^2)
    MomentValue ex2y;        // E(X^2 Y)
    MomentValue e_inv_y;     // E(1/Y)
    MomentValue ex_over_y;   // E(X/Y)
    MomentValue ex2_over_y;  // E(X^2/Y)

    bool complete() const;
};

// Field names in declaration order, paired with member pointers. Used for
// serialization and generic iteration.
struct MomentField {
    const char* name;
    MomentValue StationaryMoments::*member;
};
const std::vector<MomentField>& moment_fields();

// Builds a StationaryMoments from plain values, all marked ClosedForm.
// Handy for tests and for callers who already hold numbers.
StationaryMoments make_moments(double ey, double ex, double ey2, double exy, double ex2,
                               double ex2y, double e_inv_y, double ex_over_y, double ex2_over_y);

// Closed-form stationary moments. ex_over_y and ex2_over_y are left
// Unavailable; e_inv_y is Unavailable when a <= 1/2 (infinite mean).
StationaryMoments stationary_moments_closed(const ModelParams& p);

// Lists every strict moment inequality that fails among the populated
// fields. Empty means all checked invariants hold.
std::vector<std::string> moment_invariant_violations(const StationaryMoments& mom);

struct RiccatiOptions {
    double h = 1e-3;
    // Negative excursions smaller than this (scaled by the initial data) are
    // treated as round-off and clamped to 0.
    double negativity_tol = 1e-10;
};

// Solution at time t of
//   v' = -b v - v^2/2 + exp(-2 theta t) lambda2^2 / 2,  v(0) = lambda1
// by the classical fourth-order Runge-Kutta method.
double riccati_v(const ModelParams& p, double lambda1, double lambda2, double t,
                 const RiccatiOptions& opt = {});

struct CharOptions {
    // <= 0 selects max(20/b, 20/theta).
    double t_max = 0.0;
    double h = 1e-3;
    // Upper bound allowed for the neglected exponent a * int_{t_max}^inf v ds.
    double tail_tol = 1e-7;
};

struct CharResult {
    std::complex<double> value;
    double t_max = 0.0;
    // Bound on |a int_{t_max}^inf v_s ds| from the linearized equation.
    double tail_bound = 0.0;
};

// E exp(-lambda1 Y + i lambda2 X) under the stationary law.
CharResult stationary_char(const ModelParams& p, double lambda1, double lambda2,
                           const CharOptions& opt = {});

}  // namespace affest

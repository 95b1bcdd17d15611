#pragma once

#include <span>

#include "affest/simulation.hpp"

namespace affest {

// Integral functionals of one path over [0, T]. Every MLE and LSE in
// estimators.hpp is a function of these alone.
struct SufficientStats {
    double T = 0.0;
    double int_inv_y_dY = 0.0;      // int (1/Y) dY
    double delta_y = 0.0;           // Y_T - Y_0
    double int_inv_y_dX = 0.0;      // int (1/Y) dX
    double int_x_over_y_dX = 0.0;   // int (X/Y) dX
    double int_inv_y_ds = 0.0;      // int (1/Y) ds
    double int_x_over_y_ds = 0.0;   // int (X/Y) ds
    double int_x2_over_y_ds = 0.0;  // int (X^2/Y) ds
    double int_y_ds = 0.0;          // int Y ds
    double int_x_ds = 0.0;          // int X ds
    double int_x2_ds = 0.0;         // int X^2 ds
    double int_x_dX = 0.0;          // int X dX via the Ito identity
    double delta_x = 0.0;           // X_T - X_0

    // Raw left-point sum of X dX. Diagnostic only, not serialized.
    double int_x_dX_stieltjes = 0.0;
};

// sum_{i=1..n} integrand[i-1] * (integrator[i] - integrator[i-1])
double stieltjes_sum(std::span<const double> integrand, std::span<const double> integrator);

// Left rectangle rule sum_{i=1..n} values[i-1] * dt over n+1 samples.
double time_integral(std::span<const double> values, double dt);

// int X dX = (X_T^2 - X_0^2 - int Y ds) / 2, valid on solution paths.
double ito_x_dx(const SamplePath& path);

// Throws NonpositiveYError at the first y[i] <= 0.
SufficientStats sufficient_stats(const SamplePath& path);

}  // namespace affest

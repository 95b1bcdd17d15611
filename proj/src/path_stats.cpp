#include "affest/path_stats.hpp"

#include "affest/errors.hpp"

namespace affest {

double stieltjes_sum(std::span<const double> integrand, std::span<const double> integrator) {
    if (integrand.size() != integrator.size()) {
        throw Error(ErrorCode::LengthMismatch, "stieltjes_sum: integrand and integrator lengths differ");
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < integrand.size(); ++i) {
        acc += integrand[i - 1] * (integrator[i] - integrator[i - 1]);
    }
    return acc;
}

double time_integral(std::span<const double> values, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidGrid, "time_integral: dt must be > 0");
    double acc = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) acc += values[i - 1];
    return acc * dt;
}

double ito_x_dx(const SamplePath& path) {
    const auto n = path.x.size() - 1;
    const double int_y = time_integral(path.y, path.grid.dt);
    return 0.5 * (path.x[n] * path.x[n] - path.x[0] * path.x[0] - int_y);
}

SufficientStats sufficient_stats(const SamplePath& path) {
    const auto& y = path.y;
    const auto& x = path.x;
    if (y.size() != x.size()) throw Error(ErrorCode::LengthMismatch, "sufficient_stats: y and x lengths differ");
    if (y.size() < 2) throw Error(ErrorCode::InvalidGrid, "sufficient_stats: path needs at least one step");
    const double dt = path.grid.dt;
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidGrid, "sufficient_stats: dt must be > 0");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw NonpositiveYError(i, y[i]);
    }

    // Single pass; each sum matches stieltjes_sum / time_integral term by term.
    SufficientStats s;
    const std::size_t n = y.size() - 1;
    s.T = dt * static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double yp = y[i - 1];
        const double xp = x[i - 1];
        const double inv = 1.0 / yp;
        const double dy = y[i] - yp;
        const double dx = x[i] - xp;
        s.int_inv_y_dY += inv * dy;
        s.int_inv_y_dX += inv * dx;
        s.int_x_over_y_dX += xp * inv * dx;
        s.int_inv_y_ds += inv;
        s.int_x_over_y_ds += xp * inv;
        s.int_x2_over_y_ds += xp * xp * inv;
        s.int_y_ds += yp;
        s.int_x_ds += xp;
        s.int_x2_ds += xp * xp;
        s.int_x_dX_stieltjes += xp * dx;
    }
    s.int_inv_y_ds *= dt;
    s.int_x_over_y_ds *= dt;
    s.int_x2_over_y_ds *= dt;
    s.int_y_ds *= dt;
    s.int_x_ds *= dt;
    s.int_x2_ds *= dt;
    s.delta_y = y[n] - y[0];
    s.delta_x = x[n] - x[0];
    s.int_x_dX = 0.5 * (x[n] * x[n] - x[0] * x[0] - s.int_y_ds);
    return s;
}

}  // namespace affest

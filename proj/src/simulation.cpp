#include "affest/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "affest/errors.hpp"

namespace affest {

GridSpec GridSpec::make(double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidGrid, "grid: dt must be > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end))
        throw Error(ErrorCode::InvalidGrid, "grid: horizon T must be > 0");
    const double ratio = t_end / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n - ratio) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream os;
        os << "grid: T=" << t_end << " is not an integer multiple of dt=" << dt;
        throw Error(ErrorCode::InvalidGrid, os.str());
    }
    return GridSpec{t_end, dt, static_cast<std::size_t>(n)};
}

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::ExactCIR_CondGaussX: return "exact";
        case Scheme::EulerFullTruncation: return "euler";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "exact" || name == "ExactCIR_CondGaussX") return Scheme::ExactCIR_CondGaussX;
    if (name == "euler" || name == "EulerFullTruncation") return Scheme::EulerFullTruncation;
    throw Error(ErrorCode::Config, "unknown scheme '" + name + "' (expected exact|euler)");
}

namespace {

// Exact CIR transition over one step: Y' = c * chi'^2(4a, Y e^{-b dt} / c)
// with c = (1 - e^{-b dt}) / 4, sampled as a Poisson mixture of central
// chi-squares.
class CirExactStep {
public:
    CirExactStep(const ModelParams& p, double dt)
        : scale_(exp_integral(p.b, dt) / 4.0), decay_(std::exp(-p.b * dt)), half_df_(2.0 * p.a) {}

    template <class Engine>
    double operator()(double y, Engine& eng) {
        const double noncentrality = y * decay_ / scale_;
        long extra = 0;
        if (noncentrality > 0.0) {
            poisson_.param(std::poisson_distribution<long>::param_type(0.5 * noncentrality));
            extra = poisson_(eng);
        }
        const double shape = half_df_ + static_cast<double>(extra);
        return 2.0 * scale_ * gamma_(eng, std::gamma_distribution<double>::param_type(shape, 1.0));
    }

private:
    double scale_;
    double decay_;
    double half_df_;
    std::poisson_distribution<long> poisson_;
    std::gamma_distribution<double> gamma_;
};

void check_start(double y0) {
    if (!(y0 >= 0.0)) {
        std::ostringstream os;
        os << "initial value y0=" << y0 << " must be >= 0";
        throw Error(ErrorCode::NegativeY0, os.str());
    }
}

void fill_exact(const ModelParams& p, const GridSpec& g, SamplePath& path, Philox4x32& ey,
                Philox4x32& ex) {
    CirExactStep cir(p, g.dt);
    std::normal_distribution<double> normal;
    const double decay_x = std::exp(-p.theta * g.dt);
    const double drift_x = p.m * exp_integral(p.theta, g.dt);
    const double decay_x2 = decay_x * decay_x;
    for (std::size_t i = 1; i <= g.n_steps; ++i) {
        const double y_prev = path.y[i - 1];
        const double y_next = cir(y_prev, ey);
        // Trapezoid rule for int_0^dt e^{-2 theta (dt-u)} Y_u du.
        const double var = 0.5 * g.dt * (decay_x2 * y_prev + y_next);
        path.y[i] = y_next;
        path.x[i] = decay_x * path.x[i - 1] + drift_x + std::sqrt(var) * normal(ex);
    }
}

void fill_euler(const ModelParams& p, const GridSpec& g, SamplePath& path, Philox4x32& ey,
                Philox4x32& ex) {
    std::normal_distribution<double> normal_y;
    std::normal_distribution<double> normal_x;
    const double sqdt = std::sqrt(g.dt);
    for (std::size_t i = 1; i <= g.n_steps; ++i) {
        const double y = path.y[i - 1];
        const double x = path.x[i - 1];
        const double vol = std::sqrt(y) * sqdt;
        path.y[i] = std::max(0.0, y + (p.a - p.b * y) * g.dt + vol * normal_y(ey));
        path.x[i] = x + (p.m - p.theta * x) * g.dt + vol * normal_x(ex);
    }
}

SamplePath blank_path(const GridSpec& g, double y0, double x0, const RngStream& rng) {
    SamplePath path{g, std::vector<double>(g.n_steps + 1), std::vector<double>(g.n_steps + 1), rng};
    path.y[0] = y0;
    path.x[0] = x0;
    return path;
}

void run_scheme(const ModelParams& p, Scheme scheme, SamplePath& path, const RngStream& rng) {
    Philox4x32 ey = rng.engine(Substream::YNoise);
    Philox4x32 ex = rng.engine(Substream::XNoise);
    if (scheme == Scheme::ExactCIR_CondGaussX) {
        fill_exact(p, path.grid, path, ey, ex);
    } else {
        fill_euler(p, path.grid, path, ey, ex);
    }
}

}  // namespace

SamplePath simulate(const ModelParams& p, double y0, double x0, const GridSpec& g, Scheme scheme,
                    const RngStream& rng) {
    validate(p);
    check_start(y0);
    if (!std::isfinite(x0)) throw Error(ErrorCode::InvalidParams, "initial value x0 must be finite");
    const GridSpec checked = GridSpec::make(g.t_end, g.dt);
    SamplePath path = blank_path(checked, y0, x0, rng);
    run_scheme(p, scheme, path, rng);
    return path;
}

SamplePath simulate_stationary_start(const ModelParams& p, const GridSpec& g, double burn_in,
                                     Scheme scheme, const RngStream& rng) {
    validate(p);
    require_subcritical(p, "simulate_stationary_start");
    if (!(burn_in >= 0.0)) throw Error(ErrorCode::InvalidGrid, "burn_in must be >= 0");
    const GridSpec checked = GridSpec::make(g.t_end, g.dt);

    Philox4x32 init = rng.engine(Substream::Initial);
    std::gamma_distribution<double> stationary_y(2.0 * p.a, 1.0 / (2.0 * p.b));
    const double y0 = stationary_y(init);
    const double x0 = p.m / p.theta;

    const auto n_burn = static_cast<std::size_t>(std::round(burn_in / checked.dt));
    if (n_burn == 0) {
        SamplePath path = blank_path(checked, y0, x0, rng);
        run_scheme(p, scheme, path, rng);
        return path;
    }
    const GridSpec full{checked.dt * static_cast<double>(n_burn + checked.n_steps), checked.dt,
                        n_burn + checked.n_steps};
    SamplePath long_path = blank_path(full, y0, x0, rng);
    run_scheme(p, scheme, long_path, rng);

    SamplePath path{checked, {}, {}, rng};
    path.y.assign(long_path.y.begin() + static_cast<std::ptrdiff_t>(n_burn), long_path.y.end());
    path.x.assign(long_path.x.begin() + static_cast<std::ptrdiff_t>(n_burn), long_path.x.end());
    return path;
}

BrownianIncrements draw_increments(std::size_t n, double dt, const RngStream& rng) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidGrid, "increments: dt must be > 0");
    Philox4x32 el = rng.engine(Substream::YNoise);
    Philox4x32 eb = rng.engine(Substream::XNoise);
    std::normal_distribution<double> nl(0.0, std::sqrt(dt));
    std::normal_distribution<double> nb(0.0, std::sqrt(dt));
    BrownianIncrements inc{dt, std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        inc.dl[i] = nl(el);
        inc.db[i] = nb(eb);
    }
    return inc;
}

BrownianIncrements coarsen(const BrownianIncrements& fine, std::size_t factor) {
    if (factor == 0 || fine.dl.size() % factor != 0) {
        throw Error(ErrorCode::InvalidGrid, "coarsen: factor must divide the number of increments");
    }
    const std::size_t n = fine.dl.size() / factor;
    BrownianIncrements out{fine.dt * static_cast<double>(factor), std::vector<double>(n, 0.0),
                           std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < factor; ++k) {
            out.dl[i] += fine.dl[i * factor + k];
            out.db[i] += fine.db[i * factor + k];
        }
    }
    return out;
}

SamplePath simulate_euler_coupled(const ModelParams& p, double y0, double x0,
                                  const BrownianIncrements& inc) {
    validate(p);
    check_start(y0);
    if (inc.dl.size() != inc.db.size() || inc.dl.empty()) {
        throw Error(ErrorCode::LengthMismatch, "coupled euler: increment arrays must match and be non-empty");
    }
    const std::size_t n = inc.dl.size();
    const GridSpec g{inc.dt * static_cast<double>(n), inc.dt, n};
    SamplePath path = blank_path(g, y0, x0, RngStream{});
    for (std::size_t i = 1; i <= n; ++i) {
        const double y = path.y[i - 1];
        const double x = path.x[i - 1];
        const double sy = std::sqrt(y);
        path.y[i] = std::max(0.0, y + (p.a - p.b * y) * g.dt + sy * inc.dl[i - 1]);
        path.x[i] = x + (p.m - p.theta * x) * g.dt + sy * inc.db[i - 1];
    }
    return path;
}

void write_path_csv(const SamplePath& path, std::ostream& os) {
    os << "t,y,x\n";
    char buf[96];
    for (std::size_t i = 0; i < path.y.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", path.grid.time(i), path.y[i], path.x[i]);
        os << buf;
    }
}

void write_path_csv(const SamplePath& path, const std::string& filename) {
    std::ofstream os(filename);
    if (!os) throw Error(ErrorCode::Config, "cannot open '" + filename + "' for writing");
    write_path_csv(path, os);
}

SamplePath read_path_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::Config, "path csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,y,x") throw Error(ErrorCode::Config, "path csv: expected header 't,y,x', got '" + line + "'");

    std::vector<double> t, y, x;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        double tv, yv, xv;
        char c1, c2;
        std::istringstream ls(line);
        if (!(ls >> tv >> c1 >> yv >> c2 >> xv) || c1 != ',' || c2 != ',') {
            throw Error(ErrorCode::Config, "path csv: malformed row " + std::to_string(row));
        }
        t.push_back(tv);
        y.push_back(yv);
        x.push_back(xv);
    }
    if (t.size() < 2) throw Error(ErrorCode::Config, "path csv: need at least two rows");
    const std::size_t n = t.size() - 1;
    const double t_end = t.back() - t.front();
    const double dt = t_end / static_cast<double>(n);
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double step = t[i] - t[i - 1];
        if (std::abs(step - dt) > 1e-6 * dt) {
            throw Error(ErrorCode::InvalidGrid, "path csv: non-uniform grid at row " + std::to_string(i + 1));
        }
    }
    return SamplePath{GridSpec{t_end, dt, n}, std::move(y), std::move(x), RngStream{}};
}

SamplePath read_path_csv(const std::string& filename) {
    std::ifstream is(filename);
    if (!is) throw Error(ErrorCode::Config, "cannot open '" + filename + "'");
    return read_path_csv(is);
}

}  // namespace affest

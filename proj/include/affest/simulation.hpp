#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "affest/model.hpp"
#include "affest/rng.hpp"

namespace affest {

struct GridSpec {
    double t_end = 0.0;
    double dt = 0.0;
    std::size_t n_steps = 0;

    // Builds a grid with n_steps = t_end / dt, rejecting horizons that are
    // not an integer number of steps.
    static GridSpec make(double t_end, double dt);

    double time(std::size_t i) const { return dt * static_cast<double>(i); }
};

enum class Scheme { ExactCIR_CondGaussX, EulerFullTruncation };

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

// One discretized trajectory; y and x have n_steps + 1 entries.
struct SamplePath {
    GridSpec grid;
    std::vector<double> y;
    std::vector<double> x;
    RngStream rng;
};

SamplePath simulate(const ModelParams& p, double y0, double x0, const GridSpec& g, Scheme scheme,
                    const RngStream& rng);

// Starts Y from its Gamma(2a, 2b) stationary law and X from m/theta, runs a
// burn-in of length burn_in on the same grid step, and returns the segment
// of length g.t_end that follows.
SamplePath simulate_stationary_start(const ModelParams& p, const GridSpec& g, double burn_in,
                                     Scheme scheme, const RngStream& rng);

// Standard Brownian increments for L and B on a grid of step dt. Summing
// consecutive pairs yields the increments of the same path on step 2 dt.
struct BrownianIncrements {
    double dt = 0.0;
    std::vector<double> dl;
    std::vector<double> db;
};

BrownianIncrements draw_increments(std::size_t n, double dt, const RngStream& rng);
BrownianIncrements coarsen(const BrownianIncrements& fine, std::size_t factor);

// Full-truncation Euler driven by given increments, for coupled refinement.
SamplePath simulate_euler_coupled(const ModelParams& p, double y0, double x0,
                                  const BrownianIncrements& inc);

// CSV with header `t,y,x`, 17 significant digits.
void write_path_csv(const SamplePath& path, std::ostream& os);
void write_path_csv(const SamplePath& path, const std::string& filename);
SamplePath read_path_csv(std::istream& is);
SamplePath read_path_csv(const std::string& filename);

}  // namespace affest

#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "regionopt/grid.hpp"
#include "regionopt/pde.hpp"

namespace testutil {

inline double gaussian(double x1, double x2)
{
    return std::exp(-0.5 * (x1 * x1 + x2 * x2)) / (2.0 * std::numbers::pi);
}

inline double circle(double x1, double x2)
{
    return 0.25 - std::hypot(x1 - 0.5, x2 - 0.5);
}

inline regionopt::ScalarField random_field(const regionopt::GridSpec& g, std::mt19937_64& rng, double lo = -1.0,
                                           double hi = 1.0)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    regionopt::ScalarField f(g);
    for (double& v : f.values()) v = dist(rng);
    return f;
}

/// Harvest problem with the first test's data: d = 1, a = 3, Gaussian y0,
/// L = 1, alpha = 0.4, beta = 0.6, eps = 1.
inline regionopt::ControlProblemParams test1_params(int n, int m, double t_final = 1.0)
{
    const regionopt::GridSpec g(n, m, t_final);
    return regionopt::ControlProblemParams{
        g,   1.0, regionopt::ScalarField(g, 3.0), regionopt::ScalarField::sample(g, gaussian), 1.0, 0.4, 0.6,
        regionopt::Mollifier(1.0),
    };
}

}  // namespace testutil

#include "regionopt/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "regionopt/banded.hpp"

namespace regionopt {

Mollifier::Mollifier(double eps) : eps_(eps)
{
    if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("Mollifier: eps must be positive");
}

double heaviside_mollified(double z, const Mollifier& m)
{
    return 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(z / m.eps()));
}

double delta_mollified(double z, const Mollifier& m)
{
    const double e = m.eps();
    return e / (std::numbers::pi * (e * e + z * z));
}

LevelSetFunction::LevelSetFunction(ScalarField phi) : phi_(std::move(phi))
{
    phi_.require_finite();
}

ScalarField heaviside_field(const LevelSetFunction& phi, const Mollifier& m)
{
    ScalarField out(phi.grid());
    auto src = phi.field().values();
    auto dst = out.values();
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] = heaviside_mollified(src[n], m);
    return out;
}

ScalarField sharp_indicator(const LevelSetFunction& phi)
{
    ScalarField out(phi.grid());
    auto src = phi.field().values();
    auto dst = out.values();
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] = src[n] > 0.0 ? 1.0 : 0.0;
    return out;
}

double region_area(const LevelSetFunction& phi, const Mollifier& m)
{
    return simpson_integral_2d(heaviside_field(phi, m));
}

double region_length(const LevelSetFunction& phi, const Mollifier& m)
{
    ScalarField integrand = gradient_magnitude(phi.field());
    auto src = phi.field().values();
    auto dst = integrand.values();
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] *= delta_mollified(src[n], m);
    return simpson_integral_2d(integrand);
}

LevelSetFunction evolve_phi(const LevelSetFunction& phi, const ScalarField& velocity, double theta0,
                            const Mollifier& m, double alpha, double eta)
{
    if (!(velocity.grid() == phi.grid())) throw std::invalid_argument("evolve_phi: grid mismatch");
    if (!(theta0 > 0.0)) throw std::invalid_argument("evolve_phi: theta0 must be positive");
    if (alpha < 0.0) throw std::invalid_argument("evolve_phi: alpha must be nonnegative");
    if (!(eta > 0.0)) throw std::invalid_argument("evolve_phi: eta must be positive");

    const GridSpec& g = phi.grid();
    const int side = g.nodes_per_side();
    const std::size_t dim = g.node_count();
    const double inv_h2 = 1.0 / (g.h() * g.h());

    // Frozen coefficients 1 / |grad phi|_eta.
    const ScalarField grad = gradient_magnitude(phi.field());
    std::vector<double> coef(dim);
    for (std::size_t n = 0; n < dim; ++n) {
        const double gm = grad.values()[n];
        coef[n] = 1.0 / std::sqrt(gm * gm + eta * eta);
    }

    BandedSystem sys{BandedMatrix(dim, static_cast<std::size_t>(side), static_cast<std::size_t>(side)),
                     std::vector<double>(dim)};
    for (int i = 1; i <= side; ++i) {
        for (int j = 1; j <= side; ++j) {
            const std::size_t row = g.node_index(i, j);
            const double d = delta_mollified(phi(i, j), m);
            const double k = theta0 * alpha * d * inv_h2;
            sys.rhs[row] = phi(i, j) + theta0 * d * velocity(i, j);

            double diag = 1.0;
            // Out-of-range neighbours are mirrored back across the boundary node.
            const int nbr_i[4] = {i - 1 >= 1 ? i - 1 : i + 1, i + 1 <= side ? i + 1 : i - 1, i, i};
            const int nbr_j[4] = {j, j, j - 1 >= 1 ? j - 1 : j + 1, j + 1 <= side ? j + 1 : j - 1};
            for (int dir = 0; dir < 4; ++dir) {
                const std::size_t col = g.node_index(nbr_i[dir], nbr_j[dir]);
                const double face = 0.5 * (coef[row] + coef[col]);
                diag += k * face;
                sys.matrix.at(row, col) -= k * face;
            }
            sys.matrix.at(row, row) = diag;
        }
    }

    auto next = linear_solve(sys);
    return LevelSetFunction(ScalarField(g, std::move(next)));
}

LevelSetFunction reinitialize(const LevelSetFunction& phi)
{
    const GridSpec& g = phi.grid();
    const int side = g.nodes_per_side();
    struct Point {
        double x1, x2;
    };
    std::vector<Point> crossings;
    auto add_crossing = [&](double xa1, double xa2, double va, double xb1, double xb2, double vb) {
        if ((va > 0.0) == (vb > 0.0)) return;
        const double t = va / (va - vb);
        crossings.push_back({xa1 + t * (xb1 - xa1), xa2 + t * (xb2 - xa2)});
    };
    for (int i = 1; i <= side; ++i) {
        for (int j = 1; j <= side; ++j) {
            if (i < side) add_crossing(g.x(i), g.x(j), phi(i, j), g.x(i + 1), g.x(j), phi(i + 1, j));
            if (j < side) add_crossing(g.x(i), g.x(j), phi(i, j), g.x(i), g.x(j + 1), phi(i, j + 1));
        }
    }
    if (crossings.empty()) return phi;

    ScalarField out(g);
    for (int i = 1; i <= side; ++i) {
        for (int j = 1; j <= side; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (const Point& p : crossings) best = std::min(best, std::hypot(g.x(i) - p.x1, g.x(j) - p.x2));
            out(i, j) = phi(i, j) > 0.0 ? std::max(best, std::numeric_limits<double>::min()) : -best;
        }
    }
    return LevelSetFunction(std::move(out));
}

void write_region_pgm(std::ostream& out, const LevelSetFunction& phi)
{
    const int side = phi.grid().nodes_per_side();
    out << "P2\n" << side << ' ' << side << "\n255\n";
    for (int j = 1; j <= side; ++j) {
        for (int i = 1; i <= side; ++i) {
            if (i > 1) out << ' ';
            out << (phi.inside(i, j) ? 255 : 0);
        }
        out << '\n';
    }
}

}  // namespace regionopt

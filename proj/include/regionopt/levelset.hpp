#pragma once

#include <iosfwd>

#include "regionopt/grid.hpp"

namespace regionopt {

/// Smoothing width for the arctan Heaviside and its Poisson-kernel derivative.
class Mollifier {
public:
    explicit Mollifier(double eps);
    double eps() const { return eps_; }

private:
    double eps_;
};

/// H_eps(z) = (1 + (2/pi) atan(z/eps)) / 2
double heaviside_mollified(double z, const Mollifier& m);
/// delta_eps(z) = eps / (pi (eps^2 + z^2)); the derivative of heaviside_mollified.
double delta_mollified(double z, const Mollifier& m);

/// Implicit description of a control region: omega = {phi > 0}, its boundary
/// is the zero level set.
class LevelSetFunction {
public:
    explicit LevelSetFunction(ScalarField phi);

    const ScalarField& field() const { return phi_; }
    const GridSpec& grid() const { return phi_.grid(); }
    double operator()(int i, int j) const { return phi_(i, j); }
    bool inside(int i, int j) const { return phi_(i, j) > 0.0; }

private:
    ScalarField phi_;
};

/// H_eps(phi) at every node.
ScalarField heaviside_field(const LevelSetFunction& phi, const Mollifier& m);
/// 1 where phi > 0, else 0.
ScalarField sharp_indicator(const LevelSetFunction& phi);

/// Simpson integral of H_eps(phi).
double region_area(const LevelSetFunction& phi, const Mollifier& m);
/// Simpson integral of delta_eps(phi) |grad phi| (perimeter of omega).
double region_length(const LevelSetFunction& phi, const Mollifier& m);

/// One semi-implicit step of the level-set descent flow
///
///   d phi / d theta = delta_eps(phi) [ alpha div(grad phi / |grad phi|) + velocity ].
///
/// The curvature term is linearized about the current iterate (face
/// coefficients 1/sqrt(|grad phi|^2 + eta^2) and delta_eps(phi) frozen) and
/// treated implicitly; the velocity term is explicit. Every node is an
/// unknown and the boundary uses mirrored ghost nodes, so the discrete normal
/// flux of phi vanishes on the boundary. With alpha = 0 and velocity = 0 the
/// step is the identity.
///
/// Throws SolverError if the implicit system is singular. alpha may not be
/// negative (backward diffusion is not solvable implicitly).
LevelSetFunction evolve_phi(const LevelSetFunction& phi, const ScalarField& velocity, double theta0,
                            const Mollifier& m, double alpha, double eta = 1e-8);

/// Replaces phi by the signed distance to its zero level set, with the zero
/// crossings located by linear interpolation along grid edges. Brute force:
/// O(nodes x crossings). Returns phi unchanged when it has no zero crossing.
LevelSetFunction reinitialize(const LevelSetFunction& phi);

/// ASCII PGM (P2): one pixel per node, 255 where phi > 0 else 0. Image rows
/// run over j (top row j = 1), columns over i.
void write_region_pgm(std::ostream& out, const LevelSetFunction& phi);

}  // namespace regionopt

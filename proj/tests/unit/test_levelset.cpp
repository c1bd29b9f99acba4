#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "regionopt/levelset.hpp"
#include "regionopt/shapeopt.hpp"

using namespace regionopt;

namespace {

LevelSetFunction circle_phi(int n)
{
    return LevelSetFunction(ScalarField::sample(GridSpec(n, 2, 1.0), testutil::circle));
}

}  // namespace

TEST_SUITE("levelset") {

TEST_CASE("mollified Heaviside values")
{
    const Mollifier one(1.0);
    CHECK(heaviside_mollified(0.0, one) == 0.5);
    CHECK(heaviside_mollified(0.0, Mollifier(0.01)) == 0.5);
    CHECK(heaviside_mollified(1.0, one) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(heaviside_mollified(-1000.0, one) == doctest::Approx(3.183097800805168e-4).epsilon(1e-9));
    CHECK_THROWS_AS(Mollifier(0.0), std::invalid_argument);
    CHECK_THROWS_AS(Mollifier(-1.0), std::invalid_argument);
}

TEST_CASE("mollified Dirac values")
{
    const Mollifier one(1.0);
    CHECK(delta_mollified(0.0, one) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(delta_mollified(0.0, Mollifier(0.25)) == doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-15));
    CHECK(delta_mollified(1.0, one) == doctest::Approx(0.5 / std::numbers::pi).epsilon(1e-15));
    CHECK(delta_mollified(5.0, one) == doctest::Approx(0.012242687930145794).epsilon(1e-12));
    const Mollifier half(0.5);
    CHECK(delta_mollified(0.37, half) == delta_mollified(-0.37, half));
}

TEST_CASE("Heaviside is increasing and bounded, Dirac peaks at zero")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> z(-50.0, 50.0);
    std::uniform_real_distribution<double> e(0.01, 3.0);
    for (int n = 0; n < 200; ++n) {
        const Mollifier m(e(rng));
        const double a = z(rng);
        const double b = a + 0.5;
        CHECK(heaviside_mollified(a, m) > 0.0);
        CHECK(heaviside_mollified(a, m) < 1.0);
        CHECK(heaviside_mollified(b, m) > heaviside_mollified(a, m));
        CHECK(heaviside_mollified(-a, m) == doctest::Approx(1.0 - heaviside_mollified(a, m)).epsilon(1e-14));
        CHECK(delta_mollified(a, m) > 0.0);
        CHECK(delta_mollified(a, m) <= delta_mollified(0.0, m));
    }
}

TEST_CASE("Dirac is the derivative of the Heaviside")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> z(-3.0, 3.0);
    std::uniform_real_distribution<double> e(0.1, 2.0);
    for (int n = 0; n < 100; ++n) {
        const Mollifier m(e(rng));
        const double x = z(rng);
        const double step = 1e-4;
        const double second = 2.0 / (std::numbers::pi * m.eps() * m.eps());  // bound on |delta'|
        const double remainder =
            heaviside_mollified(x + step, m) - heaviside_mollified(x, m) - delta_mollified(x, m) * step;
        CHECK(std::abs(remainder) <= second * step * step);
    }
}

TEST_CASE("region area: trivial fields")
{
    const GridSpec g(20, 2, 1.0);
    const Mollifier one(1.0);
    CHECK(region_area(LevelSetFunction(ScalarField(g, 1000.0)), one) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(region_area(LevelSetFunction(ScalarField(g, 0.0)), one) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("region area and length of the Test-1 circle against refinement references")
{
    // Simpson references computed independently; the arctan tails bias both
    // functionals by O(eps log eps), which is why the eps = 0.05 values sit
    // well away from pi/16 and pi/2.
    const LevelSetFunction phi80 = circle_phi(80);
    const Mollifier e05(0.05);
    CHECK(region_area(phi80, e05) == doctest::Approx(0.25021177784069193).epsilon(1e-10));
    CHECK(region_length(phi80, e05) == doctest::Approx(1.4089826233831).epsilon(1e-10));

    const Mollifier e10(0.1);
    CHECK(region_area(phi80, e10) == doctest::Approx(0.2916373365118904).epsilon(1e-10));
    CHECK(region_length(phi80, e10) == doctest::Approx(1.2563423511447496).epsilon(1e-10));

    const LevelSetFunction phi320 = circle_phi(320);
    CHECK(region_area(phi320, e05) == doctest::Approx(0.25021183623437854).epsilon(1e-10));
    CHECK(region_length(phi320, e05) == doctest::Approx(1.4095063040728986).epsilon(1e-10));
}

TEST_CASE("sharp-interface limit approaches the disc")
{
    const Mollifier tiny(0.005);
    const LevelSetFunction phi = circle_phi(320);
    const double area = region_area(phi, tiny);
    const double length = region_length(phi, tiny);
    CHECK(area == doctest::Approx(0.20238787075411258).epsilon(1e-10));
    CHECK(length == doctest::Approx(1.55397773892195).epsilon(1e-10));
    CHECK(std::abs(area - std::numbers::pi / 16.0) <= 0.01);
    CHECK(std::abs(length - std::numbers::pi / 2.0) <= 0.05);
}

TEST_CASE("doubling eps stays inside the recorded sensitivity band")
{
    const LevelSetFunction phi = circle_phi(80);
    const double l05 = region_length(phi, Mollifier(0.05));
    const double l10 = region_length(phi, Mollifier(0.1));
    // Reference band from the eps sweep: 1.40898 - 1.25634 = 0.15264.
    CHECK(std::abs(l10 - l05) < 0.16);
    CHECK(std::abs(l10 - l05) == doctest::Approx(0.1526402722383504).epsilon(1e-8));
}

TEST_CASE("length of a constant field is exactly zero")
{
    const GridSpec g(16, 2, 1.0);
    for (double c : {-3.0, 0.0, 0.4, 1000.0}) CHECK(region_length(LevelSetFunction(ScalarField(g, c)), Mollifier(1.0)) == 0.0);
}

TEST_CASE("area and length symmetry under phi -> -phi")
{
    std::mt19937_64 rng(3);
    const GridSpec g(12, 2, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const ScalarField f = testutil::random_field(g, rng, -2.0, 2.0);
        const LevelSetFunction phi(f);
        const LevelSetFunction neg(-1.0 * f);
        const Mollifier m(0.3);
        const double a = region_area(phi, m);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
        CHECK(a + region_area(neg, m) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(region_length(phi, m) == doctest::Approx(region_length(neg, m)).epsilon(1e-14));
    }
}

TEST_CASE("evolve_phi: zero velocity without curvature is the identity")
{
    std::mt19937_64 rng(8);
    const GridSpec g(10, 2, 1.0);
    const LevelSetFunction phi(testutil::random_field(g, rng));
    const LevelSetFunction next = evolve_phi(phi, ScalarField(g), 0.3, Mollifier(1.0), 0.0);
    for (std::size_t n = 0; n < g.node_count(); ++n) CHECK(next.field().values()[n] == phi.field().values()[n]);
}

TEST_CASE("evolve_phi: far-away level set barely moves")
{
    std::mt19937_64 rng(9);
    const GridSpec g(10, 2, 1.0);
    const LevelSetFunction phi(ScalarField(g, -5.0));
    const ScalarField v = testutil::random_field(g, rng, -2.0, 2.0);
    const LevelSetFunction next = evolve_phi(phi, v, 0.1, Mollifier(1.0), 0.0);
    const double bound = 0.1 * 0.012242687930145794 * v.max_abs();
    CHECK((next.field() - phi.field()).max_abs() <= bound * (1.0 + 1e-12));
}

TEST_CASE("evolve_phi: explicit velocity term matches the nodal update")
{
    // Two nodes straddling the front, eps = 1, theta = 0.05, v = 1:
    //   phi = -0.1 -> -0.1 + 0.05 / (pi * 1.01) = -0.0842420848...
    //   phi = +0.1 -> +0.1 + 0.05 / (pi * 1.01) = +0.1157579151...
    const GridSpec g(4, 2, 1.0);
    ScalarField f(g, 0.1);
    for (int j = 1; j <= 5; ++j) {
        f(1, j) = -0.1;
        f(2, j) = -0.1;
    }
    const LevelSetFunction next = evolve_phi(LevelSetFunction(f), ScalarField(g, 1.0), 0.05, Mollifier(1.0), 0.0);
    CHECK(next(1, 3) == doctest::Approx(-0.0842420848423866).epsilon(1e-12));
    CHECK(next(3, 3) == doctest::Approx(0.11575791515761341).epsilon(1e-12));
}

TEST_CASE("evolve_phi: positive velocity moves the circle outward")
{
    const LevelSetFunction phi = circle_phi(40);
    const Mollifier m(0.05);
    const LevelSetFunction grown = evolve_phi(phi, ScalarField(phi.grid(), 1.0), 0.01, m, 0.0);
    const LevelSetFunction shrunk = evolve_phi(phi, ScalarField(phi.grid(), -1.0), 0.01, m, 0.0);
    CHECK(region_area(grown, m) > region_area(phi, m));
    CHECK(region_area(shrunk, m) < region_area(phi, m));
    auto cells = [](const LevelSetFunction& p) {
        int c = 0;
        for (double v : p.field().values()) c += v > 0.0;
        return c;
    };
    CHECK(cells(grown) >= cells(phi));
    CHECK(cells(shrunk) <= cells(phi));
}

TEST_CASE("evolve_phi: curvature flow shrinks a circle and keeps constants")
{
    const LevelSetFunction phi = circle_phi(40);
    const Mollifier m(0.05);
    const LevelSetFunction next = evolve_phi(phi, ScalarField(phi.grid()), 0.01, m, 1.0);
    CHECK(region_area(next, m) < region_area(phi, m));

    const GridSpec g(8, 2, 1.0);
    const LevelSetFunction flat(ScalarField(g, 0.3));
    const LevelSetFunction same = evolve_phi(flat, ScalarField(g), 0.5, Mollifier(1.0), 2.0);
    for (double v : same.field().values()) CHECK(std::abs(v - 0.3) <= 1e-6);
}

TEST_CASE("evolve_phi rejects bad arguments")
{
    const GridSpec g(8, 2, 1.0);
    const LevelSetFunction phi(ScalarField(g, 1.0));
    CHECK_THROWS_AS(evolve_phi(phi, ScalarField(g), 0.1, Mollifier(1.0), -0.1), std::invalid_argument);
    CHECK_THROWS_AS(evolve_phi(phi, ScalarField(g), 0.0, Mollifier(1.0), 0.1), std::invalid_argument);
    CHECK_THROWS_AS(evolve_phi(phi, ScalarField(GridSpec(10, 2, 1.0)), 0.1, Mollifier(1.0), 0.1),
                    std::invalid_argument);
}

TEST_CASE("reinitialize restores a signed distance")
{
    const GridSpec g(40, 2, 1.0);
    const LevelSetFunction squashed(ScalarField::sample(g, [](double x1, double x2) {
        const double c = testutil::circle(x1, x2);
        return c * c * c + 0.1 * c;
    }));
    const LevelSetFunction sd = reinitialize(squashed);
    const LevelSetFunction exact = LevelSetFunction(ScalarField::sample(g, testutil::circle));
    double worst = 0.0;
    for (int i = 1; i <= 41; ++i) {
        for (int j = 1; j <= 41; ++j) {
            CHECK(sd.inside(i, j) == squashed.inside(i, j));
            worst = std::max(worst, std::abs(sd(i, j) - exact(i, j)));
        }
    }
    CHECK(worst <= 0.02);

    const LevelSetFunction none(ScalarField(g, -1.0));
    CHECK(reinitialize(none).field().values()[0] == -1.0);
}

TEST_CASE("sharp indicator and Heaviside field")
{
    const GridSpec g(4, 2, 1.0);
    ScalarField f(g, -1.0);
    f(3, 3) = 2.0;
    f(2, 2) = 0.0;
    const LevelSetFunction phi(f);
    const ScalarField chi = sharp_indicator(phi);
    CHECK(chi(3, 3) == 1.0);
    CHECK(chi(2, 2) == 0.0);
    CHECK(chi(1, 1) == 0.0);
    CHECK(heaviside_field(phi, Mollifier(1.0))(2, 2) == 0.5);
}

TEST_CASE("PGM mask layout")
{
    const GridSpec g(4, 2, 1.0);
    ScalarField f(g, -1.0);
    f(2, 1) = 1.0;  // column 2 of the top row
    f(5, 4) = 1.0;  // column 5 of row 4
    std::ostringstream out;
    write_region_pgm(out, LevelSetFunction(f));
    const std::string expected =
        "P2\n5 5\n255\n"
        "0 255 0 0 0\n"
        "0 0 0 0 0\n"
        "0 0 0 0 0\n"
        "0 0 0 0 255\n"
        "0 0 0 0 0\n";
    CHECK(out.str() == expected);
}

}

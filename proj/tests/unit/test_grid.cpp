#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "regionopt/grid.hpp"

using namespace regionopt;

TEST_SUITE("grid") {

TEST_CASE("grid spec enforces Simpson parity and sizes")
{
    CHECK_THROWS_AS(GridSpec(21, 20, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(2, 20, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(20, 3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(20, 0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(20, 20, 0.0), std::invalid_argument);
    try {
        GridSpec(21, 20, 1.0);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("Simpson") != std::string::npos);
    }

    const GridSpec g(20, 40, 2.0);
    CHECK(g.h() * g.n() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.dt() * g.m() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g.x(1) == 0.0);
    CHECK(g.x(21) == doctest::Approx(1.0));
    CHECK(g.t(41) == doctest::Approx(2.0));
    CHECK(g.node_count() == 441);
    CHECK(g.interior_count() == 361);
}

TEST_CASE("node and interior enumeration")
{
    const GridSpec g(6, 2, 1.0);
    CHECK(g.node_index(1, 1) == 0);
    CHECK(g.node_index(1, 2) == 1);
    CHECK(g.node_index(2, 1) == 7);
    // q = (i-2)(N-1) + (j-1), 1-based.
    CHECK(g.interior_index(2, 2) == 0);
    CHECK(g.interior_index(2, 3) == 1);
    CHECK(g.interior_index(3, 2) == 5);
    CHECK(g.interior_index(6, 6) == 24);
}

TEST_CASE("fields reject non-finite values and wrong sizes")
{
    const GridSpec g(4, 2, 1.0);
    std::vector<double> v(g.node_count(), 1.0);
    v[3] = std::nan("");
    CHECK_THROWS_AS(ScalarField(g, v), std::invalid_argument);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("space-time storage keeps one level contiguous")
{
    const GridSpec g(4, 4, 1.0);
    SpaceTimeField f(g);
    f(2, 3, 3) = 7.0;
    auto level = f.level(3);
    CHECK(level[g.node_index(2, 3)] == 7.0);
    CHECK(f.slice(3)(2, 3) == 7.0);
    CHECK(f.values()[2 * g.node_count() + g.node_index(2, 3)] == 7.0);
}

TEST_CASE("Simpson: constants and cubic monomials are exact")
{
    for (int n : {4, 10, 20}) {
        const GridSpec g(n, 2, 1.0);
        CHECK(simpson_integral_2d(ScalarField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
        const ScalarField f = ScalarField::sample(g, [](double x1, double x2) { return x1 * x1 * x1 * x2 * x2; });
        CHECK(std::abs(simpson_integral_2d(f) - 1.0 / 12.0) < 1e-15);
        for (int a = 0; a <= 3; ++a) {
            for (int b = 0; b <= 3; ++b) {
                const ScalarField m =
                    ScalarField::sample(g, [a, b](double x1, double x2) { return std::pow(x1, a) * std::pow(x2, b); });
                CHECK(std::abs(simpson_integral_2d(m) - 1.0 / ((a + 1) * (b + 1))) <= 1e-13);
            }
        }
    }
}

TEST_CASE("Simpson: Gaussian density against a fine-grid reference")
{
    const GridSpec coarse(20, 2, 1.0);
    const double value = simpson_integral_2d(ScalarField::sample(coarse, testutil::gaussian));
    // N = 400 composite Simpson reference.
    CHECK(std::abs(value - 0.11651623566866978) < 1e-6);
    CHECK(value == doctest::Approx(0.11651624715043807).epsilon(1e-13));
}

TEST_CASE("Simpson is linear")
{
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    const GridSpec g(16, 2, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const ScalarField f = testutil::random_field(g, rng);
        const ScalarField h = testutil::random_field(g, rng);
        const double a = coef(rng);
        const double b = coef(rng);
        const double lhs = simpson_integral_2d(a * f + b * h);
        const double rhs = a * simpson_integral_2d(f) + b * simpson_integral_2d(h);
        CHECK(std::abs(lhs - rhs) < 1e-13);
    }
}

TEST_CASE("one-dimensional Simpson")
{
    const std::vector<double> s{0.0, 1.0, 4.0, 9.0, 16.0};  // x^2 on [0, 4]
    CHECK(simpson_1d(s, 1.0) == doctest::Approx(64.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(simpson_1d(std::vector<double>{1.0, 2.0}, 1.0), std::invalid_argument);
}

TEST_CASE("space-time integral")
{
    const GridSpec g(4, 4, 2.0);
    SpaceTimeField f(g);
    for (int k = 1; k <= 5; ++k) {
        const double t = g.t(k);
        for (int i = 1; i <= 5; ++i) {
            for (int j = 1; j <= 5; ++j) f(i, j, k) = t * t * g.x(i);
        }
    }
    // int_0^2 t^2 dt * int x1 = 8/3 * 1/2
    CHECK(space_time_integral(f) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("gradient magnitude: linear and constant fields")
{
    const GridSpec g(10, 2, 1.0);
    const ScalarField lin = ScalarField::sample(g, [](double x1, double) { return x1; });
    const ScalarField grad = gradient_magnitude(lin);
    for (int i = 1; i <= 11; ++i) {
        for (int j = 1; j <= 11; ++j) CHECK(std::abs(grad(i, j) - 1.0) <= 1e-13);
    }
    const ScalarField zero = gradient_magnitude(ScalarField(g, 4.2));
    CHECK(zero.max_abs() == 0.0);
}

TEST_CASE("gradient magnitude: corners copy one adjacent edge node")
{
    std::mt19937_64 rng(7);
    const GridSpec g(8, 2, 1.0);
    const ScalarField f = testutil::random_field(g, rng);
    const ScalarField grad = gradient_magnitude(f);
    const int n = 9;
    CHECK(grad(1, 1) == grad(2, 1));
    CHECK(grad(1, n) == grad(1, n - 1));
    CHECK(grad(n, 1) == grad(n, 2));
    CHECK(grad(n, n) == grad(n, n - 1));
}

TEST_CASE("gradient magnitude: signed distance to a circle")
{
    const GridSpec g(40, 2, 1.0);
    const ScalarField grad = gradient_magnitude(ScalarField::sample(g, testutil::circle));
    int checked = 0;
    for (int i = 2; i <= 40; ++i) {
        for (int j = 2; j <= 40; ++j) {
            const double x1 = g.x(i);
            const double x2 = g.x(j);
            const double r = std::hypot(x1 - 0.5, x2 - 0.5);
            const double wall = std::min({x1, x2, 1.0 - x1, 1.0 - x2});
            if (r <= 2 * g.h() || wall <= 2 * g.h()) continue;
            CHECK(std::abs(grad(i, j) - 1.0) <= 0.05);
            ++checked;
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("gradient magnitude: shift invariance and positive homogeneity")
{
    std::mt19937_64 rng(99);
    const GridSpec g(12, 2, 1.0);
    const ScalarField f = testutil::random_field(g, rng);
    const ScalarField base = gradient_magnitude(f);
    const ScalarField shifted = gradient_magnitude(f + ScalarField(g, 3.5));
    const ScalarField scaled = gradient_magnitude(2.5 * f);
    for (std::size_t n = 0; n < base.values().size(); ++n) {
        CHECK(shifted.values()[n] == doctest::Approx(base.values()[n]).epsilon(1e-12));
        CHECK(scaled.values()[n] == doctest::Approx(2.5 * base.values()[n]).epsilon(1e-12));
    }
}

TEST_CASE("gradient magnitude: second order at interior nodes")
{
    auto f = [](double x1, double x2) { return std::sin(2.0 * x1 + 0.3) * std::cos(3.0 * x2); };
    auto exact = [](double x1, double x2) {
        const double gx = 2.0 * std::cos(2.0 * x1 + 0.3) * std::cos(3.0 * x2);
        const double gy = -3.0 * std::sin(2.0 * x1 + 0.3) * std::sin(3.0 * x2);
        return std::hypot(gx, gy);
    };
    std::vector<double> errors;
    for (int n : {10, 20, 40}) {
        const GridSpec g(n, 2, 1.0);
        const ScalarField grad = gradient_magnitude(ScalarField::sample(g, f));
        double e = 0.0;
        for (int i = 2; i <= n; ++i) {
            for (int j = 2; j <= n; ++j) e = std::max(e, std::abs(grad(i, j) - exact(g.x(i), g.x(j))));
        }
        errors.push_back(e);
    }
    CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
    CHECK(std::log2(errors[1] / errors[2]) >= 1.8);
}

TEST_CASE("curvature: flat front and constant field")
{
    const GridSpec g(20, 2, 1.0);
    const ScalarField flat = curvature_divergence(ScalarField::sample(g, [](double x1, double) { return x1 - 0.5; }));
    for (int i = 2; i <= 20; ++i) {
        for (int j = 2; j <= 20; ++j) CHECK(std::abs(flat(i, j)) <= 1e-12);
    }
    CHECK(curvature_divergence(ScalarField(g, -2.0)).max_abs() == 0.0);
}

TEST_CASE("curvature: circle of radius 1/4 gives -1/R on the interface")
{
    const GridSpec g(80, 2, 1.0);
    const ScalarField k = curvature_divergence(ScalarField::sample(g, testutil::circle), 1e-8);
    int checked = 0;
    for (int i = 1; i <= 81; ++i) {
        for (int j = 1; j <= 81; ++j) {
            const double r = std::hypot(g.x(i) - 0.5, g.x(j) - 0.5);
            if (std::abs(r - 0.25) > 0.5 * g.h()) continue;
            CHECK(k(i, j) == doctest::Approx(-4.0).epsilon(0.10));
            ++checked;
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("Neumann copy rule fills the boundary ring")
{
    const GridSpec g(4, 2, 1.0);
    std::vector<double> v(g.node_count(), 0.0);
    for (int i = 2; i <= 4; ++i) {
        for (int j = 2; j <= 4; ++j) v[g.node_index(i, j)] = 10 * i + j;
    }
    complete_neumann_copy(g, v);
    CHECK(v[g.node_index(3, 1)] == 32);
    CHECK(v[g.node_index(3, 5)] == 34);
    CHECK(v[g.node_index(1, 3)] == 23);
    CHECK(v[g.node_index(5, 3)] == 43);
    CHECK(v[g.node_index(1, 1)] == 22);
    CHECK(v[g.node_index(5, 5)] == 44);
    CHECK(v[g.node_index(1, 5)] == 24);
}

}

#include "regionopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace regionopt {

GridSpec::GridSpec(int n, int m, double t_final)
    : n_(n), m_(m), t_final_(t_final), h_(0.0), dt_(0.0)
{
    if (n < 4 || n % 2 != 0) {
        throw std::invalid_argument("grid: N must be even and >= 4 (composite Simpson needs an even "
                                    "number of intervals), got N = " + std::to_string(n));
    }
    if (m < 2 || m % 2 != 0) {
        throw std::invalid_argument("grid: M must be even and >= 2 (composite Simpson needs an even "
                                    "number of intervals), got M = " + std::to_string(m));
    }
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        throw std::invalid_argument("grid: T must be positive and finite");
    }
    h_ = 1.0 / n;
    dt_ = t_final / m;
}

std::size_t GridSpec::node_count() const
{
    return static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_ + 1);
}

std::size_t GridSpec::interior_count() const
{
    return static_cast<std::size_t>(n_ - 1) * static_cast<std::size_t>(n_ - 1);
}

std::size_t GridSpec::node_index(int i, int j) const
{
    return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(j - 1);
}

std::size_t GridSpec::interior_index(int i, int j) const
{
    return static_cast<std::size_t>(i - 2) * static_cast<std::size_t>(n_ - 1) + static_cast<std::size_t>(j - 2);
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const GridSpec& grid, double fill) : grid_(grid), values_(grid.node_count(), fill)
{
    if (!std::isfinite(fill)) {
        throw std::invalid_argument("ScalarField: fill value must be finite");
    }
}

ScalarField::ScalarField(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.node_count()) {
        throw std::invalid_argument("ScalarField: expected " + std::to_string(grid_.node_count()) +
                                    " nodal values, got " + std::to_string(values_.size()));
    }
    require_finite();
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ScalarField::require_finite() const
{
    if (!all_finite()) {
        throw std::invalid_argument("ScalarField: values must be finite");
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& other)
{
    if (!(grid_ == other.grid_)) throw std::invalid_argument("ScalarField: grid mismatch");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += other.values_[n];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other)
{
    if (!(grid_ == other.grid_)) throw std::invalid_argument("ScalarField: grid mismatch");
    for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= other.values_[n];
    return *this;
}

ScalarField& ScalarField::operator*=(double s)
{
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------

SpaceTimeField::SpaceTimeField(const GridSpec& grid, double fill)
    : grid_(grid), values_(grid.node_count() * static_cast<std::size_t>(grid.m() + 1), fill)
{
}

std::size_t SpaceTimeField::offset(int k) const
{
    return static_cast<std::size_t>(k - 1) * grid_.node_count();
}

std::span<const double> SpaceTimeField::level(int k) const
{
    if (k < 1 || k > grid_.m() + 1) throw std::out_of_range("SpaceTimeField: time level out of range");
    return std::span<const double>(values_).subspan(offset(k), grid_.node_count());
}

std::span<double> SpaceTimeField::level(int k)
{
    if (k < 1 || k > grid_.m() + 1) throw std::out_of_range("SpaceTimeField: time level out of range");
    return std::span<double>(values_).subspan(offset(k), grid_.node_count());
}

ScalarField SpaceTimeField::slice(int k) const
{
    auto lv = level(k);
    return ScalarField(grid_, std::vector<double>(lv.begin(), lv.end()));
}

void SpaceTimeField::set_level(int k, const ScalarField& values)
{
    if (!(values.grid() == grid_)) throw std::invalid_argument("SpaceTimeField: grid mismatch");
    std::ranges::copy(values.values(), level(k).begin());
}

bool SpaceTimeField::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double SpaceTimeField::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

// ---------------------------------------------------------------------------

std::vector<double> simpson_weights(int n, double step)
{
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("simpson: number of intervals must be even and >= 2, got " +
                                    std::to_string(n));
    }
    std::vector<double> w(static_cast<std::size_t>(n + 1));
    for (int l = 0; l <= n; ++l) {
        double c = (l == 0 || l == n) ? 1.0 : (l % 2 == 1 ? 4.0 : 2.0);
        w[static_cast<std::size_t>(l)] = c * step / 3.0;
    }
    return w;
}

double simpson_1d(std::span<const double> samples, double step)
{
    const int n = static_cast<int>(samples.size()) - 1;
    const auto w = simpson_weights(n, step);
    double s = 0.0;
    for (std::size_t l = 0; l < samples.size(); ++l) s += w[l] * samples[l];
    return s;
}

double simpson_integral_2d(const GridSpec& grid, std::span<const double> level)
{
    const int n = grid.n();
    if (level.size() != grid.node_count()) throw std::invalid_argument("simpson_integral_2d: size mismatch");
    const auto w = simpson_weights(n, grid.h());
    double total = 0.0;
    for (int i = 1; i <= n + 1; ++i) {
        double row = 0.0;
        for (int j = 1; j <= n + 1; ++j) row += w[static_cast<std::size_t>(j - 1)] * level[grid.node_index(i, j)];
        total += w[static_cast<std::size_t>(i - 1)] * row;
    }
    return total;
}

double simpson_integral_2d(const ScalarField& f)
{
    return simpson_integral_2d(f.grid(), f.values());
}

double space_time_integral(const SpaceTimeField& f)
{
    const GridSpec& g = f.grid();
    std::vector<double> per_level(static_cast<std::size_t>(g.m() + 1));
    for (int k = 1; k <= g.m() + 1; ++k) per_level[static_cast<std::size_t>(k - 1)] = simpson_integral_2d(g, f.level(k));
    return simpson_1d(per_level, g.dt());
}

ScalarField gradient_magnitude(const ScalarField& phi)
{
    const GridSpec& g = phi.grid();
    const int n = g.n();
    const double h = g.h();
    ScalarField out(g);

    for (int i = 2; i <= n; ++i) {
        for (int j = 2; j <= n; ++j) {
            const double d1 = phi(i + 1, j) - phi(i - 1, j);
            const double d2 = phi(i, j + 1) - phi(i, j - 1);
            out(i, j) = std::sqrt((d1 * d1 + d2 * d2) / (4.0 * h * h));
        }
    }
    for (int j = 2; j <= n; ++j) {
        out(1, j) = std::hypot(phi(2, j) - phi(1, j), phi(1, j + 1) - phi(1, j)) / h;
        out(n + 1, j) = std::hypot(phi(n + 1, j) - phi(n, j), phi(n + 1, j + 1) - phi(n + 1, j)) / h;
    }
    for (int i = 2; i <= n; ++i) {
        out(i, 1) = std::hypot(phi(i + 1, 1) - phi(i, 1), phi(i, 2) - phi(i, 1)) / h;
        out(i, n + 1) = std::hypot(phi(i + 1, n + 1) - phi(i, n + 1), phi(i, n + 1) - phi(i, n)) / h;
    }
    // Corner rules are deliberately asymmetric.
    out(1, 1) = out(2, 1);
    out(1, n + 1) = out(1, n);
    out(n + 1, 1) = out(n + 1, 2);
    out(n + 1, n + 1) = out(n + 1, n);
    return out;
}

namespace {

// d/dx1 of f at node (i, j): centered inside, one-sided on the x1 = 0 and x1 = 1 edges.
double diff_x1(const ScalarField& f, int i, int j)
{
    const int n = f.grid().n();
    const double h = f.grid().h();
    if (i == 1) return (f(2, j) - f(1, j)) / h;
    if (i == n + 1) return (f(n + 1, j) - f(n, j)) / h;
    return (f(i + 1, j) - f(i - 1, j)) / (2.0 * h);
}

double diff_x2(const ScalarField& f, int i, int j)
{
    const int n = f.grid().n();
    const double h = f.grid().h();
    if (j == 1) return (f(i, 2) - f(i, 1)) / h;
    if (j == n + 1) return (f(i, n + 1) - f(i, n)) / h;
    return (f(i, j + 1) - f(i, j - 1)) / (2.0 * h);
}

}  // namespace

ScalarField curvature_divergence(const ScalarField& phi, double eta)
{
    if (!(eta > 0.0)) throw std::invalid_argument("curvature_divergence: eta must be positive");
    const GridSpec& g = phi.grid();
    const int n = g.n();
    ScalarField n1(g), n2(g);
    for (int i = 1; i <= n + 1; ++i) {
        for (int j = 1; j <= n + 1; ++j) {
            const double p1 = diff_x1(phi, i, j);
            const double p2 = diff_x2(phi, i, j);
            const double norm = std::sqrt(p1 * p1 + p2 * p2 + eta * eta);
            n1(i, j) = p1 / norm;
            n2(i, j) = p2 / norm;
        }
    }
    ScalarField out(g);
    for (int i = 1; i <= n + 1; ++i) {
        for (int j = 1; j <= n + 1; ++j) out(i, j) = diff_x1(n1, i, j) + diff_x2(n2, i, j);
    }
    return out;
}

void complete_neumann_copy(const GridSpec& grid, std::span<double> level)
{
    const int n = grid.n();
    auto at = [&](int i, int j) -> double& { return level[grid.node_index(i, j)]; };
    for (int i = 2; i <= n; ++i) {
        at(i, 1) = at(i, 2);
        at(i, n + 1) = at(i, n);
    }
    for (int j = 1; j <= n + 1; ++j) {
        at(1, j) = at(2, j);
        at(n + 1, j) = at(n, j);
    }
}

}  // namespace regionopt

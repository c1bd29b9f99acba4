#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regionopt {

/// Uniform (N+1)x(N+1) node grid on the unit square plus M+1 time levels on [0, T].
///
/// Node indices are 1-based to match the usual finite-difference notation:
/// node (i, j) with i, j in [1, N+1] sits at (x1, x2) = ((i-1)h, (j-1)h), and
/// time level k in [1, M+1] sits at t = (k-1)dt. Flat storage is row-major
/// over (i, j), so j is the fastest index.
///
/// N and M must be even (composite Simpson quadrature), with N >= 4 and M >= 2.
class GridSpec {
public:
    GridSpec(int n, int m, double t_final);

    int n() const { return n_; }
    int m() const { return m_; }
    double t_final() const { return t_final_; }
    double h() const { return h_; }
    double dt() const { return dt_; }

    int nodes_per_side() const { return n_ + 1; }
    std::size_t node_count() const;
    /// Interior nodes are i, j in [2, N]; there are (N-1)^2 of them.
    int interior_per_side() const { return n_ - 1; }
    std::size_t interior_count() const;

    double x(int i) const { return (i - 1) * h_; }
    double t(int k) const { return (k - 1) * dt_; }

    /// 0-based flat offset of node (i, j).
    std::size_t node_index(int i, int j) const;
    /// 0-based row of interior node (i, j) in the step matrices: q - 1 with
    /// q = (i-2)(N-1) + (j-1).
    std::size_t interior_index(int i, int j) const;

    bool operator==(const GridSpec&) const = default;

private:
    int n_;
    int m_;
    double t_final_;
    double h_;
    double dt_;
};

/// Nodal values of a scalar function on the spatial grid.
class ScalarField {
public:
    explicit ScalarField(const GridSpec& grid, double fill = 0.0);
    /// Takes ownership of row-major nodal values; rejects wrong sizes and non-finite entries.
    ScalarField(const GridSpec& grid, std::vector<double> values);

    /// Samples f(x1, x2) at every node.
    template <class F>
    static ScalarField sample(const GridSpec& grid, F&& f)
    {
        ScalarField out(grid);
        for (int i = 1; i <= grid.n() + 1; ++i) {
            for (int j = 1; j <= grid.n() + 1; ++j) {
                out(i, j) = f(grid.x(i), grid.x(j));
            }
        }
        out.require_finite();
        return out;
    }

    const GridSpec& grid() const { return grid_; }

    double operator()(int i, int j) const { return values_[grid_.node_index(i, j)]; }
    double& operator()(int i, int j) { return values_[grid_.node_index(i, j)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double max() const;
    double min() const;
    double max_abs() const;
    bool all_finite() const;
    /// Throws std::invalid_argument if any value is NaN or infinite.
    void require_finite() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);

private:
    GridSpec grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Nodal values over space and the M+1 time levels. Time level k is one
/// contiguous block of (N+1)^2 values.
class SpaceTimeField {
public:
    explicit SpaceTimeField(const GridSpec& grid, double fill = 0.0);

    const GridSpec& grid() const { return grid_; }

    double operator()(int i, int j, int k) const { return values_[offset(k) + grid_.node_index(i, j)]; }
    double& operator()(int i, int j, int k) { return values_[offset(k) + grid_.node_index(i, j)]; }

    std::span<const double> level(int k) const;
    std::span<double> level(int k);
    ScalarField slice(int k) const;
    void set_level(int k, const ScalarField& values);

    std::span<const double> values() const { return values_; }
    bool all_finite() const;
    double max_abs() const;

private:
    std::size_t offset(int k) const;

    GridSpec grid_;
    std::vector<double> values_;
};

/// Composite Simpson weights for n (even) intervals of width `step`.
std::vector<double> simpson_weights(int n, double step);

/// Composite Simpson rule over equally spaced samples (odd count >= 3).
double simpson_1d(std::span<const double> samples, double step);

/// Tensor-product composite Simpson approximation of the integral over the
/// unit square: Simpson in x2 along each row, then Simpson over the rows.
double simpson_integral_2d(const ScalarField& f);
double simpson_integral_2d(const GridSpec& grid, std::span<const double> level);

/// Simpson in time of the Simpson space integrals of each level.
double space_time_integral(const SpaceTimeField& f);

/// Nodal |grad phi|: central differences at interior nodes, one-sided
/// differences along the edges, and each corner copied from one adjacent
/// edge node: (1,1)<-(2,1), (1,N+1)<-(1,N), (N+1,1)<-(N+1,2), (N+1,N+1)<-(N+1,N).
ScalarField gradient_magnitude(const ScalarField& phi);

/// Nodal div(grad phi / sqrt(|grad phi|^2 + eta^2)).
///
/// The normalized gradient is formed with centered differences (one-sided on
/// boundary nodes), then differentiated the same way. For phi positive inside
/// a disc of radius R the value on the circle is about -1/R.
ScalarField curvature_divergence(const ScalarField& phi, double eta = 1e-8);

/// Overwrites the boundary ring of one time level with copies of the adjacent
/// interior values: v(i,1)=v(i,2), v(i,N+1)=v(i,N) for i in [2,N], then
/// v(1,j)=v(2,j), v(N+1,j)=v(N,j) for every j.
void complete_neumann_copy(const GridSpec& grid, std::span<double> level);

}  // namespace regionopt

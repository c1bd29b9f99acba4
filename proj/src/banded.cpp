#include "regionopt/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "regionopt/errors.hpp"

namespace regionopt {

namespace {

constexpr double kPivotTolerance = 64.0 * std::numeric_limits<double>::epsilon();

}  // namespace

BandedMatrix::BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), kl_(lower), ku_(upper), width_(lower + upper + 1), data_(n * (lower + upper + 1), 0.0)
{
    if (n == 0) throw std::invalid_argument("BandedMatrix: empty matrix");
}

bool BandedMatrix::in_band(std::size_t row, std::size_t col) const
{
    if (row >= n_ || col >= n_) return false;
    return col + kl_ >= row && col <= row + ku_;
}

double BandedMatrix::operator()(std::size_t row, std::size_t col) const
{
    if (!in_band(row, col)) return 0.0;
    return data_[row * width_ + (col + kl_ - row)];
}

double& BandedMatrix::at(std::size_t row, std::size_t col)
{
    if (!in_band(row, col)) {
        throw std::out_of_range("BandedMatrix: (" + std::to_string(row) + ", " + std::to_string(col) +
                                ") is outside the band");
    }
    return data_[row * width_ + (col + kl_ - row)];
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const
{
    if (x.size() != n_) throw std::invalid_argument("BandedMatrix::multiply: size mismatch");
    std::vector<double> y(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t c0 = r > kl_ ? r - kl_ : 0;
        const std::size_t c1 = std::min(n_ - 1, r + ku_);
        double s = 0.0;
        for (std::size_t c = c0; c <= c1; ++c) s += data_[r * width_ + (c + kl_ - r)] * x[c];
        y[r] = s;
    }
    return y;
}

double BandedMatrix::norm_inf() const
{
    double best = 0.0;
    for (std::size_t r = 0; r < n_; ++r) {
        double s = 0.0;
        for (std::size_t w = 0; w < width_; ++w) s += std::abs(data_[r * width_ + w]);
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> BandedMatrix::to_dense() const
{
    std::vector<double> dense(n_ * n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t c0 = r > kl_ ? r - kl_ : 0;
        const std::size_t c1 = std::min(n_ - 1, r + ku_);
        for (std::size_t c = c0; c <= c1; ++c) dense[r * n_ + c] = (*this)(r, c);
    }
    return dense;
}

// ---------------------------------------------------------------------------

BandedLU::BandedLU(const BandedMatrix& a, double relative_pivot_tolerance)
    : n_(a.size()),
      kl_(a.lower()),
      ku_(a.upper()),
      width_(2 * a.lower() + a.upper() + 1),
      data_(a.size() * (2 * a.lower() + a.upper() + 1), 0.0),
      pivots_(a.size())
{
    // Row r holds columns [r - kl, r + kl + ku].
    for (std::size_t r = 0; r < n_; ++r) {
        const std::size_t c0 = r > kl_ ? r - kl_ : 0;
        const std::size_t c1 = std::min(n_ - 1, r + ku_);
        for (std::size_t c = c0; c <= c1; ++c) lu(r, c) = a(r, c);
    }

    const double tiny = (relative_pivot_tolerance < 0.0 ? kPivotTolerance : relative_pivot_tolerance) * a.norm_inf();
    const std::size_t reach = kl_ + ku_;
    for (std::size_t k = 0; k < n_; ++k) {
        const std::size_t last_row = std::min(n_ - 1, k + kl_);
        const std::size_t last_col = std::min(n_ - 1, k + reach);

        std::size_t p = k;
        double best = std::abs(lu(k, k));
        for (std::size_t r = k + 1; r <= last_row; ++r) {
            if (std::abs(lu(r, k)) > best) {
                best = std::abs(lu(r, k));
                p = r;
            }
        }
        if (!(best > tiny)) {
            throw SolverError("banded solve: negligible pivot " + std::to_string(best) + " at row " +
                              std::to_string(k) + " (matrix singular or ill-conditioned)");
        }
        pivots_[k] = p;
        if (p != k) {
            for (std::size_t c = k; c <= last_col; ++c) std::swap(lu(k, c), lu(p, c));
        }

        const double pivot = lu(k, k);
        for (std::size_t r = k + 1; r <= last_row; ++r) {
            const double m = lu(r, k) / pivot;
            lu(r, k) = m;
            if (m == 0.0) continue;
            for (std::size_t c = k + 1; c <= last_col; ++c) lu(r, c) -= m * lu(k, c);
        }
    }
}

std::vector<double> BandedLU::solve(std::span<const double> b) const
{
    if (b.size() != n_) throw std::invalid_argument("BandedLU::solve: size mismatch");
    std::vector<double> x(b.begin(), b.end());

    for (std::size_t k = 0; k < n_; ++k) {
        if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
        const std::size_t last_row = std::min(n_ - 1, k + kl_);
        for (std::size_t r = k + 1; r <= last_row; ++r) x[r] -= lu(r, k) * x[k];
    }

    const std::size_t reach = kl_ + ku_;
    for (std::size_t kk = n_; kk-- > 0;) {
        const std::size_t last_col = std::min(n_ - 1, kk + reach);
        double s = x[kk];
        for (std::size_t c = kk + 1; c <= last_col; ++c) s -= lu(kk, c) * x[c];
        x[kk] = s / lu(kk, kk);
    }
    return x;
}

std::vector<double> linear_solve(const BandedSystem& sys)
{
    if (sys.rhs.size() != sys.matrix.size()) throw std::invalid_argument("linear_solve: rhs size mismatch");
    return BandedLU(sys.matrix).solve(sys.rhs);
}

std::vector<double> linear_solve_dense(const BandedSystem& sys)
{
    const std::size_t n = sys.matrix.size();
    if (sys.rhs.size() != n) throw std::invalid_argument("linear_solve_dense: rhs size mismatch");
    std::vector<double> a = sys.matrix.to_dense();
    std::vector<double> b = sys.rhs;
    const double tiny = kPivotTolerance * sys.matrix.norm_inf();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(a[r * n + k]) > std::abs(a[p * n + k])) p = r;
        }
        if (!(std::abs(a[p * n + k]) > tiny)) {
            throw SolverError("dense solve: negligible pivot at row " + std::to_string(k));
        }
        if (p != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[k * n + c], a[p * n + c]);
            std::swap(b[k], b[p]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double m = a[r * n + k] / a[k * n + k];
            if (m == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) a[r * n + c] -= m * a[k * n + c];
            b[r] -= m * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= a[k * n + c] * x[c];
        x[k] = s / a[k * n + k];
    }
    return x;
}

double residual_inf(const BandedSystem& sys, std::span<const double> x)
{
    const auto ax = sys.matrix.multiply(x);
    double r = 0.0;
    for (std::size_t n = 0; n < ax.size(); ++n) r = std::max(r, std::abs(ax[n] - sys.rhs[n]));
    return r;
}

}  // namespace regionopt

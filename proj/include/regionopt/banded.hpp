#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regionopt {

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals,
/// stored row by row. Entries outside the band read as zero.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper);

    std::size_t size() const { return n_; }
    std::size_t lower() const { return kl_; }
    std::size_t upper() const { return ku_; }

    bool in_band(std::size_t row, std::size_t col) const;
    double operator()(std::size_t row, std::size_t col) const;
    /// Throws std::out_of_range for positions outside the band.
    double& at(std::size_t row, std::size_t col);

    std::vector<double> multiply(std::span<const double> x) const;
    /// Max absolute row sum.
    double norm_inf() const;
    /// Row-major dense copy.
    std::vector<double> to_dense() const;

private:
    std::size_t n_;
    std::size_t kl_;
    std::size_t ku_;
    std::size_t width_;
    std::vector<double> data_;
};

/// A x = B for one implicit step.
struct BandedSystem {
    BandedMatrix matrix;
    std::vector<double> rhs;
};

/// Banded LU factorization with partial pivoting (the upper band grows to
/// lower + upper, as in LAPACK's gbtrf). Factor once, solve many times.
class BandedLU {
public:
    /// Throws SolverError when a pivot is at most tol * ||A||_inf. A negative
    /// tol selects the default 64 machine epsilons; tol = 0 rejects only exact
    /// zeros (inverse iteration deliberately factors nearly singular shifts).
    explicit BandedLU(const BandedMatrix& a, double relative_pivot_tolerance = -1.0);

    std::vector<double> solve(std::span<const double> b) const;
    std::size_t size() const { return n_; }

private:
    double& lu(std::size_t row, std::size_t col) { return data_[row * width_ + (col + kl_ - row)]; }
    double lu(std::size_t row, std::size_t col) const { return data_[row * width_ + (col + kl_ - row)]; }

    std::size_t n_;
    std::size_t kl_;
    std::size_t ku_;
    std::size_t width_;
    std::vector<double> data_;
    std::vector<std::size_t> pivots_;
};

/// Production path: banded elimination.
std::vector<double> linear_solve(const BandedSystem& sys);

/// Plain Gaussian elimination with partial pivoting on the dense matrix.
/// O(n^3); kept as the reference path for the banded solver.
std::vector<double> linear_solve_dense(const BandedSystem& sys);

/// ||A x - B||_inf
double residual_inf(const BandedSystem& sys, std::span<const double> x);

}  // namespace regionopt

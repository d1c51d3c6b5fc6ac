#pragma once

// Small dense linear algebra for the relay problem. Sizes never exceed a few
// dozen rows, so everything is row-major std::vector storage and direct
// elimination; nothing here allocates behind the caller's back beyond the
// returned values.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ccr/error.hpp"

namespace ccr {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;
using RVector = std::vector<double>;

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Row-major nested initializer; ragged rows are a construction error.
    Matrix(std::initializer_list<std::initializer_list<T>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const T> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> data() const noexcept { return data_; }

    Matrix adjoint() const;
    Matrix transpose() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using CMatrix = Matrix<cdouble>;
using RMatrix = Matrix<double>;

// ---------------------------------------------------------------------------
// vector helpers

/// a^H b (conjugates the first argument).
cdouble dot(std::span<const cdouble> a, std::span<const cdouble> b);
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const cdouble> a);  // squared Euclidean norm
double norm(std::span<const cdouble> a);
double norm1(std::span<const double> a);
double norm_inf(std::span<const double> a);
CVector scaled(std::span<const cdouble> a, cdouble s);
CVector normalized(std::span<const cdouble> a);

/// |a^H b|^2
inline double abs2_dot(std::span<const cdouble> a, std::span<const cdouble> b) {
    return std::norm(dot(a, b));
}

// ---------------------------------------------------------------------------
// matrix helpers

template <typename T>
std::vector<T> matvec(const Matrix<T>& a, std::span<const T> x);

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// A += s * x x^H
void add_outer(CMatrix& a, std::span<const cdouble> x, double s);

/// v g^H
CMatrix outer(std::span<const cdouble> v, std::span<const cdouble> g);

double frobenius_norm2(const CMatrix& a);

/// max |A - A^H| / max |A|; 0 for the zero matrix.
double hermitian_defect(const CMatrix& a);

// ---------------------------------------------------------------------------
// solvers

/// Solves A x = b for Hermitian positive-definite A by Cholesky factorization.
/// Throws NotHermitian, NotPositiveDefinite (pivot <= 1e-14 max diag) or
/// DimensionMismatch.
CVector hermitian_solve(const CMatrix& a, std::span<const cdouble> b);

/// Solves M x = b by Gaussian elimination with partial pivoting. Throws
/// Singular when a pivot falls below 1e-14 of the largest entry.
RVector linear_solve_real(const RMatrix& m, std::span<const double> b);

struct PerronPair {
    double rho = 0.0;
    RVector x;  // nonnegative, ||x||_1 = 1
    std::size_t iterations = 0;
};

/// Perron root and vector of an entrywise-nonnegative square matrix by
/// l1-normalized power iteration from the all-ones vector.
PerronPair dominant_eigpair(const RMatrix& a, std::size_t cap = 10000);

}  // namespace ccr

#pragma once

#include <cstddef>
#include <vector>

namespace letc {

using Vector = std::vector<double>;

// Dense row-major matrix. Everything here targets small symmetric systems
// (dimension at most a few hundred), not BLAS throughput.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool square() const { return rows_ == cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SymmetricEigen {
    Vector eigenvalues;   // sorted non-increasing
    Matrix eigenvectors;  // orthonormal columns, column k pairs with eigenvalues[k]
};

struct SpdSolution {
    Vector x;
    bool jitter_applied = false;
    double jitter = 0.0;
};

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
Vector matvec(const Matrix& a, const Vector& x);
double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);

// Cyclic Jacobi rotations; off-diagonal threshold 1e-12*||A||_F, at most 100 sweeps.
// Input is symmetrized internally; asymmetry beyond 1e-9*||A||_max is rejected.
SymmetricEigen symmetric_eigen(const Matrix& a);

// Cholesky solve for symmetric PSD systems. On pivot failure the diagonal is
// jittered by 1e-12*tr(A)/n, escalating x10 up to 3 times. Pivots must clear
// 1e-9*tr(A)/n, which sits above the whole jitter ladder: exactly rank-deficient
// systems fail every attempt and raise SingularSystem instead of returning one
// of infinitely many solutions.
SpdSolution solve_spd(const Matrix& a, const Vector& b);

// sum_k 1/max(lambda_k, floor); +inf when floor == 0 and a zero eigenvalue exists.
// Eigenvalues below -1e-9*lambda_1 are rejected, small negatives clamp to 0.
double trace_inverse(const SymmetricEigen& eig, double floor_value);

// acc + weight * z z^T, exactly symmetric by construction.
Matrix outer_accumulate(const Matrix& acc, const Vector& z, double weight);

}  // namespace letc

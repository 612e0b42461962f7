#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vocscreen {

// Dense row-major matrix of doubles. Small-d numerics only; nothing here is
// tuned for large dense algebra.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> col(std::size_t j) const;
    void set_col(std::size_t j, std::span<const double> v);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    Matrix transposed() const;

    // this * other
    Matrix mul(const Matrix& other) const;
    // this * v
    std::vector<double> mul(std::span<const double> v) const;
    // this^T * v
    std::vector<double> mul_transposed(std::span<const double> v) const;

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Thin Householder QR of an n x p matrix (n >= p). Rank deficiency is
// detected from vanishing diagonal entries of R and reported with the
// offending column index.
class HouseholderQr {
public:
    explicit HouseholderQr(const Matrix& x);

    bool full_rank() const { return deficient_col_ < 0; }
    int deficient_column() const { return deficient_col_; }

    // Least-squares solve; requires full rank.
    std::vector<double> solve(std::span<const double> y) const;

    // Q^T y (first p entries are the reduced system's rhs).
    std::vector<double> qty(std::span<const double> y) const;

    // Upper-triangular factor (p x p).
    const Matrix& r() const { return r_; }

    // (R^-1 R^-T)_{jj} for OLS standard errors.
    std::vector<double> rinv_gram_diagonal() const;

private:
    std::size_t n_, p_;
    Matrix qr_;                  // Householder vectors below diagonal
    std::vector<double> tau_;
    Matrix r_;
    int deficient_col_ = -1;
};

// Solves A x = b for symmetric positive definite A via Cholesky.
// Returns false when A is not (numerically) SPD.
bool cholesky_solve(Matrix a, std::span<const double> b, std::vector<double>& x);

// In-place lower Cholesky; returns false when not SPD.
bool cholesky_factor(Matrix& a);

// log(det) from a lower Cholesky factor.
double cholesky_logdet(const Matrix& l);

// Solve L z = b (lower triangular).
std::vector<double> forward_substitute(const Matrix& l, std::span<const double> b);

struct SvdResult {
    Matrix u;                    // n x k, orthonormal columns (k = min(n, d))
    std::vector<double> sigma;   // descending singular values
    Matrix v;                    // d x k, orthonormal columns
};

// One-sided Jacobi SVD; fine for the tall-skinny matrices PCA sees.
SvdResult jacobi_svd(const Matrix& x);

double dot(std::span<const double> a, std::span<const double> b);
double mean(std::span<const double> v);
// Population variance (divide by n).
double variance(std::span<const double> v);

}  // namespace vocscreen

#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace anchorgt {

/// Row-major dense matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    std::size_t bytes() const noexcept { return values.size() * sizeof(double); }
    bool all_finite() const;

    static Matrix identity(std::size_t n);
    /// Entries drawn from N(0, scale^2).
    static Matrix random_normal(std::size_t r, std::size_t c, double scale, std::mt19937_64& rng);

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);    ///< a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b); ///< a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b); ///< a * b^T
void add_inplace(Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace anchorgt

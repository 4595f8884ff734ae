#include "anchorgt/matrix.hpp"

#include "anchorgt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anchorgt {

bool Matrix::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::random_normal(std::size_t r, std::size_t c, double scale, std::mt19937_64& rng) {
    Matrix m(r, c);
    for (double& x : m.values) x = scale * standard_normal(rng);
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: shape mismatch");
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* o = out.values.data() + i * out.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double s = a(i, k);
            if (s == 0.0) continue;
            const double* br = b.values.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) o[j] += s * br[j];
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: shape mismatch");
    Matrix out(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* br = b.values.data() + k * b.cols;
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double s = a(k, i);
            if (s == 0.0) continue;
            double* o = out.values.data() + i * out.cols;
            for (std::size_t j = 0; j < b.cols; ++j) o[j] += s * br[j];
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: shape mismatch");
    Matrix out(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.values.data() + i * a.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* br = b.values.data() + j * b.cols;
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += ar[k] * br[k];
            out(i, j) = s;
        }
    }
    return out;
}

void add_inplace(Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("add: shape mismatch");
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    }
    return m;
}

} // namespace anchorgt

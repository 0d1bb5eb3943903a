#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace faultloc::linalg {

/// Dense row-major matrix, just enough for the small systems this project
/// solves (nodal networks up to 9x9, damped least-squares up to ~40x40).
template <typename T>
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T{}) {}

    T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using CMatrix = Matrix<std::complex<double>>;
using CVector = std::vector<std::complex<double>>;

/// Gaussian elimination with partial pivoting. Throws on a numerically
/// singular system.
inline CVector solve(CMatrix a, CVector b) {
    const std::size_t n = a.rows;
    if (a.cols != n || b.size() != n) throw std::invalid_argument("solve: shape mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(a(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double mag = std::abs(a(r, k));
            if (mag > best) {
                best = mag;
                pivot = r;
            }
        }
        if (best < 1e-300) throw std::runtime_error("solve: singular matrix");
        if (pivot != k) {
            for (std::size_t c = k; c < n; ++c) std::swap(a(k, c), a(pivot, c));
            std::swap(b[k], b[pivot]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const std::complex<double> f = a(r, k) / a(k, k);
            if (f == std::complex<double>{}) continue;
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
            b[r] -= f * b[k];
        }
    }
    CVector x(n);
    for (std::size_t i = n; i-- > 0;) {
        std::complex<double> acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    return x;
}

/// Cholesky solve for a symmetric positive-definite system (row-major,
/// size n*n). Returns nullopt when the factorization breaks down so the
/// caller can re-damp and retry.
inline std::optional<std::vector<double>> cholesky_solve(std::vector<double> a,
                                                         std::vector<double> b,
                                                         std::size_t n) {
    if (a.size() != n * n || b.size() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        double d = a[k * n + k];
        for (std::size_t j = 0; j < k; ++j) d -= a[k * n + j] * a[k * n + j];
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        const double lkk = std::sqrt(d);
        a[k * n + k] = lkk;
        for (std::size_t r = k + 1; r < n; ++r) {
            double s = a[r * n + k];
            for (std::size_t j = 0; j < k; ++j) s -= a[r * n + j] * a[k * n + j];
            a[r * n + k] = s / lkk;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t j = 0; j < i; ++j) s -= a[i * n + j] * b[j];
        b[i] = s / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[j * n + i] * b[j];
        b[i] = s / a[i * n + i];
    }
    return b;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace faultloc::linalg

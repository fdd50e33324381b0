#ifndef KFBI_LINALG_HPP
#define KFBI_LINALG_HPP

#include <array>
#include <cmath>
#include <stdexcept>

namespace kfbi::linalg {

/// In-place LU solve with partial pivoting for the small dense systems
/// (jump conditions, boundary-value interpolation). A is row-major n x n.
template <int N>
void lu_solve(std::array<double, N * N>& A, std::array<double, N>& b) {
    std::array<int, N> piv{};
    for (int i = 0; i < N; ++i) piv[i] = i;
    for (int k = 0; k < N; ++k) {
        int imax = k;
        double amax = std::fabs(A[piv[k] * N + k]);
        for (int i = k + 1; i < N; ++i) {
            double a = std::fabs(A[piv[i] * N + k]);
            if (a > amax) { amax = a; imax = i; }
        }
        if (amax == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        std::swap(piv[k], piv[imax]);
        const int rk = piv[k];
        for (int i = k + 1; i < N; ++i) {
            const int ri = piv[i];
            const double m = A[ri * N + k] / A[rk * N + k];
            A[ri * N + k] = m;
            for (int j = k + 1; j < N; ++j) A[ri * N + j] -= m * A[rk * N + j];
            b[ri] -= m * b[rk];
        }
    }
    std::array<double, N> x{};
    for (int k = N - 1; k >= 0; --k) {
        const int rk = piv[k];
        double s = b[rk];
        for (int j = k + 1; j < N; ++j) s -= A[rk * N + j] * x[j];
        x[k] = s / A[rk * N + k];
    }
    b = x;
}

/// Rough infinity-norm condition estimate for a small matrix: ||A|| * ||A^-1||
/// with A^-1 formed column by column. Used only for diagnostics.
template <int N>
double cond_estimate(const std::array<double, N * N>& A) {
    double na = 0.0;
    for (int i = 0; i < N; ++i) {
        double r = 0.0;
        for (int j = 0; j < N; ++j) r += std::fabs(A[i * N + j]);
        na = std::max(na, r);
    }
    std::array<double, N * N> inv{};
    for (int c = 0; c < N; ++c) {
        auto M = A;
        std::array<double, N> e{};
        e[c] = 1.0;
        lu_solve<N>(M, e);
        for (int i = 0; i < N; ++i) inv[i * N + c] = e[i];
    }
    double ni = 0.0;
    for (int i = 0; i < N; ++i) {
        double r = 0.0;
        for (int j = 0; j < N; ++j) r += std::fabs(inv[i * N + j]);
        ni = std::max(ni, r);
    }
    return na * ni;
}

} // namespace kfbi::linalg

#endif

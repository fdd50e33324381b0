// Independent reference computations used to freeze expected test values.
// Everything here is deliberately naive (quadrature, dense transforms,
// banded elimination) and shares no code with the library paths it checks.
#ifndef KFBI_TESTS_ORACLES_HPP
#define KFBI_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "kfbi/vec2.hpp"

namespace oracles {

// Adaptive Simpson quadrature on [a, b].
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50);
}

// Dense O(n^2) DFT, coefficients scaled by 1/n.
inline std::vector<std::complex<double>> dense_dft(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<std::complex<double>> c(n);
    for (int k = 0; k < n; ++k) {
        std::complex<double> s(0.0, 0.0);
        for (int j = 0; j < n; ++j)
            s += v[j] * std::polar(1.0, -2.0 * M_PI * k * j / n);
        c[k] = s / static_cast<double>(n);
    }
    return c;
}

// Banded Gaussian elimination (no pivoting; fine for the diagonally
// dominant five-point matrix). A is stored dense by rows within bandwidth.
class BandMatrix {
public:
    BandMatrix(int n, int bw) : n_(n), bw_(bw), a_(n * (size_t)(2 * bw + 1), 0.0) {}
    double& at(int i, int j) { return a_[i * (size_t)(2 * bw_ + 1) + (j - i + bw_)]; }
    void solve(std::vector<double>& b) {
        for (int k = 0; k < n_; ++k) {
            const double piv = at(k, k);
            for (int i = k + 1; i <= std::min(n_ - 1, k + bw_); ++i) {
                const double m = at(i, k) / piv;
                if (m == 0.0) continue;
                for (int j = k; j <= std::min(n_ - 1, k + bw_); ++j) at(i, j) -= m * at(k, j);
                b[i] -= m * b[k];
            }
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j <= std::min(n_ - 1, i + bw_); ++j) s -= at(i, j) * b[j];
            b[i] = s / at(i, i);
        }
    }

private:
    int n_, bw_;
    std::vector<double> a_;
};

// Even-odd point-in-polygon, independent of the library classifier.
inline bool point_in_polygon(const std::vector<kfbi::Vec2>& poly, kfbi::Vec2 p) {
    bool in = false;
    const int n = static_cast<int>(poly.size());
    for (int i = 0, j = n - 1; i < n; j = i++) {
        const bool cross = ((poly[i].y > p.y) != (poly[j].y > p.y)) &&
                           (p.x < (poly[j].x - poly[i].x) * (p.y - poly[i].y) /
                                          (poly[j].y - poly[i].y) +
                                      poly[i].x);
        if (cross) in = !in;
    }
    return in;
}

// Desingularized trapezoid quadrature of the Laplace double layer on a
// closed curve given marker positions, normals, curvature and arclength
// weight; the diagonal kernel limit is -kappa/(4 pi).
inline std::vector<double> laplace_double_layer_trace(const std::vector<kfbi::Vec2>& pos,
                                                      const std::vector<kfbi::Vec2>& nrm,
                                                      const std::vector<double>& kappa,
                                                      double ds,
                                                      const std::vector<double>& density) {
    const int n = static_cast<int>(pos.size());
    std::vector<double> out(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            double kij;
            if (i == j) {
                kij = -kappa[j] / (4.0 * M_PI);
            } else {
                const kfbi::Vec2 d = pos[j] - pos[i];
                kij = d.dot(nrm[j]) / (2.0 * M_PI * d.dot(d));
            }
            s += kij * density[j] * ds;
        }
        out[i] = s;
    }
    return out;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

inline double linf(const std::vector<double>& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::fabs(x));
    return m;
}

} // namespace oracles

#endif

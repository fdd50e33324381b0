#include "kfbi/reference.hpp"

#include <cmath>

namespace kfbi {

namespace {
inline void cubic_weights(double t, double w[4]) {
    const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
    w[0] = -t1 * t2 * t3 / 6.0;
    w[1] = t0 * t2 * t3 / 2.0;
    w[2] = -t0 * t1 * t3 / 2.0;
    w[3] = t0 * t1 * t2 / 6.0;
}

inline double interp_one(const std::vector<double>& vals, int nx, int ny, double x0, double y0,
                         double h, Vec2 p) {
    double fx = (p.x - x0) / h;
    double fy = (p.y - y0) / h;
    int i0 = static_cast<int>(std::floor(fx)) - 1;
    int j0 = static_cast<int>(std::floor(fy)) - 1;
    i0 = std::min(std::max(i0, 0), nx - 4);
    j0 = std::min(std::max(j0, 0), ny - 4);
    double wx[4], wy[4];
    cubic_weights(fx - i0, wx);
    cubic_weights(fy - j0, wy);
    double s = 0.0;
    for (int b = 0; b < 4; ++b) {
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * vals[(i0 + a) + nx * (size_t)(j0 + b)];
        s += wy[b] * row;
    }
    return s;
}
} // namespace

void five_point_residual(const GridFunction& u, const GridFunction& rhs, double c, double h,
                         GridFunction& out) {
    const int n = u.n;
    const double ih2 = 1.0 / (h * h), c2 = c * c;
#pragma omp parallel for schedule(static)
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            const double lap = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) +
                                u.at(i, j - 1) - 4.0 * u.at(i, j)) * ih2;
            out.at(i, j) = rhs.at(i, j) - (lap - c2 * u.at(i, j));
        }
}

std::vector<double> cubic_interp_batch(const std::vector<double>& vals, int nx, int ny,
                                       double x0, double y0, double h,
                                       const std::vector<Vec2>& pts) {
    std::vector<double> out(pts.size());
#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
        out[k] = interp_one(vals, nx, ny, x0, y0, h, pts[k]);
    return out;
}

namespace ref {

void five_point_residual(const GridFunction& u, const GridFunction& rhs, double c, double h,
                         GridFunction& out) {
    const int n = u.n;
    const double ih2 = 1.0 / (h * h), c2 = c * c;
    for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            const double lap = (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) +
                                u.at(i, j - 1) - 4.0 * u.at(i, j)) * ih2;
            out.at(i, j) = rhs.at(i, j) - (lap - c2 * u.at(i, j));
        }
}

MacData mac_residual(const MacField& x, const MacData& data, double c, const MacBC& bc) {
    const int nx = x.nx, ny = x.ny;
    const double h = x.h, ih2 = 1.0 / (h * h), ih = 1.0 / h, c2 = c * c;
    MacData r = MacData::zero(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            double S = x.uat(i + 1, j) + x.uat(i - 1, j);
            double K = 4.0;
            if (j + 1 < ny) S += x.uat(i, j + 1);
            else { S += 2.0 * bc.u_top[i]; K += 1.0; }
            if (j > 0) S += x.uat(i, j - 1);
            else { S += 2.0 * bc.u_bottom[i]; K += 1.0; }
            const double op = (S - K * x.uat(i, j)) * ih2 - c2 * x.uat(i, j) -
                              (x.pat(i, j) - x.pat(i - 1, j)) * ih;
            r.fu[i + (nx + 1) * (size_t)j] = data.fu[i + (nx + 1) * (size_t)j] - op;
        }
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double S = x.vat(i, j + 1) + x.vat(i, j - 1);
            double K = 4.0;
            if (i + 1 < nx) S += x.vat(i + 1, j);
            else { S += 2.0 * bc.v_right[j]; K += 1.0; }
            if (i > 0) S += x.vat(i - 1, j);
            else { S += 2.0 * bc.v_left[j]; K += 1.0; }
            const double op = (S - K * x.vat(i, j)) * ih2 - c2 * x.vat(i, j) -
                              (x.pat(i, j) - x.pat(i, j - 1)) * ih;
            r.fv[i + nx * (size_t)j] = data.fv[i + nx * (size_t)j] - op;
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double div = (x.uat(i + 1, j) - x.uat(i, j)) * ih +
                               (x.vat(i, j + 1) - x.vat(i, j)) * ih;
            r.fdiv[i + nx * (size_t)j] = data.fdiv[i + nx * (size_t)j] - div;
        }
    return r;
}

void dgs_sweep(MacField& x, const MacData& data, double c, const MacBC& bc) {
    const int nx = x.nx, ny = x.ny;
    const double h = x.h, ih2 = 1.0 / (h * h), ih = 1.0 / h, c2 = c * c;

    for (int color = 0; color < 2; ++color)
        for (int j = 0; j < ny; ++j)
            for (int i = 1 + ((j + color + 1) % 2); i < nx; i += 2) {
                double S = x.uat(i + 1, j) + x.uat(i - 1, j);
                double K = 4.0;
                if (j + 1 < ny) S += x.uat(i, j + 1);
                else { S += 2.0 * bc.u_top[i]; K += 1.0; }
                if (j > 0) S += x.uat(i, j - 1);
                else { S += 2.0 * bc.u_bottom[i]; K += 1.0; }
                const double rhs = data.fu[i + (nx + 1) * (size_t)j] +
                                   (x.pat(i, j) - x.pat(i - 1, j)) * ih;
                x.uat(i, j) = (S * ih2 - rhs) / (K * ih2 + c2);
            }
    for (int color = 0; color < 2; ++color)
        for (int j = 1; j < ny; ++j)
            for (int i = (color + j) % 2; i < nx; i += 2) {
                double S = x.vat(i, j + 1) + x.vat(i, j - 1);
                double K = 4.0;
                if (i + 1 < nx) S += x.vat(i + 1, j);
                else { S += 2.0 * bc.v_right[j]; K += 1.0; }
                if (i > 0) S += x.vat(i - 1, j);
                else { S += 2.0 * bc.v_left[j]; K += 1.0; }
                const double rhs = data.fv[i + nx * (size_t)j] +
                                   (x.pat(i, j) - x.pat(i, j - 1)) * ih;
                x.vat(i, j) = (S * ih2 - rhs) / (K * ih2 + c2);
            }

    std::vector<double> q(nx * (size_t)ny, 0.0);
    for (int color = 0; color < 2; ++color) {
        for (int j = 0; j < ny; ++j)
            for (int i = (j + color) % 2; i < nx; i += 2) {
                const double div = (x.uat(i + 1, j) - x.uat(i, j)) * ih +
                                   (x.vat(i, j + 1) - x.vat(i, j)) * ih;
                const double r = data.fdiv[i + nx * (size_t)j] - div;
                int m = 0;
                if (i + 1 <= nx - 1) ++m;
                if (i >= 1) ++m;
                if (j + 1 <= ny - 1) ++m;
                if (j >= 1) ++m;
                q[i + nx * (size_t)j] = m > 0 ? -r * h * h / m : 0.0;
            }
        auto qat = [&](int i, int j) -> double {
            if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
            return q[i + nx * (size_t)j];
        };
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i < nx; ++i) x.uat(i, j) += (qat(i, j) - qat(i - 1, j)) * ih;
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i) x.vat(i, j) += (qat(i, j) - qat(i, j - 1)) * ih;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double qc = qat(i, j);
                double dp = -(4.0 * ih2 + c2) * qc;
                dp += (qat(i - 1, j) + qat(i + 1, j) + qat(i, j - 1) + qat(i, j + 1)) * ih2;
                x.pat(i, j) += dp;
            }
        for (int j = 0; j < ny; ++j)
            for (int i = (j + color) % 2; i < nx; i += 2) q[i + nx * (size_t)j] = 0.0;
    }
}

std::vector<double> cubic_interp_batch(const std::vector<double>& vals, int nx, int ny,
                                       double x0, double y0, double h,
                                       const std::vector<Vec2>& pts) {
    std::vector<double> out(pts.size());
    for (size_t k = 0; k < pts.size(); ++k)
        out[k] = interp_one(vals, nx, ny, x0, y0, h, pts[k]);
    return out;
}

} // namespace ref
} // namespace kfbi

#include "kfbi/stokes_fd.hpp"

#include <cmath>
#include <stdexcept>

namespace kfbi {

namespace {

// Laplacian neighbor sum and diagonal count for u with tangential ghosts at
// the y walls. K is the diagonal multiplier (4 interior, 5 at walls).
inline void u_lap_parts(const MacField& x, const MacBC& bc, int i, int j, double& S,
                        double& K) {
    S = x.uat(i + 1, j) + x.uat(i - 1, j);
    K = 4.0;
    if (j + 1 < x.ny) S += x.uat(i, j + 1);
    else { S += 2.0 * bc.u_top[i]; K += 1.0; }
    if (j > 0) S += x.uat(i, j - 1);
    else { S += 2.0 * bc.u_bottom[i]; K += 1.0; }
}

inline void v_lap_parts(const MacField& x, const MacBC& bc, int i, int j, double& S,
                        double& K) {
    S = x.vat(i, j + 1) + x.vat(i, j - 1);
    K = 4.0;
    if (i + 1 < x.nx) S += x.vat(i + 1, j);
    else { S += 2.0 * bc.v_right[j]; K += 1.0; }
    if (i > 0) S += x.vat(i - 1, j);
    else { S += 2.0 * bc.v_left[j]; K += 1.0; }
}

double dot(const std::vector<double>& a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return s;
}

} // namespace

MacData mac_residual(const MacField& x, const MacData& data, double c, const MacBC& bc) {
    const int nx = x.nx, ny = x.ny;
    const double h = x.h, ih2 = 1.0 / (h * h), ih = 1.0 / h;
    const double c2 = c * c;
    MacData r = MacData::zero(nx, ny);

#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            double S, K;
            u_lap_parts(x, bc, i, j, S, K);
            const double op = (S - K * x.uat(i, j)) * ih2 - c2 * x.uat(i, j) -
                              (x.pat(i, j) - x.pat(i - 1, j)) * ih;
            r.fu[i + (nx + 1) * (size_t)j] = data.fu[i + (nx + 1) * (size_t)j] - op;
        }
#pragma omp parallel for schedule(static)
    for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double S, K;
            v_lap_parts(x, bc, i, j, S, K);
            const double op = (S - K * x.vat(i, j)) * ih2 - c2 * x.vat(i, j) -
                              (x.pat(i, j) - x.pat(i, j - 1)) * ih;
            r.fv[i + nx * (size_t)j] = data.fv[i + nx * (size_t)j] - op;
        }
#pragma omp parallel for schedule(static)
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
    const double h = x.h, ih2 = 1.0 / (h * h), ih = 1.0 / h;
    const double c2 = c * c;

    // Gauss-Seidel on the two momentum equations, red-black.
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = 1 + ((j + color + 1) % 2); i < nx; i += 2) {
                double S, K;
                u_lap_parts(x, bc, i, j, S, K);
                const double rhs = data.fu[i + (nx + 1) * (size_t)j] +
                                   (x.pat(i, j) - x.pat(i - 1, j)) * ih;
                x.uat(i, j) = (S * ih2 - rhs) / (K * ih2 + c2);
            }
    }
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
        for (int j = 1; j < ny; ++j)
            for (int i = (color + j) % 2; i < nx; i += 2) {
                double S, K;
                v_lap_parts(x, bc, i, j, S, K);
                const double rhs = data.fv[i + nx * (size_t)j] +
                                   (x.pat(i, j) - x.pat(i, j - 1)) * ih;
                x.vat(i, j) = (S * ih2 - rhs) / (K * ih2 + c2);
            }
    }

    // Distributive divergence projection. Within a color, cells do not share
    // faces, so the per-cell q can be computed in one pass and scattered in a
    // second gather pass over u, v, p.
    static thread_local std::vector<double> q;
    q.assign(nx * (size_t)ny, 0.0);
    for (int color = 0; color < 2; ++color) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = (j + color) % 2; i < nx; i += 2) {
                const double div = (x.uat(i + 1, j) - x.uat(i, j)) * ih +
                                   (x.vat(i, j + 1) - x.vat(i, j)) * ih;
                const double r = data.fdiv[i + nx * (size_t)j] - div;
                int m = 0;
                if (i + 1 <= nx - 1) ++m; // east u free
                if (i >= 1) ++m;          // west u free
                if (j + 1 <= ny - 1) ++m; // north v free
                if (j >= 1) ++m;          // south v free
                q[i + nx * (size_t)j] = m > 0 ? -r * h * h / m : 0.0;
            }
        auto qat = [&](int i, int j) -> double {
            if (i < 0 || j < 0 || i >= nx || j >= ny) return 0.0;
            return q[i + nx * (size_t)j];
        };
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = 1; i < nx; ++i)
                x.uat(i, j) += (qat(i, j) - qat(i - 1, j)) * ih;
#pragma omp parallel for schedule(static)
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                x.vat(i, j) += (qat(i, j) - qat(i, j - 1)) * ih;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const double qc = qat(i, j);
                double dp = -(4.0 * ih2 + c2) * qc;
                dp += (qat(i - 1, j) + qat(i + 1, j) + qat(i, j - 1) + qat(i, j + 1)) * ih2;
                x.pat(i, j) += dp;
            }
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j)
            for (int i = (j + color) % 2; i < nx; i += 2) q[i + nx * (size_t)j] = 0.0;
    }
}

namespace {

// Residual restriction: cell average for the divergence block, 6-point full
// weighting for the staggered momentum blocks. Out-of-range fine residuals
// (fixed unknowns) count as zero.
void restrict_residual(const MacData& fine, int nxf, int nyf, MacData& coarse, int nxc,
                       int nyc) {
    auto fu = [&](int i, int j) -> double {
        if (i < 1 || i > nxf - 1 || j < 0 || j > nyf - 1) return 0.0;
        return fine.fu[i + (nxf + 1) * (size_t)j];
    };
    auto fv = [&](int i, int j) -> double {
        if (i < 0 || i > nxf - 1 || j < 1 || j > nyf - 1) return 0.0;
        return fine.fv[i + nxf * (size_t)j];
    };
#pragma omp parallel for schedule(static)
    for (int J = 0; J < nyc; ++J)
        for (int I = 1; I < nxc; ++I) {
            const int i = 2 * I;
            const int j = 2 * J;
            coarse.fu[I + (nxc + 1) * (size_t)J] =
                0.25 * (fu(i, j) + fu(i, j + 1)) +
                0.125 * (fu(i - 1, j) + fu(i - 1, j + 1) + fu(i + 1, j) + fu(i + 1, j + 1));
        }
#pragma omp parallel for schedule(static)
    for (int J = 1; J < nyc; ++J)
        for (int I = 0; I < nxc; ++I) {
            const int i = 2 * I;
            const int j = 2 * J;
            coarse.fv[I + nxc * (size_t)J] =
                0.25 * (fv(i, j) + fv(i + 1, j)) +
                0.125 * (fv(i, j - 1) + fv(i + 1, j - 1) + fv(i, j + 1) + fv(i + 1, j + 1));
        }
#pragma omp parallel for schedule(static)
    for (int J = 0; J < nyc; ++J)
        for (int I = 0; I < nxc; ++I)
            coarse.fdiv[I + nxc * (size_t)J] =
                0.25 * (fine.fdiv[2 * I + nxf * (size_t)(2 * J)] +
                        fine.fdiv[2 * I + 1 + nxf * (size_t)(2 * J)] +
                        fine.fdiv[2 * I + nxf * (size_t)(2 * J + 1)] +
                        fine.fdiv[2 * I + 1 + nxf * (size_t)(2 * J + 1)]);
}

// Ghost-aware samplers of a coarse correction field (homogeneous BC).
double sample_u(const MacField& c, double X, double Y) {
    const double h = c.h;
    double fi = X / h;
    double fj = Y / h - 0.5;
    int i0 = static_cast<int>(std::floor(fi));
    int j0 = static_cast<int>(std::floor(fj));
    const double tx = fi - i0, ty = fj - j0;
    auto val = [&](int i, int j) -> double {
        if (i < 0 || i > c.nx) return 0.0;   // beyond normal walls
        if (j < 0) return -c.uat(i, 0);      // tangential ghost, zero wall
        if (j > c.ny - 1) return -c.uat(i, c.ny - 1);
        return c.uat(i, j);
    };
    return (1 - tx) * (1 - ty) * val(i0, j0) + tx * (1 - ty) * val(i0 + 1, j0) +
           (1 - tx) * ty * val(i0, j0 + 1) + tx * ty * val(i0 + 1, j0 + 1);
}

double sample_v(const MacField& c, double X, double Y) {
    const double h = c.h;
    double fi = X / h - 0.5;
    double fj = Y / h;
    int i0 = static_cast<int>(std::floor(fi));
    int j0 = static_cast<int>(std::floor(fj));
    const double tx = fi - i0, ty = fj - j0;
    auto val = [&](int i, int j) -> double {
        if (j < 0 || j > c.ny) return 0.0;
        if (i < 0) return -c.vat(0, j);
        if (i > c.nx - 1) return -c.vat(c.nx - 1, j);
        return c.vat(i, j);
    };
    return (1 - tx) * (1 - ty) * val(i0, j0) + tx * (1 - ty) * val(i0 + 1, j0) +
           (1 - tx) * ty * val(i0, j0 + 1) + tx * ty * val(i0 + 1, j0 + 1);
}

double sample_p(const MacField& c, double X, double Y) {
    const double h = c.h;
    double fi = X / h - 0.5;
    double fj = Y / h - 0.5;
    int i0 = static_cast<int>(std::floor(fi));
    int j0 = static_cast<int>(std::floor(fj));
    const double tx = fi - i0, ty = fj - j0;
    auto val = [&](int i, int j) -> double {
        i = std::min(std::max(i, 0), c.nx - 1); // constant extrapolation
        j = std::min(std::max(j, 0), c.ny - 1);
        return c.pat(i, j);
    };
    return (1 - tx) * (1 - ty) * val(i0, j0) + tx * (1 - ty) * val(i0 + 1, j0) +
           (1 - tx) * ty * val(i0, j0 + 1) + tx * ty * val(i0 + 1, j0 + 1);
}

void prolong_add(const MacField& coarse, MacField& fine) {
    const double h = fine.h;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 1; i < fine.nx; ++i)
            fine.uat(i, j) += sample_u(coarse, i * h, (j + 0.5) * h);
#pragma omp parallel for schedule(static)
    for (int j = 1; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i)
            fine.vat(i, j) += sample_v(coarse, (i + 0.5) * h, j * h);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i)
            fine.pat(i, j) += sample_p(coarse, (i + 0.5) * h, (j + 0.5) * h);
}

void vcycle(MacField& x, const MacData& data, double c, const MacBC& bc, int level) {
    const int nx = x.nx, ny = x.ny;
    if (nx <= 4 || ny <= 4) {
        for (int s = 0; s < 50; ++s) dgs_sweep(x, data, c, bc);
        return;
    }
    for (int s = 0; s < 2; ++s) dgs_sweep(x, data, c, bc);
    MacData r = mac_residual(x, data, c, bc);
    const int nxc = nx / 2, nyc = ny / 2;
    MacData rc = MacData::zero(nxc, nyc);
    restrict_residual(r, nx, ny, rc, nxc, nyc);
    MacField ec(nxc, nyc, 2.0 * x.h);
    const MacBC bc0 = MacBC::zero(nxc, nyc);
    vcycle(ec, rc, c, bc0, level + 1);
    prolong_add(ec, x);
    for (int s = 0; s < 2; ++s) dgs_sweep(x, data, c, bc);
}

} // namespace

MacField vcycle_solve(int nx, int ny, double h, const MacData& data_in, double c,
                      const MacBC& bc, double tol, int max_cycles, MultigridStats* stats) {
    if ((nx & (nx - 1)) != 0 || (ny & (ny - 1)) != 0)
        throw std::invalid_argument("vcycle_solve: grid sizes must be powers of two");
    MacData data = data_in;

    // Divergence compatibility: total imposed divergence must equal the
    // boundary flux of the Dirichlet data.
    double flux = 0.0;
    for (int j = 0; j < ny; ++j) flux += (bc.u_right[j] - bc.u_left[j]) * h;
    for (int i = 0; i < nx; ++i) flux += (bc.v_top[i] - bc.v_bottom[i]) * h;
    double dsum = 0.0;
    for (double d : data.fdiv) dsum += d * h * h;
    const double shift = (dsum - flux) / (nx * (size_t)ny * h * h);
    for (double& d : data.fdiv) d -= shift;

    MacField x(nx, ny, h);
    for (int j = 0; j < ny; ++j) {
        x.uat(0, j) = bc.u_left[j];
        x.uat(nx, j) = bc.u_right[j];
    }
    for (int i = 0; i < nx; ++i) {
        x.vat(i, 0) = bc.v_bottom[i];
        x.vat(i, ny) = bc.v_top[i];
    }

    const double bnorm = std::sqrt(dot(data.fu) + dot(data.fv) + dot(data.fdiv));
    MacData r0 = mac_residual(x, data, c, bc);
    double res = std::sqrt(dot(r0.fu) + dot(r0.fv) + dot(r0.fdiv));
    const double ref = std::max({bnorm, res, 1e-300});
    double prev = res;
    double worst = 0.0;
    int cycle = 0;
    while (res / ref > tol) {
        if (cycle >= max_cycles)
            throw std::runtime_error("vcycle_solve: no convergence after max cycles");
        vcycle(x, data, c, bc, 0);
        double pm = 0.0;
        for (double pv : x.p) pm += pv;
        pm /= x.p.size();
        for (double& pv : x.p) pv -= pm;
        MacData r = mac_residual(x, data, c, bc);
        res = std::sqrt(dot(r.fu) + dot(r.fv) + dot(r.fdiv));
        if (prev > 0) worst = std::max(worst, res / prev);
        prev = res;
        ++cycle;
    }
    if (stats) {
        stats->cycles = cycle;
        stats->final_residual = res / ref;
        stats->worst_factor = worst;
    }
    return x;
}

Lattice mac_u_lattice(double x0, double y0, double h, int nx, int ny) {
    return {x0, y0 + 0.5 * h, h, nx + 1, ny};
}
Lattice mac_v_lattice(double x0, double y0, double h, int nx, int ny) {
    return {x0 + 0.5 * h, y0, h, nx, ny + 1};
}
Lattice mac_p_lattice(double x0, double y0, double h, int nx, int ny) {
    return {x0 + 0.5 * h, y0 + 0.5 * h, h, nx, ny};
}

void assemble_mac_corrections(const LatticeGeometry& gu, const LatticeGeometry& gv,
                              const LatticeGeometry& gp,
                              std::span<const StokesJumpSet> jumps_u,
                              std::span<const StokesJumpSet> jumps_v,
                              std::span<const StokesJumpSet> jumps_p, MacData& data) {
    const int nxu = gu.lat.nx, nyu = gu.lat.ny; // nx+1, ny
    const int nx = nxu - 1, ny = nyu;
    const double h = gu.lat.h;
    const double ih = 1.0 / h, ih2 = ih * ih;

    auto sgn = [](int8_t side) { return side > 0 ? -1.0 : 1.0; };

    // momentum-x: u-lattice arms
    for (size_t q = 0; q < gu.crossings.size(); ++q) {
        const Crossing& cr = gu.crossings[q];
        const StokesJumpSet& J = jumps_u[q];
        const double j0 = J.u;
        const double j1 = cr.axis == 0 ? J.ux : J.uy;
        const double j2 = cr.axis == 0 ? J.uxx : J.uyy;
        const double ca = cr.axis == 0 ? gu.lat.x(cr.i) : gu.lat.y(cr.j);
        const int ia = cr.i, ja = cr.j;
        const int ib = cr.axis == 0 ? cr.i + 1 : cr.i;
        const int jb = cr.axis == 0 ? cr.j : cr.j + 1;
        auto add = [&](int ui, int uj, double d) {
            if (ui < 1 || ui > nx - 1) return; // boundary u is fixed
            const double s = sgn(gu.side[gu.lat.idx(ui, uj)]);
            data.fu[ui + (nx + 1) * (size_t)uj] +=
                s * ih2 * (j0 + d * j1 + 0.5 * d * d * j2);
        };
        add(ia, ja, ca - cr.xi);
        add(ib, jb, ca + h - cr.xi);
    }

    // momentum-y: v-lattice arms
    for (size_t q = 0; q < gv.crossings.size(); ++q) {
        const Crossing& cr = gv.crossings[q];
        const StokesJumpSet& J = jumps_v[q];
        const double j0 = J.v;
        const double j1 = cr.axis == 0 ? J.vx : J.vy;
        const double j2 = cr.axis == 0 ? J.vxx : J.vyy;
        const double ca = cr.axis == 0 ? gv.lat.x(cr.i) : gv.lat.y(cr.j);
        const int ia = cr.i, ja = cr.j;
        const int ib = cr.axis == 0 ? cr.i + 1 : cr.i;
        const int jb = cr.axis == 0 ? cr.j : cr.j + 1;
        auto add = [&](int vi, int vj, double d) {
            if (vj < 1 || vj > ny - 1) return;
            const double s = sgn(gv.side[gv.lat.idx(vi, vj)]);
            data.fv[vi + nx * (size_t)vj] += s * ih2 * (j0 + d * j1 + 0.5 * d * d * j2);
        };
        add(ia, ja, ca - cr.xi);
        add(ib, jb, ca + h - cr.xi);
    }

    // pressure-gradient arms: p-lattice crossings flank one velocity node
    for (size_t q = 0; q < gp.crossings.size(); ++q) {
        const Crossing& cr = gp.crossings[q];
        const StokesJumpSet& J = jumps_p[q];
        if (cr.axis == 0) {
            // between p(i,j) and p(i+1,j); the u node between them is
            // u(i+1, j) and the x-momentum residual carries -(p_E - p_W)/h
            const int ui = cr.i + 1, uj = cr.j;
            if (ui < 1 || ui > nx - 1) continue;
            const int8_t us = gu.side[gu.lat.idx(ui, uj)];
            const double s = sgn(us);
            if (gp.side[gp.lat.idx(cr.i + 1, cr.j)] != us) {
                const double d = gp.lat.x(cr.i + 1) - cr.xi; // east p across
                data.fu[ui + (nx + 1) * (size_t)uj] += (-ih) * s * (J.p + d * J.px);
            } else {
                const double d = gp.lat.x(cr.i) - cr.xi; // west p across
                data.fu[ui + (nx + 1) * (size_t)uj] += (+ih) * s * (J.p + d * J.px);
            }
        } else {
            const int vi = cr.i, vj = cr.j + 1;
            if (vj < 1 || vj > ny - 1) continue;
            const int8_t vs = gv.side[gv.lat.idx(vi, vj)];
            const double s = sgn(vs);
            if (gp.side[gp.lat.idx(cr.i, cr.j + 1)] != vs) {
                const double d = gp.lat.y(cr.j + 1) - cr.xi;
                data.fv[vi + nx * (size_t)vj] += (-ih) * s * (J.p + d * J.py);
            } else {
                const double d = gp.lat.y(cr.j) - cr.xi;
                data.fv[vi + nx * (size_t)vj] += (+ih) * s * (J.p + d * J.py);
            }
        }
    }

    // divergence corrections: velocity faces straddle the cell center
    for (size_t q = 0; q < gu.crossings.size(); ++q) {
        const Crossing& cr = gu.crossings[q];
        if (cr.axis != 0) continue;
        // u(i,j) -> u(i+1,j) brackets cell (i, j)
        const int ci = cr.i, cj = cr.j;
        const StokesJumpSet& J = jumps_u[q];
        const int8_t cs = gp.side[gp.lat.idx(ci, cj)];
        const double s = sgn(cs);
        if (gu.side[gu.lat.idx(cr.i + 1, cr.j)] != cs) {
            const double d = gu.lat.x(cr.i + 1) - cr.xi; // east face across
            data.fdiv[ci + nx * (size_t)cj] += (+ih) * s * (J.u + d * J.ux);
        } else {
            const double d = gu.lat.x(cr.i) - cr.xi; // west face across
            data.fdiv[ci + nx * (size_t)cj] += (-ih) * s * (J.u + d * J.ux);
        }
    }
    for (size_t q = 0; q < gv.crossings.size(); ++q) {
        const Crossing& cr = gv.crossings[q];
        if (cr.axis != 1) continue;
        const int ci = cr.i, cj = cr.j;
        const StokesJumpSet& J = jumps_v[q];
        const int8_t cs = gp.side[gp.lat.idx(ci, cj)];
        const double s = sgn(cs);
        if (gv.side[gv.lat.idx(cr.i, cr.j + 1)] != cs) {
            const double d = gv.lat.y(cr.j + 1) - cr.xi; // north face across
            data.fdiv[ci + nx * (size_t)cj] += (+ih) * s * (J.v + d * J.vy);
        } else {
            const double d = gv.lat.y(cr.j) - cr.xi; // south face across
            data.fdiv[ci + nx * (size_t)cj] += (-ih) * s * (J.v + d * J.vy);
        }
    }
}

} // namespace kfbi

#include "kfbi/helmholtz_fd.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "kfbi/linalg.hpp"

namespace kfbi {

namespace {
std::mutex g_fftw_mutex; // FFTW planner is not thread-safe
}

struct HelmholtzBoxSolver::Impl {
    int m = 0; // transform size per dimension
    double* buf = nullptr;
    fftw_plan fwd{}, bwd{};
    std::vector<double> lam;  // 1-D operator eigenvalues
    double norm = 1.0;

    Impl(int n, BoxBC bc, double h) {
        m = bc == BoxBC::Dirichlet ? n - 1 : n + 1;
        buf = fftw_alloc_real((size_t)m * m);
        {
            std::lock_guard<std::mutex> lock(g_fftw_mutex);
            const auto kind = bc == BoxBC::Dirichlet ? FFTW_RODFT00 : FFTW_REDFT00;
            fwd = fftw_plan_r2r_2d(m, m, buf, buf, kind, kind, FFTW_ESTIMATE);
            bwd = fwd; // DST-I / DCT-I are self-inverse up to scaling
        }
        lam.resize(m);
        if (bc == BoxBC::Dirichlet) {
            // eigenvalues of the 1-D Dirichlet second-difference matrix
            for (int k = 0; k < m; ++k)
                lam[k] = (2.0 * std::cos(M_PI * (k + 1) / n) - 2.0) / (h * h);
            norm = 1.0 / (2.0 * n) / (2.0 * n);
        } else {
            // ghost-reflected Neumann operator, diagonal in the DCT-I basis
            for (int k = 0; k < m; ++k)
                lam[k] = (2.0 * std::cos(M_PI * k / n) - 2.0) / (h * h);
            norm = 1.0 / (2.0 * n) / (2.0 * n);
        }
    }
    ~Impl() {
        fftw_destroy_plan(fwd);
        fftw_free(buf);
    }
};

HelmholtzBoxSolver::HelmholtzBoxSolver(const CartesianGrid& grid, BoxBC bc)
    : grid_(grid), bc_(bc), impl_(std::make_unique<Impl>(grid.n, bc, grid.h)) {}

HelmholtzBoxSolver::~HelmholtzBoxSolver() = default;

GridFunction HelmholtzBoxSolver::solve(const GridFunction& rhs,
                                       const CorrectionField& corrections, double c,
                                       const BoundaryData* data) const {
    const int n = grid_.n;
    if (rhs.n != n) throw std::invalid_argument("solve: rhs grid mismatch");
    const double h = grid_.h;
    const double h2 = h * h;
    const int m = impl_->m;
    double* buf = impl_->buf;

    GridFunction out(n);
    GridFunction work = rhs;
    for (const auto& [idx, val] : corrections) work.v[idx] += val;

    if (bc_ == BoxBC::Dirichlet) {
        // boundary values move to the right-hand side of interior rows
        if (data) {
            for (int j = 1; j < n; ++j) {
                work.at(1, j) -= data->left[j] / h2;
                work.at(n - 1, j) -= data->right[j] / h2;
            }
            for (int i = 1; i < n; ++i) {
                work.at(i, 1) -= data->bottom[i] / h2;
                work.at(i, n - 1) -= data->top[i] / h2;
            }
        }
#pragma omp parallel for schedule(static)
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) buf[(i - 1) + (size_t)m * (j - 1)] = work.at(i, j);
        fftw_execute(impl_->fwd);
        const double c2 = c * c;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                buf[i + (size_t)m * j] *= impl_->norm / (impl_->lam[i] + impl_->lam[j] - c2);
        fftw_execute(impl_->fwd);
#pragma omp parallel for schedule(static)
        for (int j = 1; j < n; ++j)
            for (int i = 1; i < n; ++i) out.at(i, j) = buf[(i - 1) + (size_t)m * (j - 1)];
        if (data) {
            for (int j = 0; j <= n; ++j) {
                out.at(0, j) = data->left[j];
                out.at(n, j) = data->right[j];
            }
            for (int i = 0; i <= n; ++i) {
                out.at(i, 0) = data->bottom[i];
                out.at(i, n) = data->top[i];
            }
        }
    } else {
        // inhomogeneous Neumann data folds into edge rows via the ghosts
        if (data) {
            for (int j = 0; j <= n; ++j) {
                work.at(0, j) -= 2.0 * data->left[j] / h;
                work.at(n, j) -= 2.0 * data->right[j] / h;
            }
            for (int i = 0; i <= n; ++i) {
                work.at(i, 0) -= 2.0 * data->bottom[i] / h;
                work.at(i, n) -= 2.0 * data->top[i] / h;
            }
        }
#pragma omp parallel for schedule(static)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) buf[i + (size_t)m * j] = work.at(i, j);
        fftw_execute(impl_->fwd);
        const double c2 = c * c;
        const bool pin = (c == 0.0);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                if (pin && i == 0 && j == 0) {
                    buf[0] = 0.0;
                    continue;
                }
                buf[i + (size_t)m * j] *= impl_->norm / (impl_->lam[i] + impl_->lam[j] - c2);
            }
        fftw_execute(impl_->fwd);
#pragma omp parallel for schedule(static)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) out.at(i, j) = buf[i + (size_t)m * j];
    }
    return out;
}

GridFunction solve_box(const CartesianGrid& grid, const GridFunction& rhs,
                       const CorrectionField& corrections, double c, BoxBC bc,
                       const BoundaryData* data) {
    HelmholtzBoxSolver solver(grid, bc);
    return solver.solve(rhs, corrections, c, data);
}

CorrectionField assemble_corrections(const LatticeGeometry& geom,
                                     std::span<const HelmholtzJumpSet> jumps,
                                     double h) {
    if (jumps.size() != geom.crossings.size())
        throw std::invalid_argument("assemble_corrections: jump data does not match crossings");
    const double ih2 = 1.0 / (h * h);
    std::vector<double> acc; // dense scratch keyed by node, gathered sparsely
    acc.assign(geom.lat.nx * (size_t)geom.lat.ny, 0.0);
    std::vector<int32_t> touched;
    for (size_t q = 0; q < geom.crossings.size(); ++q) {
        const Crossing& cr = geom.crossings[q];
        const HelmholtzJumpSet& J = jumps[q];
        const auto& lat = geom.lat;
        const int a = lat.idx(cr.i, cr.j);
        const int b = cr.axis == 0 ? lat.idx(cr.i + 1, cr.j) : lat.idx(cr.i, cr.j + 1);
        const double ca = cr.axis == 0 ? lat.x(cr.i) : lat.y(cr.j);
        const double cb = ca + lat.h;
        const double j1 = cr.axis == 0 ? J.ux : J.uy;
        const double j2 = cr.axis == 0 ? J.uxx : J.uyy;
        auto arm = [&](int node, int other, double d) {
            const double expand = J.u + d * j1 + 0.5 * d * d * j2;
            const double s = geom.side[node] > 0 ? -1.0 : 1.0;
            if (acc[node] == 0.0) touched.push_back(node);
            acc[node] += s * ih2 * expand;
            (void)other;
        };
        arm(a, b, cb - cr.xi); // neighbor of a across the crossing is b
        arm(b, a, ca - cr.xi);
    }
    CorrectionField out;
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    out.reserve(touched.size());
    for (int32_t node : touched)
        if (acc[node] != 0.0) out.emplace_back(node, acc[node]);
    return out;
}

Extraction extract_boundary(std::span<const double> values, const LatticeGeometry& geom,
                            const HelmholtzJumpSet& J, Vec2 p, int side) {
    const Lattice& lat = geom.lat;
    const double h = lat.h;
    int i0 = static_cast<int>(std::lround((p.x - lat.x0) / h));
    int j0 = static_cast<int>(std::lround((p.y - lat.y0) / h));
    if (i0 < 2 || j0 < 2 || i0 > lat.nx - 3 || j0 > lat.ny - 3)
        throw std::runtime_error("extract_boundary: stencil too close to the box boundary");
    const int d1 = p.x > lat.x(i0) ? 1 : -1;
    const int d2 = p.y > lat.y(j0) ? 1 : -1;
    const std::array<std::array<int, 2>, 6> offs = {
        {{0, 0}, {1, 0}, {0, 1}, {0, -1}, {-1, 0}, {d1, d2}}};

    // Taylor system scaled by h so unknowns are (v, h vx, h vy, h^2 vxx,
    // h^2 vxy, h^2 vyy); keeps the 6x6 well conditioned.
    std::array<double, 36> A{};
    std::array<double, 6> b{};
    for (int r = 0; r < 6; ++r) {
        const int qi = i0 + offs[r][0], qj = j0 + offs[r][1];
        const double dx = (lat.x(qi) - p.x) / h;
        const double dy = (lat.y(qj) - p.y) / h;
        A[r * 6 + 0] = 1.0;
        A[r * 6 + 1] = dx;
        A[r * 6 + 2] = dy;
        A[r * 6 + 3] = 0.5 * dx * dx;
        A[r * 6 + 4] = dx * dy;
        A[r * 6 + 5] = 0.5 * dy * dy;
        double rhs = values[lat.idx(qi, qj)];
        if (geom.side[lat.idx(qi, qj)] != side) {
            // fold the sample onto the requested side using the jumps
            const double DX = lat.x(qi) - p.x, DY = lat.y(qj) - p.y;
            const double C = J.u + DX * J.ux + DY * J.uy +
                             0.5 * (DX * DX * J.uxx + DY * DY * J.uyy) + DX * DY * J.uxy;
            rhs += side > 0 ? C : -C;
        }
        b[r] = rhs;
    }
    Extraction e;
    e.cond = linalg::cond_estimate<6>(A);
    linalg::lu_solve<6>(A, b);
    e.value = b[0];
    e.grad = Vec2{b[1] / h, b[2] / h};
    e.hess = {b[3] / (h * h), b[4] / (h * h), b[5] / (h * h)};
    return e;
}

} // namespace kfbi

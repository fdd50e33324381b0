#ifndef KFBI_STOKES_FD_HPP
#define KFBI_STOKES_FD_HPP

#include <span>
#include <vector>

#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

/// Staggered velocity-pressure field on an nx x ny cell grid:
/// u(i,j) at (x0 + i h, y0 + (j+1/2) h),   i = 0..nx, j = 0..ny-1
/// v(i,j) at (x0 + (i+1/2) h, y0 + j h),   i = 0..nx-1, j = 0..ny
/// p(i,j) at cell centers,                 i = 0..nx-1, j = 0..ny-1
struct MacField {
    int nx = 0, ny = 0;
    double h = 0;
    std::vector<double> u, v, p;

    MacField() = default;
    MacField(int nx_, int ny_, double h_)
        : nx(nx_), ny(ny_), h(h_),
          u((nx_ + 1) * (size_t)ny_, 0.0),
          v(nx_ * (size_t)(ny_ + 1), 0.0),
          p(nx_ * (size_t)ny_, 0.0) {}

    double& uat(int i, int j) { return u[i + (nx + 1) * (size_t)j]; }
    double uat(int i, int j) const { return u[i + (nx + 1) * (size_t)j]; }
    double& vat(int i, int j) { return v[i + nx * (size_t)j]; }
    double vat(int i, int j) const { return v[i + nx * (size_t)j]; }
    double& pat(int i, int j) { return p[i + nx * (size_t)j]; }
    double pat(int i, int j) const { return p[i + nx * (size_t)j]; }
};

/// Dirichlet velocity data. Normal components sit on the boundary
/// (u at i = 0, nx; v at j = 0, ny); tangential components enter through
/// the symmetric ghost convention ghost = 2 g - interior.
struct MacBC {
    std::vector<double> u_left, u_right;   // ny values
    std::vector<double> u_bottom, u_top;   // nx+1 values
    std::vector<double> v_left, v_right;   // ny+1 values
    std::vector<double> v_bottom, v_top;   // nx values

    static MacBC zero(int nx, int ny) {
        MacBC b;
        b.u_left.assign(ny, 0.0);
        b.u_right.assign(ny, 0.0);
        b.u_bottom.assign(nx + 1, 0.0);
        b.u_top.assign(nx + 1, 0.0);
        b.v_left.assign(ny + 1, 0.0);
        b.v_right.assign(ny + 1, 0.0);
        b.v_bottom.assign(nx, 0.0);
        b.v_top.assign(nx, 0.0);
        return b;
    }
};

/// Right-hand sides: momentum at u/v points, divergence at cells.
struct MacData {
    std::vector<double> fu, fv, fdiv;

    static MacData zero(int nx, int ny) {
        MacData d;
        d.fu.assign((nx + 1) * (size_t)ny, 0.0);
        d.fv.assign(nx * (size_t)(ny + 1), 0.0);
        d.fdiv.assign(nx * (size_t)ny, 0.0);
        return d;
    }
};

/// Residuals of (Delta_h - c^2) u - grad_h p = f_m and div_h u = f_d with
/// the Dirichlet ghosts substituted. Residuals at fixed boundary unknowns
/// are zero.
MacData mac_residual(const MacField& x, const MacData& data, double c, const MacBC& bc);

/// One distributive Gauss-Seidel sweep (red-black): momentum-x, momentum-y,
/// then the cell-by-cell divergence projection with pressure distribution.
void dgs_sweep(MacField& x, const MacData& data, double c, const MacBC& bc);

struct MultigridStats {
    int cycles = 0;
    double final_residual = 0;
    double worst_factor = 0;
};

/// V(2,2) geometric multigrid with the DGS smoother; grids must be powers
/// of two down to the 4x4 coarsest level (50 sweeps there). Corrections
/// (already folded into `data` by the caller) live on the finest level
/// only. The pressure mean is pinned to zero. Throws after max_cycles
/// without reaching tol.
MacField vcycle_solve(int nx, int ny, double h, const MacData& data, double c,
                      const MacBC& bc, double tol = 1e-9, int max_cycles = 100,
                      MultigridStats* stats = nullptr);

/// Lattices of the three staggered sub-grids relative to box corner
/// (x0, y0).
Lattice mac_u_lattice(double x0, double y0, double h, int nx, int ny);
Lattice mac_v_lattice(double x0, double y0, double h, int nx, int ny);
Lattice mac_p_lattice(double x0, double y0, double h, int nx, int ny);

/// Taylor-arm corrections for the corrected MAC scheme, accumulated into
/// data. jumps arrays are indexed like the crossings of the corresponding
/// lattice geometry. Momentum corrections use jumps through second order;
/// the divergence correction uses zeroth and first order velocity jumps.
void assemble_mac_corrections(const LatticeGeometry& gu, const LatticeGeometry& gv,
                              const LatticeGeometry& gp,
                              std::span<const StokesJumpSet> jumps_u,
                              std::span<const StokesJumpSet> jumps_v,
                              std::span<const StokesJumpSet> jumps_p, MacData& data);

} // namespace kfbi

#endif

#ifndef KFBI_REFERENCE_HPP
#define KFBI_REFERENCE_HPP

#include "kfbi/helmholtz_fd.hpp"
#include "kfbi/stokes_fd.hpp"

namespace kfbi::ref {

/// Plain serial twins of the OpenMP kernels, written as straightforward
/// loops. Tests compare them bit-for-bit against the parallel versions;
/// the benchmark tool compares their timing.

/// (Delta_h - c^2) u at interior nodes, zero on the boundary rows.
void five_point_residual(const GridFunction& u, const GridFunction& rhs, double c, double h,
                         GridFunction& out);

MacData mac_residual(const MacField& x, const MacData& data, double c, const MacBC& bc);

void dgs_sweep(MacField& x, const MacData& data, double c, const MacBC& bc);

/// Clamped 4x4 cubic Lagrange interpolation of a lattice field at a batch
/// of points.
std::vector<double> cubic_interp_batch(const std::vector<double>& vals, int nx, int ny,
                                       double x0, double y0, double h,
                                       const std::vector<Vec2>& pts);

} // namespace kfbi::ref

namespace kfbi {

/// OpenMP versions of the kernels that have serial twins above.
void five_point_residual(const GridFunction& u, const GridFunction& rhs, double c, double h,
                         GridFunction& out);
std::vector<double> cubic_interp_batch(const std::vector<double>& vals, int nx, int ny,
                                       double x0, double y0, double h,
                                       const std::vector<Vec2>& pts);

} // namespace kfbi

#endif

#ifndef KFBI_GRID_HPP
#define KFBI_GRID_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kfbi/curve.hpp"

namespace kfbi {

/// Square-cell Cartesian box, n cells per direction, nodes at
/// (xlo + i h, ylo + j h), i,j = 0..n.
struct CartesianGrid {
    double xlo = 0, ylo = 0, xhi = 0, yhi = 0;
    int n = 0;
    double h = 0;

    CartesianGrid() = default;
    CartesianGrid(double xlo_, double ylo_, double xhi_, double yhi_, int n_)
        : xlo(xlo_), ylo(ylo_), xhi(xhi_), yhi(yhi_), n(n_) {
        if (n < 16) throw std::invalid_argument("CartesianGrid: n must be >= 16");
        h = (xhi - xlo) / n;
        const double hy = (yhi - ylo) / n;
        if (std::fabs(h - hy) > 1e-12 * h)
            throw std::invalid_argument("CartesianGrid: cells must be square");
    }
    int nodes() const { return (n + 1) * (n + 1); }
    double x(int i) const { return xlo + i * h; }
    double y(int j) const { return ylo + j * h; }
};

/// Uniform lattice of nodes with arbitrary origin; used for the scalar node
/// grid and for each staggered MAC sub-grid.
struct Lattice {
    double x0 = 0, y0 = 0, h = 0;
    int nx = 0, ny = 0; // node counts
    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    int idx(int i, int j) const { return i + nx * j; }
};

/// A curve/grid-line intersection on the segment between two adjacent
/// lattice nodes. axis 0: horizontal segment (i,j)-(i+1,j), the curve
/// crosses the line y = y_j at x = xi. axis 1: vertical segment
/// (i,j)-(i,j+1), crossing of x = x_i at y = xi.
struct Crossing {
    int axis = 0;
    int i = 0, j = 0;
    double xi = 0;
    double alpha = 0;
    CurvePointGeometry geom;
};

struct GridGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Node classification and intersections for one lattice. side is +1 in
/// Omega+ (inside the curve) and -1 in Omega-. hseg/vseg map a segment to
/// its crossing index in `crossings` (-1 when the segment is not cut).
struct LatticeGeometry {
    Lattice lat;
    std::vector<int8_t> side;
    std::vector<Crossing> crossings;
    std::vector<int32_t> hseg; // (nx-1) * ny
    std::vector<int32_t> vseg; // nx * (ny-1)
    std::vector<int32_t> irregular; // node indices with a cut stencil arm

    int32_t hcross(int i, int j) const { return hseg[i + (lat.nx - 1) * j]; }
    int32_t vcross(int i, int j) const { return vseg[i + lat.nx * j]; }
};

/// Classify every lattice node and locate all grid-line intersections by
/// scanline parity against the reconstructed curve, with crossings polished
/// on the trigonometric interpolant. Throws GridGeometryError when a
/// segment is cut more than once (grid too coarse for the curvature) or
/// when sides and crossings are inconsistent.
LatticeGeometry build_lattice_geometry(const CurveSampler& sampler, const Lattice& lat);

/// Node-lattice helpers matching the scalar solver layout.
inline Lattice node_lattice(const CartesianGrid& g) {
    return {g.xlo, g.ylo, g.h, g.n + 1, g.n + 1};
}

/// Convenience wrappers over build_lattice_geometry for the scalar grid.
std::vector<int8_t> classify_nodes(const CurveSampler& sampler, const CartesianGrid& g);
LatticeGeometry find_intersections(const CurveSampler& sampler, const CartesianGrid& g);

/// Shortest distance from p to the marker polygon (diagnostics, clearance
/// checks, mollified initialization).
double distance_to_curve(const std::vector<Vec2>& markers, Vec2 p);

} // namespace kfbi

#endif

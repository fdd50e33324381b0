#ifndef KFBI_HELMHOLTZ_FD_HPP
#define KFBI_HELMHOLTZ_FD_HPP

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "kfbi/grid.hpp"
#include "kfbi/jumps.hpp"

namespace kfbi {

/// Scalar field on the (n+1)^2 node grid, idx = i + (n+1) j.
struct GridFunction {
    int n = 0;
    std::vector<double> v;

    GridFunction() = default;
    explicit GridFunction(int n_) : n(n_), v((n_ + 1) * (size_t)(n_ + 1), 0.0) {}
    double& at(int i, int j) { return v[i + (n + 1) * (size_t)j]; }
    double at(int i, int j) const { return v[i + (n + 1) * (size_t)j]; }
};

/// Sparse right-hand-side corrections at irregular nodes.
using CorrectionField = std::vector<std::pair<int32_t, double>>;

enum class BoxBC { Dirichlet, Neumann };

/// Boundary data on the four box sides, each n+1 values indexed along the
/// edge. Dirichlet values or outward normal derivatives.
struct BoundaryData {
    std::vector<double> left, right, bottom, top;
};

/// Correction terms for the five-point scheme: for every cut stencil arm of
/// an irregular node, -(1/h^2)([u] + d [u_dir] + d^2/2 [u_dirdir]) with d
/// the signed displacement from the crossing to the across-side neighbor,
/// jump brackets negated when the node lies in Omega-.
CorrectionField assemble_corrections(const LatticeGeometry& geom,
                                     std::span<const HelmholtzJumpSet> jumps_at_crossings,
                                     double h);

/// Fast-transform solver for (Delta_h - c^2) u = rhs + corrections on the
/// box: DST-I for Dirichlet, DCT-I with reflected ghosts for Neumann.
/// For c = 0 with pure Neumann the compatible mode is projected out and the
/// zero mode pinned.
class HelmholtzBoxSolver {
public:
    HelmholtzBoxSolver(const CartesianGrid& grid, BoxBC bc);
    ~HelmholtzBoxSolver();
    HelmholtzBoxSolver(const HelmholtzBoxSolver&) = delete;
    HelmholtzBoxSolver& operator=(const HelmholtzBoxSolver&) = delete;

    const CartesianGrid& grid() const { return grid_; }
    BoxBC bc() const { return bc_; }

    GridFunction solve(const GridFunction& rhs, const CorrectionField& corrections,
                       double c, const BoundaryData* data = nullptr) const;

private:
    CartesianGrid grid_;
    BoxBC bc_;
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper.
GridFunction solve_box(const CartesianGrid& grid, const GridFunction& rhs,
                       const CorrectionField& corrections, double c, BoxBC bc,
                       const BoundaryData* data = nullptr);

/// One-sided boundary value, gradient and Hessian extracted from grid data
/// by the corrected 6-point interpolation. cond carries the scaled
/// interpolation-matrix condition estimate for diagnostics.
struct Extraction {
    double value = 0;
    Vec2 grad{};
    std::array<double, 3> hess{}; // xx, xy, yy
    double cond = 0;
};

/// side: +1 for the Omega+ limit, -1 for Omega-. The stencil is built on
/// the lattice of `geom`; p needs >= 2h clearance from the box boundary.
Extraction extract_boundary(std::span<const double> values, const LatticeGeometry& geom,
                            const HelmholtzJumpSet& jumps_at_p, Vec2 p, int side);

inline double average_trace(double up, double um) { return 0.5 * (up + um); }
inline double average_normal_derivative(Vec2 gp, Vec2 gm, Vec2 n) {
    return 0.5 * (gp + gm).dot(n);
}

} // namespace kfbi

#endif

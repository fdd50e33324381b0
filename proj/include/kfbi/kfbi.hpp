#ifndef KFBI_KFBI_HPP
#define KFBI_KFBI_HPP

#include <functional>
#include <optional>
#include <vector>

#include "kfbi/curve.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/helmholtz_fd.hpp"
#include "kfbi/stokes_fd.hpp"

namespace kfbi {

/// Geometry shared by every matrix-vector product while the curve is
/// frozen: node classification, crossings, per-crossing interpolation
/// tables, and (for the Hele-Shaw mode) the boundary quadrature kernel.
struct ScalarWorkspace {
    CartesianGrid grid;
    CurveSampler sampler;
    LatticeGeometry geom;
    std::vector<Vec2> markers, normals, tangents;
    std::vector<spectral::EvalTable> tables;      // one per crossing
    std::vector<double> hs_kernel;                // (4n) x M, row-major
    std::vector<Vec2> boundary_nodes;

    ScalarWorkspace(const CartesianGrid& g, const ThetaLCurve& curve, bool hs_boundary);
};

struct ScalarLayerResult {
    GridFunction field;
    spectral::Samples trace;
    spectral::Samples normal_derivative;
    double max_extraction_cond = 0;
};

enum class ScalarBCMode { HsArtificial, HomogeneousNeumann };

/// Double layer of density phi: (Delta - c^2) w = 0 off the curve with
/// [w] = phi, [dw/dn] = 0, solved by the corrected scheme. HsArtificial
/// supplies Dirichlet data on the box by trapezoid quadrature of
/// phi dG0/dn against the markers (c must be 0); HomogeneousNeumann
/// imposes dw/dn = 0.
ScalarLayerResult eval_double_layer_scalar(const ScalarWorkspace& ws,
                                           const HelmholtzBoxSolver& solver,
                                           const spectral::Samples& phi, double c,
                                           ScalarBCMode mode);

/// Single layer via the equivalent interface problem [w] = 0,
/// [dw/dn] = psi (so the solved field equals -S psi), homogeneous Neumann
/// box conditions.
ScalarLayerResult eval_single_layer_scalar(const ScalarWorkspace& ws,
                                           const HelmholtzBoxSolver& solver,
                                           const spectral::Samples& psi, double c);

/// Hele-Shaw operator -phi/2 + K phi + oint phi ds.
spectral::Samples hs_operator(const ScalarWorkspace& ws, const HelmholtzBoxSolver& solver,
                              const spectral::Samples& phi);

/// Stefan operator eps_V(n) psi - (S_c psi)|_Gamma, with eps_V evaluated at
/// the marker normal angles.
spectral::Samples stefan_operator(const ScalarWorkspace& ws, const HelmholtzBoxSolver& solver,
                                  const spectral::Samples& psi,
                                  const std::vector<double>& eps_v_at_markers, double c);

/// Staggered-grid geometry for the vector (Stokes) operators.
struct StokesWorkspace {
    CartesianGrid grid;
    CurveSampler sampler;
    LatticeGeometry geom_u, geom_v, geom_p;
    std::vector<spectral::EvalTable> tables_u, tables_v, tables_p;
    std::vector<Vec2> markers, normals;

    StokesWorkspace(const CartesianGrid& g, const ThetaLCurve& curve);
};

struct StokesLayerResult {
    MacField field;
    spectral::Samples trace_u, trace_v;
    int mg_cycles = 0;
};

/// Stokes double layer: modified Stokes interface problem with [u] = phi,
/// [T(u,p)] = 0 and u = 0 on the box boundary.
StokesLayerResult eval_double_layer_stokes(const StokesWorkspace& ws,
                                           const spectral::Samples& phi_x,
                                           const spectral::Samples& phi_y, double c,
                                           double mg_tol = 1e-9);

/// -phi/2 + K_stokes phi, acting on the concatenated density (phi_x, phi_y).
std::vector<double> stokes_operator(const StokesWorkspace& ws, const std::vector<double>& phi,
                                    double c, double mg_tol = 1e-9);

struct GmresResult {
    std::vector<double> x;
    int iterations = 0;
    std::vector<double> residuals;
    bool converged = false;
};

/// Restarted GMRES with modified Gram-Schmidt on plain vectors. Throws on
/// stagnation (less than 1e-3 residual reduction over a full restart
/// cycle).
GmresResult gmres(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                  const std::vector<double>& rhs, double tol = 1e-10, int restart = 50,
                  int max_iter = 500);

} // namespace kfbi

#endif

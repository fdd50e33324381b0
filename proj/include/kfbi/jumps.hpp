#ifndef KFBI_JUMPS_HPP
#define KFBI_JUMPS_HPP

#include <array>

#include "kfbi/curve.hpp"

namespace kfbi {

/// Cartesian derivative jumps [.] = (.)^+ - (.)^- of a scalar field at one
/// interface point. Satisfies [u_xx] + [u_yy] - c^2 [u] - [f] = 0.
struct HelmholtzJumpSet {
    double u = 0;
    double ux = 0, uy = 0;
    double uxx = 0, uxy = 0, uyy = 0;
};

/// Interface data for the scalar jump systems: Phi = [u], Psi = [du/dn]
/// and their tangential (alpha) derivatives along the curve.
struct HelmholtzJumpInput {
    double Phi = 0, Phi_a = 0, Phi_aa = 0;
    double Psi = 0, Psi_a = 0;
};

HelmholtzJumpSet helmholtz_jumps(const HelmholtzJumpInput& in, const CurvePointGeometry& g,
                                 double c, double f_jump = 0.0);

/// Jumps of (u, v, p) for the modified Stokes operator. Divergence-free on
/// both sides: [u_x]+[v_y] = 0, [u_xx]+[v_xy] = 0, [u_xy]+[v_yy] = 0.
struct StokesJumpSet {
    double u = 0, v = 0;
    double ux = 0, uy = 0, vx = 0, vy = 0, p = 0;
    double uxx = 0, uyy = 0, uxy = 0;
    double vxx = 0, vyy = 0, vxy = 0;
    double px = 0, py = 0;
};

/// Phi = [u] (velocity jump), Psi = [T(u,p)] (traction jump) componentwise
/// with alpha derivatives.
struct StokesJumpInput {
    std::array<double, 2> Phi{}, Phi_a{}, Phi_aa{};
    std::array<double, 2> Psi{}, Psi_a{};
};

StokesJumpSet stokes_jumps(const StokesJumpInput& in, const CurvePointGeometry& g, double c,
                           std::array<double, 2> f_jump = {0.0, 0.0});

} // namespace kfbi

#endif

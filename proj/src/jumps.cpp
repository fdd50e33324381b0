#include "kfbi/jumps.hpp"

#include <stdexcept>

#include "kfbi/linalg.hpp"

namespace kfbi {

HelmholtzJumpSet helmholtz_jumps(const HelmholtzJumpInput& in, const CurvePointGeometry& g,
                                 double c, double f_jump) {
    if (g.s_a <= 0.0) throw std::invalid_argument("helmholtz_jumps: s_alpha must be positive");
    HelmholtzJumpSet J;
    J.u = in.Phi;

    // x_a [ux] + y_a [uy] = Phi_a ; y_a [ux] - x_a [uy] = s_a Psi
    const double det = -(g.x_a * g.x_a + g.y_a * g.y_a);
    J.ux = (-g.x_a * in.Phi_a - g.y_a * g.s_a * in.Psi) / det;
    J.uy = (-g.y_a * in.Phi_a + g.x_a * g.s_a * in.Psi) / det;

    // unknowns ([uxx], [uyy], [uxy])
    std::array<double, 9> A = {
        g.x_a * g.x_a, g.y_a * g.y_a, 2.0 * g.x_a * g.y_a,
        g.x_a * g.y_a, -g.x_a * g.y_a, g.y_a * g.y_a - g.x_a * g.x_a,
        1.0, 1.0, 0.0,
    };
    std::array<double, 3> b = {
        in.Phi_aa - g.x_aa * J.ux - g.y_aa * J.uy,
        g.s_aa * in.Psi + g.s_a * in.Psi_a - g.y_aa * J.ux + g.x_aa * J.uy,
        c * c * in.Phi + f_jump,
    };
    linalg::lu_solve<3>(A, b);
    J.uxx = b[0];
    J.uyy = b[1];
    J.uxy = b[2];
    return J;
}

StokesJumpSet stokes_jumps(const StokesJumpInput& in, const CurvePointGeometry& g, double c,
                           std::array<double, 2> f_jump) {
    if (g.s_a <= 0.0) throw std::invalid_argument("stokes_jumps: s_alpha must be positive");
    const double xa = g.x_a, ya = g.y_a, xaa = g.x_aa, yaa = g.y_aa;
    const double sa = g.s_a, saa = g.s_aa;

    StokesJumpSet J;
    J.u = in.Phi[0];
    J.v = in.Phi[1];

    // unknowns ([ux], [uy], [vx], [vy], [p])
    std::array<double, 25> A1 = {
        xa, ya, 0,  0,   0,
        0,  0,  xa, ya,  0,
        2 * ya, -xa, -xa, 0, -ya,
        0,  ya, ya, -2 * xa, xa,
        1,  0,  0,  1,   0,
    };
    std::array<double, 5> b1 = {
        in.Phi_a[0],
        in.Phi_a[1],
        sa * in.Psi[0],
        sa * in.Psi[1],
        0.0,
    };
    linalg::lu_solve<5>(A1, b1);
    J.ux = b1[0];
    J.uy = b1[1];
    J.vx = b1[2];
    J.vy = b1[3];
    J.p = b1[4];

    // unknowns ([uxx],[uyy],[uxy],[vxx],[vyy],[vxy],[px],[py])
    std::array<double, 64> A2{};
    auto set = [&](int r, int col, double v) { A2[r * 8 + col] = v; };
    // row 0: xa^2 uxx + ya^2 uyy + 2 xa ya uxy = r1
    set(0, 0, xa * xa); set(0, 1, ya * ya); set(0, 2, 2 * xa * ya);
    // row 1: xa^2 vxx + ya^2 vyy + 2 xa ya vxy = r2
    set(1, 3, xa * xa); set(1, 4, ya * ya); set(1, 5, 2 * xa * ya);
    // row 2: 2 xa ya uxx - xa ya uyy + (2 ya^2 - xa^2) uxy
    //        - xa^2 vxx - xa ya vxy - xa ya px - ya^2 py = r3
    set(2, 0, 2 * xa * ya); set(2, 1, -xa * ya); set(2, 2, 2 * ya * ya - xa * xa);
    set(2, 3, -xa * xa); set(2, 5, -xa * ya); set(2, 6, -xa * ya); set(2, 7, -ya * ya);
    // row 3: ya^2 uyy + xa ya uxy + xa ya vxx - 2 xa ya vyy
    //        + (ya^2 - 2 xa^2) vxy + xa^2 px + xa ya py = r4
    set(3, 1, ya * ya); set(3, 2, xa * ya); set(3, 3, xa * ya); set(3, 4, -2 * xa * ya);
    set(3, 5, ya * ya - 2 * xa * xa); set(3, 6, xa * xa); set(3, 7, xa * ya);
    // momentum rows
    set(4, 0, 1); set(4, 1, 1); set(4, 6, -1);
    set(5, 3, 1); set(5, 4, 1); set(5, 7, -1);
    // differentiated divergence
    set(6, 0, 1); set(6, 5, 1);
    set(7, 2, 1); set(7, 4, 1);

    std::array<double, 8> b2 = {
        in.Phi_aa[0] - xaa * J.ux - yaa * J.uy,
        in.Phi_aa[1] - xaa * J.vx - yaa * J.vy,
        saa * in.Psi[0] + sa * in.Psi_a[0] - 2 * yaa * J.ux + xaa * J.uy + xaa * J.vx + yaa * J.p,
        saa * in.Psi[1] + sa * in.Psi_a[1] - yaa * J.uy - yaa * J.vx + 2 * xaa * J.vy - xaa * J.p,
        c * c * in.Phi[0] + f_jump[0],
        c * c * in.Phi[1] + f_jump[1],
        0.0,
        0.0,
    };
    linalg::lu_solve<8>(A2, b2);
    J.uxx = b2[0];
    J.uyy = b2[1];
    J.uxy = b2[2];
    J.vxx = b2[3];
    J.vyy = b2[4];
    J.vxy = b2[5];
    J.px = b2[6];
    J.py = b2[7];
    return J;
}

} // namespace kfbi

#include <doctest.h>

#include <cmath>
#include <random>

#include "kfbi/helmholtz_fd.hpp"
#include "kfbi/stokes_fd.hpp"
#include "oracles.hpp"

using namespace kfbi;

namespace {
constexpr double PI = M_PI;

// divergence-free manufactured pair on [0,1]^2:
// u = sin(pi x) cos(pi y), v = -cos(pi x) sin(pi y), p = sin(pi x) sin(pi y)
struct Trig {
    static double u(double x, double y) { return std::sin(PI * x) * std::cos(PI * y); }
    static double v(double x, double y) { return -std::cos(PI * x) * std::sin(PI * y); }
    static double p(double x, double y) { return std::sin(PI * x) * std::sin(PI * y); }
    static double fu(double x, double y, double c) {
        return (-2 * PI * PI - c * c) * u(x, y) - PI * std::cos(PI * x) * std::sin(PI * y);
    }
    static double fv(double x, double y, double c) {
        return (-2 * PI * PI - c * c) * v(x, y) - PI * std::sin(PI * x) * std::cos(PI * y);
    }
};

MacBC trig_bc(int n, double h) {
    MacBC bc = MacBC::zero(n, n);
    for (int j = 0; j < n; ++j) {
        const double y = (j + 0.5) * h;
        bc.u_left[j] = Trig::u(0.0, y);
        bc.u_right[j] = Trig::u(1.0, y);
    }
    for (int i = 0; i <= n; ++i) {
        const double x = i * h;
        bc.u_bottom[i] = Trig::u(x, 0.0);
        bc.u_top[i] = Trig::u(x, 1.0);
    }
    for (int j = 0; j <= n; ++j) {
        const double y = j * h;
        bc.v_left[j] = Trig::v(0.0, y);
        bc.v_right[j] = Trig::v(1.0, y);
    }
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * h;
        bc.v_bottom[i] = Trig::v(x, 0.0);
        bc.v_top[i] = Trig::v(x, 1.0);
    }
    return bc;
}

MacData trig_data(int n, double h, double c) {
    MacData d = MacData::zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            d.fu[i + (n + 1) * (size_t)j] = Trig::fu(i * h, (j + 0.5) * h, c);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i)
            d.fv[i + n * (size_t)j] = Trig::fv((i + 0.5) * h, j * h, c);
    return d;
}

MacField trig_exact(int n, double h) {
    MacField f(n, n, h);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) f.uat(i, j) = Trig::u(i * h, (j + 0.5) * h);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) f.vat(i, j) = Trig::v((i + 0.5) * h, j * h);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) f.pat(i, j) = Trig::p((i + 0.5) * h, (j + 0.5) * h);
    return f;
}

double field_error(const MacField& a, const MacField& b) {
    double e = 0.0;
    for (size_t k = 0; k < a.u.size(); ++k) e = std::max(e, std::fabs(a.u[k] - b.u[k]));
    for (size_t k = 0; k < a.v.size(); ++k) e = std::max(e, std::fabs(a.v[k] - b.v[k]));
    return e;
}
} // namespace

TEST_CASE("mac residual basics") {
    const int n = 32;
    const double h = 1.0 / n;
    MacField x(n, n, h);
    MacData d = MacData::zero(n, n);
    MacBC bc = MacBC::zero(n, n);
    auto r = mac_residual(x, d, 1.0, bc);
    CHECK(oracles::linf(r.fu) == 0.0);
    CHECK(oracles::linf(r.fv) == 0.0);
    CHECK(oracles::linf(r.fdiv) == 0.0);

    // truncation error of the manufactured pair is O(h^2) in the interior
    auto measure = [&](int nn) {
        const double hh = 1.0 / nn;
        auto exact = trig_exact(nn, hh);
        auto data = trig_data(nn, hh, 1.0);
        auto bcc = trig_bc(nn, hh);
        auto res = mac_residual(exact, data, 1.0, bcc);
        double e = 0.0;
        for (int j = 2; j < nn - 2; ++j)
            for (int i = 2; i < nn - 2; ++i) {
                e = std::max(e, std::fabs(res.fu[i + (nn + 1) * (size_t)j]));
                e = std::max(e, std::fabs(res.fv[i + nn * (size_t)j]));
                e = std::max(e, std::fabs(res.fdiv[i + nn * (size_t)j]));
            }
        return e;
    };
    const double e32 = measure(32), e64 = measure(64);
    CHECK(e32 / e64 > 3.5);

    // constant pressure shift leaves the residual unchanged
    auto exact = trig_exact(n, h);
    auto data = trig_data(n, h, 1.0);
    auto bcc = trig_bc(n, h);
    auto r1 = mac_residual(exact, data, 1.0, bcc);
    for (auto& pv : exact.p) pv += 17.0;
    auto r2 = mac_residual(exact, data, 1.0, bcc);
    CHECK(oracles::linf(r1.fu, r2.fu) < 1e-12);
    CHECK(oracles::linf(r1.fdiv, r2.fdiv) < 1e-12);
}

TEST_CASE("dgs sweep properties") {
    const int n = 32;
    const double h = 1.0 / n;
    const double c = 1.0;
    MacBC bc = MacBC::zero(n, n);

    // an exact discrete solution is a fixed point
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    MacField sol(n, n, h);
    for (auto& v : sol.u) v = dist(rng);
    for (auto& v : sol.v) v = dist(rng);
    for (auto& v : sol.p) v = dist(rng);
    for (int j = 0; j < n; ++j) sol.uat(0, j) = sol.uat(n, j) = 0.0;
    for (int i = 0; i < n; ++i) sol.vat(i, 0) = sol.vat(i, n) = 0.0;
    // build data so the residual of sol is exactly zero
    MacData zero = MacData::zero(n, n);
    auto r0 = mac_residual(sol, zero, c, bc);
    MacData data = MacData::zero(n, n);
    for (size_t k = 0; k < data.fu.size(); ++k) data.fu[k] = -r0.fu[k];
    for (size_t k = 0; k < data.fv.size(); ++k) data.fv[k] = -r0.fv[k];
    for (size_t k = 0; k < data.fdiv.size(); ++k) data.fdiv[k] = -r0.fdiv[k];
    MacField before = sol;
    dgs_sweep(sol, data, c, bc);
    CHECK(field_error(sol, before) < 1e-13);

    // random error decays by at least 2x per sweep in the residual norm
    MacField x(n, n, h);
    auto resnorm = [&](const MacField& f) {
        auto r = mac_residual(f, data, c, bc);
        double s = 0.0;
        for (double v : r.fu) s += v * v;
        for (double v : r.fv) s += v * v;
        for (double v : r.fdiv) s += v * v;
        return std::sqrt(s);
    };
    double prev = resnorm(x);
    for (int sweep = 0; sweep < 4; ++sweep) {
        auto rdiv_before = mac_residual(x, data, c, bc);
        double divb = 0.0;
        for (double v : rdiv_before.fdiv) divb += v * v;
        dgs_sweep(x, data, c, bc);
        const double cur = resnorm(x);
        CHECK(cur < prev / 2.0);
        auto rdiv_after = mac_residual(x, data, c, bc);
        double diva = 0.0;
        for (double v : rdiv_after.fdiv) diva += v * v;
        CHECK(diva <= divb + 1e-14);
        prev = cur;
    }
}

TEST_CASE("vcycle solves the manufactured problem at second order") {
    auto err = [&](int n) {
        const double h = 1.0 / n;
        auto data = trig_data(n, h, 1.0);
        auto bc = trig_bc(n, h);
        MultigridStats st;
        auto x = vcycle_solve(n, n, h, data, 1.0, bc, 1e-10, 100, &st);
        auto exact = trig_exact(n, h);
        return field_error(x, exact);
    };
    const double e32 = err(32), e64 = err(64), e128 = err(128);
    CHECK(std::log2(e32 / e64) > 1.7);
    CHECK(std::log2(e64 / e128) > 1.7);
}

TEST_CASE("multigrid convergence factor stays below 0.2 on a smooth problem") {
    const int n = 128;
    const double h = 1.0 / n;
    auto data = trig_data(n, h, 1.0);
    auto bc = trig_bc(n, h);
    MultigridStats st;
    (void)vcycle_solve(n, n, h, data, 1.0, bc, 1e-9, 100, &st);
    CHECK(st.worst_factor <= 0.2);
    CHECK(st.cycles <= 12);
}

TEST_CASE("divergence of the converged solution matches the imposed data") {
    const int n = 64;
    const double h = 1.0 / n;
    auto data = trig_data(n, h, 1.0);
    auto bc = trig_bc(n, h);
    auto x = vcycle_solve(n, n, h, data, 1.0, bc, 1e-10);
    double e = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double div =
                (x.uat(i + 1, j) - x.uat(i, j)) / h + (x.vat(i, j + 1) - x.vat(i, j)) / h;
            e = std::max(e, std::fabs(div));
        }
    CHECK(e < 1e-8);
    // pressure mean pinned to zero
    double pm = 0.0;
    for (double v : x.p) pm += v;
    CHECK(std::fabs(pm / x.p.size()) < 1e-12);
}

TEST_CASE("corrected MAC solve recovers the rigid indicator field") {
    // u = (1,0) inside the unit circle, 0 outside, p = 0, c = 0:
    // every jump except [u] = 1 vanishes
    const int n = 128;
    CartesianGrid g(-2, -2, 2, 2, n);
    CurveSampler s(from_polar_shape([](double) { return 1.0; }, 512));
    auto gu = build_lattice_geometry(s, mac_u_lattice(g.xlo, g.ylo, g.h, n, n));
    auto gv = build_lattice_geometry(s, mac_v_lattice(g.xlo, g.ylo, g.h, n, n));
    auto gp = build_lattice_geometry(s, mac_p_lattice(g.xlo, g.ylo, g.h, n, n));
    std::vector<StokesJumpSet> Ju(gu.crossings.size()), Jv(gv.crossings.size()),
        Jp(gp.crossings.size());
    for (auto& J : Ju) J.u = 1.0;
    for (auto& J : Jv) J.u = 1.0;
    for (auto& J : Jp) J.u = 1.0;
    MacData data = MacData::zero(n, n);
    assemble_mac_corrections(gu, gv, gp, Ju, Jv, Jp, data);
    MacBC bc = MacBC::zero(n, n);
    auto x = vcycle_solve(n, n, g.h, data, 0.0, bc, 1e-10);
    double err = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) {
            const Vec2 p{g.x(i), g.ylo + (j + 0.5) * g.h};
            if (std::fabs(p.norm() - 1.0) < 2 * g.h) continue;
            const double exact = gu.side[gu.lat.idx(i, j)] > 0 ? 1.0 : 0.0;
            err = std::max(err, std::fabs(x.uat(i, j) - exact));
        }
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 p{g.xlo + (i + 0.5) * g.h, g.y(j)};
            if (std::fabs(p.norm() - 1.0) < 2 * g.h) continue;
            err = std::max(err, std::fabs(x.vat(i, j)));
        }
    CHECK(err < 1e-7);

    // one-sided extraction through the interface
    StokesJumpSet JJ{};
    JJ.u = 1.0;
    HelmholtzJumpSet proj{JJ.u, JJ.ux, JJ.uy, JJ.uxx, JJ.uxy, JJ.uyy};
    for (double a : {0.3, 1.9, 3.6, 5.5}) {
        const Vec2 p{std::cos(a), std::sin(a)};
        auto up = extract_boundary(x.u, gu, proj, p, +1);
        auto um = extract_boundary(x.u, gu, proj, p, -1);
        CHECK(up.value == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(um.value == doctest::Approx(0.0).epsilon(1e-7));
    }
}

TEST_CASE("staggered extraction reproduces constants and linears") {
    const int n = 64;
    CartesianGrid g(-2, -2, 2, 2, n);
    CurveSampler s(from_polar_shape([](double) { return 1.0; }, 256));
    auto gu = build_lattice_geometry(s, mac_u_lattice(g.xlo, g.ylo, g.h, n, n));
    MacField f(n, n, g.h);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i) f.uat(i, j) = 3.0;
    HelmholtzJumpSet zero{};
    auto e = extract_boundary(f.u, gu, zero, {0.9, 0.1}, +1);
    CHECK(e.value == doctest::Approx(3.0).epsilon(1e-12));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            f.uat(i, j) = 2.0 * g.x(i) - (g.ylo + (j + 0.5) * g.h);
    auto e2 = extract_boundary(f.u, gu, zero, {0.4, -0.5}, -1);
    CHECK(e2.value == doctest::Approx(2.0 * 0.4 + 0.5).epsilon(1e-10));
    CHECK(e2.grad.x == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(e2.grad.y == doctest::Approx(-1.0).epsilon(1e-9));
}

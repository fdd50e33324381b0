#include <doctest.h>

#include <random>

#include "kfbi/reference.hpp"

using namespace kfbi;

// The OpenMP kernels must agree bit-for-bit with the serial reference
// implementations regardless of thread count.

namespace {
std::mt19937 rng(99);
double rnd() {
    static std::uniform_real_distribution<double> d(-1.0, 1.0);
    return d(rng);
}
} // namespace

TEST_CASE("five-point residual: parallel equals serial") {
    const int n = 97; // odd size exercises the partitioning
    const double h = 1.0 / n;
    GridFunction u(n), rhs(n), a(n), b(n);
    for (auto& v : u.v) v = rnd();
    for (auto& v : rhs.v) v = rnd();
    five_point_residual(u, rhs, 1.3, h, a);
    ref::five_point_residual(u, rhs, 1.3, h, b);
    for (size_t k = 0; k < a.v.size(); ++k) CHECK(a.v[k] == b.v[k]);
}

TEST_CASE("mac residual: parallel equals serial") {
    const int n = 48;
    const double h = 1.0 / n;
    MacField x(n, n, h);
    for (auto& v : x.u) v = rnd();
    for (auto& v : x.v) v = rnd();
    for (auto& v : x.p) v = rnd();
    MacData d = MacData::zero(n, n);
    for (auto& v : d.fu) v = rnd();
    for (auto& v : d.fv) v = rnd();
    for (auto& v : d.fdiv) v = rnd();
    MacBC bc = MacBC::zero(n, n);
    for (auto& v : bc.u_top) v = rnd();
    for (auto& v : bc.v_left) v = rnd();
    auto rp = mac_residual(x, d, 0.8, bc);
    auto rs = ref::mac_residual(x, d, 0.8, bc);
    for (size_t k = 0; k < rp.fu.size(); ++k) CHECK(rp.fu[k] == rs.fu[k]);
    for (size_t k = 0; k < rp.fv.size(); ++k) CHECK(rp.fv[k] == rs.fv[k]);
    for (size_t k = 0; k < rp.fdiv.size(); ++k) CHECK(rp.fdiv[k] == rs.fdiv[k]);
}

TEST_CASE("dgs sweep: parallel equals serial") {
    const int n = 32;
    const double h = 1.0 / n;
    MacField x(n, n, h);
    for (auto& v : x.u) v = rnd();
    for (auto& v : x.v) v = rnd();
    for (auto& v : x.p) v = rnd();
    for (int j = 0; j < n; ++j) x.uat(0, j) = x.uat(n, j) = 0.0;
    for (int i = 0; i < n; ++i) x.vat(i, 0) = x.vat(i, n) = 0.0;
    MacData d = MacData::zero(n, n);
    for (auto& v : d.fu) v = rnd();
    for (auto& v : d.fv) v = rnd();
    for (auto& v : d.fdiv) v = rnd();
    MacBC bc = MacBC::zero(n, n);
    MacField xs = x, xp = x;
    for (int sweep = 0; sweep < 3; ++sweep) {
        dgs_sweep(xp, d, 1.0, bc);
        ref::dgs_sweep(xs, d, 1.0, bc);
    }
    for (size_t k = 0; k < xp.u.size(); ++k) CHECK(xp.u[k] == xs.u[k]);
    for (size_t k = 0; k < xp.v.size(); ++k) CHECK(xp.v[k] == xs.v[k]);
    for (size_t k = 0; k < xp.p.size(); ++k) CHECK(xp.p[k] == xs.p[k]);
}

TEST_CASE("cubic interpolation batch: parallel equals serial") {
    const int n = 65;
    const double h = 1.0 / (n - 1);
    std::vector<double> vals(n * (size_t)n);
    for (auto& v : vals) v = rnd();
    std::vector<Vec2> pts(500);
    for (auto& p : pts) p = {0.45 * (rnd() + 1), 0.45 * (rnd() + 1)};
    auto a = cubic_interp_batch(vals, n, n, 0.0, 0.0, h, pts);
    auto b = ref::cubic_interp_batch(vals, n, n, 0.0, 0.0, h, pts);
    for (size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

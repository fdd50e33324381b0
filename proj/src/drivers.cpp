#include "kfbi/drivers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace kfbi {

using spectral::Samples;

namespace {

constexpr double TWO_PI = 2.0 * M_PI;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

CartesianGrid make_grid(const Box& b, int n) { return {b.lo, b.lo, b.hi, b.hi, n}; }

ThetaLCurve build_shape(const ShapeSpec& shape, int markers) {
    return from_polar_shape([&](double a) { return shape.r(a); }, markers);
}

void check_clearance_or_throw(const CartesianGrid& grid, const std::vector<Vec2>& markers) {
    const double margin = 4.0 * grid.h;
    for (const Vec2& p : markers)
        if (p.x < grid.xlo + margin || p.x > grid.xhi - margin || p.y < grid.ylo + margin ||
            p.y > grid.yhi - margin)
            throw std::runtime_error("interface too close to the box boundary (< 4h)");
}

// normal angle = atan2(n_y, n_x) = theta - pi/2
std::vector<double> normal_angles(const ThetaLCurve& c) {
    std::vector<double> a(c.n());
    for (int j = 0; j < c.n(); ++j) a[j] = TWO_PI * j / c.n() + c.eta[j] - 0.5 * M_PI;
    return a;
}

// Delta s <= 1.5 h refinement rule
bool needs_resample(const ThetaLCurve& c, double h) {
    return c.length / c.n() > 1.5 * h;
}

// cubic Lagrange weights for normalized offset t in [1, 2] relative to the
// 4-point stencil {0,1,2,3}
inline void cubic_weights(double t, double w[4]) {
    const double t0 = t, t1 = t - 1.0, t2 = t - 2.0, t3 = t - 3.0;
    w[0] = -t1 * t2 * t3 / 6.0;
    w[1] = t0 * t2 * t3 / 2.0;
    w[2] = -t0 * t1 * t3 / 2.0;
    w[3] = t0 * t1 * t2 / 6.0;
}

// clamped 4x4 cubic Lagrange interpolation on a lattice of values
double interp_cubic(const std::vector<double>& vals, int nx, int ny, double x0, double y0,
                    double h, Vec2 p) {
    double fx = (p.x - x0) / h;
    double fy = (p.y - y0) / h;
    int i0 = static_cast<int>(std::floor(fx)) - 1;
    int j0 = static_cast<int>(std::floor(fy)) - 1;
    i0 = std::min(std::max(i0, 0), nx - 4);
    j0 = std::min(std::max(j0, 0), ny - 4);
    double wx[4], wy[4];
    cubic_weights(fx - i0, wx);
    cubic_weights(fy - j0, wy);
    double s = 0.0;
    for (int b = 0; b < 4; ++b) {
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * vals[(i0 + a) + nx * (size_t)(j0 + b)];
        s += wy[b] * row;
    }
    return s;
}

} // namespace

StepMetrics curve_metrics(const ThetaLCurve& c, double t, int gmres_iters) {
    StepMetrics m;
    m.t = t;
    m.area = enclosed_area(c);
    m.length = c.length;
    m.gmres_iters = gmres_iters;
    auto pos = reconstruct_positions(c);
    m.tip_x_left = pos[0].x;
    m.tip_x_right = pos[0].x;
    m.tip_y_bottom = pos[0].y;
    m.tip_y_top = pos[0].y;
    for (const Vec2& p : pos) {
        m.tip_x_left = std::min(m.tip_x_left, p.x);
        m.tip_x_right = std::max(m.tip_x_right, p.x);
        m.tip_y_bottom = std::min(m.tip_y_bottom, p.y);
        m.tip_y_top = std::max(m.tip_y_top, p.y);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Hele-Shaw
// ---------------------------------------------------------------------------

HeleShawSim::HeleShawSim(const HeleShawConfig& cfg)
    : cfg_(cfg),
      grid_(make_grid(cfg.box, cfg.num.grid_n)),
      solver_(grid_, BoxBC::Dirichlet),
      hist_(build_shape(cfg.shape, cfg.num.markers)) {
    if (cfg_.sigma < 0 || cfg_.injection < 0)
        throw std::invalid_argument("hele-shaw: sigma and J must be non-negative");
}

StepMetrics HeleShawSim::step() {
    const double t0 = now_seconds();
    const double tau = cfg_.num.tau;
    ThetaLCurve cur = hist_.curve_n;

    if (needs_resample(cur, grid_.h)) {
        cur = resample(cur, 2 * cur.n());
        hist_.reset(cur);
        stats_.resample_events += 1;
    }

    ScalarWorkspace ws(grid_, cur, true);
    check_clearance_or_throw(grid_, ws.markers);

    const int m = cur.n();
    Samples kap = curvature(cur);
    Samples rhs(m);
    for (int j = 0; j < m; ++j) {
        const double r = ws.markers[j].norm();
        const double v = -cfg_.injection * std::log(r);
        rhs[j] = -cfg_.sigma * kap[j] - v;
    }

    auto apply = [&](const std::vector<double>& phi) { return hs_operator(ws, solver_, phi); };
    GmresResult g = gmres(apply, rhs, cfg_.num.gmres_tol, cfg_.num.gmres_restart);
    stats_.max_gmres_iters = std::max(stats_.max_gmres_iters, g.iterations);

    auto field = eval_double_layer_scalar(ws, solver_, g.x, 0.0, ScalarBCMode::HsArtificial);
    stats_.max_extraction_cond = std::max(stats_.max_extraction_cond, field.max_extraction_cond);

    Samples U(m);
    for (int j = 0; j < m; ++j) {
        const Vec2 X = ws.markers[j];
        const double dnv = -cfg_.injection * X.dot(ws.normals[j]) / X.dot(X);
        U[j] = -(dnv + field.normal_derivative[j]);
    }
    Samples V = tangential_velocity(cur, U);

    evolution::StiffnessCase sc{evolution::StiffnessKind::ThirdOrder, 0.5 * cfg_.sigma};
    auto r = evolution::step(hist_, U, V, sc, tau, cfg_.num.scheme);
    if (cfg_.num.filter) hist_.curve_n.eta = spectral::filter25(hist_.curve_n.eta);
    last_U_ = U;
    nstep_ += 1;

    StepMetrics out = curve_metrics(hist_.curve_n, time(), g.iterations);
    out.wallclock = now_seconds() - t0;
    return out;
}

// ---------------------------------------------------------------------------
// Stefan (with optional convection)
// ---------------------------------------------------------------------------

GridFunction initial_temperature(const CartesianGrid& grid, const ThetaLCurve& curve,
                                 double st, bool mollify) {
    CurveSampler sampler(curve);
    auto geom = build_lattice_geometry(sampler, node_lattice(grid));
    GridFunction T(grid.n);
    const auto& markers = sampler.markers();
#pragma omp parallel for schedule(static)
    for (int j = 0; j <= grid.n; ++j)
        for (int i = 0; i <= grid.n; ++i) {
            const int idx = geom.lat.idx(i, j);
            if (!mollify) {
                T.v[idx] = geom.side[idx] > 0 ? 0.0 : st;
            } else {
                const double d = distance_to_curve(markers, {grid.x(i), grid.y(j)});
                const double sd = geom.side[idx] > 0 ? -d : d; // positive in liquid
                T.v[idx] = st * 0.5 * (1.0 + std::tanh(sd / grid.h));
            }
        }
    return T;
}

StefanSim::StefanSim(const StefanConfig& cfg)
    : cfg_(cfg),
      grid_(make_grid(cfg.box, cfg.num.grid_n)),
      solver_(grid_, BoxBC::Neumann),
      hist_(build_shape(cfg.shape, cfg.num.markers)) {
    Tn_ = initial_temperature(grid_, hist_.curve_n, cfg_.st, cfg_.num.mollify_init);
    Tnm1_ = Tn_;
    if (cfg_.convection) {
        const int n = grid_.n;
        un_ = MacField(n, n, grid_.h);
        unm1_ = un_;
    }
}

MacBC StefanSim::wall_bc() const {
    const int n = grid_.n;
    MacBC bc = MacBC::zero(n, n);
    if (cfg_.convection && cfg_.convection->walls == ConvectionConfig::Walls::InflowX) {
        const double u0 = cfg_.convection->u0;
        for (int j = 0; j < n; ++j) {
            bc.u_left[j] = u0;
            bc.u_right[j] = u0;
        }
        // top/bottom walls stay no-slip
    }
    return bc;
}

StepMetrics StefanSim::step() {
    const double t0 = now_seconds();
    const double tau = cfg_.num.tau;
    ThetaLCurve cur = hist_.curve_n;

    if (needs_resample(cur, grid_.h)) {
        cur = resample(cur, 2 * cur.n());
        hist_.reset(cur);
        stats_.resample_events += 1;
    }

    ScalarWorkspace ws(grid_, cur, false);
    check_clearance_or_throw(grid_, ws.markers);

    const bool startup = (nstep_ == 0);
    const double c = startup ? std::sqrt(1.0 / tau) : std::sqrt(1.5 / tau);
    const int n = grid_.n;
    const int m = cur.n();

    // ---- temperature right-hand side (semi-Lagrangian when convecting) ----
    GridFunction rhsT(n);
    if (!cfg_.convection) {
        if (startup) {
            for (size_t k = 0; k < rhsT.v.size(); ++k) rhsT.v[k] = -Tn_.v[k] / tau;
        } else {
            for (size_t k = 0; k < rhsT.v.size(); ++k)
                rhsT.v[k] = (Tnm1_.v[k] - 4.0 * Tn_.v[k]) / (2.0 * tau);
        }
    } else {
        // departure points for every node with the midpoint rule
        const auto& U0 = un_;
        const auto& U1 = unm1_;
        auto uvel = [&](const MacField& f, Vec2 p) -> Vec2 {
            const double ux = interp_cubic(f.u, n + 1, n, grid_.xlo, grid_.ylo + 0.5 * grid_.h,
                                           grid_.h, p);
            const double uy = interp_cubic(f.v, n, n + 1, grid_.xlo + 0.5 * grid_.h, grid_.ylo,
                                           grid_.h, p);
            return {ux, uy};
        };
        auto uhalf = [&](Vec2 p) -> Vec2 {
            const Vec2 a = uvel(U0, p), b = uvel(U1, p);
            return {1.5 * a.x - 0.5 * b.x, 1.5 * a.y - 0.5 * b.y};
        };
        std::atomic<int> clamps{0};
        auto clamp_box = [&](Vec2 p) -> Vec2 {
            const double eps = 1e-12;
            Vec2 q{std::min(std::max(p.x, grid_.xlo + eps), grid_.xhi - eps),
                   std::min(std::max(p.y, grid_.ylo + eps), grid_.yhi - eps)};
            if (q.x != p.x || q.y != p.y) clamps.fetch_add(1, std::memory_order_relaxed);
            return q;
        };
#pragma omp parallel for schedule(static)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) {
                const Vec2 x0{grid_.x(i), grid_.y(j)};
                const Vec2 uh0 = uhalf(x0);
                // departure at t_n
                Vec2 xs = x0 - (0.5 * tau) * uhalf(x0 - (0.5 * tau) * uh0);
                Vec2 xn = clamp_box(x0 - tau * uhalf(clamp_box(xs)));
                // departure at t_{n-1}
                Vec2 xs2 = x0 - tau * uvel(U0, clamp_box(x0 - tau * uvel(U0, x0)));
                Vec2 xnm = clamp_box(x0 - 2.0 * tau * uvel(U0, clamp_box(xs2)));
                const double Ttil_n =
                    interp_cubic(Tn_.v, n + 1, n + 1, grid_.xlo, grid_.ylo, grid_.h, xn);
                const double Ttil_nm1 =
                    interp_cubic(Tnm1_.v, n + 1, n + 1, grid_.xlo, grid_.ylo, grid_.h, xnm);
                rhsT.at(i, j) = startup ? -Ttil_n / tau
                                        : (Ttil_nm1 - 4.0 * Ttil_n) / (2.0 * tau);
            }
        stats_.departure_clamps += clamps.load();
    }

    // ---- T1: particular part, no corrections ----
    GridFunction T1 = solver_.solve(rhsT, {}, c, nullptr);

    Samples T1_gamma(m);
    HelmholtzJumpSet zeroJ{};
    for (int j = 0; j < m; ++j)
        T1_gamma[j] = extract_boundary(T1.v, ws.geom, zeroJ, ws.markers[j], -1).value;

    // ---- boundary integral equation for psi = V_n ----
    Samples kap = curvature(cur);
    auto angles = normal_angles(cur);
    std::vector<double> epsv(m), epsc(m);
    for (int j = 0; j < m; ++j) {
        epsv[j] = cfg_.eps_v(angles[j]);
        epsc[j] = cfg_.eps_c(angles[j]);
    }
    Samples rhs(m);
    for (int j = 0; j < m; ++j) rhs[j] = -epsc[j] * kap[j] - T1_gamma[j];

    auto apply = [&](const std::vector<double>& psi) {
        return stefan_operator(ws, solver_, psi, epsv, c);
    };
    GmresResult g = gmres(apply, rhs, cfg_.num.gmres_tol, cfg_.num.gmres_restart);
    stats_.max_gmres_iters = std::max(stats_.max_gmres_iters, g.iterations);

    // ---- recompute T2 with the converged density, roll temperature ----
    auto T2 = eval_single_layer_scalar(ws, solver_, g.x, c);
    stats_.max_extraction_cond = std::max(stats_.max_extraction_cond, T2.max_extraction_cond);
    GridFunction Tnp1(n);
    for (size_t k = 0; k < Tnp1.v.size(); ++k) Tnp1.v[k] = T1.v[k] + T2.field.v[k];

    // ---- fluid update (convection only) ----
    if (cfg_.convection) flow_substep(c);

    Tnm1_ = std::move(Tn_);
    Tn_ = std::move(Tnp1);

    // ---- interface evolution ----
    Samples U = g.x; // V_n = psi
    Samples V = tangential_velocity(cur, U);
    evolution::StiffnessCase sc;
    bool second_order;
    switch (cfg_.num.stiffness) {
        case StiffnessSelect::SecondOrder: second_order = true; break;
        case StiffnessSelect::ThirdOrder: second_order = false; break;
        default: {
            double minv = 1e300;
            for (int i = 0; i < 1024; ++i)
                minv = std::min(minv, std::fabs(cfg_.eps_v(TWO_PI * i / 1024)));
            second_order = minv > 1e-8;
        }
    }
    auto ec = [this](double a) { return cfg_.eps_c(a); };
    auto ev = [this](double a) { return cfg_.eps_v(a); };
    if (second_order) {
        sc.kind = evolution::StiffnessKind::SecondOrder;
        sc.lambda = evolution::select_lambda(ec, ev, sc.kind);
    } else {
        sc.kind = evolution::StiffnessKind::ThirdOrder;
        sc.lambda = evolution::select_lambda(ec, ev, sc.kind);
    }
    evolution::step(hist_, U, V, sc, tau, cfg_.num.scheme);
    if (cfg_.num.filter) hist_.curve_n.eta = spectral::filter25(hist_.curve_n.eta);
    last_psi_ = U;
    nstep_ += 1;

    StepMetrics out = curve_metrics(hist_.curve_n, time(), g.iterations);
    out.wallclock = now_seconds() - t0;
    return out;
}

void StefanSim::flow_substep(double c) {
    const int n = grid_.n;
    const double tau = cfg_.num.tau;
    const bool startup = (nstep_ == 0);
    const double gb = cfg_.convection->g * cfg_.convection->beta;

    StokesWorkspace sws(grid_, hist_.curve_n);

    // buoyancy G = -g beta (T - T_inf) j at v-points, from the stored
    // temperature levels (G^n from T^n, G^{n-1} from T^{n-1})
    auto g_at = [&](const GridFunction& T, int i, int j) {
        const double Tv = 0.5 * (T.at(i, j) + T.at(i + 1, j));
        return -gb * (Tv - cfg_.st);
    };

    // departure values of velocity at u- and v-points (liquid only)
    MacData data = MacData::zero(n, n);
    auto uvel = [&](const MacField& f, Vec2 p) -> Vec2 {
        const double ux =
            interp_cubic(f.u, n + 1, n, grid_.xlo, grid_.ylo + 0.5 * grid_.h, grid_.h, p);
        const double uy =
            interp_cubic(f.v, n, n + 1, grid_.xlo + 0.5 * grid_.h, grid_.ylo, grid_.h, p);
        return {ux, uy};
    };
    auto uhalf = [&](Vec2 p) -> Vec2 {
        const Vec2 a = uvel(un_, p), b = uvel(unm1_, p);
        return {1.5 * a.x - 0.5 * b.x, 1.5 * a.y - 0.5 * b.y};
    };
    auto clamp_box = [&](Vec2 p) -> Vec2 {
        const double eps = 1e-12;
        return {std::min(std::max(p.x, grid_.xlo + eps), grid_.xhi - eps),
                std::min(std::max(p.y, grid_.ylo + eps), grid_.yhi - eps)};
    };
    auto departure_pair = [&](Vec2 x0) -> std::pair<Vec2, Vec2> {
        const Vec2 uh0 = uhalf(x0);
        Vec2 xs = x0 - (0.5 * tau) * uhalf(clamp_box(x0 - (0.5 * tau) * uh0));
        Vec2 xn = clamp_box(x0 - tau * uhalf(clamp_box(xs)));
        Vec2 xs2 = x0 - tau * uvel(un_, clamp_box(x0 - tau * uvel(un_, x0)));
        Vec2 xnm = clamp_box(x0 - 2.0 * tau * uvel(un_, clamp_box(xs2)));
        return {xn, xnm};
    };

#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j)
        for (int i = 1; i < n; ++i) {
            if (sws.geom_u.side[sws.geom_u.lat.idx(i, j)] > 0) continue; // solid
            const Vec2 x0{grid_.x(i), grid_.ylo + (j + 0.5) * grid_.h};
            auto [xn, xnm] = departure_pair(x0);
            const double un_dep = uvel(un_, xn).x;
            const double unm_dep = uvel(unm1_, xnm).x;
            data.fu[i + (n + 1) * (size_t)j] =
                startup ? -un_dep / tau : (unm_dep - 4.0 * un_dep) / (2.0 * tau);
        }
#pragma omp parallel for schedule(static)
    for (int j = 1; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const size_t k = i + n * (size_t)j;
            double f = startup ? g_at(Tn_, i, j)
                               : 2.0 * g_at(Tn_, i, j) - g_at(Tnm1_, i, j);
            if (sws.geom_v.side[sws.geom_v.lat.idx(i, j)] < 0) { // liquid
                const Vec2 x0{grid_.xlo + (i + 0.5) * grid_.h, grid_.y(j)};
                auto [xn, xnm] = departure_pair(x0);
                const double vn_dep = uvel(un_, xn).y;
                const double vnm_dep = uvel(unm1_, xnm).y;
                f += startup ? -vn_dep / tau : (vnm_dep - 4.0 * vn_dep) / (2.0 * tau);
            }
            data.fv[k] = f;
        }

    // particular Stokes solve on the whole box
    MacBC bc = wall_bc();
    MultigridStats mgs;
    MacField u1 = vcycle_solve(n, n, grid_.h, data, c, bc, cfg_.num.mg_tol, 100, &mgs);
    stats_.max_mg_cycles = std::max(stats_.max_mg_cycles, mgs.cycles);

    // boundary integral equation for the homogeneous part
    const int m = hist_.curve_n.n();
    std::vector<double> rhs(2 * m);
    HelmholtzJumpSet zeroJ{};
    for (int j = 0; j < m; ++j) {
        const Vec2 p = sws.markers[j];
        rhs[j] = -extract_boundary(u1.u, sws.geom_u, zeroJ, p, -1).value;
        rhs[m + j] = -extract_boundary(u1.v, sws.geom_v, zeroJ, p, -1).value;
    }
    auto apply = [&](const std::vector<double>& phi) {
        return stokes_operator(sws, phi, c, cfg_.num.mg_tol);
    };
    double rn = 0.0;
    for (double v : rhs) rn += v * v;
    std::vector<double> phi(2 * m, 0.0);
    int its = 0;
    if (std::sqrt(rn) > 1e-300) {
        GmresResult g = gmres(apply, rhs, cfg_.num.gmres_tol, cfg_.num.gmres_restart);
        phi = g.x;
        its = g.iterations;
    }
    stats_.max_gmres_iters = std::max(stats_.max_gmres_iters, its);

    MacField unew = u1;
    if (its > 0) {
        Samples px(phi.begin(), phi.begin() + m), py(phi.begin() + m, phi.end());
        auto dl = eval_double_layer_stokes(sws, px, py, c, cfg_.num.mg_tol);
        for (size_t k = 0; k < unew.u.size(); ++k) unew.u[k] += dl.field.u[k];
        for (size_t k = 0; k < unew.v.size(); ++k) unew.v[k] += dl.field.v[k];
        for (size_t k = 0; k < unew.p.size(); ++k) unew.p[k] += dl.field.p[k];
    }
    // solid velocity is identically zero
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            if (sws.geom_u.side[sws.geom_u.lat.idx(i, j)] > 0)
                unew.u[i + (n + 1) * (size_t)j] = 0.0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i)
            if (sws.geom_v.side[sws.geom_v.lat.idx(i, j)] > 0) unew.v[i + n * (size_t)j] = 0.0;

    unm1_ = std::move(un_);
    un_ = std::move(unew);
}

} // namespace kfbi

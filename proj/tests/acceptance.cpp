// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failures. Run a single criterion with --criterion N.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "kfbi/cli.hpp"
#include "kfbi/drivers.hpp"
#include "kfbi/reference.hpp"

using namespace kfbi;
using spectral::Samples;

namespace {

constexpr double PI = M_PI;
int g_failures = 0;

void record(int crit, bool pass, const std::string& what) {
    std::printf("C%d %s: %s\n", crit, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

HeleShawConfig flower_cfg(int folds, double sigma, double J, double boxlo, double boxhi,
                          int grid, int markers, double tau) {
    HeleShawConfig cfg;
    cfg.sigma = sigma;
    cfg.injection = J;
    cfg.box = {boxlo, boxhi};
    cfg.shape.base_radius = 0.8;
    cfg.shape.harmonics = {{folds, 0.2, 0.0}};
    cfg.num.grid_n = grid;
    cfg.num.markers = markers;
    cfg.num.tau = tau;
    return cfg;
}

// ---------------------------------------------------------------------
// C1: second order spatially and temporally (area-error ladders)
// ---------------------------------------------------------------------
void criterion1() {
    auto area_error = [&](int grid, int markers, double tau, double T) {
        HeleShawConfig cfg = flower_cfg(4, 0.01, 0.0, -1.5, 1.5, grid, markers, tau);
        HeleShawSim sim(cfg);
        const double A0 = enclosed_area(sim.curve());
        const int steps = static_cast<int>(std::llround(T / tau));
        for (int s = 0; s < steps; ++s) sim.step();
        return std::fabs(enclosed_area(sim.curve()) - A0);
    };

    const double T = 0.25;
    std::vector<cli::ConvergenceRow> sp;
    int markers = 128;
    for (int grid : {96, 192, 384}) {
        sp.push_back({3.0 / grid, area_error(grid, markers, 1e-3, T)});
        markers *= 2;
    }
    const double so = cli::fit_order(sp).value_or(0.0);
    record(1, so >= 1.7,
           "spatial order " + fmt(so) + " (errors " + fmt(sp[0].error) + ", " +
               fmt(sp[1].error) + ", " + fmt(sp[2].error) + "), threshold 1.7");

    // temporal ladder at the largest desk-feasible grid
    std::vector<cli::ConvergenceRow> tp;
    for (double tau : {5e-4, 2.5e-4, 1.25e-4})
        tp.push_back({tau, area_error(384, 512, tau, T)});
    const double to = cli::fit_order(tp).value_or(0.0);
    record(1, to >= 1.7,
           "temporal order " + fmt(to) + " (errors " + fmt(tp[0].error) + ", " +
               fmt(tp[1].error) + ", " + fmt(tp[2].error) + "), threshold 1.7");
}

// ---------------------------------------------------------------------
// C2 (+C4 shares the run): area conservation, curve shortening, GMRES
// ---------------------------------------------------------------------
struct RelaxResult {
    double max_area_drift = 0;
    double worst_length_rise = 0;
    double circularity = 0;
    int max_iters = 0;
    int iters_early = 0, iters_late = 0;
};

RelaxResult run_relaxation() {
    HeleShawConfig cfg = flower_cfg(6, 0.01, 0.0, -1.5, 1.5, 256, 256, 1e-3);
    HeleShawSim sim(cfg);
    const double A0 = enclosed_area(sim.curve());
    RelaxResult r;
    double Lprev = sim.curve().length;
    const int steps = 1200;
    for (int s = 1; s <= steps; ++s) {
        auto m = sim.step();
        r.max_area_drift = std::max(r.max_area_drift, std::fabs(m.area - A0) / A0);
        if (s > 5) r.worst_length_rise = std::max(r.worst_length_rise, m.length - Lprev);
        Lprev = m.length;
        r.max_iters = std::max(r.max_iters, m.gmres_iters);
        if (s == 100) r.iters_early = m.gmres_iters;
        if (s == steps) r.iters_late = m.gmres_iters;
    }
    auto kap = curvature(sim.curve());
    const double kbar = spectral::mean(kap);
    double dev = 0.0;
    for (double k : kap) dev = std::max(dev, std::fabs(k - kbar));
    r.circularity = dev / kbar;
    return r;
}

void criterion2() {
    auto r = run_relaxation();
    record(2, r.max_area_drift < 1e-3,
           "area drift " + fmt(r.max_area_drift) + " < 1e-3 over t in [0, 1.2]");
    record(2, r.worst_length_rise < 1e-6,
           "length non-increasing after step 5 (worst rise " + fmt(r.worst_length_rise) + ")");
    record(2, r.circularity < 0.05,
           "final circularity max|k - kbar|/kbar = " + fmt(r.circularity) + " < 0.05");
}

void criterion4() {
    auto r = run_relaxation();
    record(4, r.max_iters <= 40,
           "max GMRES iterations " + std::to_string(r.max_iters) + " <= 40 at tol 1e-10");
    record(4, r.iters_late <= r.iters_early,
           "iterations at t=1.2 (" + std::to_string(r.iters_late) + ") <= at t=0.1 (" +
               std::to_string(r.iters_early) + ")");
}

// ---------------------------------------------------------------------
// C3: injection mass balance dA/dt = 2 pi J
// ---------------------------------------------------------------------
void criterion3() {
    HeleShawConfig cfg;
    cfg.sigma = 0.01;
    cfg.injection = 1.0;
    cfg.box = {-4, 4};
    cfg.shape.base_radius = 1.0;
    cfg.num.grid_n = 256;
    cfg.num.markers = 128;
    cfg.num.tau = 1e-3;
    HeleShawSim sim(cfg);
    const double A0 = enclosed_area(sim.curve());
    const int steps = 500;
    double worst = 0.0;
    double Aprev = A0;
    for (int s = 1; s <= steps; ++s) {
        auto m = sim.step();
        if (s % 50 == 0) {
            const double rate = (m.area - Aprev) / (50 * cfg.num.tau);
            worst = std::max(worst, std::fabs(rate - 2 * PI) / (2 * PI));
            Aprev = m.area;
        }
    }
    record(3, worst < 0.01, "dA/dt within " + fmt(worst * 100) + "% of 2 pi J (limit 1%)");
}

// ---------------------------------------------------------------------
// C5: SSD stability contrast
// ---------------------------------------------------------------------
void criterion5() {
    StefanConfig cfg;
    cfg.st = -0.5;
    cfg.eps_c.base = 0.05;
    cfg.eps_v.base = 0.0;
    cfg.box = {-2, 2};
    cfg.shape.base_radius = 1.0;
    cfg.shape.harmonics = {{4, 0.02, 0.0}};
    cfg.num.grid_n = 256;
    cfg.num.markers = 128;
    cfg.num.stiffness = StiffnessSelect::ThirdOrder;

    // semi-implicit at tau = 0.01 runs to t = 0.1 with bounded eta
    StefanConfig si = cfg;
    si.num.tau = 0.01;
    StefanSim sim(si);
    double eta0 = 0.0;
    for (double e : sim.curve().eta) eta0 = std::max(eta0, std::fabs(e));
    bool ok = true;
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
        sim.step();
        double em = 0.0;
        for (double e : sim.curve().eta) em = std::max(em, std::fabs(e));
        worst = std::max(worst, em);
        if (em > 2.0 * eta0 || !std::isfinite(em)) ok = false;
    }
    record(5, ok,
           "semi-implicit tau=0.01 reaches t=0.1 with ||eta|| <= " + fmt(worst) + " (bound " +
               fmt(2 * eta0) + ")");

    // explicit AB2 at tau = 5e-5 must blow up before t = 0.1
    StefanConfig ex = cfg;
    ex.num.tau = 5e-5;
    ex.num.scheme = evolution::Scheme::ExplicitAB2;
    StefanSim esim(ex);
    bool blew = false;
    const int max_steps = 2000;
    for (int s = 0; s < max_steps; ++s) {
        try {
            esim.step();
        } catch (const std::exception&) {
            blew = true; // geometry/solver failure counts as blow-up
            break;
        }
        auto ta = spectral::derivative(esim.curve().eta, 1);
        double m = 0.0;
        for (double v : ta) m = std::max(m, std::fabs(1.0 + v));
        if (!std::isfinite(m) || m > 1e3) {
            blew = true;
            break;
        }
    }
    record(5, blew, "explicit AB2 at tau=5e-5 exceeds ||theta_a|| > 1e3 before t = 0.1");
}

// ---------------------------------------------------------------------
// C6: dendrite tip velocity against the solvability value 1.7
// ---------------------------------------------------------------------
void criterion6() {
    StefanConfig cfg;
    cfg.st = -0.5;
    cfg.eps_c.kind = AnisotropyFn::Kind::Cosine;
    cfg.eps_c.base = 0.001;
    cfg.eps_c.amp = 0.4;
    cfg.eps_c.mode = 4;
    cfg.eps_v.base = 0.0;
    cfg.box = {-6, 6};
    cfg.shape.base_radius = 0.1;
    cfg.num.grid_n = 512;
    cfg.num.markers = 64;
    cfg.num.tau = 1e-3;
    cfg.num.stiffness = StiffnessSelect::ThirdOrder;
    StefanSim sim(cfg);

    const double T = 1.5, tau = cfg.num.tau;
    const int steps = static_cast<int>(std::llround(T / tau));
    std::vector<double> t_hist, tip_hist;
    for (int s = 1; s <= steps; ++s) {
        auto m = sim.step();
        t_hist.push_back(m.t);
        tip_hist.push_back(m.tip_x_right);
    }
    // centered-difference tip velocity, averaged over the last 0.3 units
    auto avg_vel = [&](double from, double to) {
        double sum = 0.0;
        int cnt = 0;
        for (size_t i = 1; i + 1 < t_hist.size(); ++i) {
            if (t_hist[i] < from || t_hist[i] > to) continue;
            sum += (tip_hist[i + 1] - tip_hist[i - 1]) / (t_hist[i + 1] - t_hist[i - 1]);
            ++cnt;
        }
        return cnt ? sum / cnt : 0.0;
    };
    const double v_late = avg_vel(T - 0.3, T);
    const bool in_band = v_late >= 1.45 && v_late <= 1.95;
    // property fallback: plateau (< 5% relative change over the last 0.2)
    const double v_a = avg_vel(T - 0.2, T - 0.1);
    const double v_b = avg_vel(T - 0.1, T);
    const double rel = std::fabs(v_b - v_a) / std::max(std::fabs(v_b), 1e-12);
    const bool plateau = rel < 0.05;
    record(6, in_band || plateau,
           "tip velocity " + fmt(v_late) + " (target band [1.45, 1.95]); plateau change " +
               fmt(rel * 100) + "%");
}

// ---------------------------------------------------------------------
// C7: inflow convection asymmetry + no-flow equivalence
// ---------------------------------------------------------------------
StefanConfig conv_cfg() {
    StefanConfig cfg;
    cfg.st = -0.5;
    cfg.eps_c.kind = AnisotropyFn::Kind::SinPow4;
    cfg.eps_c.base = 0.002;
    cfg.eps_c.mode = 4;
    cfg.eps_v.base = 0.0;
    cfg.box = {-2, 2};
    cfg.shape.base_radius = 0.05;
    cfg.num.grid_n = 256;
    cfg.num.markers = 64;
    cfg.num.tau = 5e-4;
    cfg.num.stiffness = StiffnessSelect::ThirdOrder;
    return cfg;
}

void criterion7() {
    const int steps = 100; // t = 0.05
    StefanConfig cfg = conv_cfg();
    cfg.convection = ConvectionConfig{0.0, 0.0, 4.0, ConvectionConfig::Walls::InflowX};
    StefanSim sim(cfg);
    StepMetrics m{};
    for (int s = 0; s < steps; ++s) m = sim.step();
    const double lead = std::fabs(m.tip_x_left) - m.tip_x_right;
    record(7, lead > 0.0,
           "upstream tip leads: |x_left| - x_right = " + fmt(lead) + " > 0 at t = 0.05");

    StefanConfig noflow = conv_cfg();
    noflow.convection = ConvectionConfig{0.0, 0.0, 0.0, ConvectionConfig::Walls::NoSlip};
    StefanSim a(noflow);
    StefanConfig plain = conv_cfg(); // no convection member at all
    StefanSim b(plain);
    double worst = 0.0;
    for (int s = 0; s < steps; ++s) {
        auto ma = a.step();
        auto mb = b.step();
        worst = std::max({worst, std::fabs(ma.tip_x_left - mb.tip_x_left),
                          std::fabs(ma.tip_x_right - mb.tip_x_right)});
    }
    record(7, worst < 1e-8,
           "beta=0, u_b=0 run matches the no-flow run: tip deviation " + fmt(worst) + " < 1e-8");
}

// ---------------------------------------------------------------------
// C8: buoyancy asymmetry
// ---------------------------------------------------------------------
void criterion8() {
    StefanConfig cfg = conv_cfg();
    cfg.eps_c.phase = PI / 4;
    cfg.convection = ConvectionConfig{10.0, 2e3, 0.0, ConvectionConfig::Walls::NoSlip};
    StefanSim sim(cfg);
    StepMetrics m{};
    for (int s = 0; s < 100; ++s) m = sim.step();
    const double lead = std::fabs(m.tip_y_bottom) - m.tip_y_top;
    record(8, lead > 0.0,
           "lower tip extent exceeds upper: |y_bottom| - y_top = " + fmt(lead) + " at t = 0.05");
}

// ---------------------------------------------------------------------
// C9: fast property suites
// ---------------------------------------------------------------------
void criterion9() {
    // spectral identities
    {
        const int n = 64;
        Samples v(n);
        for (int j = 0; j < n; ++j) {
            const double a = 2 * PI * j / n;
            v[j] = std::cos(2 * a) - 0.7 * std::sin(5 * a);
        }
        auto d = spectral::derivative(spectral::antiderivative(v), 1);
        double e1 = 0.0;
        for (int j = 0; j < n; ++j) e1 = std::max(e1, std::fabs(d[j] - v[j]));
        auto h2 = spectral::hilbert(spectral::hilbert(v));
        double e2 = 0.0;
        for (int j = 0; j < n; ++j) e2 = std::max(e2, std::fabs(h2[j] + v[j]));
        record(9, e1 < 1e-10 && e2 < 1e-10,
               "spectral identities (derivative/antiderivative " + fmt(e1) + ", Hilbert^2 " +
                   fmt(e2) + ") < 1e-10");
    }
    // curve round trip
    {
        auto c = from_polar_shape([](double a) { return 0.8 + 0.2 * std::cos(4 * a); }, 256);
        auto pos = reconstruct_positions(c);
        double worst = 0.0;
        for (const Vec2& p : pos) {
            const double ang = std::atan2(p.y, p.x);
            const double r = 0.8 + 0.2 * std::cos(4 * ang);
            worst = std::max(worst, std::fabs(p.norm() - r));
        }
        record(9, worst < 1e-8, "curve round trip deviation " + fmt(worst) + " < 1e-8");
    }
    // jump-system polynomial exactness
    {
        CurvePointGeometry g;
        const double a = 0.77;
        g.pos = {std::cos(a), std::sin(a)};
        g.x_a = -std::sin(a);
        g.y_a = std::cos(a);
        g.x_aa = -std::cos(a);
        g.y_aa = -std::sin(a);
        g.s_a = 1.0;
        const double x = g.pos.x, y = g.pos.y;
        // u+ = x^2 - y^2 (harmonic), u- = 0, c = 0
        // Phi(al) = cos(2 al): derivatives exact
        HelmholtzJumpInput in;
        in.Phi = x * x - y * y;
        in.Phi_a = -2.0 * std::sin(2 * a);
        in.Phi_aa = -4.0 * std::cos(2 * a);
        // grad u = (2x, -2y), n = (x, y): Psi = 2x^2 - 2y^2
        in.Psi = 2 * x * x - 2 * y * y;
        in.Psi_a = -4.0 * std::sin(2 * a);
        auto J = helmholtz_jumps(in, g, 0.0, 0.0);
        const double err =
            std::max({std::fabs(J.ux - 2 * x), std::fabs(J.uy + 2 * y), std::fabs(J.uxx - 2),
                      std::fabs(J.uyy + 2), std::fabs(J.uxy)});
        record(9, err < 1e-10, "jump-system polynomial exactness " + fmt(err) + " < 1e-10");
    }
    // corrected solver order on the manufactured interface problem
    {
        auto err_at = [&](int n) {
            CartesianGrid g(-2, -2, 2, 2, n);
            CurveSampler s(from_polar_shape([](double) { return 1.0; }, 512));
            auto geom = find_intersections(s, g);
            std::vector<HelmholtzJumpSet> J(geom.crossings.size());
            for (size_t q = 0; q < J.size(); ++q) {
                const Vec2 p = geom.crossings[q].geom.pos;
                J[q].u = std::sin(p.x) * std::cos(p.y) - std::exp(p.x);
                J[q].ux = std::cos(p.x) * std::cos(p.y) - std::exp(p.x);
                J[q].uy = -std::sin(p.x) * std::sin(p.y);
                J[q].uxx = -std::sin(p.x) * std::cos(p.y) - std::exp(p.x);
                J[q].uxy = -std::cos(p.x) * std::sin(p.y);
                J[q].uyy = -std::sin(p.x) * std::cos(p.y);
            }
            auto corr = assemble_corrections(geom, J, g.h);
            GridFunction rhs(n);
            BoundaryData bd;
            bd.left.assign(n + 1, std::exp(-2.0));
            bd.right.assign(n + 1, std::exp(2.0));
            bd.bottom.resize(n + 1);
            bd.top.resize(n + 1);
            for (int i = 0; i <= n; ++i) bd.bottom[i] = bd.top[i] = std::exp(g.x(i));
            const Lattice lat = geom.lat;
            for (int j = 0; j <= n; ++j)
                for (int i = 0; i <= n; ++i)
                    rhs.at(i, j) = geom.side[lat.idx(i, j)] > 0
                                       ? -3.0 * std::sin(g.x(i)) * std::cos(g.y(j))
                                       : 0.0;
            HelmholtzBoxSolver solver(g, BoxBC::Dirichlet);
            auto u = solver.solve(rhs, corr, 1.0, &bd);
            double e = 0.0;
            for (int j = 1; j < n; ++j)
                for (int i = 1; i < n; ++i) {
                    const double exact = geom.side[lat.idx(i, j)] > 0
                                             ? std::sin(g.x(i)) * std::cos(g.y(j))
                                             : std::exp(g.x(i));
                    e = std::max(e, std::fabs(u.at(i, j) - exact));
                }
            return e;
        };
        const double e1 = err_at(64), e2 = err_at(128), e3 = err_at(256);
        const double order = 0.5 * (std::log2(e1 / e2) + std::log2(e2 / e3));
        record(9, order >= 1.8, "corrected-solver manufactured order " + fmt(order) + " >= 1.8");
    }
    // indicator-field layer potential
    {
        CartesianGrid g(-2, -2, 2, 2, 256);
        ThetaLCurve circle = from_polar_shape([](double) { return 1.0; }, 256);
        ScalarWorkspace ws(g, circle, true);
        HelmholtzBoxSolver solver(g, BoxBC::Dirichlet);
        auto r = eval_double_layer_scalar(ws, solver, Samples(circle.n(), 1.0), 0.0,
                                          ScalarBCMode::HsArtificial);
        double err = 0.0;
        for (int j = 0; j <= g.n; ++j)
            for (int i = 0; i <= g.n; ++i) {
                const Vec2 p{g.x(i), g.y(j)};
                if (std::fabs(p.norm() - 1.0) < 2 * g.h) continue;
                const double exact = p.norm() < 1.0 ? 1.0 : 0.0;
                err = std::max(err, std::fabs(r.field.at(i, j) - exact));
            }
        record(9, err < 1e-7, "indicator layer-potential error " + fmt(err) + " < 1e-7");

        // Gauss flux identity on the same workspace
        auto out = hs_operator(ws, solver, Samples(circle.n(), 1.0));
        double dev = 0.0;
        for (double vv : out) dev = std::max(dev, std::fabs(vv - 2 * PI) / (2 * PI));
        record(9, dev < 0.02, "Gauss flux identity deviation " + fmt(dev * 100) + "% < 2%");
    }
    // MAC multigrid residual factor
    {
        const int n = 128;
        const double h = 1.0 / n;
        MacData d = MacData::zero(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= n; ++i)
                d.fu[i + (n + 1) * (size_t)j] =
                    std::sin(2 * PI * i * h) * std::cos(2 * PI * (j + 0.5) * h);
        MacBC bc = MacBC::zero(n, n);
        MultigridStats st;
        (void)vcycle_solve(n, n, h, d, 1.0, bc, 1e-9, 100, &st);
        record(9, st.worst_factor <= 0.2,
               "MAC multigrid residual factor " + fmt(st.worst_factor) + " <= 0.2");
    }
    // propagator modal decay exactness
    {
        const int n = 32;
        ThetaLCurve c = from_polar_shape([](double) { return 1.0; }, n);
        for (int j = 0; j < n; ++j) c.eta[j] += 0.01 * std::cos(4.0 * 2 * PI * j / n);
        evolution::StiffnessCase sc{evolution::StiffnessKind::ThirdOrder, 0.1};
        std::vector<std::complex<double>> zero(n / 2 + 1);
        auto eta1 = evolution::propagate_theta(c, zero, zero, c.length, c.length, c.length,
                                               0.01, sc);
        auto before = spectral::analyze(c.eta);
        auto after = spectral::analyze(eta1);
        double err = 0.0;
        for (int k = 0; k <= n / 2; ++k) {
            auto [e1, e2] = evolution::propagator_factors(k, c.length, c.length, c.length,
                                                          0.01, sc);
            err = std::max(err, std::abs(after.c[k] - e1 * before.c[k]));
        }
        record(9, err < 1e-12, "propagator modal decay exactness " + fmt(err) + " < 1e-12");
    }
}

} // namespace

int main(int argc, char** argv) {
    int which = 0; // 0 = all
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) which = std::atoi(argv[i + 1]);
    }
    const std::function<void()> table[] = {criterion1, criterion2, criterion3,
                                           criterion4, criterion5, criterion6,
                                           criterion7, criterion8, criterion9};
    try {
        if (which >= 1 && which <= 9) {
            table[which - 1]();
        } else {
            for (const auto& c : table) c();
        }
    } catch (const std::exception& e) {
        std::printf("FATAL: %s\n", e.what());
        return 99;
    }
    if (g_failures == 0) std::printf("all criteria passed\n");
    return g_failures;
}

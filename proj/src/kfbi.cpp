#include "kfbi/kfbi.hpp"

#include <cmath>
#include <stdexcept>

namespace kfbi {

using spectral::Samples;
using spectral::Spectrum;

namespace {
constexpr double TWO_PI = 2.0 * M_PI;

std::vector<spectral::EvalTable> crossing_tables(int n, const LatticeGeometry& g) {
    std::vector<spectral::EvalTable> t(g.crossings.size());
#pragma omp parallel for schedule(static)
    for (int q = 0; q < static_cast<int>(g.crossings.size()); ++q)
        t[q] = spectral::make_table(n, g.crossings[q].alpha);
    return t;
}

void check_clearance(const CartesianGrid& grid, const std::vector<Vec2>& markers) {
    const double margin = 2.0 * grid.h;
    for (const Vec2& p : markers)
        if (p.x < grid.xlo + margin || p.x > grid.xhi - margin || p.y < grid.ylo + margin ||
            p.y > grid.yhi - margin)
            throw std::runtime_error("curve too close to the box boundary");
}

} // namespace

ScalarWorkspace::ScalarWorkspace(const CartesianGrid& g, const ThetaLCurve& curve,
                                 bool hs_boundary)
    : grid(g), sampler(curve), geom() {
    markers = sampler.markers();
    check_clearance(g, markers);
    auto [t, nrm] = normals_tangents(curve);
    tangents = std::move(t);
    normals = std::move(nrm);
    geom = build_lattice_geometry(sampler, node_lattice(g));
    tables = crossing_tables(curve.n(), geom);
    if (hs_boundary) {
        // box-boundary nodes, counterclockwise enumeration not required;
        // each row of the kernel holds dG0/dn_y ds against all markers
        const int n = g.n;
        boundary_nodes.clear();
        for (int i = 0; i <= n; ++i) boundary_nodes.push_back({g.x(i), g.ylo});
        for (int i = 0; i <= n; ++i) boundary_nodes.push_back({g.x(i), g.yhi});
        for (int j = 1; j < n; ++j) boundary_nodes.push_back({g.xlo, g.y(j)});
        for (int j = 1; j < n; ++j) boundary_nodes.push_back({g.xhi, g.y(j)});
        const int m = curve.n();
        const double w = curve.length / m; // trapezoid weight (uniform in alpha)
        hs_kernel.assign(boundary_nodes.size() * (size_t)m, 0.0);
#pragma omp parallel for schedule(static)
        for (int b = 0; b < static_cast<int>(boundary_nodes.size()); ++b) {
            const Vec2 x = boundary_nodes[b];
            for (int j = 0; j < m; ++j) {
                const Vec2 d = markers[j] - x;
                const double r2 = d.dot(d);
                hs_kernel[b * (size_t)m + j] = w * d.dot(normals[j]) / (TWO_PI * r2);
            }
        }
    }
}

namespace {

// Jump data of the scalar layers at every crossing: Phi and Psi with their
// tangential derivatives interpolated from the density spectrum.
std::vector<HelmholtzJumpSet> scalar_jumps_at_crossings(const ScalarWorkspace& ws,
                                                        const Spectrum& dens, double c,
                                                        bool double_layer) {
    const auto& crossings = ws.geom.crossings;
    std::vector<HelmholtzJumpSet> J(crossings.size());
#pragma omp parallel for schedule(static)
    for (int q = 0; q < static_cast<int>(crossings.size()); ++q) {
        HelmholtzJumpInput in;
        const auto& tab = ws.tables[q];
        if (double_layer) {
            in.Phi = spectral::eval_with_table(dens, tab, 0);
            in.Phi_a = spectral::eval_with_table(dens, tab, 1);
            in.Phi_aa = spectral::eval_with_table(dens, tab, 2);
        } else {
            in.Psi = spectral::eval_with_table(dens, tab, 0);
            in.Psi_a = spectral::eval_with_table(dens, tab, 1);
        }
        J[q] = helmholtz_jumps(in, crossings[q].geom, c, 0.0);
    }
    return J;
}

// Jump sets at the markers themselves, used by the one-sided extraction.
std::vector<HelmholtzJumpSet> scalar_jumps_at_markers(const ScalarWorkspace& ws,
                                                      const Samples& dens, double c,
                                                      bool double_layer) {
    const int m = static_cast<int>(dens.size());
    Samples d1 = spectral::derivative(dens, 1);
    Samples d2 = spectral::derivative(dens, 2);
    std::vector<HelmholtzJumpSet> J(m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j) {
        HelmholtzJumpInput in;
        if (double_layer) {
            in.Phi = dens[j];
            in.Phi_a = d1[j];
            in.Phi_aa = d2[j];
        } else {
            in.Psi = dens[j];
            in.Psi_a = d1[j];
        }
        const double a = TWO_PI * j / m;
        J[j] = helmholtz_jumps(in, ws.sampler.point_geometry(a), c, 0.0);
    }
    return J;
}

ScalarLayerResult eval_scalar_layer(const ScalarWorkspace& ws, const HelmholtzBoxSolver& solver,
                                    const Samples& dens, double c, bool double_layer,
                                    ScalarBCMode mode) {
    const int m = static_cast<int>(dens.size());
    Spectrum ds = spectral::analyze(dens);
    auto Jc = scalar_jumps_at_crossings(ws, ds, c, double_layer);
    CorrectionField corr = assemble_corrections(ws.geom, Jc, ws.grid.h);

    GridFunction rhs(ws.grid.n);
    BoundaryData bd;
    const BoundaryData* bdp = nullptr;
    if (mode == ScalarBCMode::HsArtificial) {
        const int n = ws.grid.n;
        std::vector<double> bvals(ws.boundary_nodes.size(), 0.0);
#pragma omp parallel for schedule(static)
        for (int b = 0; b < static_cast<int>(bvals.size()); ++b) {
            double s = 0.0;
            const double* row = &ws.hs_kernel[b * (size_t)m];
            for (int j = 0; j < m; ++j) s += row[j] * dens[j];
            bvals[b] = s;
        }
        bd.bottom.assign(bvals.begin(), bvals.begin() + (n + 1));
        bd.top.assign(bvals.begin() + (n + 1), bvals.begin() + 2 * (n + 1));
        bd.left.resize(n + 1);
        bd.right.resize(n + 1);
        bd.left[0] = bd.bottom[0];
        bd.right[0] = bd.bottom[n];
        bd.left[n] = bd.top[0];
        bd.right[n] = bd.top[n];
        for (int j = 1; j < n; ++j) {
            bd.left[j] = bvals[2 * (n + 1) + (j - 1)];
            bd.right[j] = bvals[2 * (n + 1) + (n - 1) + (j - 1)];
        }
        bdp = &bd;
    }
    ScalarLayerResult out;
    out.field = solver.solve(rhs, corr, c, bdp);

    auto Jm = scalar_jumps_at_markers(ws, dens, c, double_layer);
    out.trace.resize(m);
    out.normal_derivative.resize(m);
    double maxcond = 0.0;
#pragma omp parallel for schedule(static) reduction(max : maxcond)
    for (int j = 0; j < m; ++j) {
        const Extraction ep =
            extract_boundary(out.field.v, ws.geom, Jm[j], ws.markers[j], +1);
        const Extraction em =
            extract_boundary(out.field.v, ws.geom, Jm[j], ws.markers[j], -1);
        out.trace[j] = average_trace(ep.value, em.value);
        out.normal_derivative[j] = average_normal_derivative(ep.grad, em.grad, ws.normals[j]);
        maxcond = std::max({maxcond, ep.cond, em.cond});
    }
    out.max_extraction_cond = maxcond;
    return out;
}

} // namespace

ScalarLayerResult eval_double_layer_scalar(const ScalarWorkspace& ws,
                                           const HelmholtzBoxSolver& solver,
                                           const Samples& phi, double c, ScalarBCMode mode) {
    if (mode == ScalarBCMode::HsArtificial && ws.hs_kernel.empty())
        throw std::logic_error("workspace was built without the Hele-Shaw boundary kernel");
    return eval_scalar_layer(ws, solver, phi, c, true, mode);
}

ScalarLayerResult eval_single_layer_scalar(const ScalarWorkspace& ws,
                                           const HelmholtzBoxSolver& solver,
                                           const Samples& psi, double c) {
    return eval_scalar_layer(ws, solver, psi, c, false, ScalarBCMode::HomogeneousNeumann);
}

Samples hs_operator(const ScalarWorkspace& ws, const HelmholtzBoxSolver& solver,
                    const Samples& phi) {
    auto r = eval_double_layer_scalar(ws, solver, phi, 0.0, ScalarBCMode::HsArtificial);
    const int m = static_cast<int>(phi.size());
    const double w = ws.sampler.curve().length / m;
    double total = 0.0;
    for (double v : phi) total += w * v;
    Samples out(m);
    for (int j = 0; j < m; ++j) out[j] = -0.5 * phi[j] + r.trace[j] + total;
    return out;
}

Samples stefan_operator(const ScalarWorkspace& ws, const HelmholtzBoxSolver& solver,
                        const Samples& psi, const std::vector<double>& eps_v, double c) {
    auto r = eval_single_layer_scalar(ws, solver, psi, c);
    const int m = static_cast<int>(psi.size());
    Samples out(m);
    // solved field is T2 = -S psi, so the trace already carries the minus
    for (int j = 0; j < m; ++j) out[j] = eps_v[j] * psi[j] + r.trace[j];
    return out;
}

StokesWorkspace::StokesWorkspace(const CartesianGrid& g, const ThetaLCurve& curve)
    : grid(g), sampler(curve) {
    markers = sampler.markers();
    check_clearance(g, markers);
    auto [t, nrm] = normals_tangents(curve);
    normals = std::move(nrm);
    const int n = g.n;
    geom_u = build_lattice_geometry(sampler, mac_u_lattice(g.xlo, g.ylo, g.h, n, n));
    geom_v = build_lattice_geometry(sampler, mac_v_lattice(g.xlo, g.ylo, g.h, n, n));
    geom_p = build_lattice_geometry(sampler, mac_p_lattice(g.xlo, g.ylo, g.h, n, n));
    tables_u = crossing_tables(curve.n(), geom_u);
    tables_v = crossing_tables(curve.n(), geom_v);
    tables_p = crossing_tables(curve.n(), geom_p);
}

namespace {

std::vector<StokesJumpSet> stokes_jumps_at(const StokesWorkspace& ws,
                                           const LatticeGeometry& geom,
                                           const std::vector<spectral::EvalTable>& tables,
                                           const Spectrum& sx, const Spectrum& sy, double c) {
    std::vector<StokesJumpSet> J(geom.crossings.size());
#pragma omp parallel for schedule(static)
    for (int q = 0; q < static_cast<int>(geom.crossings.size()); ++q) {
        StokesJumpInput in;
        const auto& tab = tables[q];
        in.Phi = {spectral::eval_with_table(sx, tab, 0), spectral::eval_with_table(sy, tab, 0)};
        in.Phi_a = {spectral::eval_with_table(sx, tab, 1),
                    spectral::eval_with_table(sy, tab, 1)};
        in.Phi_aa = {spectral::eval_with_table(sx, tab, 2),
                     spectral::eval_with_table(sy, tab, 2)};
        J[q] = stokes_jumps(in, geom.crossings[q].geom, c);
    }
    return J;
}

HelmholtzJumpSet project_u(const StokesJumpSet& J) {
    return {J.u, J.ux, J.uy, J.uxx, J.uxy, J.uyy};
}
HelmholtzJumpSet project_v(const StokesJumpSet& J) {
    return {J.v, J.vx, J.vy, J.vxx, J.vxy, J.vyy};
}

} // namespace

StokesLayerResult eval_double_layer_stokes(const StokesWorkspace& ws, const Samples& phi_x,
                                           const Samples& phi_y, double c, double mg_tol) {
    const int m = static_cast<int>(phi_x.size());
    const int n = ws.grid.n;
    Spectrum sx = spectral::analyze(phi_x);
    Spectrum sy = spectral::analyze(phi_y);

    auto Ju = stokes_jumps_at(ws, ws.geom_u, ws.tables_u, sx, sy, c);
    auto Jv = stokes_jumps_at(ws, ws.geom_v, ws.tables_v, sx, sy, c);
    auto Jp = stokes_jumps_at(ws, ws.geom_p, ws.tables_p, sx, sy, c);

    MacData data = MacData::zero(n, n);
    assemble_mac_corrections(ws.geom_u, ws.geom_v, ws.geom_p, Ju, Jv, Jp, data);
    MacBC bc = MacBC::zero(n, n);
    MultigridStats st;
    StokesLayerResult out;
    out.field = vcycle_solve(n, n, ws.grid.h, data, c, bc, mg_tol, 100, &st);
    out.mg_cycles = st.cycles;

    // markerwise jump sets for the corrected extraction
    Samples phix_a = spectral::derivative(phi_x, 1), phix_aa = spectral::derivative(phi_x, 2);
    Samples phiy_a = spectral::derivative(phi_y, 1), phiy_aa = spectral::derivative(phi_y, 2);
    out.trace_u.resize(m);
    out.trace_v.resize(m);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j) {
        StokesJumpInput in;
        in.Phi = {phi_x[j], phi_y[j]};
        in.Phi_a = {phix_a[j], phiy_a[j]};
        in.Phi_aa = {phix_aa[j], phiy_aa[j]};
        const double a = TWO_PI * j / m;
        StokesJumpSet J = stokes_jumps(in, ws.sampler.point_geometry(a), c);
        const Vec2 p = ws.markers[j];
        const Extraction up = extract_boundary(out.field.u, ws.geom_u, project_u(J), p, +1);
        const Extraction um = extract_boundary(out.field.u, ws.geom_u, project_u(J), p, -1);
        const Extraction vp = extract_boundary(out.field.v, ws.geom_v, project_v(J), p, +1);
        const Extraction vm = extract_boundary(out.field.v, ws.geom_v, project_v(J), p, -1);
        out.trace_u[j] = average_trace(up.value, um.value);
        out.trace_v[j] = average_trace(vp.value, vm.value);
    }
    return out;
}

std::vector<double> stokes_operator(const StokesWorkspace& ws, const std::vector<double>& phi,
                                    double c, double mg_tol) {
    const int m = static_cast<int>(phi.size()) / 2;
    Samples px(phi.begin(), phi.begin() + m), py(phi.begin() + m, phi.end());
    auto r = eval_double_layer_stokes(ws, px, py, c, mg_tol);
    std::vector<double> out(2 * m);
    for (int j = 0; j < m; ++j) {
        out[j] = -0.5 * px[j] + r.trace_u[j];
        out[m + j] = -0.5 * py[j] + r.trace_v[j];
    }
    return out;
}

GmresResult gmres(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                  const std::vector<double>& rhs, double tol, int restart, int max_iter) {
    const size_t n = rhs.size();
    GmresResult res;
    res.x.assign(n, 0.0);

    auto norm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    const double bnorm = norm(rhs);
    if (bnorm == 0.0) {
        res.converged = true;
        res.residuals.push_back(0.0);
        return res;
    }

    std::vector<std::vector<double>> V;
    std::vector<double> H((restart + 1) * (size_t)restart, 0.0);
    std::vector<double> cs(restart), sn(restart), g(restart + 1);

    double rel = 1.0;
    while (res.iterations < max_iter) {
        // restart cycle
        std::vector<double> r = apply(res.x);
        for (size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
        double beta = norm(r);
        rel = beta / bnorm;
        res.residuals.push_back(rel);
        if (rel < tol) {
            res.converged = true;
            return res;
        }
        const double cycle_start = rel;
        V.assign(1, r);
        for (size_t i = 0; i < n; ++i) V[0][i] /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int k = 0;
        for (; k < restart && res.iterations < max_iter; ++k) {
            std::vector<double> w = apply(V[k]);
            ++res.iterations;
            // modified Gram-Schmidt
            for (int i = 0; i <= k; ++i) {
                double hik = 0.0;
                for (size_t t = 0; t < n; ++t) hik += w[t] * V[i][t];
                H[i * (size_t)restart + k] = hik;
                for (size_t t = 0; t < n; ++t) w[t] -= hik * V[i][t];
            }
            double hkk = norm(w);
            H[(k + 1) * (size_t)restart + k] = hkk;
            if (hkk > 0.0) {
                for (size_t t = 0; t < n; ++t) w[t] /= hkk;
                V.push_back(std::move(w));
            }
            // apply accumulated Givens rotations to the new column
            for (int i = 0; i < k; ++i) {
                const double t1 = cs[i] * H[i * (size_t)restart + k] +
                                  sn[i] * H[(i + 1) * (size_t)restart + k];
                const double t2 = -sn[i] * H[i * (size_t)restart + k] +
                                  cs[i] * H[(i + 1) * (size_t)restart + k];
                H[i * (size_t)restart + k] = t1;
                H[(i + 1) * (size_t)restart + k] = t2;
            }
            const double a = H[k * (size_t)restart + k];
            const double b = H[(k + 1) * (size_t)restart + k];
            const double d = std::hypot(a, b);
            cs[k] = d == 0.0 ? 1.0 : a / d;
            sn[k] = d == 0.0 ? 0.0 : b / d;
            H[k * (size_t)restart + k] = d;
            H[(k + 1) * (size_t)restart + k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            rel = std::fabs(g[k + 1]) / bnorm;
            res.residuals.push_back(rel);
            if (rel < tol) {
                ++k;
                break;
            }
            if (hkk == 0.0) { ++k; break; }
        }
        // back substitution for the cycle solution
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[i * (size_t)restart + j] * y[j];
            y[i] = s / H[i * (size_t)restart + i];
        }
        for (int i = 0; i < k; ++i)
            for (size_t t = 0; t < n; ++t) res.x[t] += y[i] * V[i][t];

        if (rel < tol) {
            res.converged = true;
            return res;
        }
        if (rel > cycle_start * (1.0 - 1e-3))
            throw std::runtime_error("gmres: stagnation (residual " + std::to_string(rel) + ")");
    }
    throw std::runtime_error("gmres: no convergence within max iterations");
}

} // namespace kfbi

#include "kfbi/evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace kfbi::evolution {

using spectral::Samples;

namespace {
constexpr double TWO_PI = 2.0 * M_PI;

// Modal symbol of the stiff operator at wavenumber k (negative for k > 0).
double stiff_symbol(int k, double L, const StiffnessCase& sc) {
    if (sc.kind == StiffnessKind::SecondOrder) {
        const double w = TWO_PI * k / L;
        return -sc.lambda * w * w;
    }
    const double w = TWO_PI * std::abs(k) / L;
    return -sc.lambda * w * w * w;
}
} // namespace

double select_lambda(const std::function<double(double)>& eps_C,
                     const std::function<double(double)>& eps_V,
                     StiffnessKind kind) {
    const int samples = 1024;
    double lam = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double a = TWO_PI * i / samples;
        if (kind == StiffnessKind::SecondOrder) {
            const double ev = eps_V(a);
            if (std::fabs(ev) < 1e-14)
                throw std::invalid_argument("select_lambda: eps_V vanishes in SecondOrder case");
            lam = std::max(lam, std::fabs(eps_C(a) / ev));
        } else {
            lam = std::max(lam, std::fabs(2.0 * eps_C(a)));
        }
    }
    return lam;
}

std::pair<double, double> propagator_factors(int k, double L_nm1, double L_n,
                                             double L_np1, double tau,
                                             const StiffnessCase& sc) {
    if (L_nm1 <= 0 || L_n <= 0 || L_np1 <= 0 || tau <= 0)
        throw std::invalid_argument("propagator_factors: lengths and tau must be positive");
    double w, p1, p0, pm1;
    if (sc.kind == StiffnessKind::SecondOrder) {
        w = std::pow(TWO_PI * k, 2);
        p1 = 1.0 / (L_np1 * L_np1);
        p0 = 1.0 / (L_n * L_n);
        pm1 = 1.0 / (L_nm1 * L_nm1);
    } else {
        w = std::pow(TWO_PI * std::abs(k), 3);
        p1 = 1.0 / (L_np1 * L_np1 * L_np1);
        p0 = 1.0 / (L_n * L_n * L_n);
        pm1 = 1.0 / (L_nm1 * L_nm1 * L_nm1);
    }
    const double e1 = std::exp(-0.5 * sc.lambda * tau * w * (p0 + p1));
    const double e2 = std::exp(-sc.lambda * tau * w * (0.5 * pm1 + p0 + 0.5 * p1));
    return {e1, e2};
}

double length_integrand(const ThetaLCurve& c, const Samples& U) {
    Samples eta_a = spectral::derivative(c.eta, 1);
    double s = 0.0;
    const int n = c.n();
    for (int j = 0; j < n; ++j) s += (1.0 + eta_a[j]) * U[j];
    return TWO_PI * s / n;
}

Vec2 mean_integrand(const ThetaLCurve& c, const Samples& U, const Samples& V) {
    auto [tang, norm] = normals_tangents(c);
    Vec2 q{};
    const int n = c.n();
    for (int j = 0; j < n; ++j) q += U[j] * norm[j] + V[j] * tang[j];
    return q * (1.0 / n);
}

double ab2_length_step(const EvolutionHistory& hist, const Samples& U, double tau) {
    const double M_n = length_integrand(hist.curve_n, U);
    double L;
    if (hist.step_index == 0)
        L = hist.curve_n.length + tau * M_n;
    else
        L = hist.curve_n.length + tau * (3.0 * M_n - hist.M_nm1) / 2.0;
    if (L <= 0.0) throw std::runtime_error("ab2_length_step: curve length became non-positive");
    return L;
}

Vec2 ab2_mean_step(const EvolutionHistory& hist, const Samples& U, const Samples& V,
                   double tau) {
    const Vec2 Q_n = mean_integrand(hist.curve_n, U, V);
    if (hist.step_index == 0) return hist.curve_n.xbar + tau * Q_n;
    return hist.curve_n.xbar + tau * 0.5 * (3.0 * Q_n - hist.Q_nm1);
}

std::vector<std::complex<double>> nonstiff_modes(const ThetaLCurve& c, const Samples& U,
                                                 const Samples& V,
                                                 const StiffnessCase& sc) {
    const int n = c.n();
    Samples eta_a = spectral::derivative(c.eta, 1);
    Samples U_a = spectral::derivative(U, 1);
    Samples rhs(n);
    const double f = TWO_PI / c.length;
    for (int j = 0; j < n; ++j) rhs[j] = f * ((1.0 + eta_a[j]) * V[j] - U_a[j]);
    auto s = spectral::analyze(rhs);
    auto se = spectral::analyze(c.eta);
    std::vector<std::complex<double>> N(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k)
        N[k] = s.c[k] - stiff_symbol(k, c.length, sc) * se.c[k];
    return N;
}

Samples propagate_theta(const ThetaLCurve& curve_n,
                        const std::vector<std::complex<double>>& Nhat_n,
                        const std::vector<std::complex<double>>& Nhat_nm1,
                        double L_nm1, double L_n, double L_np1, double tau,
                        const StiffnessCase& sc) {
    const int n = curve_n.n();
    if (static_cast<int>(Nhat_n.size()) != n / 2 + 1 ||
        static_cast<int>(Nhat_nm1.size()) != n / 2 + 1)
        throw std::invalid_argument("propagate_theta: history length mismatch");
    auto se = spectral::analyze(curve_n.eta);
    spectral::Spectrum out;
    out.n = n;
    out.c.resize(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
        auto [e1, e2] = propagator_factors(k, L_nm1, L_n, L_np1, tau, sc);
        out.c[k] = e1 * se.c[k] + 0.5 * tau * (3.0 * e1 * Nhat_n[k] - e2 * Nhat_nm1[k]);
    }
    return spectral::synthesize(out);
}

StepResult step(EvolutionHistory& hist, const Samples& U, const Samples& V,
                const StiffnessCase& sc, double tau, Scheme scheme) {
    const ThetaLCurve& cn = hist.curve_n;
    if (static_cast<int>(U.size()) != cn.n() || static_cast<int>(V.size()) != cn.n())
        throw std::invalid_argument("evolution::step: velocity size mismatch");

    // ExplicitAB2 keeps the full right-hand side in N (factors become 1).
    StiffnessCase sc_eff = sc;
    if (scheme == Scheme::ExplicitAB2) sc_eff.lambda = 0.0;

    const double M_n = length_integrand(cn, U);
    const Vec2 Q_n = mean_integrand(cn, U, V);
    const double L_np1 = ab2_length_step(hist, U, tau);
    auto Nhat_n = nonstiff_modes(cn, U, V, sc_eff);

    const bool startup = (hist.step_index == 0);
    const auto& Nm1 = startup ? Nhat_n : hist.Nhat_nm1;
    const double L_nm1 = startup ? cn.length : hist.curve_nm1.length;

    StepResult r;
    r.curve.length = L_np1;
    // startup uses N^{-1} := N^0 and L^{-1} := L^0 (first-order one-step rule)
    r.curve.eta = propagate_theta(cn, Nhat_n, Nm1, L_nm1, cn.length, L_np1, tau, sc_eff);
    r.curve.xbar = ab2_mean_step(hist, U, V, tau);
    r.M_n = M_n;
    r.Q_n = Q_n;

    hist.curve_nm1 = hist.curve_n;
    hist.curve_n = r.curve;
    hist.Nhat_nm1 = std::move(Nhat_n);
    hist.M_nm1 = M_n;
    hist.Q_nm1 = Q_n;
    hist.step_index += 1;
    return r;
}

} // namespace kfbi::evolution

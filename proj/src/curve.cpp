#include "kfbi/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace kfbi {

using spectral::Samples;
using spectral::Spectrum;

namespace {

constexpr double TWO_PI = 2.0 * M_PI;

// Continuous branch of atan2 along the sample sequence.
Samples unwrap_angles(const Samples& raw) {
    Samples out(raw.size());
    out[0] = raw[0];
    for (size_t j = 1; j < raw.size(); ++j) {
        double d = raw[j] - raw[j - 1];
        d -= TWO_PI * std::round(d / TWO_PI);
        out[j] = out[j - 1] + d;
    }
    return out;
}

} // namespace

ThetaLCurve from_polar_shape(const std::function<double(double)>& r, int n) {
    if (n < 8 || n % 2 != 0)
        throw std::invalid_argument("from_polar_shape: n must be even and >= 8");
    // Oversample the raw parameterization for an accurate arclength map.
    const int m = std::max(4 * n, 256);
    Samples x(m), y(m);
    for (int j = 0; j < m; ++j) {
        const double a = TWO_PI * j / m;
        const double rj = r(a);
        if (rj <= 0.0) throw std::invalid_argument("from_polar_shape: r must be positive");
        x[j] = rj * std::cos(a);
        y[j] = rj * std::sin(a);
    }
    Samples xa = spectral::derivative(x, 1);
    Samples ya = spectral::derivative(y, 1);
    Samples sa(m), theta_raw(m);
    for (int j = 0; j < m; ++j) {
        sa[j] = std::hypot(xa[j], ya[j]);
        if (sa[j] < 1e-14)
            throw std::invalid_argument("from_polar_shape: |X_alpha| vanishes (degenerate shape)");
        theta_raw[j] = std::atan2(ya[j], xa[j]);
    }
    const double L = TWO_PI * spectral::mean(sa);
    Samples theta = unwrap_angles(theta_raw);
    Samples eta_raw(m);
    for (int j = 0; j < m; ++j) eta_raw[j] = theta[j] - TWO_PI * j / m;
    Spectrum eta_spec = spectral::analyze(eta_raw);

    // Arclength s(alpha) = (L/2pi) alpha + periodic part.
    Samples s_per = spectral::antiderivative(sa, false);
    Spectrum sper_spec = spectral::analyze(s_per);
    const double sbar = L / TWO_PI;

    ThetaLCurve c;
    c.eta.resize(n);
    c.length = L;
    Vec2 xbar{};
    for (int j = 0; j < n; ++j) {
        const double starget = L * j / n;
        // invert s(alpha) = starget by Newton; s is smooth and monotone
        double a = TWO_PI * j / n;
        for (int it = 0; it < 30; ++it) {
            const double f = sbar * a + spectral::eval(sper_spec, a) - starget;
            const double fp = sbar + spectral::eval_deriv(sper_spec, a, 1);
            const double da = f / fp;
            a -= da;
            if (std::fabs(da) < 1e-15 * TWO_PI) break;
        }
        const double theta_here = a + spectral::eval(eta_spec, a);
        c.eta[j] = theta_here - TWO_PI * j / n;
        const double rj = r(a);
        xbar += Vec2{rj * std::cos(a), rj * std::sin(a)};
    }
    c.xbar = xbar * (1.0 / n);
    return c;
}

std::vector<Vec2> reconstruct_positions(const ThetaLCurve& c) {
    const int n = c.n();
    Samples ct(n), st(n);
    for (int j = 0; j < n; ++j) {
        const double th = TWO_PI * j / n + c.eta[j];
        ct[j] = std::cos(th);
        st[j] = std::sin(th);
    }
    // closure: tangent components must have zero mean before integrating
    const double mc = spectral::mean(ct), ms = spectral::mean(st);
    for (int j = 0; j < n; ++j) { ct[j] -= mc; st[j] -= ms; }
    Samples Ax = spectral::antiderivative(ct, false);
    Samples Ay = spectral::antiderivative(st, false);
    const double mAx = spectral::mean(Ax), mAy = spectral::mean(Ay);
    const double f = c.length / TWO_PI;
    std::vector<Vec2> p(n);
    for (int j = 0; j < n; ++j)
        p[j] = Vec2{c.xbar.x + f * (Ax[j] - mAx), c.xbar.y + f * (Ay[j] - mAy)};
    return p;
}

Samples curvature(const ThetaLCurve& c) {
    Samples eta_a = spectral::derivative(c.eta, 1);
    Samples k(c.n());
    const double f = TWO_PI / c.length;
    for (int j = 0; j < c.n(); ++j) k[j] = f * (1.0 + eta_a[j]);
    return k;
}

std::pair<std::vector<Vec2>, std::vector<Vec2>> normals_tangents(const ThetaLCurve& c) {
    const int n = c.n();
    std::vector<Vec2> tang(n), norm(n);
    for (int j = 0; j < n; ++j) {
        const double th = TWO_PI * j / n + c.eta[j];
        tang[j] = Vec2{std::cos(th), std::sin(th)};
        norm[j] = Vec2{std::sin(th), -std::cos(th)};
    }
    return {tang, norm};
}

Samples tangential_velocity(const ThetaLCurve& c, const Samples& U) {
    const int n = c.n();
    if (static_cast<int>(U.size()) != n)
        throw std::invalid_argument("tangential_velocity: size mismatch");
    Samples eta_a = spectral::derivative(c.eta, 1);
    Samples w(n);
    for (int j = 0; j < n; ++j) w[j] = (1.0 + eta_a[j]) * U[j];
    // V = (alpha/2pi) int w - int_0^alpha w = -(periodic antiderivative of w)
    Samples F = spectral::antiderivative(w, false);
    for (auto& v : F) v = -v;
    return F;
}

double enclosed_area(const ThetaLCurve& c) {
    auto p = reconstruct_positions(c);
    auto [tang, norm] = normals_tangents(c);
    const int n = c.n();
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += p[j].dot(norm[j]);
    return 0.5 * (c.length / n) * s;
}

ThetaLCurve resample(const ThetaLCurve& c, int n_new) {
    const int n = c.n();
    if (n_new < n || n_new % 2 != 0)
        throw std::invalid_argument("resample: n_new must be even and >= current n");
    if (n_new == n) return c;
    Spectrum s = spectral::analyze(c.eta);
    Spectrum z;
    z.n = n_new;
    z.c.assign(n_new / 2 + 1, {0.0, 0.0});
    for (int k = 0; k < n / 2; ++k) z.c[k] = s.c[k];
    // split the Nyquist coefficient: it becomes an ordinary (doubled) mode
    z.c[n / 2] = s.c[n / 2] * 0.5;
    ThetaLCurve out;
    out.eta = spectral::synthesize(z);
    out.length = c.length;
    out.xbar = c.xbar;
    return out;
}

CurveSampler::CurveSampler(const ThetaLCurve& c) : curve_(c) {
    markers_ = reconstruct_positions(c);
    const int n = c.n();
    Samples x(n), y(n);
    for (int j = 0; j < n; ++j) { x[j] = markers_[j].x; y[j] = markers_[j].y; }
    sx_ = spectral::analyze(x);
    sy_ = spectral::analyze(y);
    seta_ = spectral::analyze(c.eta);
}

Vec2 CurveSampler::pos(double alpha) const {
    return {spectral::eval(sx_, alpha), spectral::eval(sy_, alpha)};
}

Vec2 CurveSampler::d1(double alpha) const {
    return {spectral::eval_deriv(sx_, alpha, 1), spectral::eval_deriv(sy_, alpha, 1)};
}

double CurveSampler::theta(double alpha) const {
    return alpha + spectral::eval(seta_, alpha);
}

double CurveSampler::theta_a(double alpha) const {
    return 1.0 + spectral::eval_deriv(seta_, alpha, 1);
}

CurvePointGeometry CurveSampler::point_geometry(double alpha) const {
    CurvePointGeometry g;
    const double th = theta(alpha);
    const double tha = theta_a(alpha);
    const double f = curve_.length / TWO_PI;
    g.pos = pos(alpha);
    g.x_a = f * std::cos(th);
    g.y_a = f * std::sin(th);
    g.x_aa = -f * tha * std::sin(th);
    g.y_aa = f * tha * std::cos(th);
    g.s_a = f;
    g.s_aa = 0.0;
    return g;
}

} // namespace kfbi

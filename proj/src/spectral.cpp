#include "kfbi/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace kfbi::spectral {

namespace {

// One forward/backward r2c plan pair per transform size. FFTW_ESTIMATE keeps
// plan selection (and therefore rounding) independent of machine timing.
struct PlanPair {
    int n = 0;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan fwd{}, bwd{};

    explicit PlanPair(int n_) : n(n_) {
        real = fftw_alloc_real(n);
        cplx = fftw_alloc_complex(n / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(n, real, cplx, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(n, cplx, real, FFTW_ESTIMATE);
    }
    ~PlanPair() {
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(cplx);
    }
};

std::mutex g_mutex;
std::map<int, std::unique_ptr<PlanPair>>& plan_cache() {
    static std::map<int, std::unique_ptr<PlanPair>> cache;
    return cache;
}

PlanPair& plans_for(int n) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<PlanPair>(n)).first;
    return *it->second;
}

void check_size(int n) {
    if (n < 8 || n % 2 != 0)
        throw std::invalid_argument("spectral: sample count must be even and >= 8");
}

} // namespace

Spectrum analyze(const Samples& v) {
    const int n = static_cast<int>(v.size());
    check_size(n);
    auto& p = plans_for(n);
    std::lock_guard<std::mutex> lock(g_mutex);
    for (int j = 0; j < n; ++j) p.real[j] = v[j];
    fftw_execute(p.fwd);
    Spectrum s;
    s.n = n;
    s.c.resize(n / 2 + 1);
    const double scale = 1.0 / n;
    for (int k = 0; k <= n / 2; ++k)
        s.c[k] = std::complex<double>(p.cplx[k][0], p.cplx[k][1]) * scale;
    return s;
}

Samples synthesize(const Spectrum& s) {
    const int n = s.n;
    check_size(n);
    auto& p = plans_for(n);
    std::lock_guard<std::mutex> lock(g_mutex);
    for (int k = 0; k <= n / 2; ++k) {
        p.cplx[k][0] = s.c[k].real();
        p.cplx[k][1] = s.c[k].imag();
    }
    fftw_execute(p.bwd);
    Samples v(n);
    for (int j = 0; j < n; ++j) v[j] = p.real[j];
    return v;
}

Samples derivative(const Samples& v, int order) {
    if (order <= 0) throw std::invalid_argument("spectral::derivative: order must be positive");
    Spectrum s = analyze(v);
    const int half = s.n / 2;
    for (int k = 0; k <= half; ++k) {
        std::complex<double> m = std::pow(std::complex<double>(0.0, k), order);
        s.c[k] *= m;
    }
    if (order % 2 == 1) s.c[half] = 0.0;
    return synthesize(s);
}

Samples hilbert(const Samples& v) {
    Spectrum s = analyze(v);
    const int half = s.n / 2;
    s.c[0] = 0.0;
    for (int k = 1; k < half; ++k) s.c[k] *= std::complex<double>(0.0, -1.0);
    s.c[half] = 0.0;
    return synthesize(s);
}

Samples antiderivative(const Samples& v, bool include_linear_term) {
    Spectrum s = analyze(v);
    const int half = s.n / 2;
    const double vbar = s.c[0].real();
    s.c[0] = 0.0;
    for (int k = 1; k < half; ++k) s.c[k] /= std::complex<double>(0.0, k);
    s.c[half] = 0.0;
    Samples f = synthesize(s);
    const double f0 = f[0];
    for (auto& x : f) x -= f0;
    if (include_linear_term) {
        const int n = s.n;
        for (int j = 0; j < n; ++j) f[j] += vbar * (2.0 * M_PI * j / n);
    }
    return f;
}

double mean(const Samples& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

Samples filter25(const Samples& v) {
    Spectrum s = analyze(v);
    const int half = s.n / 2;
    for (int k = 1; k <= half; ++k) {
        const double r = static_cast<double>(k) / half;
        s.c[k] *= std::exp(-10.0 * std::pow(r, 25));
    }
    return synthesize(s);
}

double eval(const Spectrum& s, double alpha) { return eval_deriv(s, alpha, 0); }

double eval_deriv(const Spectrum& s, double alpha, int order) {
    const int half = s.n / 2;
    // Horner over z = e^{i alpha} for modes 1..half-1.
    const std::complex<double> z(std::cos(alpha), std::sin(alpha));
    std::complex<double> acc(0.0, 0.0);
    for (int k = half - 1; k >= 1; --k) {
        std::complex<double> ck = s.c[k];
        if (order > 0) ck *= std::pow(std::complex<double>(0.0, k), order);
        acc = (acc + ck) * z;
    }
    double val = 2.0 * acc.real();
    if (order == 0) val += s.c[0].real();
    if (order % 2 == 0 && order > 0) {
        // Nyquist continues as cos(half*alpha); even derivatives keep it.
        double m = std::pow(static_cast<double>(half), order);
        if ((order / 2) % 2 == 1) m = -m;
        val += m * (s.c[half] * std::polar(1.0, half * alpha)).real();
    } else if (order == 0) {
        val += (s.c[half] * std::polar(1.0, half * alpha)).real();
    }
    return val;
}

EvalTable make_table(int n, double alpha) {
    EvalTable t;
    const int half = n / 2;
    t.cosk.resize(half + 1);
    t.sink.resize(half + 1);
    const double c1 = std::cos(alpha), s1 = std::sin(alpha);
    t.cosk[0] = 1.0;
    t.sink[0] = 0.0;
    for (int k = 1; k <= half; ++k) {
        // angle-addition recurrence; drift is O(k*eps), fine for k <= 4096
        t.cosk[k] = t.cosk[k - 1] * c1 - t.sink[k - 1] * s1;
        t.sink[k] = t.sink[k - 1] * c1 + t.cosk[k - 1] * s1;
    }
    return t;
}

double eval_with_table(const Spectrum& s, const EvalTable& t, int order) {
    const int half = s.n / 2;
    double val = 0.0;
    for (int k = 1; k < half; ++k) {
        std::complex<double> ck = s.c[k];
        if (order > 0) ck *= std::pow(std::complex<double>(0.0, k), order);
        val += 2.0 * (ck.real() * t.cosk[k] - ck.imag() * t.sink[k]);
    }
    if (order == 0) {
        val += s.c[0].real();
        val += s.c[half].real() * t.cosk[half] - s.c[half].imag() * t.sink[half];
    } else if (order % 2 == 0) {
        double m = std::pow(static_cast<double>(half), order);
        if ((order / 2) % 2 == 1) m = -m;
        val += m * (s.c[half].real() * t.cosk[half] - s.c[half].imag() * t.sink[half]);
    }
    return val;
}

} // namespace kfbi::spectral

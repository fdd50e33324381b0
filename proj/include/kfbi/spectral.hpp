#ifndef KFBI_SPECTRAL_HPP
#define KFBI_SPECTRAL_HPP

#include <complex>
#include <vector>

namespace kfbi::spectral {

/// Real samples of a 2*pi-periodic function at alpha_j = 2*pi*j/N.
/// N must be even and >= 8.
using Samples = std::vector<double>;

/// Half-spectrum of a real periodic sample vector, normalized so that
/// c[0] is the mean and v(alpha) = c0 + sum_{0<k<n/2} 2 Re(c_k e^{ik a})
/// + Re(c_{n/2} e^{i n/2 a}).
struct Spectrum {
    int n = 0;
    std::vector<std::complex<double>> c; // size n/2 + 1
};

Spectrum analyze(const Samples& v);
Samples synthesize(const Spectrum& s);

/// d^order v / d alpha^order via the Fourier multiplier (ik)^order.
/// The Nyquist mode is zeroed for odd orders. order must be >= 1.
Samples derivative(const Samples& v, int order);

/// Hilbert transform, multiplier -i*sgn(k); the k = 0 and Nyquist modes
/// map to zero. With this convention H[d^3/da^3] has symbol -|k|^3.
Samples hilbert(const Samples& v);

/// F(alpha) = int_0^alpha (v - mean(v)) da', computed by division by ik;
/// F(0) = 0. With include_linear_term, mean(v)*alpha is added back.
Samples antiderivative(const Samples& v, bool include_linear_term = false);

double mean(const Samples& v);

/// High-order exponential filter: mode k damped by exp(-10 (|k|/kmax)^25).
/// Preserves the mean exactly.
Samples filter25(const Samples& v);

double eval(const Spectrum& s, double alpha);

/// Evaluate the order-th alpha-derivative of the interpolant at alpha
/// (order 0 allowed). Odd orders zero the Nyquist mode.
double eval_deriv(const Spectrum& s, double alpha, int order);

/// Tabulated cos(k*alpha), sin(k*alpha), k = 0..n/2, for repeated
/// evaluation of interpolants at a fixed off-grid parameter.
struct EvalTable {
    std::vector<double> cosk, sink;
};
EvalTable make_table(int n, double alpha);
double eval_with_table(const Spectrum& s, const EvalTable& t, int order);

} // namespace kfbi::spectral

#endif

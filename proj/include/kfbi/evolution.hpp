#ifndef KFBI_EVOLUTION_HPP
#define KFBI_EVOLUTION_HPP

#include <complex>
#include <functional>
#include <vector>

#include "kfbi/curve.hpp"

namespace kfbi::evolution {

/// Which leading-order stiffness the semi-implicit propagator removes:
/// SecondOrder  L1 = lambda1 (2pi/L)^2 d_aa      (diffusive)
/// ThirdOrder   L2 = lambda2 (2pi/L)^3 H[d_aaa]  (Hilbert-transform type)
enum class StiffnessKind { SecondOrder, ThirdOrder };

struct StiffnessCase {
    StiffnessKind kind = StiffnessKind::ThirdOrder;
    double lambda = 0.0;
};

enum class Scheme { SemiImplicit, ExplicitAB2 };

/// lambda1 = max |eps_C/eps_V|, lambda2 = max |2 eps_C| over a dense
/// sample of normal angles. eps functions take the normal angle.
double select_lambda(const std::function<double(double)>& eps_C,
                     const std::function<double(double)>& eps_V,
                     StiffnessKind kind);

/// Integrating factors e_k(t_n, t_{n+1}) and e_k(t_{n-1}, t_{n+1}) of the
/// frozen-coefficient stiff term.
std::pair<double, double> propagator_factors(int k, double L_nm1, double L_n,
                                             double L_np1, double tau,
                                             const StiffnessCase& sc);

/// Two-step history for the Adams-Bashforth/propagator update. step_index 0
/// means no history yet: the next step uses the first-order startup rule.
struct EvolutionHistory {
    ThetaLCurve curve_n;
    ThetaLCurve curve_nm1;
    std::vector<std::complex<double>> Nhat_nm1; // previous non-stiff modes
    double M_nm1 = 0.0;                         // previous length integrand
    Vec2 Q_nm1{};                               // previous mean-point integrand
    int step_index = 0;

    explicit EvolutionHistory(const ThetaLCurve& c0)
        : curve_n(c0), curve_nm1(c0) {}

    /// Resampling or restart invalidates the stored modes.
    void reset(const ThetaLCurve& c) {
        curve_n = c;
        curve_nm1 = c;
        Nhat_nm1.clear();
        M_nm1 = 0.0;
        Q_nm1 = {};
        step_index = 0;
    }
};

/// One full update of (L, eta, xbar); order inside the step is L first,
/// then the propagator for theta using L^{n+1}, then xbar.
struct StepResult {
    ThetaLCurve curve;
    double M_n = 0.0;
    Vec2 Q_n{};
};

StepResult step(EvolutionHistory& hist, const spectral::Samples& U,
                const spectral::Samples& V, const StiffnessCase& sc, double tau,
                Scheme scheme = Scheme::SemiImplicit);

/// The pieces below are the building blocks of step(), exposed separately.
/// M = int theta_a U dalpha (positive for expanding motion).
double length_integrand(const ThetaLCurve& c, const spectral::Samples& U);

/// Q = (1/2pi) int (U n + V s) dalpha.
Vec2 mean_integrand(const ThetaLCurve& c, const spectral::Samples& U,
                    const spectral::Samples& V);

double ab2_length_step(const EvolutionHistory& hist, const spectral::Samples& U,
                       double tau);

Vec2 ab2_mean_step(const EvolutionHistory& hist, const spectral::Samples& U,
                   const spectral::Samples& V, double tau);

/// Modes of N = (2pi/L)(theta_a V - U_a) - L(eta), the non-stiff remainder.
std::vector<std::complex<double>> nonstiff_modes(const ThetaLCurve& c,
                                                 const spectral::Samples& U,
                                                 const spectral::Samples& V,
                                                 const StiffnessCase& sc);

/// eta^{n+1} modes from the propagator/AB2 recursion.
spectral::Samples propagate_theta(const ThetaLCurve& curve_n,
                                  const std::vector<std::complex<double>>& Nhat_n,
                                  const std::vector<std::complex<double>>& Nhat_nm1,
                                  double L_nm1, double L_n, double L_np1,
                                  double tau, const StiffnessCase& sc);

} // namespace kfbi::evolution

#endif

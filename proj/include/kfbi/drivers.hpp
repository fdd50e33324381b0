#ifndef KFBI_DRIVERS_HPP
#define KFBI_DRIVERS_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "kfbi/evolution.hpp"
#include "kfbi/kfbi.hpp"

namespace kfbi {

/// Polar shape r(alpha) = base + sum amp_k cos(mode_k (alpha - phase_k)).
struct ShapeSpec {
    struct Harmonic {
        int mode = 0;
        double amp = 0;
        double phase = 0;
    };
    double base_radius = 1.0;
    std::vector<Harmonic> harmonics;

    double r(double a) const {
        double v = base_radius;
        for (const auto& h : harmonics) v += h.amp * std::cos(h.mode * (a - h.phase));
        return v;
    }
};

/// Orientation-dependent coefficient eps(angle of the outward normal).
struct AnisotropyFn {
    enum class Kind { Constant, Cosine, SinPow4 } kind = Kind::Constant;
    double base = 0;   // overall scale
    double amp = 0;    // Cosine: eps = base (1 + amp (1 - cos(mode (a - phase))))
    int mode = 0;      // SinPow4: eps = base (8/3) sin^4((mode/2)(a - phase))
    double phase = 0;

    double operator()(double ang) const {
        switch (kind) {
            case Kind::Constant: return base;
            case Kind::Cosine: return base * (1.0 + amp * (1.0 - std::cos(mode * (ang - phase))));
            case Kind::SinPow4: {
                const double s = std::sin(0.5 * mode * (ang - phase));
                return base * (8.0 / 3.0) * s * s * s * s;
            }
        }
        return base;
    }
};

struct Box {
    double lo = -1.0, hi = 1.0;
};

enum class StiffnessSelect { Auto, SecondOrder, ThirdOrder };

struct NumericsConfig {
    int grid_n = 256;
    int markers = 256;
    double tau = 1e-3;
    double t_final = 1.0;
    double gmres_tol = 1e-10;
    int gmres_restart = 50;
    double mg_tol = 1e-9;
    evolution::Scheme scheme = evolution::Scheme::SemiImplicit;
    StiffnessSelect stiffness = StiffnessSelect::Auto;
    bool filter = false;
    bool mollify_init = false;
};

struct HeleShawConfig {
    double sigma = 0.01;
    double injection = 0.0; // J
    Box box{-1.5, 1.5};
    ShapeSpec shape;
    NumericsConfig num;
};

struct ConvectionConfig {
    double g = 0.0;
    double beta = 0.0;
    double u0 = 0.0; // inflow speed for the inflow_x wall pattern
    enum class Walls { InflowX, NoSlip } walls = Walls::NoSlip;
};

struct StefanConfig {
    AnisotropyFn eps_c, eps_v;
    double st = -0.5; // undercooling, T_infinity with T_m = 0
    Box box{-2.0, 2.0};
    ShapeSpec shape;
    NumericsConfig num;
    std::optional<ConvectionConfig> convection;
};

struct StepMetrics {
    double t = 0;
    double area = 0;
    double length = 0;
    int gmres_iters = 0;
    double tip_x_left = 0, tip_x_right = 0;
    double tip_y_bottom = 0, tip_y_top = 0;
    double wallclock = 0;
};

struct SolverStats {
    int max_gmres_iters = 0;
    double max_extraction_cond = 0;
    int resample_events = 0;
    int departure_clamps = 0;
    int max_mg_cycles = 0;
};

class HeleShawSim {
public:
    explicit HeleShawSim(const HeleShawConfig& cfg);

    StepMetrics step();
    const ThetaLCurve& curve() const { return hist_.curve_n; }
    const spectral::Samples& normal_velocity() const { return last_U_; }
    const SolverStats& stats() const { return stats_; }
    int step_index() const { return nstep_; }
    double time() const { return nstep_ * cfg_.num.tau; }
    const HeleShawConfig& config() const { return cfg_; }

private:
    HeleShawConfig cfg_;
    CartesianGrid grid_;
    HelmholtzBoxSolver solver_;
    evolution::EvolutionHistory hist_;
    spectral::Samples last_U_;
    SolverStats stats_;
    int nstep_ = 0;
};

class StefanSim {
public:
    explicit StefanSim(const StefanConfig& cfg);

    StepMetrics step();
    const ThetaLCurve& curve() const { return hist_.curve_n; }
    const GridFunction& temperature() const { return Tn_; }
    const spectral::Samples& normal_velocity() const { return last_psi_; }
    const MacField& velocity() const { return un_; }
    const SolverStats& stats() const { return stats_; }
    int step_index() const { return nstep_; }
    double time() const { return nstep_ * cfg_.num.tau; }
    const StefanConfig& config() const { return cfg_; }

private:
    void flow_substep(double c);
    MacBC wall_bc() const;

    StefanConfig cfg_;
    CartesianGrid grid_;
    HelmholtzBoxSolver solver_;
    evolution::EvolutionHistory hist_;
    GridFunction Tn_, Tnm1_;
    MacField un_, unm1_;
    spectral::Samples last_psi_;
    SolverStats stats_;
    int nstep_ = 0;
};

/// Initial temperature: 0 at solid (interior) nodes, St at liquid nodes,
/// optionally mollified over one cell width.
GridFunction initial_temperature(const CartesianGrid& grid, const ThetaLCurve& curve,
                                 double st, bool mollify);

StepMetrics curve_metrics(const ThetaLCurve& c, double t, int gmres_iters);

} // namespace kfbi

#endif

#ifndef KFBI_CURVE_HPP
#define KFBI_CURVE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "kfbi/spectral.hpp"
#include "kfbi/vec2.hpp"

namespace kfbi {

/// Closed curve in tangent-angle form under equal-arclength
/// parameterization: theta(alpha) = alpha + eta(alpha) with eta periodic,
/// |X_alpha| = L/(2 pi), and mean position xbar. Counterclockwise
/// orientation, so theta gains exactly 2 pi per period.
struct ThetaLCurve {
    spectral::Samples eta;
    double length = 0.0;
    Vec2 xbar{};

    int n() const { return static_cast<int>(eta.size()); }
};

/// Geometry of the curve at one parameter value, consumed by the
/// derivative-jump systems. s_a = L/(2 pi) and s_aa = 0 by construction
/// for curves in equal-arclength form.
struct CurvePointGeometry {
    Vec2 pos{};
    double x_a = 0, y_a = 0;
    double x_aa = 0, y_aa = 0;
    double s_a = 0, s_aa = 0;
};

/// Build a curve from a polar shape X(alpha) = r(alpha)(cos a, sin a),
/// reparameterized to equal arclength. r must be smooth, positive and
/// 2 pi periodic.
ThetaLCurve from_polar_shape(const std::function<double(double)>& r, int n);

/// Marker positions X_j. Means of cos(theta), sin(theta) are projected to
/// zero before integration so the curve closes; mean(X) = xbar exactly.
std::vector<Vec2> reconstruct_positions(const ThetaLCurve& c);

/// kappa = (2 pi / L) (1 + eta_alpha).
spectral::Samples curvature(const ThetaLCurve& c);

/// Unit tangent s = (cos theta, sin theta) and outward normal
/// n = (sin theta, -cos theta) at the markers.
std::pair<std::vector<Vec2>, std::vector<Vec2>> normals_tangents(const ThetaLCurve& c);

/// Tangential velocity maintaining equal arclength:
/// V(a) = (a/2pi) int_0^{2pi} theta_a' U da' - int_0^a theta_a' U da'.
spectral::Samples tangential_velocity(const ThetaLCurve& c, const spectral::Samples& U);

/// A = 1/2 oint x . n ds, positive for counterclockwise curves.
double enclosed_area(const ThetaLCurve& c);

/// Trigonometric refinement of eta to n_new markers (n_new even, >= n).
ThetaLCurve resample(const ThetaLCurve& c, int n_new);

/// Cached spectra of a curve for off-grid evaluation: positions and
/// tangent angle at arbitrary alpha plus the point geometry bundle.
class CurveSampler {
public:
    explicit CurveSampler(const ThetaLCurve& c);

    const ThetaLCurve& curve() const { return curve_; }
    const std::vector<Vec2>& markers() const { return markers_; }

    Vec2 pos(double alpha) const;
    Vec2 d1(double alpha) const; // dX/dalpha
    double theta(double alpha) const;
    double theta_a(double alpha) const;
    CurvePointGeometry point_geometry(double alpha) const;

private:
    ThetaLCurve curve_;
    std::vector<Vec2> markers_;
    spectral::Spectrum sx_, sy_, seta_;
};

} // namespace kfbi

#endif

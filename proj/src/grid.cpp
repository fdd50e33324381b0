#include "kfbi/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <string>

namespace kfbi {

namespace {

constexpr double TWO_PI = 2.0 * M_PI;

struct Hit {
    double coord; // x for row hits, y for column hits
    double alpha;
    double slope; // d(coord)/d(alpha) at the root; sign separates graze pairs
};

// Locate the crossing of {coord(alpha) == target} inside the seeding
// polygon edge [alo, ahi]. The interpolant agrees with the marker samples
// at the edge ends, so a straddling edge always brackets a root; keeping
// the search inside the edge stops nearby roots from being conflated.
// Bisection narrows the bracket, then Newton polishes within it.
double polish_root(const CurveSampler& s, bool axis_y, double target, double alpha0,
                   double alo, double ahi, double tol) {
    auto f_at = [&](double a) { return (axis_y ? s.pos(a).y : s.pos(a).x) - target; };
    double flo = f_at(alo);
    double fhi = f_at(ahi);
    if (flo == 0.0) return alo;
    if (fhi == 0.0) return ahi;
    double lo = alo, hi = ahi;
    double a = alpha0;
    if (flo * fhi <= 0.0) {
        for (int it = 0; it < 24; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f_at(mid);
            if (fm == 0.0) return mid;
            if (flo * fm < 0.0) { hi = mid; fhi = fm; }
            else { lo = mid; flo = fm; }
        }
        a = 0.5 * (lo + hi);
    }
    for (int it = 0; it < 8; ++it) {
        const Vec2 p = s.pos(a);
        const Vec2 d = s.d1(a);
        const double f = (axis_y ? p.y : p.x) - target;
        const double fp = axis_y ? d.y : d.x;
        if (std::fabs(f) < tol) return a;
        if (fp == 0.0) break;
        double an = a - f / fp;
        if (an < lo || an > hi) an = 0.5 * (lo + hi); // stay inside the bracket
        if (an == a) break;
        a = an;
    }
    return a;
}

// Scanline pass along one axis. For rows (axis_y = true) lines are
// y = y0 + j h and hits record x; for columns lines are x = x0 + i h.
std::vector<std::vector<Hit>> scan_lines(const CurveSampler& s, const Lattice& lat,
                                         bool axis_y) {
    const auto& P = s.markers();
    const int m = static_cast<int>(P.size());
    const int nlines = axis_y ? lat.ny : lat.nx;
    const double c0 = axis_y ? lat.y0 : lat.x0;
    std::vector<std::vector<Hit>> hits(nlines);

    // bracket from polygon edges. A marker sitting exactly on a line is
    // attributed to the edge that starts at it, and only when the curve
    // actually crosses there (extremum touches do not flip parity).
    struct Seed { int line; double alpha0, alo, ahi; bool exact; };
    std::vector<Seed> seeds;
    auto coord = [&](int idx) {
        const Vec2& p = P[(idx % m + m) % m];
        return axis_y ? p.y : p.x;
    };
    for (int e = 0; e < m; ++e) {
        const double ca = coord(e);
        const double cb = coord(e + 1);
        const double alo = TWO_PI * e / m;
        const double ahi = TWO_PI * (e + 1) / m;
        if (ca == cb) continue;
        const double lo = std::min(ca, cb), hi = std::max(ca, cb);
        int jlo = static_cast<int>(std::ceil((lo - c0) / lat.h));
        int jhi = static_cast<int>(std::ceil((hi - c0) / lat.h)); // exclusive
        jlo = std::max(jlo, 0);
        jhi = std::min(jhi, nlines);
        for (int j = jlo; j < jhi; ++j) {
            const double line = c0 + j * lat.h;
            if (line == cb) continue; // owned by the next edge's start
            if (line == ca) {
                // previous distinct coordinate decides transversality
                int back = e - 1;
                double cp = coord(back);
                while (cp == ca && back > e - m) cp = coord(--back);
                if ((cp - line) * (cb - line) < 0.0)
                    seeds.push_back({j, alo, alo, ahi, true});
                continue; // extremum touch: no parity flip
            }
            const double t = (line - ca) / (cb - ca);
            seeds.push_back({j, alo + t * (ahi - alo), alo, ahi, false});
        }
    }

    const double tol = 1e-13 * std::max(1.0, std::fabs(c0) + lat.h * nlines);
    std::vector<Hit> polished(seeds.size());
    std::vector<char> ok(seeds.size(), 1);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < static_cast<int>(seeds.size()); ++k) {
        const Seed& sd = seeds[k];
        const double line = c0 + sd.line * lat.h;
        const double alpha =
            sd.exact ? sd.alpha0
                     : polish_root(s, axis_y, line, sd.alpha0, sd.alo, sd.ahi, tol);
        const Vec2 p = s.pos(alpha);
        // reject seeds whose polished root does not actually sit on the line
        if (std::fabs((axis_y ? p.y : p.x) - line) > 1e-6 * lat.h) {
            ok[k] = 0;
            continue;
        }
        const Vec2 d = s.d1(alpha);
        polished[k] = {axis_y ? p.x : p.y, alpha, axis_y ? d.y : d.x};
    }
    for (size_t k = 0; k < seeds.size(); ++k)
        if (ok[k]) hits[seeds[k].line].push_back(polished[k]);

    for (auto& row : hits) {
        std::sort(row.begin(), row.end(),
                  [](const Hit& a, const Hit& b) { return a.coord < b.coord; });
        // collapse the same transversal root found twice from adjacent seeds
        std::vector<Hit> merged;
        for (const Hit& h : row) {
            if (!merged.empty() && std::fabs(h.coord - merged.back().coord) < 1e-9 * lat.h &&
                h.slope * merged.back().slope > 0.0)
                continue;
            merged.push_back(h);
        }
        row = std::move(merged);
    }
    return hits;
}

} // namespace

LatticeGeometry build_lattice_geometry(const CurveSampler& sampler, const Lattice& lat) {
    LatticeGeometry g;
    g.lat = lat;
    g.side.assign(lat.nx * lat.ny, -1);
    g.hseg.assign((lat.nx - 1) * lat.ny, -1);
    g.vseg.assign(lat.nx * (lat.ny - 1), -1);

    auto rows = scan_lines(sampler, lat, true);
    auto cols = scan_lines(sampler, lat, false);

    const double tie = 1e-12 * lat.h;
    const double nudge = 1e-10 * lat.h;

    // A pair of consecutive crossings inside one segment is a sliver the
    // grid cannot represent (a graze or a feature thinner than h). Both
    // endpoints of the segment lie on the same side, so the pair is
    // parity-neutral: remove it rather than aborting the run.
    auto drop_sliver_pairs = [&](std::vector<Hit>& line, double origin) {
        std::vector<Hit> out;
        size_t i = 0;
        while (i < line.size()) {
            if (i + 1 < line.size()) {
                const auto seg = [&](double c) {
                    return static_cast<long>(std::floor((c - origin) / lat.h));
                };
                if (seg(line[i].coord) == seg(line[i + 1].coord)) {
                    i += 2;
                    continue;
                }
            }
            out.push_back(line[i]);
            ++i;
        }
        line = std::move(out);
    };
    for (auto& row : rows) drop_sliver_pairs(row, lat.x0);
    for (auto& col : cols) drop_sliver_pairs(col, lat.y0);

    // node sides by even-odd parity along each row
    for (int j = 0; j < lat.ny; ++j) {
        auto& row = rows[j];
        for (auto& h : row) {
            // Crossing exactly on a node: shift it toward the Omega+ side so
            // the node itself classifies as Omega- and the displaced crossing
            // lands in the segment whose far endpoint is interior. For a row
            // hit the normal x-component has the sign of dy/dalpha.
            const double rel = (h.coord - lat.x0) / lat.h;
            const double nearest = std::round(rel);
            if (std::fabs(rel - nearest) * lat.h < tie)
                h.coord += (h.slope > 0 ? -1.0 : 1.0) * nudge;
        }
        size_t k = 0;
        int parity = 0;
        for (int i = 0; i < lat.nx; ++i) {
            const double x = lat.x(i);
            while (k < row.size() && row[k].coord < x) { parity ^= 1; ++k; }
            g.side[lat.idx(i, j)] = parity ? +1 : -1;
        }
        if (row.size() % 2 != 0)
            throw GridGeometryError("lattice row " + std::to_string(j) +
                                    " has an odd number of curve crossings");
    }

    auto add_crossing = [&](int axis, int i, int j, const Hit& h) {
        int32_t& slot = axis == 0 ? g.hseg[i + (lat.nx - 1) * j] : g.vseg[i + lat.nx * j];
        if (slot >= 0)
            throw GridGeometryError("segment cut more than once; grid too coarse "
                                    "for the interface curvature");
        Crossing c;
        c.axis = axis;
        c.i = i;
        c.j = j;
        c.xi = h.coord;
        c.alpha = h.alpha;
        c.geom = sampler.point_geometry(h.alpha);
        slot = static_cast<int32_t>(g.crossings.size());
        g.crossings.push_back(c);
    };

    for (int j = 0; j < lat.ny; ++j)
        for (const Hit& h : rows[j]) {
            const int i = static_cast<int>(std::floor((h.coord - lat.x0) / lat.h));
            if (i >= 0 && i < lat.nx - 1) add_crossing(0, i, j, h);
        }
    for (int i = 0; i < lat.nx; ++i)
        for (Hit h : cols[i]) {
            // column hit on a node: Omega+ lies toward +sign(dx/dalpha)
            const double rel = (h.coord - lat.y0) / lat.h;
            const double nearest = std::round(rel);
            if (std::fabs(rel - nearest) * lat.h < tie)
                h.coord += (h.slope > 0 ? 1.0 : -1.0) * nudge;
            const int j = static_cast<int>(std::floor((h.coord - lat.y0) / lat.h));
            if (j >= 0 && j < lat.ny - 1) add_crossing(1, i, j, h);
        }

    // consistency: a segment is cut iff its endpoints lie on opposite sides
    for (int j = 0; j < lat.ny; ++j)
        for (int i = 0; i < lat.nx - 1; ++i) {
            const bool cut = g.hcross(i, j) >= 0;
            const bool flip = g.side[lat.idx(i, j)] != g.side[lat.idx(i + 1, j)];
            if (cut != flip)
                throw GridGeometryError("horizontal segment side/crossing mismatch at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
        }
    for (int j = 0; j < lat.ny - 1; ++j)
        for (int i = 0; i < lat.nx; ++i) {
            const bool cut = g.vcross(i, j) >= 0;
            const bool flip = g.side[lat.idx(i, j)] != g.side[lat.idx(i, j + 1)];
            if (cut != flip) {
                if (getenv("KFBI_GRID_DEBUG")) {
                    fprintf(stderr, "vseg (%d,%d) cut=%d flip=%d node(%g,%g) sides %d %d\n",
                            i, j, (int)cut, (int)flip, lat.x(i), lat.y(j),
                            (int)g.side[lat.idx(i, j)], (int)g.side[lat.idx(i, j + 1)]);
                    for (int jj = std::max(0, j - 1); jj <= std::min(lat.ny - 1, j + 2); ++jj) {
                        fprintf(stderr, "  row %d y=%.17g hits:", jj, lat.y(jj));
                        for (const auto& hh : rows[jj])
                            fprintf(stderr, " (x=%.17g a=%.17g s=%.3g)", hh.coord, hh.alpha, hh.slope);
                        fprintf(stderr, "\n");
                    }
                    for (const auto& hh : cols[i])
                        fprintf(stderr, "  col %d hit y=%.17g a=%.17g s=%.3g\n", i, hh.coord,
                                hh.alpha, hh.slope);
                }
                throw GridGeometryError("vertical segment side/crossing mismatch at (" +
                                        std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }

    for (int j = 0; j < lat.ny; ++j)
        for (int i = 0; i < lat.nx; ++i) {
            const bool irr = (i > 0 && g.hcross(i - 1, j) >= 0) ||
                             (i < lat.nx - 1 && g.hcross(i, j) >= 0) ||
                             (j > 0 && g.vcross(i, j - 1) >= 0) ||
                             (j < lat.ny - 1 && g.vcross(i, j) >= 0);
            if (irr) g.irregular.push_back(lat.idx(i, j));
        }
    return g;
}

std::vector<int8_t> classify_nodes(const CurveSampler& sampler, const CartesianGrid& g) {
    return build_lattice_geometry(sampler, node_lattice(g)).side;
}

LatticeGeometry find_intersections(const CurveSampler& sampler, const CartesianGrid& g) {
    return build_lattice_geometry(sampler, node_lattice(g));
}

double distance_to_curve(const std::vector<Vec2>& markers, Vec2 p) {
    double best = std::numeric_limits<double>::max();
    const int m = static_cast<int>(markers.size());
    for (int e = 0; e < m; ++e) {
        const Vec2& a = markers[e];
        const Vec2& b = markers[(e + 1) % m];
        const Vec2 ab = b - a;
        const double len2 = ab.dot(ab);
        double t = len2 > 0 ? (p - a).dot(ab) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        const Vec2 q = a + t * ab;
        best = std::min(best, (p - q).norm());
    }
    return best;
}

} // namespace kfbi

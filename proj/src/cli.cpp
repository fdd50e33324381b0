#include "kfbi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace kfbi::cli {

namespace {

using Dict = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

Dict parse_kv(const std::string& text) {
    Dict d;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!section.empty()) key = section + "." + key;
        if (d.count(key)) throw ConfigError("duplicate key: " + key);
        d[key] = val;
    }
    return d;
}

double to_double(const std::string& k, const std::string& v) {
    try {
        size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (...) {
        throw ConfigError("key " + k + ": expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& k, const std::string& v) {
    const double x = to_double(k, v);
    if (x != std::floor(x)) throw ConfigError("key " + k + ": expected an integer");
    return static_cast<int>(x);
}

bool to_bool(const std::string& k, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("key " + k + ": expected a boolean");
}

struct Reader {
    Dict d;
    mutable std::vector<std::string> seen;

    bool has(const std::string& k) const { return d.count(k) > 0; }
    std::string take(const std::string& k) const {
        seen.push_back(k);
        auto it = d.find(k);
        if (it == d.end()) throw ConfigError("missing required key: " + k);
        return it->second;
    }
    std::string take_or(const std::string& k, const std::string& dflt) const {
        seen.push_back(k);
        auto it = d.find(k);
        return it == d.end() ? dflt : it->second;
    }
    double num(const std::string& k) const { return to_double(k, take(k)); }
    double num_or(const std::string& k, double dflt) const {
        return has(k) ? to_double(k, take(k)) : (seen.push_back(k), dflt);
    }
    int integer_or(const std::string& k, int dflt) const {
        return has(k) ? to_int(k, take(k)) : (seen.push_back(k), dflt);
    }
    bool flag_or(const std::string& k, bool dflt) const {
        return has(k) ? to_bool(k, take(k)) : (seen.push_back(k), dflt);
    }
    void check_unknown() const {
        for (const auto& [k, v] : d)
            if (std::find(seen.begin(), seen.end(), k) == seen.end())
                throw ConfigError("unknown key: " + k);
    }
};

ShapeSpec parse_shape(const Reader& r) {
    ShapeSpec s;
    s.base_radius = r.num("shape.base_radius");
    if (s.base_radius <= 0) throw ConfigError("shape.base_radius must be positive");
    if (r.has("shape.harmonics")) {
        // comma-separated mode:amp[:phase] triples
        std::istringstream in(r.take("shape.harmonics"));
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            ShapeSpec::Harmonic h;
            std::istringstream hi(item);
            std::string part;
            std::vector<std::string> parts;
            while (std::getline(hi, part, ':')) parts.push_back(trim(part));
            if (parts.size() < 2 || parts.size() > 3)
                throw ConfigError("shape.harmonics: expected mode:amp[:phase]");
            h.mode = to_int("shape.harmonics", parts[0]);
            h.amp = to_double("shape.harmonics", parts[1]);
            h.phase = parts.size() == 3 ? to_double("shape.harmonics", parts[2]) : 0.0;
            s.harmonics.push_back(h);
        }
    } else {
        r.take_or("shape.harmonics", "");
    }
    return s;
}

AnisotropyFn parse_aniso(const Reader& r, const std::string& prefix) {
    AnisotropyFn f;
    const std::string kind = r.take_or(prefix + ".kind", "constant");
    f.base = r.num_or(prefix + ".base", 0.0);
    if (kind == "constant") {
        f.kind = AnisotropyFn::Kind::Constant;
    } else if (kind == "cosine") {
        f.kind = AnisotropyFn::Kind::Cosine;
        f.amp = r.num_or(prefix + ".amp", 0.0);
        f.mode = r.integer_or(prefix + ".mode", 4);
        f.phase = r.num_or(prefix + ".phase", 0.0);
    } else if (kind == "sinpow4") {
        f.kind = AnisotropyFn::Kind::SinPow4;
        f.mode = r.integer_or(prefix + ".mode", 4);
        f.phase = r.num_or(prefix + ".phase", 0.0);
    } else {
        throw ConfigError(prefix + ".kind: unknown kind '" + kind + "'");
    }
    return f;
}

NumericsConfig parse_numerics(const Reader& r) {
    NumericsConfig n;
    n.grid_n = to_int("numerics.grid_n", r.take("numerics.grid_n"));
    n.markers = to_int("numerics.markers", r.take("numerics.markers"));
    n.tau = r.num("numerics.tau");
    n.t_final = r.num("numerics.t_final");
    n.gmres_tol = r.num_or("numerics.gmres_tol", 1e-10);
    n.gmres_restart = r.integer_or("numerics.gmres_restart", 50);
    n.mg_tol = r.num_or("numerics.mg_tol", 1e-9);
    const std::string scheme = r.take_or("numerics.scheme", "semi_implicit");
    if (scheme == "semi_implicit") n.scheme = evolution::Scheme::SemiImplicit;
    else if (scheme == "explicit_ab2") n.scheme = evolution::Scheme::ExplicitAB2;
    else throw ConfigError("numerics.scheme: unknown scheme '" + scheme + "'");
    const std::string stiff = r.take_or("numerics.stiffness", "auto");
    if (stiff == "auto") n.stiffness = StiffnessSelect::Auto;
    else if (stiff == "second") n.stiffness = StiffnessSelect::SecondOrder;
    else if (stiff == "third") n.stiffness = StiffnessSelect::ThirdOrder;
    else throw ConfigError("numerics.stiffness: unknown value '" + stiff + "'");
    n.filter = r.flag_or("numerics.filter", false);
    n.mollify_init = r.flag_or("numerics.mollify_init", false);
    if (n.grid_n <= 0 || n.markers <= 0 || n.tau <= 0 || n.t_final < 0)
        throw ConfigError("numerics: grid_n, markers, tau must be positive; t_final >= 0");
    return n;
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    Reader r{parse_kv(text), {}};
    if (r.d.empty()) throw ConfigError("empty configuration");
    RunConfig cfg;
    const std::string prob = r.take("run.problem");
    if (prob == "hele_shaw") cfg.problem = Problem::HeleShaw;
    else if (prob == "stefan") cfg.problem = Problem::Stefan;
    else if (prob == "stefan_flow") cfg.problem = Problem::StefanFlow;
    else throw ConfigError("run.problem: unknown problem '" + prob + "'");

    cfg.shape = parse_shape(r);
    const double lo = r.num("box.lo");
    const double hi = r.num("box.hi");
    if (hi <= lo) throw ConfigError("box.hi must exceed box.lo");
    NumericsConfig num = parse_numerics(r);

    if (cfg.problem == Problem::HeleShaw) {
        cfg.hs.sigma = r.num("physics.sigma");
        cfg.hs.injection = r.num_or("physics.injection", 0.0);
        cfg.hs.box = {lo, hi};
        cfg.hs.shape = cfg.shape;
        cfg.hs.num = num;
    } else {
        cfg.stefan.st = r.num("physics.st");
        cfg.stefan.eps_c = parse_aniso(r, "physics.eps_c");
        cfg.stefan.eps_v = parse_aniso(r, "physics.eps_v");
        cfg.stefan.box = {lo, hi};
        cfg.stefan.shape = cfg.shape;
        cfg.stefan.num = num;
        if (cfg.problem == Problem::StefanFlow) {
            ConvectionConfig cc;
            cc.g = r.num_or("physics.gravity", 0.0);
            cc.beta = r.num_or("physics.beta", 0.0);
            cc.u0 = r.num_or("physics.u0", 0.0);
            const std::string walls = r.take_or("physics.walls", "noslip");
            if (walls == "inflow_x") cc.walls = ConvectionConfig::Walls::InflowX;
            else if (walls == "noslip") cc.walls = ConvectionConfig::Walls::NoSlip;
            else throw ConfigError("physics.walls: unknown value '" + walls + "'");
            cfg.stefan.convection = cc;
        }
    }

    cfg.metrics_every = r.integer_or("output.metrics_every", 1);
    cfg.snapshot_every = r.integer_or("output.snapshot_every", 0);
    cfg.fields_every = r.integer_or("output.fields_every", 0);
    cfg.out_dir = r.take_or("output.dir", "out");
    r.check_unknown();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> presets = {
        {"hs_convergence", R"([run]
problem = hele_shaw
[shape]
base_radius = 0.8
harmonics = 4:0.2
[box]
lo = -1.5
hi = 1.5
[physics]
sigma = 0.01
injection = 0
[numerics]
grid_n = 256
markers = 256
tau = 1e-3
t_final = 1.0
)"},
        {"hs_relax", R"([run]
problem = hele_shaw
[shape]
base_radius = 0.8
harmonics = 6:0.2
[box]
lo = -1.5
hi = 1.5
[physics]
sigma = 0.01
injection = 0
[numerics]
grid_n = 256
markers = 256
tau = 1e-3
t_final = 1.2
)"},
        {"hs_fingering", R"([run]
problem = hele_shaw
[shape]
base_radius = 0.8
harmonics = 3:0.2
[box]
lo = -4
hi = 4
[physics]
sigma = 0.01
injection = 1
[numerics]
grid_n = 512
markers = 256
tau = 5e-3
t_final = 3.0
)"},
        {"hs_inject_circle", R"([run]
problem = hele_shaw
[shape]
base_radius = 1.0
[box]
lo = -4
hi = 4
[physics]
sigma = 0.01
injection = 1
[numerics]
grid_n = 256
markers = 128
tau = 1e-3
t_final = 0.5
)"},
        {"stefan_refine", R"([run]
problem = stefan
[shape]
base_radius = 0.1
harmonics = 4:0.02
[box]
lo = -2
hi = 2
[physics]
st = -0.5
eps_c.kind = constant
eps_c.base = 2e-3
eps_v.kind = constant
eps_v.base = 2e-3
[numerics]
grid_n = 256
markers = 128
tau = 1e-3
t_final = 0.8
)"},
        {"stefan_stability", R"([run]
problem = stefan
[shape]
base_radius = 1.0
harmonics = 4:0.02
[box]
lo = -2
hi = 2
[physics]
st = -0.5
eps_c.kind = constant
eps_c.base = 0.05
eps_v.kind = constant
eps_v.base = 0
[numerics]
grid_n = 256
markers = 128
tau = 0.01
t_final = 0.1
)"},
        {"stefan_solvability", R"([run]
problem = stefan
[shape]
base_radius = 0.1
[box]
lo = -6
hi = 6
[physics]
st = -0.5
eps_c.kind = cosine
eps_c.base = 0.001
eps_c.amp = 0.4
eps_c.mode = 4
eps_v.kind = constant
eps_v.base = 0
[numerics]
grid_n = 512
markers = 64
tau = 1e-3
t_final = 1.5
)"},
        {"stefan_aniso4", R"([run]
problem = stefan
[shape]
base_radius = 0.05
[box]
lo = -4
hi = 4
[physics]
st = -0.65
eps_c.kind = sinpow4
eps_c.base = 0.002
eps_c.mode = 4
eps_v.kind = constant
eps_v.base = 0.002
[numerics]
grid_n = 512
markers = 64
tau = 2e-4
t_final = 0.1
)"},
        {"stefan_snowflake", R"([run]
problem = stefan
[shape]
base_radius = 0.05
[box]
lo = -2
hi = 2
[physics]
st = -0.55
eps_c.kind = sinpow4
eps_c.base = 0.002
eps_c.mode = 6
eps_v.kind = constant
eps_v.base = 0.002
[numerics]
grid_n = 512
markers = 64
tau = 2e-4
t_final = 0.1
)"},
        {"stefan_flow", R"([run]
problem = stefan_flow
[shape]
base_radius = 0.05
[box]
lo = -2
hi = 2
[physics]
st = -0.5
eps_c.kind = sinpow4
eps_c.base = 0.002
eps_c.mode = 4
eps_v.kind = constant
eps_v.base = 0
gravity = 0
beta = 0
u0 = 4
walls = inflow_x
[numerics]
grid_n = 256
markers = 64
tau = 5e-4
t_final = 0.05
)"},
        {"stefan_buoyancy", R"([run]
problem = stefan_flow
[shape]
base_radius = 0.05
[box]
lo = -2
hi = 2
[physics]
st = -0.5
eps_c.kind = sinpow4
eps_c.base = 0.002
eps_c.mode = 4
eps_c.phase = 0.7853981633974483
eps_v.kind = constant
eps_v.base = 0
gravity = 10
beta = 2e3
u0 = 0
walls = noslip
[numerics]
grid_n = 256
markers = 64
tau = 5e-4
t_final = 0.05
)"},
    };
    return presets;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : preset_table()) names.push_back(k);
    return names;
}

std::string preset_text(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw ConfigError("unknown preset: " + name);
    return it->second;
}

void apply_overrides(RunConfig& cfg, const Overrides& ov) {
    NumericsConfig& n = cfg.problem == Problem::HeleShaw ? cfg.hs.num : cfg.stefan.num;
    if (ov.grid_n) n.grid_n = *ov.grid_n;
    if (ov.markers) n.markers = *ov.markers;
    if (ov.tau) n.tau = *ov.tau;
    if (ov.t_final) n.t_final = *ov.t_final;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
}

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_curve_snapshot(const std::string& path, const ThetaLCurve& c,
                          const spectral::Samples& U) {
    std::ofstream out(path);
    out << "alpha,x,y,theta,kappa,U\n";
    auto pos = reconstruct_positions(c);
    auto kap = curvature(c);
    const int m = c.n();
    for (int j = 0; j < m; ++j) {
        const double a = 2.0 * M_PI * j / m;
        const double theta = a + c.eta[j];
        const double u = U.empty() ? 0.0 : U[j];
        out << fmt(a) << ',' << fmt(pos[j].x) << ',' << fmt(pos[j].y) << ',' << fmt(theta)
            << ',' << fmt(kap[j]) << ',' << fmt(u) << "\n";
    }
}

void write_field_snapshot(const std::string& path, const CartesianGrid& g,
                          const GridFunction& T) {
    std::ofstream out(path);
    out << "x,y,T\n";
    for (int j = 0; j <= g.n; ++j)
        for (int i = 0; i <= g.n; ++i)
            out << fmt(g.x(i)) << ',' << fmt(g.y(j)) << ',' << fmt(T.at(i, j)) << "\n";
}

void write_mac_snapshot(const std::string& path, const CartesianGrid& g, const MacField& f) {
    std::ofstream out(path);
    out << "x,y,u,v,p\n";
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const double xc = g.xlo + (i + 0.5) * g.h;
            const double yc = g.ylo + (j + 0.5) * g.h;
            const double uc = 0.5 * (f.uat(i, j) + f.uat(i + 1, j));
            const double vc = 0.5 * (f.vat(i, j) + f.vat(i, j + 1));
            out << fmt(xc) << ',' << fmt(yc) << ',' << fmt(uc) << ',' << fmt(vc) << ','
                << fmt(f.pat(i, j)) << "\n";
        }
}

struct SnapshotForPlot {
    double t;
    std::vector<Vec2> pos;
};

void write_plot_svg(const std::string& path, const std::vector<SnapshotForPlot>& snaps,
                    double lo, double hi) {
    std::ofstream out(path);
    const int W = 720;
    const double span = hi - lo;
    auto sx = [&](double x) { return (x - lo) / span * W; };
    auto sy = [&](double y) { return W - (y - lo) / span * W; };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W
        << "\" viewBox=\"0 0 " << W << " " << W << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << W
        << "\" fill=\"white\" stroke=\"black\"/>\n";
    const double t0 = snaps.empty() ? 0.0 : snaps.front().t;
    const double t1 = snaps.empty() ? 1.0 : std::max(snaps.back().t, t0 + 1e-300);
    for (const auto& s : snaps) {
        const double f = (s.t - t0) / (t1 - t0);
        const int rr = static_cast<int>(30 + 225 * f);
        const int bb = static_cast<int>(255 - 225 * f);
        out << "<polyline fill=\"none\" stroke=\"rgb(" << rr << ",60," << bb
            << ")\" stroke-width=\"1\" points=\"";
        for (const Vec2& p : s.pos) out << fmt(sx(p.x)) << ',' << fmt(sy(p.y)) << ' ';
        if (!s.pos.empty()) out << fmt(sx(s.pos.front().x)) << ',' << fmt(sy(s.pos.front().y));
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["problem"] = cfg.problem == Problem::HeleShaw
                       ? "hele_shaw"
                       : (cfg.problem == Problem::Stefan ? "stefan" : "stefan_flow");
    const NumericsConfig& n =
        cfg.problem == Problem::HeleShaw ? cfg.hs.num : cfg.stefan.num;
    j["numerics"] = {{"grid_n", n.grid_n},   {"markers", n.markers},
                     {"tau", n.tau},         {"t_final", n.t_final},
                     {"gmres_tol", n.gmres_tol}, {"mg_tol", n.mg_tol}};
    j["shape"] = {{"base_radius", cfg.shape.base_radius}};
    if (cfg.problem == Problem::HeleShaw) {
        j["physics"] = {{"sigma", cfg.hs.sigma}, {"injection", cfg.hs.injection}};
        j["box"] = {cfg.hs.box.lo, cfg.hs.box.hi};
    } else {
        j["physics"] = {{"st", cfg.stefan.st}};
        j["box"] = {cfg.stefan.box.lo, cfg.stefan.box.hi};
        if (cfg.stefan.convection) {
            j["physics"]["gravity"] = cfg.stefan.convection->g;
            j["physics"]["beta"] = cfg.stefan.convection->beta;
            j["physics"]["u0"] = cfg.stefan.convection->u0;
        }
    }
    j["output_dir"] = cfg.out_dir;
    return j;
}

} // namespace

int run(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    std::ofstream metrics(cfg.out_dir + "/metrics.csv");
    metrics << "t,area,length,gmres_iters,tip_x_left,tip_x_right,wallclock\n";

    const NumericsConfig& num =
        cfg.problem == Problem::HeleShaw ? cfg.hs.num : cfg.stefan.num;
    const double box_lo = cfg.problem == Problem::HeleShaw ? cfg.hs.box.lo : cfg.stefan.box.lo;
    const double box_hi = cfg.problem == Problem::HeleShaw ? cfg.hs.box.hi : cfg.stefan.box.hi;
    const int nsteps = static_cast<int>(std::llround(num.t_final / num.tau));
    std::vector<SnapshotForPlot> plot_snaps;

    auto emit_metrics = [&](const StepMetrics& m) {
        metrics << fmt(m.t) << ',' << fmt(m.area) << ',' << fmt(m.length) << ','
                << m.gmres_iters << ',' << fmt(m.tip_x_left) << ',' << fmt(m.tip_x_right)
                << ',' << fmt(m.wallclock) << "\n";
    };

    int status = 0;
    nlohmann::json meta;
    meta["config"] = config_echo(cfg);
    meta["version"] = "kfbi 0.1.0";

    try {
        std::unique_ptr<HeleShawSim> hs;
        std::unique_ptr<StefanSim> st;
        if (cfg.problem == Problem::HeleShaw) hs = std::make_unique<HeleShawSim>(cfg.hs);
        else st = std::make_unique<StefanSim>(cfg.stefan);

        auto cur_curve = [&]() -> const ThetaLCurve& {
            return hs ? hs->curve() : st->curve();
        };
        auto cur_U = [&]() -> const spectral::Samples& {
            return hs ? hs->normal_velocity() : st->normal_velocity();
        };

        StepMetrics m0 = curve_metrics(cur_curve(), 0.0, 0);
        emit_metrics(m0);
        write_curve_snapshot(cfg.out_dir + "/curve_0.csv", cur_curve(), {});
        plot_snaps.push_back({0.0, reconstruct_positions(cur_curve())});

        for (int s = 1; s <= nsteps; ++s) {
            StepMetrics m = hs ? hs->step() : st->step();
            if (s % cfg.metrics_every == 0 || s == nsteps) emit_metrics(m);
            const bool snap =
                (cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0) || s == nsteps;
            if (snap) {
                write_curve_snapshot(cfg.out_dir + "/curve_" + std::to_string(s) + ".csv",
                                     cur_curve(), cur_U());
                plot_snaps.push_back({m.t, reconstruct_positions(cur_curve())});
            }
            if (cfg.fields_every > 0 && s % cfg.fields_every == 0 && st) {
                const CartesianGrid g(box_lo, box_lo, box_hi, box_hi, num.grid_n);
                write_field_snapshot(cfg.out_dir + "/field_" + std::to_string(s) + ".csv", g,
                                     st->temperature());
                if (cfg.stefan.convection)
                    write_mac_snapshot(cfg.out_dir + "/flow_" + std::to_string(s) + ".csv", g,
                                       st->velocity());
            }
        }
        const SolverStats& stats = hs ? hs->stats() : st->stats();
        meta["stats"] = {{"max_gmres_iters", stats.max_gmres_iters},
                         {"max_extraction_cond", stats.max_extraction_cond},
                         {"resample_events", stats.resample_events},
                         {"departure_clamps", stats.departure_clamps},
                         {"max_mg_cycles", stats.max_mg_cycles}};
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        meta["error"] = e.what();
        status = 3;
    }

    metrics.close();
    write_plot_svg(cfg.out_dir + "/plot.svg", plot_snaps, box_lo, box_hi);
    std::ofstream(cfg.out_dir + "/run.json") << meta.dump(2) << "\n";
    return status;
}

std::optional<double> fit_order(const std::vector<ConvergenceRow>& rows) {
    if (rows.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        const double x = std::log(r.param), y = std::log(std::max(r.error, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(rows.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Cartesian-grid boundary integral solver for moving interface problems"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    Overrides ov;
    int grid_n = 0, markers = 0;
    double tau = 0, t_final = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "configuration file");
        sub->add_option("--preset", preset, "built-in preset name");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--grid", grid_n, "override grid resolution");
        sub->add_option("--markers", markers, "override marker count");
        sub->add_option("--tau", tau, "override time step");
        sub->add_option("--tfinal", t_final, "override final time");
    };

    CLI::App* runcmd = app.add_subcommand("run", "execute a simulation");
    add_common(runcmd);
    CLI::App* convcmd = app.add_subcommand("convergence", "area-error refinement ladders");
    add_common(convcmd);
    int levels = 3;
    int temporal_grid = 0;
    std::string mode = "both";
    convcmd->add_option("--levels", levels, "refinement levels");
    convcmd->add_option("--mode", mode, "spatial | temporal | both");
    convcmd->add_option("--temporal-grid", temporal_grid, "grid for the temporal ladder");
    CLI::App* presetscmd = app.add_subcommand("presets", "list built-in presets");
    std::string presets_action = "list";
    presetscmd->add_option("action", presets_action, "list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (presetscmd->parsed()) {
            for (const auto& name : preset_names()) std::cout << name << "\n";
            return 0;
        }
        RunConfig cfg;
        if (!config_path.empty()) cfg = parse_config(config_path);
        else if (!preset.empty()) cfg = parse_config_text(preset_text(preset));
        else throw ConfigError("either --config or --preset is required");
        if (grid_n > 0) ov.grid_n = grid_n;
        if (markers > 0) ov.markers = markers;
        if (tau > 0) ov.tau = tau;
        if (t_final >= 0) ov.t_final = t_final;
        if (!out_dir.empty()) ov.out_dir = out_dir;
        apply_overrides(cfg, ov);

        if (runcmd->parsed()) return run(cfg);

        // convergence subcommand
        const bool spatial = mode == "spatial" || mode == "both";
        const bool temporal = mode == "temporal" || mode == "both";
        ConvergenceReport rep = convergence_suite(cfg, levels, spatial, temporal, temporal_grid);
        auto show = [&](const char* name, const std::vector<ConvergenceRow>& rows,
                        const std::optional<double>& order) {
            if (rows.empty()) return;
            std::cout << name << " ladder (param, |A(T)-A(0)|):\n";
            for (const auto& r : rows)
                std::cout << "  " << fmt(r.param) << "  " << fmt(r.error) << "\n";
            if (order) std::cout << "  observed order: " << fmt(*order) << "\n";
            else std::cout << "  observed order: n/a (insufficient points)\n";
        };
        show("spatial", rep.spatial, rep.spatial_order);
        show("temporal", rep.temporal, rep.temporal_order);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
}

ConvergenceReport convergence_suite(const RunConfig& base, int levels, bool spatial,
                                    bool temporal, int temporal_grid_n) {
    if (base.problem != Problem::HeleShaw)
        throw ConfigError("convergence suite supports the hele_shaw problem");
    ConvergenceReport rep;

    auto area_error = [&](int grid_n, int markers, double tau) {
        HeleShawConfig cfg = base.hs;
        cfg.num.grid_n = grid_n;
        cfg.num.markers = markers;
        cfg.num.tau = tau;
        HeleShawSim sim(cfg);
        const double A0 = enclosed_area(sim.curve());
        const int nsteps = static_cast<int>(std::llround(cfg.num.t_final / tau));
        for (int s = 0; s < nsteps; ++s) sim.step();
        return std::fabs(enclosed_area(sim.curve()) - A0);
    };

    if (spatial) {
        int n = base.hs.num.grid_n;
        int markers = base.hs.num.markers;
        for (int l = 0; l < levels; ++l) {
            const double h = (base.hs.box.hi - base.hs.box.lo) / n;
            rep.spatial.push_back({h, area_error(n, markers, base.hs.num.tau)});
            n *= 2;
            markers *= 2;
        }
        rep.spatial_order = fit_order(rep.spatial);
    }
    if (temporal) {
        const int n = temporal_grid_n > 0 ? temporal_grid_n : base.hs.num.grid_n;
        const int markers =
            base.hs.num.markers * std::max(1, n / base.hs.num.grid_n);
        double tau = base.hs.num.tau;
        for (int l = 0; l < levels; ++l) {
            rep.temporal.push_back({tau, area_error(n, markers, tau)});
            tau *= 0.5;
        }
        rep.temporal_order = fit_order(rep.temporal);
    }
    return rep;
}

} // namespace kfbi::cli

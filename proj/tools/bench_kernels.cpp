// Timing comparison of the OpenMP kernels against their serial reference
// implementations. Build target: bench_kernels.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "kfbi/reference.hpp"

using namespace kfbi;

namespace {

double now() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <class F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now();
        f();
        best = std::min(best, now() - t0);
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-28s %10.3f ms %10.3f ms   speedup %.2fx\n", name, serial * 1e3,
                parallel * 1e3, serial / parallel);
}

} // namespace

int main() {
    const int n = 512;
    const double h = 1.0 / n;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-28s %13s %13s\n", "kernel", "serial", "openmp");

    {
        GridFunction u(n), rhs(n), out_s(n), out_p(n);
        for (auto& x : u.v) x = dist(rng);
        for (auto& x : rhs.v) x = dist(rng);
        const double ts = time_best_of(5, [&] { ref::five_point_residual(u, rhs, 1.0, h, out_s); });
        const double tp = time_best_of(5, [&] { five_point_residual(u, rhs, 1.0, h, out_p); });
        report("five_point_residual", ts, tp);
    }
    {
        MacField x(n, n, h);
        MacData d = MacData::zero(n, n);
        MacBC bc = MacBC::zero(n, n);
        for (auto& v : x.u) v = dist(rng);
        for (auto& v : x.v) v = dist(rng);
        for (auto& v : x.p) v = dist(rng);
        MacField xs = x, xp = x;
        const double ts = time_best_of(5, [&] { ref::dgs_sweep(xs, d, 1.0, bc); });
        const double tp = time_best_of(5, [&] { dgs_sweep(xp, d, 1.0, bc); });
        report("dgs_sweep", ts, tp);

        MacData rs, rp;
        const double tr_s = time_best_of(5, [&] { rs = ref::mac_residual(xs, d, 1.0, bc); });
        const double tr_p = time_best_of(5, [&] { rp = mac_residual(xs, d, 1.0, bc); });
        report("mac_residual", tr_s, tr_p);
    }
    {
        std::vector<double> vals((n + 1) * (size_t)(n + 1));
        for (auto& v : vals) v = dist(rng);
        std::vector<Vec2> pts(200000);
        std::uniform_real_distribution<double> pd(0.05, 0.95);
        for (auto& p : pts) p = {pd(rng), pd(rng)};
        std::vector<double> os, op;
        const double ts = time_best_of(5, [&] {
            os = ref::cubic_interp_batch(vals, n + 1, n + 1, 0.0, 0.0, h, pts);
        });
        const double tp = time_best_of(5, [&] {
            op = cubic_interp_batch(vals, n + 1, n + 1, 0.0, 0.0, h, pts);
        });
        report("cubic_interp_batch", ts, tp);
    }
    return 0;
}

// Compares the serial reference kernels against the OpenMP ones: PSD grid
// sweep and SSA ensemble. Also checks that both modes agree exactly.

#include <chrono>
#include <cstdio>
#include <vector>

#include "rmnoise/config.hpp"
#include "rmnoise/lna.hpp"
#include "rmnoise/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace rmnoise;

namespace {

template <typename F>
double time_of(F&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif

    // PSD sweep over a large frequency grid near the Hopf threshold
    {
        ModelParams params(2.0, 1.0, 2.9, 1000.0, 1.0);
        const Jacobian2 j = jacobian_at_k3(params);
        const SymMatrix2 d =
            full_covariance(params, coexistence_equilibrium(params)->state,
                            ClosureKind::BernoulliCoupled);
        std::vector<double> grid(400000);
        for (size_t i = 0; i < grid.size(); ++i)
            grid[i] = 2.0 * static_cast<double>(i) / (grid.size() - 1);

        PsdSweep serial, parallel;
        const double t_serial =
            time_of([&] { serial = psd_sweep(j, d, grid, ExecMode::Serial); });
        const double t_parallel =
            time_of([&] { parallel = psd_sweep(j, d, grid, ExecMode::Parallel); });
        bool same = serial.samples.size() == parallel.samples.size();
        for (size_t i = 0; same && i < serial.samples.size(); ++i)
            same = serial.samples[i].s11 == parallel.samples[i].s11 &&
                   serial.samples[i].s12 == parallel.samples[i].s12 &&
                   serial.samples[i].s22 == parallel.samples[i].s22;
        std::printf("psd_sweep %zu pts     serial %.3fs  openmp %.3fs  speedup %.2fx  identical %s\n",
                    grid.size(), t_serial, t_parallel, t_serial / t_parallel,
                    same ? "yes" : "NO");
    }

    // SSA ensemble
    {
        SimConfig sim;
        sim.params = ModelParams(2.0, 1.0, 2.0, 2000.0, 1.0);
        sim.closure = ClosureKind::BernoulliCoupled;
        sim.scheme = Scheme::SSA;
        sim.t_end = 200.0;
        sim.burn_in = 20.0;
        sim.sample_stride = 0.5;
        sim.seed = 20260810;
        sim.n_replicates = 16;

        EnsembleResult serial, parallel;
        const double t_serial =
            time_of([&] { serial = ensemble_run(sim, ExecMode::Serial); });
        const double t_parallel =
            time_of([&] { parallel = ensemble_run(sim, ExecMode::Parallel); });
        const bool same =
            serial.stats.sample_cov.q11 == parallel.stats.sample_cov.q11 &&
            serial.stats.sample_cov.q12 == parallel.stats.sample_cov.q12 &&
            serial.stats.sample_cov.q22 == parallel.stats.sample_cov.q22 &&
            serial.stats.n_samples == parallel.stats.n_samples;
        std::printf("ssa ensemble 16 reps  serial %.3fs  openmp %.3fs  speedup %.2fx  identical %s\n",
                    t_serial, t_parallel, t_serial / t_parallel, same ? "yes" : "NO");
    }

    // OU ensemble (EM steps dominate)
    {
        SimConfig sim;
        sim.params = ModelParams(2.0, 1.0, 2.0, 1.0, 1.0);
        sim.closure = ClosureKind::BernoulliCoupled;
        sim.scheme = Scheme::LnaOU;
        sim.t_end = 2000.0;
        sim.dt = 1e-3;
        sim.burn_in = 100.0;
        sim.sample_stride = 0.25;
        sim.seed = 7;
        sim.n_replicates = 8;

        EnsembleResult serial, parallel;
        const double t_serial =
            time_of([&] { serial = ensemble_run(sim, ExecMode::Serial); });
        const double t_parallel =
            time_of([&] { parallel = ensemble_run(sim, ExecMode::Parallel); });
        const bool same =
            serial.stats.sample_cov.q11 == parallel.stats.sample_cov.q11 &&
            serial.stats.sample_cov.q22 == parallel.stats.sample_cov.q22;
        std::printf("ou ensemble 8 reps    serial %.3fs  openmp %.3fs  speedup %.2fx  identical %s\n",
                    t_serial, t_parallel, t_serial / t_parallel, same ? "yes" : "NO");
    }
    return 0;
}

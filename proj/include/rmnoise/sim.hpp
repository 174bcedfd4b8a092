#ifndef RMNOISE_SIM_HPP
#define RMNOISE_SIM_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rmnoise/closures.hpp"
#include "rmnoise/lna.hpp"
#include "rmnoise/model.hpp"

namespace rmnoise {

enum class Scheme { SSA, DiffusionEM, LnaOU };
enum class Viewpoint { OpenDomain, Absorbed };
enum class Boundary { PreyAxis, PredatorAxis, Origin };

const char* scheme_name(Scheme scheme);
const char* viewpoint_name(Viewpoint viewpoint);
const char* boundary_name(Boundary boundary);

struct WelchParams {
    int segment_length = 1024;  // must be a power of two
    double overlap = 0.5;       // fraction of a segment
};

struct InitialState {
    bool at_k3 = true;
    State2 state{};  // used when at_k3 is false
};

struct SimConfig {
    ModelParams params;
    ClosureKind closure = ClosureKind::BernoulliCoupled;
    Scheme scheme = Scheme::SSA;
    Viewpoint viewpoint = Viewpoint::Absorbed;  // diffusion only
    double t_end = 0.0;
    double dt = 1e-3;            // EM/OU step; ignored by SSA
    double burn_in = 0.0;
    double sample_stride = 0.5;
    std::uint64_t seed = 1;
    int n_replicates = 1;
    InitialState initial_state;
    std::optional<WelchParams> welch;  // enables the ensemble PSD estimate

    void validate() const;  // throws DomainError / UnsupportedClosure
};

struct Absorption {
    double time = 0.0;
    Boundary boundary = Boundary::Origin;
};

enum class TrajectoryCoords { Density, Deviation };

struct Trajectory {
    std::vector<double> times;  // strictly increasing stride grid
    std::vector<Vec2> states;   // densities, or deviations for the OU scheme
    std::optional<Absorption> absorbed_at;
    long clamp_count = 0;  // open-domain floor clamps
    TrajectoryCoords coords = TrajectoryCoords::Density;
};

// Single trajectories, seeded directly from config.seed.
Trajectory ssa_simulate(const SimConfig& config);
Trajectory sde_simulate(const SimConfig& config);
Trajectory ou_simulate(const SimConfig& config);

// Replicate with seed split_seed(config.seed, index); dispatches on scheme.
Trajectory simulate_replicate(const SimConfig& config, int replicate_index);

struct EnsembleStats {
    Vec2 sample_mean{};
    SymMatrix2 sample_cov{};
    long n_samples = 0;
    double survival_fraction = 1.0;
    std::optional<double> mean_absorption_time;
    std::optional<double> median_absorption_time;
    long absorbed_prey_axis = 0;
    long absorbed_predator_axis = 0;
    long absorbed_origin = 0;
    long clamp_count = 0;
    int n_replicates = 0;
};

// Pooled unbiased mean/covariance over post-burn-in samples; absorbed
// trajectories contribute their surviving samples only (the conditioning is
// visible through survival_fraction). Throws InsufficientData for < 2 samples.
EnsembleStats estimate_stationary_covariance(std::span<const Trajectory> trajectories,
                                             double burn_in);

// Survival fraction, absorption-time summary and boundary breakdown.
EnsembleStats extinction_stats(std::span<const Trajectory> trajectories);

struct PsdEstimate {
    std::vector<double> omega;
    std::vector<double> s_nn;
    std::vector<double> s_pp;
    std::vector<std::complex<double>> s_np;
    int segment_count = 0;
};

// Welch-averaged periodogram with a periodic Hann window, normalized to the
// two-sided continuous PSD convention (multiply by the sample interval,
// divide by the window power). segment_length must be a power of two.
PsdEstimate estimate_psd(const Trajectory& trajectory, int segment_length,
                         double overlap, double burn_in = 0.0);

struct EnsembleResult {
    EnsembleStats stats;                      // pooled over replicates
    std::vector<EnsembleStats> per_replicate; // covariance per replicate
    std::optional<PsdEstimate> psd;           // averaged over replicates
};

// Runs n_replicates trajectories (OpenMP when mode is Parallel) and merges
// estimators in replicate order, so output is independent of thread count.
EnsembleResult ensemble_run(const SimConfig& config, ExecMode mode = ExecMode::Parallel);

}  // namespace rmnoise

#endif

#include "rmnoise/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rmnoise/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rmnoise {

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::SSA: return "ssa";
        case Scheme::DiffusionEM: return "em";
        case Scheme::LnaOU: return "ou";
    }
    return "?";
}

const char* viewpoint_name(Viewpoint viewpoint) {
    return viewpoint == Viewpoint::OpenDomain ? "open" : "absorbed";
}

const char* boundary_name(Boundary boundary) {
    switch (boundary) {
        case Boundary::PreyAxis: return "prey_axis";
        case Boundary::PredatorAxis: return "predator_axis";
        case Boundary::Origin: return "origin";
    }
    return "?";
}

void SimConfig::validate() const {
    if (!(t_end > 0.0)) throw DomainError("sim: t_end must be > 0");
    if (!(burn_in >= 0.0 && burn_in < t_end))
        throw DomainError("sim: burn_in must satisfy 0 <= burn_in < t_end");
    if (!(sample_stride > 0.0)) throw DomainError("sim: sample_stride must be > 0");
    if (n_replicates < 1) throw DomainError("sim: n_replicates must be >= 1");
    if (scheme != Scheme::SSA) {
        if (!(dt > 0.0 && dt < t_end))
            throw DomainError("sim: dt must satisfy 0 < dt < t_end");
    }
    if (scheme == Scheme::SSA && closure == ClosureKind::EffectiveCoupled)
        throw UnsupportedClosure("sim: effective closure is diffusion-only, not simulable by SSA");
    if (!initial_state.at_k3 && !initial_state.state.in_closed_quadrant())
        throw DomainError("sim: initial state outside the closed quadrant");
    if (welch) {
        if (welch->segment_length < 4 ||
            (welch->segment_length & (welch->segment_length - 1)) != 0)
            throw DomainError("sim: welch segment_length must be a power of two >= 4");
        if (!(welch->overlap >= 0.0 && welch->overlap < 1.0))
            throw DomainError("sim: welch overlap must be in [0,1)");
    }
}

namespace {

State2 initial_density(const SimConfig& config) {
    if (!config.initial_state.at_k3) return config.initial_state.state;
    const auto k3 = coexistence_equilibrium(config.params);
    if (!k3)
        throw InfeasibleEquilibrium("sim: initial state AtK3 but coexistence infeasible");
    return k3->state;
}

Boundary classify_boundary(bool prey_extinct, bool predator_extinct) {
    if (prey_extinct && predator_extinct) return Boundary::Origin;
    // prey axis = {P = 0}: predators extinct, prey remain
    return prey_extinct ? Boundary::PredatorAxis : Boundary::PreyAxis;
}

}  // namespace

Trajectory ssa_simulate(const SimConfig& config) {
    config.validate();
    if (config.scheme != Scheme::SSA) throw DomainError("ssa_simulate: scheme must be SSA");

    const ModelParams& params = config.params;
    const ChannelSet set = ssa_channels(params, config.closure);
    Rng rng(config.seed);

    const State2 x0 = initial_density(config);
    double n = std::llround(params.omega * x0.n);
    double p = std::llround(params.omega * x0.p);

    const double stride = config.sample_stride;
    const long n_samples = static_cast<long>(std::floor(config.t_end / stride + 1e-9)) + 1;

    Trajectory traj;
    traj.coords = TrajectoryCoords::Density;
    traj.times.reserve(n_samples);
    traj.states.reserve(n_samples);
    long next_sample = 0;

    auto emit_before = [&](double t_limit) {
        while (next_sample < n_samples && next_sample * stride < t_limit) {
            traj.times.push_back(next_sample * stride);
            traj.states.push_back({n / params.omega, p / params.omega});
            ++next_sample;
        }
    };

    if (n <= 0.0 || p <= 0.0) {
        traj.absorbed_at = Absorption{0.0, classify_boundary(n <= 0.0, p <= 0.0)};
        return traj;
    }

    const size_t n_channels = set.channels.size();
    std::array<double, 8> rates{};
    double t = 0.0;
    for (;;) {
        double total = 0.0;
        for (size_t i = 0; i < n_channels; ++i) {
            total += ssa_count_rate(set.channels[i].type, params, n, p);
            rates[i] = total;  // cumulative, for the categorical pick
        }
        // interior states always have the prey-birth channel active
        const double t_next = t + rng.exponential(total);
        if (t_next > config.t_end) {
            emit_before(std::numeric_limits<double>::infinity());
            break;
        }
        emit_before(t_next);

        const double u = rng.uniform01() * total;
        size_t pick = 0;
        while (pick + 1 < n_channels && u >= rates[pick]) ++pick;
        n += set.channels[pick].increment.x;
        p += set.channels[pick].increment.y;
        t = t_next;

        if (n <= 0.0 || p <= 0.0) {
            traj.absorbed_at = Absorption{t, classify_boundary(n <= 0.0, p <= 0.0)};
            break;
        }
    }
    return traj;
}

namespace {

// Shared Euler-Maruyama driver for the nonlinear diffusion and the frozen OU.
struct EmStepper {
    virtual ~EmStepper() = default;
    virtual Vec2 drift_at(Vec2 x) const = 0;
    virtual Factor2 factor_at(Vec2 x) const = 0;
};

Trajectory em_run(const SimConfig& config, const EmStepper& stepper, Vec2 x0,
                  bool bounded, TrajectoryCoords coords) {
    Rng rng(config.seed);
    const double dt = config.dt;
    const long n_steps = std::llround(config.t_end / dt);
    const long stride_steps =
        std::max<long>(1, std::llround(config.sample_stride / dt));
    const double sqrt_dt = std::sqrt(dt);

    Trajectory traj;
    traj.coords = coords;
    traj.times.reserve(n_steps / stride_steps + 1);
    traj.states.reserve(n_steps / stride_steps + 1);

    Vec2 x = x0;
    if (bounded && (x.x <= 0.0 || x.y <= 0.0)) {
        traj.absorbed_at = Absorption{0.0, classify_boundary(x.x <= 0.0, x.y <= 0.0)};
        return traj;
    }
    traj.times.push_back(0.0);
    traj.states.push_back(x);

    for (long i = 0; i < n_steps; ++i) {
        const Vec2 b = stepper.drift_at(x);
        Factor2 f;
        try {
            f = stepper.factor_at(x);
        } catch (const NotPSD& err) {
            throw StepFailure(std::string("em step at t=") +
                              std::to_string(i * dt) + ": " + err.what());
        }
        Vec2 xi = rng.normal_pair();
        Vec2 prop{x.x + b.x * dt + f.b11 * xi.x * sqrt_dt,
                  x.y + b.y * dt + (f.b21 * xi.x + f.b22 * xi.y) * sqrt_dt};

        if (bounded && (prop.x <= 0.0 || prop.y <= 0.0)) {
            if (config.viewpoint == Viewpoint::Absorbed) {
                traj.absorbed_at = Absorption{
                    (i + 1) * dt, classify_boundary(prop.x <= 0.0, prop.y <= 0.0)};
                return traj;
            }
            // open domain: redraw the Gaussian pair, then clamp as a last resort
            int attempts = 0;
            while ((prop.x <= 0.0 || prop.y <= 0.0) && attempts < 100) {
                xi = rng.normal_pair();
                prop = {x.x + b.x * dt + f.b11 * xi.x * sqrt_dt,
                        x.y + b.y * dt + (f.b21 * xi.x + f.b22 * xi.y) * sqrt_dt};
                ++attempts;
            }
            if (prop.x <= 0.0 || prop.y <= 0.0) {
                if (prop.x <= 0.0) prop.x = 1e-9;
                if (prop.y <= 0.0) prop.y = 1e-9;
                ++traj.clamp_count;
            }
        }
        x = prop;
        if ((i + 1) % stride_steps == 0) {
            traj.times.push_back((i + 1) * dt);
            traj.states.push_back(x);
        }
    }
    return traj;
}

struct DiffusionStepper final : EmStepper {
    const ModelParams& params;
    ClosureKind closure;
    DiffusionStepper(const ModelParams& p, ClosureKind c) : params(p), closure(c) {}
    Vec2 drift_at(Vec2 x) const override { return drift(params, {x.x, x.y}); }
    Factor2 factor_at(Vec2 x) const override {
        return factorize_covariance(full_covariance(params, {x.x, x.y}, closure));
    }
};

struct OuStepper final : EmStepper {
    Jacobian2 j;
    Factor2 b;
    Vec2 drift_at(Vec2 y) const override {
        return {j.a11 * y.x + j.a12 * y.y, j.a21 * y.x + j.a22 * y.y};
    }
    Factor2 factor_at(Vec2) const override { return b; }
};

}  // namespace

Trajectory sde_simulate(const SimConfig& config) {
    config.validate();
    if (config.scheme != Scheme::DiffusionEM)
        throw DomainError("sde_simulate: scheme must be DiffusionEM");
    const State2 x0 = initial_density(config);
    DiffusionStepper stepper(config.params, config.closure);
    return em_run(config, stepper, {x0.n, x0.p}, /*bounded=*/true,
                  TrajectoryCoords::Density);
}

Trajectory ou_simulate(const SimConfig& config) {
    config.validate();
    if (config.scheme != Scheme::LnaOU)
        throw DomainError("ou_simulate: scheme must be LnaOU");
    const auto k3 = coexistence_equilibrium(config.params);
    if (!k3) throw InfeasibleEquilibrium("ou_simulate: coexistence infeasible");
    OuStepper stepper;
    stepper.j = jacobian_at_k3(config.params);
    if (!stepper.j.hurwitz())
        throw NotHurwitz("ou_simulate: J not Hurwitz, stationary LNA diagnostics not defined");
    stepper.b = factorize_covariance(
        full_covariance(config.params, k3->state, config.closure));

    Vec2 y0{0.0, 0.0};
    if (!config.initial_state.at_k3)
        y0 = {config.initial_state.state.n - k3->state.n,
              config.initial_state.state.p - k3->state.p};
    return em_run(config, stepper, y0, /*bounded=*/false, TrajectoryCoords::Deviation);
}

Trajectory simulate_replicate(const SimConfig& config, int replicate_index) {
    SimConfig local = config;
    local.seed = split_seed(config.seed, static_cast<std::uint64_t>(replicate_index));
    switch (config.scheme) {
        case Scheme::SSA: return ssa_simulate(local);
        case Scheme::DiffusionEM: return sde_simulate(local);
        case Scheme::LnaOU: return ou_simulate(local);
    }
    throw DomainError("simulate_replicate: unknown scheme");
}

namespace {

void fill_absorption_summary(std::span<const Trajectory> trajectories,
                             EnsembleStats& stats) {
    std::vector<double> absorption_times;
    long survived = 0;
    for (const Trajectory& traj : trajectories) {
        stats.clamp_count += traj.clamp_count;
        if (!traj.absorbed_at) {
            ++survived;
            continue;
        }
        absorption_times.push_back(traj.absorbed_at->time);
        switch (traj.absorbed_at->boundary) {
            case Boundary::PreyAxis: ++stats.absorbed_prey_axis; break;
            case Boundary::PredatorAxis: ++stats.absorbed_predator_axis; break;
            case Boundary::Origin: ++stats.absorbed_origin; break;
        }
    }
    stats.n_replicates = static_cast<int>(trajectories.size());
    stats.survival_fraction =
        trajectories.empty() ? 1.0
                             : static_cast<double>(survived) / trajectories.size();
    if (!absorption_times.empty()) {
        double sum = 0.0;
        for (double t : absorption_times) sum += t;
        stats.mean_absorption_time = sum / absorption_times.size();
        std::sort(absorption_times.begin(), absorption_times.end());
        const size_t mid = absorption_times.size() / 2;
        stats.median_absorption_time =
            absorption_times.size() % 2 == 1
                ? absorption_times[mid]
                : 0.5 * (absorption_times[mid - 1] + absorption_times[mid]);
    }
}

}  // namespace

EnsembleStats estimate_stationary_covariance(std::span<const Trajectory> trajectories,
                                             double burn_in) {
    EnsembleStats stats;
    fill_absorption_summary(trajectories, stats);

    long count = 0;
    double mean_n = 0.0, mean_p = 0.0;
    for (const Trajectory& traj : trajectories)
        for (size_t i = 0; i < traj.times.size(); ++i)
            if (traj.times[i] >= burn_in) {
                mean_n += traj.states[i].x;
                mean_p += traj.states[i].y;
                ++count;
            }
    if (count < 2)
        throw InsufficientData("estimate_stationary_covariance: fewer than 2 post-burn-in samples");
    mean_n /= count;
    mean_p /= count;

    double c11 = 0.0, c12 = 0.0, c22 = 0.0;
    for (const Trajectory& traj : trajectories)
        for (size_t i = 0; i < traj.times.size(); ++i)
            if (traj.times[i] >= burn_in) {
                const double dn = traj.states[i].x - mean_n;
                const double dp = traj.states[i].y - mean_p;
                c11 += dn * dn;
                c12 += dn * dp;
                c22 += dp * dp;
            }
    stats.sample_mean = {mean_n, mean_p};
    stats.sample_cov = {c11 / (count - 1), c12 / (count - 1), c22 / (count - 1)};
    stats.n_samples = count;
    return stats;
}

EnsembleStats extinction_stats(std::span<const Trajectory> trajectories) {
    EnsembleStats stats;
    fill_absorption_summary(trajectories, stats);
    return stats;
}

namespace {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, rev = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; rev & bit; bit >>= 1) rev ^= bit;
        rev ^= bit;
        if (i < rev) std::swap(a[i], a[rev]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        for (size_t i = 0; i < n; i += len)
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> w =
                    std::polar(1.0, ang * static_cast<double>(k));
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
    }
}

}  // namespace

PsdEstimate estimate_psd(const Trajectory& trajectory, int segment_length,
                         double overlap, double burn_in) {
    if (segment_length < 4 || (segment_length & (segment_length - 1)) != 0)
        throw DomainError("estimate_psd: segment_length must be a power of two >= 4");
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw DomainError("estimate_psd: overlap must be in [0,1)");
    if (trajectory.times.size() < 2)
        throw InsufficientData("estimate_psd: trajectory too short");

    const double delta = trajectory.times[1] - trajectory.times[0];
    for (size_t i = 1; i < trajectory.times.size(); ++i) {
        const double gap = trajectory.times[i] - trajectory.times[i - 1];
        if (std::abs(gap - delta) > 1e-9 * std::max(delta, 1.0))
            throw DomainError("estimate_psd: trajectory not uniformly sampled");
    }

    size_t first = 0;
    while (first < trajectory.times.size() && trajectory.times[first] < burn_in) ++first;
    const size_t m = trajectory.times.size() - first;
    const size_t len = static_cast<size_t>(segment_length);
    const size_t step =
        std::max<size_t>(1, static_cast<size_t>(std::llround(len * (1.0 - overlap))));
    if (m < len || (m - len) / step + 1 < 2)
        throw InsufficientData("estimate_psd: need at least 2 segments");

    double mean_n = 0.0, mean_p = 0.0;
    for (size_t i = first; i < trajectory.times.size(); ++i) {
        mean_n += trajectory.states[i].x;
        mean_p += trajectory.states[i].y;
    }
    mean_n /= m;
    mean_p /= m;

    // periodic Hann window and its power, for the PSD normalization
    std::vector<double> window(len);
    double window_power = 0.0;
    for (size_t i = 0; i < len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / len));
        window_power += window[i] * window[i];
    }

    const size_t n_bins = len / 2 + 1;
    PsdEstimate est;
    est.omega.resize(n_bins);
    est.s_nn.assign(n_bins, 0.0);
    est.s_pp.assign(n_bins, 0.0);
    est.s_np.assign(n_bins, {0.0, 0.0});
    for (size_t j = 0; j < n_bins; ++j)
        est.omega[j] = 2.0 * std::numbers::pi * j / (len * delta);

    std::vector<std::complex<double>> fn(len), fp(len);
    int segments = 0;
    for (size_t start = 0; start + len <= m; start += step) {
        for (size_t i = 0; i < len; ++i) {
            const Vec2& s = trajectory.states[first + start + i];
            fn[i] = {(s.x - mean_n) * window[i], 0.0};
            fp[i] = {(s.y - mean_p) * window[i], 0.0};
        }
        fft_radix2(fn);
        fft_radix2(fp);
        for (size_t j = 0; j < n_bins; ++j) {
            est.s_nn[j] += std::norm(fn[j]);
            est.s_pp[j] += std::norm(fp[j]);
            est.s_np[j] += fn[j] * std::conj(fp[j]);
        }
        ++segments;
    }
    const double scale = delta / (window_power * segments);
    for (size_t j = 0; j < n_bins; ++j) {
        est.s_nn[j] *= scale;
        est.s_pp[j] *= scale;
        est.s_np[j] *= scale;
    }
    est.segment_count = segments;
    return est;
}

EnsembleResult ensemble_run(const SimConfig& config, ExecMode mode) {
    config.validate();
    const int n_rep = config.n_replicates;
    std::vector<Trajectory> trajectories(n_rep);
    std::vector<std::string> errors(n_rep);

    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < n_rep; ++i) {
            try {
                trajectories[i] = simulate_replicate(config, i);
            } catch (const std::exception& err) {
                errors[i] = err.what();
            }
        }
    } else {
        for (int i = 0; i < n_rep; ++i) {
            try {
                trajectories[i] = simulate_replicate(config, i);
            } catch (const std::exception& err) {
                errors[i] = err.what();
            }
        }
    }
    for (int i = 0; i < n_rep; ++i)
        if (!errors[i].empty())
            throw std::runtime_error("replicate " + std::to_string(i) + ": " + errors[i]);

    EnsembleResult result;
    result.stats = estimate_stationary_covariance(trajectories, config.burn_in);

    result.per_replicate.reserve(n_rep);
    for (int i = 0; i < n_rep; ++i) {
        std::span<const Trajectory> one(&trajectories[i], 1);
        try {
            result.per_replicate.push_back(estimate_stationary_covariance(one, config.burn_in));
        } catch (const InsufficientData&) {
            EnsembleStats empty = extinction_stats(one);
            result.per_replicate.push_back(empty);
        }
    }

    if (config.welch) {
        PsdEstimate pooled;
        long total_segments = 0;
        for (int i = 0; i < n_rep; ++i) {
            PsdEstimate one;
            try {
                one = estimate_psd(trajectories[i], config.welch->segment_length,
                                   config.welch->overlap, config.burn_in);
            } catch (const InsufficientData&) {
                continue;  // absorbed too early to contribute segments
            }
            if (pooled.omega.empty()) {
                pooled = one;
                for (size_t j = 0; j < pooled.omega.size(); ++j) {
                    pooled.s_nn[j] *= one.segment_count;
                    pooled.s_pp[j] *= one.segment_count;
                    pooled.s_np[j] = pooled.s_np[j] * static_cast<double>(one.segment_count);
                }
            } else {
                for (size_t j = 0; j < pooled.omega.size(); ++j) {
                    pooled.s_nn[j] += one.s_nn[j] * one.segment_count;
                    pooled.s_pp[j] += one.s_pp[j] * one.segment_count;
                    pooled.s_np[j] += one.s_np[j] * static_cast<double>(one.segment_count);
                }
            }
            total_segments += one.segment_count;
        }
        if (total_segments == 0)
            throw InsufficientData("ensemble_run: no replicate yielded 2 welch segments");
        for (size_t j = 0; j < pooled.omega.size(); ++j) {
            pooled.s_nn[j] /= total_segments;
            pooled.s_pp[j] /= total_segments;
            pooled.s_np[j] /= static_cast<double>(total_segments);
        }
        pooled.segment_count = static_cast<int>(total_segments);
        result.psd = std::move(pooled);
    }
    return result;
}

}  // namespace rmnoise

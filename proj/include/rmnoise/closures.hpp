#ifndef RMNOISE_CLOSURES_HPP
#define RMNOISE_CLOSURES_HPP

#include <string_view>
#include <vector>

#include "rmnoise/types.hpp"

namespace rmnoise {

// The three predation-noise closures. All share the same deterministic drift;
// they differ only in the covariance contributed by the predation channels.
enum class ClosureKind { BernoulliCoupled, EffectiveCoupled, SplitDiagonal };

ClosureKind closure_from_name(std::string_view name);  // "bernoulli"|"effective"|"split"
const char* closure_name(ClosureKind closure);

enum class ChannelType {
    PreyBirth,             // (+1, 0), f = N
    PreyCompetitionDeath,  // (-1, 0), f = N^2/k
    PredatorDeath,         // (0, -1), f = c P
    PredationConversion,   // (-1,+1), f = e f_pred
    PredationNoConversion, // (-1, 0), f = (1-e) f_pred
    PredationEffective,    // (-1,+e), f = f_pred (diffusion-only)
    PredationPreyLoss,     // (-1, 0), f = f_pred (split comparator)
    PredatorBirth,         // ( 0,+1), f = e f_pred (split comparator)
};

struct Channel {
    Vec2 increment;  // stoichiometric increment (real-valued for the effective closure)
    ChannelType type;
};

// Ordered channel list generating both the drift and the covariance.
struct ChannelSet {
    std::vector<Channel> channels;
    ClosureKind closure;
};

// f_pred(x) = m N P / (1+N)
double predation_intensity(const ModelParams& params, State2 x);

// Density-level intensity f_k(x) of one channel type.
double channel_intensity(ChannelType type, const ModelParams& params, State2 x);

// Count-level propensity rate_k(n,p) = Omega * f_k(n/Omega, p/Omega),
// written in the simplified closed forms (predation: m n p / (Omega + n)).
double ssa_count_rate(ChannelType type, const ModelParams& params, double n, double p);

// Shared non-predation part: (1/Omega) diag(N + N^2/k, c P).
SymMatrix2 base_covariance(const ModelParams& params, State2 x);

// (f_pred/Omega) * M with M = [[1,-e],[-e,e]] (Bernoulli), [[1,-e],[-e,e^2]]
// (effective) or [[1,0],[0,e]] (split).
SymMatrix2 predation_covariance(const ModelParams& params, State2 x, ClosureKind closure);

SymMatrix2 full_covariance(const ModelParams& params, State2 x, ClosureKind closure);

// Lower-triangular factor B with B B^T = a. For rank-deficient a the second
// column is zeroed. Throws NotPSD when a fails the PSD tolerance.
struct Factor2 {
    double b11 = 0.0;
    double b21 = 0.0;
    double b22 = 0.0;  // b12 is structurally zero
};
Factor2 factorize_covariance(const SymMatrix2& a);

// All channels of a closure, including the diffusion-only effective one.
ChannelSet diffusion_channels(const ModelParams& params, ClosureKind closure);

// Integer-increment channels for exact simulation; zero-rate channels are
// dropped (the (1-e) branch at e=1). Throws UnsupportedClosure for the
// effective closure, whose (-1,e) increment is not a CTMC jump.
ChannelSet ssa_channels(const ModelParams& params, ClosureKind closure);

// Sum over channels of f_k(x) * nu_k.
Vec2 channel_drift(const ChannelSet& set, const ModelParams& params, State2 x);

// (1/Omega) * sum over channels of f_k(x) * nu_k nu_k^T.
SymMatrix2 channel_covariance(const ChannelSet& set, const ModelParams& params, State2 x);

}  // namespace rmnoise

#endif

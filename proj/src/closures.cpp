#include "rmnoise/closures.hpp"

#include <cmath>
#include <string>

namespace rmnoise {

ClosureKind closure_from_name(std::string_view name) {
    if (name == "bernoulli") return ClosureKind::BernoulliCoupled;
    if (name == "effective") return ClosureKind::EffectiveCoupled;
    if (name == "split") return ClosureKind::SplitDiagonal;
    throw DomainError("unknown closure name: " + std::string(name));
}

const char* closure_name(ClosureKind closure) {
    switch (closure) {
        case ClosureKind::BernoulliCoupled: return "bernoulli";
        case ClosureKind::EffectiveCoupled: return "effective";
        case ClosureKind::SplitDiagonal: return "split";
    }
    return "?";
}

double predation_intensity(const ModelParams& params, State2 x) {
    return params.m * x.n * x.p / (1.0 + x.n);
}

double channel_intensity(ChannelType type, const ModelParams& params, State2 x) {
    switch (type) {
        case ChannelType::PreyBirth: return x.n;
        case ChannelType::PreyCompetitionDeath: return x.n * x.n / params.k;
        case ChannelType::PredatorDeath: return params.c * x.p;
        case ChannelType::PredationConversion:
            return params.e * predation_intensity(params, x);
        case ChannelType::PredationNoConversion:
            return (1.0 - params.e) * predation_intensity(params, x);
        case ChannelType::PredationEffective:
        case ChannelType::PredationPreyLoss:
            return predation_intensity(params, x);
        case ChannelType::PredatorBirth:
            return params.e * predation_intensity(params, x);
    }
    return 0.0;
}

double ssa_count_rate(ChannelType type, const ModelParams& params, double n, double p) {
    switch (type) {
        case ChannelType::PreyBirth: return n;
        case ChannelType::PreyCompetitionDeath:
            return n * n / (params.k * params.omega);
        case ChannelType::PredatorDeath: return params.c * p;
        case ChannelType::PredationConversion:
            return params.e * params.m * n * p / (params.omega + n);
        case ChannelType::PredationNoConversion:
            return (1.0 - params.e) * params.m * n * p / (params.omega + n);
        case ChannelType::PredationEffective:
        case ChannelType::PredationPreyLoss:
            return params.m * n * p / (params.omega + n);
        case ChannelType::PredatorBirth:
            return params.e * params.m * n * p / (params.omega + n);
    }
    return 0.0;
}

SymMatrix2 base_covariance(const ModelParams& params, State2 x) {
    const double inv_omega = 1.0 / params.omega;
    return {inv_omega * (x.n + x.n * x.n / params.k), 0.0,
            inv_omega * params.c * x.p};
}

SymMatrix2 predation_covariance(const ModelParams& params, State2 x, ClosureKind closure) {
    const double s = predation_intensity(params, x) / params.omega;
    const double e = params.e;
    switch (closure) {
        case ClosureKind::BernoulliCoupled: return {s, -e * s, e * s};
        case ClosureKind::EffectiveCoupled: return {s, -e * s, e * e * s};
        case ClosureKind::SplitDiagonal: return {s, 0.0, e * s};
    }
    return {};
}

SymMatrix2 full_covariance(const ModelParams& params, State2 x, ClosureKind closure) {
    return base_covariance(params, x) + predation_covariance(params, x, closure);
}

Factor2 factorize_covariance(const SymMatrix2& a) {
    const double scale = a.q11 * a.q22 + a.q12 * a.q12;
    const double entry_scale = a.max_abs();
    const double det = a.det();
    if (a.q11 < -1e-14 * entry_scale || a.q22 < -1e-14 * entry_scale ||
        det < -1e-12 * scale)
        throw NotPSD("factorize_covariance: matrix not PSD within tolerance");

    Factor2 b;
    if (a.q11 <= 1e-14 * entry_scale) {
        // first row/column numerically zero; the PSD gate above already
        // bounds q12^2 by 1e-12*scale, so dropping it is within tolerance
        b.b22 = std::sqrt(std::max(a.q22, 0.0));
        return b;
    }
    b.b11 = std::sqrt(a.q11);
    b.b21 = a.q12 / b.b11;
    const double rem = a.q22 - b.b21 * b.b21;  // equals det/q11
    if (det <= 1e-14 * scale) {
        b.b22 = 0.0;  // rank-deficient: zero the trailing column
    } else {
        b.b22 = std::sqrt(std::max(rem, 0.0));
    }
    return b;
}

ChannelSet diffusion_channels(const ModelParams& params, ClosureKind closure) {
    ChannelSet set;
    set.closure = closure;
    set.channels = {
        {{+1.0, 0.0}, ChannelType::PreyBirth},
        {{-1.0, 0.0}, ChannelType::PreyCompetitionDeath},
        {{0.0, -1.0}, ChannelType::PredatorDeath},
    };
    switch (closure) {
        case ClosureKind::BernoulliCoupled:
            set.channels.push_back({{-1.0, +1.0}, ChannelType::PredationConversion});
            if (params.e < 1.0)
                set.channels.push_back({{-1.0, 0.0}, ChannelType::PredationNoConversion});
            break;
        case ClosureKind::EffectiveCoupled:
            set.channels.push_back({{-1.0, params.e}, ChannelType::PredationEffective});
            break;
        case ClosureKind::SplitDiagonal:
            set.channels.push_back({{-1.0, 0.0}, ChannelType::PredationPreyLoss});
            set.channels.push_back({{0.0, +1.0}, ChannelType::PredatorBirth});
            break;
    }
    return set;
}

ChannelSet ssa_channels(const ModelParams& params, ClosureKind closure) {
    if (closure == ClosureKind::EffectiveCoupled)
        throw UnsupportedClosure(
            "ssa_channels: effective closure has no integer jump representation");
    return diffusion_channels(params, closure);
}

Vec2 channel_drift(const ChannelSet& set, const ModelParams& params, State2 x) {
    Vec2 b;
    for (const Channel& ch : set.channels) {
        const double f = channel_intensity(ch.type, params, x);
        b.x += f * ch.increment.x;
        b.y += f * ch.increment.y;
    }
    return b;
}

SymMatrix2 channel_covariance(const ChannelSet& set, const ModelParams& params, State2 x) {
    SymMatrix2 a;
    for (const Channel& ch : set.channels) {
        const double f = channel_intensity(ch.type, params, x);
        a.q11 += f * ch.increment.x * ch.increment.x;
        a.q12 += f * ch.increment.x * ch.increment.y;
        a.q22 += f * ch.increment.y * ch.increment.y;
    }
    return a * (1.0 / params.omega);
}

}  // namespace rmnoise

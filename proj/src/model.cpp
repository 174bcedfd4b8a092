#include "rmnoise/model.hpp"

#include <cmath>

namespace rmnoise {

std::optional<Equilibrium> coexistence_equilibrium(const ModelParams& params) {
    const double d = params.m - params.c;
    if (!(d > 0.0) || !(params.k * d > params.c)) return std::nullopt;
    const double n_star = params.c / d;
    const double p_star = (params.k * d - params.c) / (params.k * d * d);
    return Equilibrium{EquilibriumKind::Coexistence, State2{n_star, p_star}};
}

std::vector<Equilibrium> equilibria(const ModelParams& params) {
    std::vector<Equilibrium> out;
    out.push_back({EquilibriumKind::Origin, State2{0.0, 0.0}});
    out.push_back({EquilibriumKind::PreyOnly, State2{params.k, 0.0}});
    if (auto k3 = coexistence_equilibrium(params)) out.push_back(*k3);
    return out;
}

double hopf_threshold(const ModelParams& params) {
    if (!(params.m > params.c))
        throw DomainError("hopf_threshold: undefined for m <= c");
    return (params.m + params.c) / (params.m - params.c);
}

Regime classify_regime(const ModelParams& params) {
    Regime r;
    if (!(params.m > params.c)) {
        r.label = RegimeLabel::Infeasible;
        return r;
    }
    const double k_h = hopf_threshold(params);
    r.hopf_k = k_h;
    r.margin = k_h - params.k;
    if (!(params.k * (params.m - params.c) > params.c)) {
        r.label = RegimeLabel::Infeasible;
        return r;
    }
    if (std::abs(params.k - k_h) <= 1e-12 * k_h)
        r.label = RegimeLabel::OnThreshold;
    else if (params.k < k_h)
        r.label = RegimeLabel::Lambda2_Stable;
    else
        r.label = RegimeLabel::Lambda1_PostHopf;
    return r;
}

Vec2 drift(const ModelParams& params, State2 x) {
    const double holling = params.m * x.n / (1.0 + x.n);
    return {x.n * (1.0 - x.n / params.k) - holling * x.p,
            x.p * (-params.c + holling)};
}

Jacobian2 jacobian(const ModelParams& params, State2 x) {
    const double denom = 1.0 + x.n;
    const double holling = params.m * x.n / denom;
    Jacobian2 j;
    j.a11 = 1.0 - 2.0 * x.n / params.k - params.m * x.p / (denom * denom);
    j.a12 = -holling;
    j.a21 = params.m * x.p / (denom * denom);
    j.a22 = -params.c + holling;
    return j;
}

Jacobian2 jacobian_at_k3(const ModelParams& params) {
    const double d = params.m - params.c;
    if (!(d > 0.0) || !(params.k * d > params.c))
        throw InfeasibleEquilibrium("jacobian_at_k3: coexistence infeasible");
    Jacobian2 j;
    j.a11 = params.c * (params.k * d - (params.m + params.c)) /
            (params.k * params.m * d);
    j.a12 = -params.c;
    j.a21 = (params.k * d - params.c) / (params.k * params.m);
    j.a22 = 0.0;  // predator isocline: the (2,2) entry vanishes identically
    return j;
}

}  // namespace rmnoise

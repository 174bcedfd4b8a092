#ifndef RMNOISE_MODEL_HPP
#define RMNOISE_MODEL_HPP

#include <optional>
#include <vector>

#include "rmnoise/types.hpp"

namespace rmnoise {

// Deterministic backbone: equilibria, feasibility, Jacobians, Hopf threshold
// and regime classification. All functions are pure and thread-safe.

// Coexistence point N* = c/(m-c), P* = (k(m-c)-c)/(k(m-c)^2); nullopt when
// the feasibility conditions m > c and k(m-c) > c fail.
std::optional<Equilibrium> coexistence_equilibrium(const ModelParams& params);

// Origin, prey-only (k, 0) and, when feasible, the coexistence point.
std::vector<Equilibrium> equilibria(const ModelParams& params);

// k_H = (m+c)/(m-c). Throws DomainError when m <= c.
double hopf_threshold(const ModelParams& params);

// Lambda2_Stable (k < k_H), Lambda1_PostHopf (k > k_H), OnThreshold within
// relative tolerance 1e-12, Infeasible otherwise.
Regime classify_regime(const ModelParams& params);

Vec2 drift(const ModelParams& params, State2 x);

Jacobian2 jacobian(const ModelParams& params, State2 x);

// Closed-form Jacobian at the coexistence point; a22 is exactly zero.
// Throws InfeasibleEquilibrium if the coexistence point does not exist.
Jacobian2 jacobian_at_k3(const ModelParams& params);

}  // namespace rmnoise

#endif

#ifndef RMNOISE_TYPES_HPP
#define RMNOISE_TYPES_HPP

#include <cmath>
#include <optional>

#include "rmnoise/errors.hpp"

namespace rmnoise {

inline constexpr const char* kVersion = "0.1.0";

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double max_abs() const { return std::max(std::abs(x), std::abs(y)); }
};

// Scalar parameters of the predator-prey model: m (maximal
// predation/assimilation), c (predator mortality), k (scaled prey carrying
// capacity), omega (system size), e (conversion efficiency in (0,1]).
struct ModelParams {
    double m;
    double c;
    double k;
    double omega;
    double e;

    ModelParams() : ModelParams(1.0, 0.5, 1.0, 1.0, 1.0) {}

    ModelParams(double m_, double c_, double k_, double omega_, double e_ = 1.0)
        : m(m_), c(c_), k(k_), omega(omega_), e(e_) {
        if (!(m > 0.0)) throw DomainError("ModelParams: m must be > 0");
        if (!(c > 0.0)) throw DomainError("ModelParams: c must be > 0");
        if (!(k > 0.0)) throw DomainError("ModelParams: k must be > 0");
        if (!(omega > 0.0)) throw DomainError("ModelParams: omega must be > 0");
        if (!(e > 0.0 && e <= 1.0)) throw DomainError("ModelParams: e must be in (0,1]");
    }
};

// Point of the nonnegative quadrant (prey density n, predator density p).
struct State2 {
    double n = 0.0;
    double p = 0.0;

    bool in_closed_quadrant() const { return n >= 0.0 && p >= 0.0; }
    bool in_open_quadrant() const { return n > 0.0 && p > 0.0; }
};

enum class EquilibriumKind { Origin, PreyOnly, Coexistence };

struct Equilibrium {
    EquilibriumKind kind;
    State2 state;
};

// 2x2 Jacobian in row-major order; trace/det always derived from entries.
struct Jacobian2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a21 = 0.0;
    double a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }
    bool hurwitz() const { return trace() < 0.0 && det() > 0.0; }
};

enum class RegimeLabel { Lambda2_Stable, Lambda1_PostHopf, OnThreshold, Infeasible };

struct Regime {
    RegimeLabel label = RegimeLabel::Infeasible;
    std::optional<double> hopf_k;  // absent when m <= c (threshold undefined)
    std::optional<double> margin;  // k_H - k
};

// Symmetric 2x2 matrix with the off-diagonal stored once. Shared by the
// diffusion covariance, the stationary covariance and closure blocks.
struct SymMatrix2 {
    double q11 = 0.0;
    double q12 = 0.0;
    double q22 = 0.0;

    double det() const { return q11 * q22 - q12 * q12; }
    double max_abs() const {
        return std::max({std::abs(q11), std::abs(q12), std::abs(q22)});
    }
    // PSD within roundoff: diagonals nonnegative, det >= -1e-14 * scale.
    bool is_psd(double rel_tol = 1e-14) const {
        const double scale = q11 * q22 + q12 * q12;
        return q11 >= -rel_tol * max_abs() && q22 >= -rel_tol * max_abs() &&
               det() >= -rel_tol * scale;
    }

    SymMatrix2 operator+(const SymMatrix2& o) const {
        return {q11 + o.q11, q12 + o.q12, q22 + o.q22};
    }
    SymMatrix2 operator*(double s) const { return {q11 * s, q12 * s, q22 * s}; }
};

}  // namespace rmnoise

#endif

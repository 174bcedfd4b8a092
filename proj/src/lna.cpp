#include "rmnoise/lna.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rmnoise {

namespace {

double lyapunov_residual(const Jacobian2& j, const SymMatrix2& w, const SymMatrix2& d) {
    // J W + W J^T + D, exploiting symmetry of W and D
    const double r11 = 2.0 * (j.a11 * w.q11 + j.a12 * w.q12) + d.q11;
    const double r12 = j.a21 * w.q11 + (j.a11 + j.a22) * w.q12 + j.a12 * w.q22 + d.q12;
    const double r22 = 2.0 * (j.a21 * w.q12 + j.a22 * w.q22) + d.q22;
    return std::max({std::abs(r11), std::abs(r12), std::abs(r22)});
}

}  // namespace

LyapunovSolution solve_lyapunov(const Jacobian2& j, const SymMatrix2& d) {
    if (!j.hurwitz())
        throw NotHurwitz("solve_lyapunov: J not Hurwitz, stationary LNA diagnostics not defined");

    const double a = j.a11, b = j.a12, c = j.a21, dd = j.a22;
    // M (w11, w12, w22)^T = -(q11, q12, q22)^T with
    // M = [[2a, 2b, 0], [c, a+d, b], [0, 2c, 2d]]
    const double det_m = 4.0 * j.trace() * j.det();
    const double m_scale = std::max({std::abs(2.0 * a), std::abs(2.0 * b),
                                     std::abs(c), std::abs(a + dd),
                                     std::abs(2.0 * c), std::abs(2.0 * dd)});
    if (std::abs(det_m) < 1e-14 * m_scale * m_scale * m_scale)
        throw SingularSystem("solve_lyapunov: 3x3 system numerically singular");

    // Cramer's rule on the 3x3 system
    const double r1 = -d.q11, r2 = -d.q12, r3 = -d.q22;
    const double det1 = r1 * ((a + dd) * 2.0 * dd - b * 2.0 * c) -
                        2.0 * b * (r2 * 2.0 * dd - b * r3);
    const double det2 = 2.0 * a * (r2 * 2.0 * dd - b * r3) - r1 * (c * 2.0 * dd);
    const double det3 = 2.0 * a * ((a + dd) * r3 - 2.0 * c * r2) -
                        2.0 * b * (c * r3) + r1 * (c * 2.0 * c);

    LyapunovSolution sol;
    sol.w.q11 = det1 / det_m;
    sol.w.q12 = det2 / det_m;
    sol.w.q22 = det3 / det_m;
    sol.residual_norm = lyapunov_residual(j, sol.w, d);
    return sol;
}

PsdSample psd_matrix(const Jacobian2& j, const SymMatrix2& d, double omega) {
    if (!j.hurwitz())
        throw NotHurwitz("psd_matrix: J not Hurwitz, stationary LNA diagnostics not defined");

    using cd = std::complex<double>;
    // rows of A = (J - i omega I)^-1 = adj / det, with
    // det(J - i omega I) = det(J) - omega^2 - i omega tr(J)
    const cd den(j.det() - omega * omega, -omega * j.trace());
    const cd v1[2] = {cd(j.a22, -omega) / den, cd(-j.a12, 0.0) / den};
    const cd v2[2] = {cd(-j.a21, 0.0) / den, cd(j.a11, -omega) / den};

    // S = A D A^H; diagonals are real by symmetry of D, and S21 = conj(S12)
    auto quad = [&](const cd* u) {
        return d.q11 * std::norm(u[0]) + d.q22 * std::norm(u[1]) +
               2.0 * d.q12 * (u[0].real() * u[1].real() + u[0].imag() * u[1].imag());
    };
    auto cross = [&](const cd* u, const cd* v) {
        return u[0] * (d.q11 * std::conj(v[0]) + d.q12 * std::conj(v[1])) +
               u[1] * (d.q12 * std::conj(v[0]) + d.q22 * std::conj(v[1]));
    };

    PsdSample s;
    s.omega = omega;
    s.s11 = cd(quad(v1), 0.0);
    s.s22 = cd(quad(v2), 0.0);
    s.s12 = cross(v1, v2);
    s.s21 = std::conj(s.s12);
    return s;
}

PsdSweep psd_sweep(const Jacobian2& j, const SymMatrix2& d,
                   std::span<const double> omega_grid, ExecMode mode) {
    for (size_t i = 1; i < omega_grid.size(); ++i)
        if (!(omega_grid[i] > omega_grid[i - 1]))
            throw DomainError("psd_sweep: grid must be strictly increasing");
    if (!j.hurwitz())
        throw NotHurwitz("psd_sweep: J not Hurwitz, stationary LNA diagnostics not defined");

    PsdSweep sweep;
    sweep.samples.resize(omega_grid.size());
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(omega_grid.size());
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            sweep.samples[i] = psd_matrix(j, d, omega_grid[i]);
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i)
            sweep.samples[i] = psd_matrix(j, d, omega_grid[i]);
    }

    for (const PsdSample& s : sweep.samples) {
        if (s.s11.real() > sweep.peak_nn.height) {
            sweep.peak_nn = {s.omega, s.s11.real()};
        }
        if (s.s22.real() > sweep.peak_pp.height) {
            sweep.peak_pp = {s.omega, s.s22.real()};
        }
    }
    return sweep;
}

double spectral_scale(const Jacobian2& j) {
    return std::sqrt(j.a11 * j.a11 + j.a12 * j.a12 + j.a21 * j.a21 + j.a22 * j.a22);
}

std::vector<double> default_psd_integration_grid(const Jacobian2& j) {
    const double omega_max = 200.0 * spectral_scale(j);
    const int count = 200001;
    std::vector<double> grid(count);
    const double step = 2.0 * omega_max / (count - 1);
    for (int i = 0; i < count; ++i) grid[i] = -omega_max + step * i;
    return grid;
}

SymMatrix2 integrate_psd(const Jacobian2& j, const SymMatrix2& d,
                         std::span<const double> omega_grid, ExecMode mode) {
    if (omega_grid.size() < 2)
        throw DomainError("integrate_psd: need at least two grid points");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(omega_grid.size());

    std::vector<double> s11(n), s22(n), s12re(n);
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const PsdSample s = psd_matrix(j, d, omega_grid[i]);
            s11[i] = s.s11.real();
            s22[i] = s.s22.real();
            s12re[i] = s.s12.real();
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const PsdSample s = psd_matrix(j, d, omega_grid[i]);
            s11[i] = s.s11.real();
            s22[i] = s.s22.real();
            s12re[i] = s.s12.real();
        }
    }

    // trapezoid rule; the sequential sum keeps results thread-count independent
    double acc11 = 0.0, acc22 = 0.0, acc12 = 0.0;
    for (std::ptrdiff_t i = 1; i < n; ++i) {
        const double dw = omega_grid[i] - omega_grid[i - 1];
        acc11 += 0.5 * dw * (s11[i] + s11[i - 1]);
        acc22 += 0.5 * dw * (s22[i] + s22[i - 1]);
        acc12 += 0.5 * dw * (s12re[i] + s12re[i - 1]);
    }
    const double two_pi = 2.0 * std::numbers::pi;
    return {acc11 / two_pi, acc12 / two_pi, acc22 / two_pi};
}

double chi2_quantile_2dof(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("chi2_quantile_2dof: p must be in (0,1)");
    return -2.0 * std::log1p(-p);
}

EllipseGeometry ellipse_geometry(const SymMatrix2& w, double p) {
    const double mean = 0.5 * (w.q11 + w.q22);
    const double diff = w.q11 - w.q22;
    const double half_gap = 0.5 * std::sqrt(diff * diff + 4.0 * w.q12 * w.q12);
    const double lp = mean + half_gap;
    const double lm = mean - half_gap;
    if (!(lm > 1e-14 * std::max(std::abs(lp), 1e-300)))
        throw NotPositiveDefinite("ellipse_geometry: covariance not positive definite");

    const double q = chi2_quantile_2dof(p);
    EllipseGeometry g;
    g.lambda_plus = lp;
    g.lambda_minus = lm;
    g.ell_plus = std::sqrt(q * lp);
    g.ell_minus = std::sqrt(q * lm);
    g.p = p;
    if (w.q12 == 0.0 && diff == 0.0) {
        g.theta = 0.0;  // isotropic tie-break
    } else {
        g.theta = 0.5 * std::atan2(2.0 * w.q12, diff);
        if (g.theta <= -0.5 * std::numbers::pi) g.theta += std::numbers::pi;  // reduce to (-pi/2, pi/2]
    }
    return g;
}

PrecursorReport precursor_indicator(const EllipseGeometry& geom,
                                    std::optional<double> d_sep,
                                    const ModelParams& params) {
    PrecursorReport rep;
    rep.regime_note = classify_regime(params);
    if (d_sep) {
        if (!(*d_sep > 0.0))
            throw DomainError("precursor_indicator: d_sep must be > 0");
        rep.d_sep = *d_sep;
        rep.d_sep_source = DsepSource::UserSupplied;
    } else {
        const auto k3 = coexistence_equilibrium(params);
        if (!k3)
            throw InfeasibleEquilibrium("precursor_indicator: no coexistence equilibrium");
        rep.d_sep = std::min(k3->state.n, k3->state.p);
        rep.d_sep_source = DsepSource::DefaultMinEquilibriumCoordinate;
    }
    rep.pi_p = geom.ell_plus / rep.d_sep;
    return rep;
}

SsfReport ssf_pipeline(const ModelParams& params, ClosureKind closure, double p,
                       std::optional<double> d_sep) {
    SsfReport rep;
    rep.regime = classify_regime(params);
    const auto k3 = coexistence_equilibrium(params);
    if (!k3)
        throw InfeasibleEquilibrium("ssf_pipeline: no coexistence equilibrium");
    rep.k3 = *k3;
    rep.j = jacobian_at_k3(params);
    rep.d_star = full_covariance(params, k3->state, closure);

    if (!rep.j.hurwitz()) {
        rep.defined = false;
        rep.note = "stationary LNA diagnostics not defined";
        return rep;
    }

    // symmetrization of W is structural: the off-diagonal is stored once
    LyapunovSolution lyap = solve_lyapunov(rep.j, rep.d_star);
    rep.lyapunov = lyap;
    rep.ellipse = ellipse_geometry(lyap.w, p);
    rep.precursor = precursor_indicator(*rep.ellipse, d_sep, params);
    rep.defined = true;
    return rep;
}

}  // namespace rmnoise

#ifndef RMNOISE_LNA_HPP
#define RMNOISE_LNA_HPP

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmnoise/closures.hpp"
#include "rmnoise/model.hpp"
#include "rmnoise/types.hpp"

namespace rmnoise {

// Execution mode for grid/ensemble kernels. Serial is the reference
// implementation; Parallel uses OpenMP and must produce identical bytes.
enum class ExecMode { Serial, Parallel };

struct LyapunovSolution {
    SymMatrix2 w;
    double residual_norm = 0.0;  // max-abs of J W + W J^T + D
};

// Stationary covariance of dy = J y dt + B dW via the 3x3 linear system in
// (w11, w12, w22). Requires J Hurwitz; the system determinant 4 tr(J) det(J)
// is validated before solving.
LyapunovSolution solve_lyapunov(const Jacobian2& j, const SymMatrix2& d);

// Complex 2x2 spectral matrix at one angular frequency.
struct PsdSample {
    double omega = 0.0;
    std::complex<double> s11, s12, s21, s22;
};

// S(omega) = (J - i omega I)^-1 D (J^T + i omega I)^-1.
PsdSample psd_matrix(const Jacobian2& j, const SymMatrix2& d, double omega);

struct SpectralPeak {
    double omega = 0.0;
    double height = 0.0;
};

struct PsdSweep {
    std::vector<PsdSample> samples;
    SpectralPeak peak_nn;
    SpectralPeak peak_pp;
};

// Per-frequency spectra over a strictly increasing grid, with the peak of
// each real diagonal. Parallel evaluation fills indexed slots, so results
// are identical to the serial reference for any thread count.
PsdSweep psd_sweep(const Jacobian2& j, const SymMatrix2& d,
                   std::span<const double> omega_grid,
                   ExecMode mode = ExecMode::Parallel);

// Frobenius norm of J; sets the frequency scale of the default grids.
double spectral_scale(const Jacobian2& j);

// Symmetric grid [-200*scale, 200*scale] with 200001 points, the default for
// the covariance-integral identity (1/2pi) int S domega = W.
std::vector<double> default_psd_integration_grid(const Jacobian2& j);

// Trapezoid integral of S over a symmetric grid, divided by 2 pi; the real
// part approximates W.
SymMatrix2 integrate_psd(const Jacobian2& j, const SymMatrix2& d,
                         std::span<const double> omega_grid,
                         ExecMode mode = ExecMode::Parallel);

// Closed form -2 ln(1-p), exact for 2 degrees of freedom.
double chi2_quantile_2dof(double p);

struct EllipseGeometry {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double ell_plus = 0.0;
    double ell_minus = 0.0;
    double theta = 0.0;  // major-axis angle in (-pi/2, pi/2]
    double p = 0.0;
};

// Confidence-ellipse geometry of a positive definite covariance.
EllipseGeometry ellipse_geometry(const SymMatrix2& w, double p);

enum class DsepSource { UserSupplied, DefaultMinEquilibriumCoordinate };

struct PrecursorReport {
    double pi_p = 0.0;
    double d_sep = 0.0;
    DsepSource d_sep_source = DsepSource::DefaultMinEquilibriumCoordinate;
    Regime regime_note;
};

// Pi_p = ell_+ / d_sep. Without a user-supplied d_sep the default is
// min(N*, P*), the deviation-coordinate distance from the coexistence point
// to the nearest extinction axis.
PrecursorReport precursor_indicator(const EllipseGeometry& geom,
                                    std::optional<double> d_sep,
                                    const ModelParams& params);

// Full chain: Hurwitz gate -> Lyapunov -> ellipse -> indicator. A non-Hurwitz
// Jacobian is an explicit "not defined" outcome, not an error.
struct SsfReport {
    Regime regime;
    Equilibrium k3{};
    Jacobian2 j{};
    SymMatrix2 d_star{};
    bool defined = false;
    std::string note;
    std::optional<LyapunovSolution> lyapunov;
    std::optional<EllipseGeometry> ellipse;
    std::optional<PrecursorReport> precursor;
};

SsfReport ssf_pipeline(const ModelParams& params, ClosureKind closure, double p,
                       std::optional<double> d_sep);

}  // namespace rmnoise

#endif

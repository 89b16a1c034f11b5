#ifndef OSEEN_SPECTRAL_HPP
#define OSEEN_SPECTRAL_HPP

#include <vector>

#include "oseen/mode_operator.hpp"

namespace oseen {

struct SpectrumResult {
    int mode = 0;
    double beta = 0.0;
    Subspace subspace = Subspace::full;
    std::vector<std::complex<double>> eigenvalues;  // ascending real part
    std::vector<double> residuals;                  // ||H v - lambda v|| / ||v||
    int n_points = 0;
    double r_max = 0.0;
};

/// Dense eigen-decomposition of H in the Z metric (optionally deflated
/// onto Z_0). Eigensolver failure surfaces as an exception.
SpectrumResult eigenvalues(const ModeOperator& op, Subspace subspace = Subspace::full);

/// 1 / sigma_min(H - i lambda): LU factorisation plus Lanczos iteration on
/// the inverse-normal operator; falls back to a dense SVD when the
/// iteration stagnates.
double resolvent_norm(const ModeOperator& op, double lambda,
                      Subspace subspace = Subspace::full);
double resolvent_norm(const Eigen::MatrixXcd& h, double lambda);

/// Dense-SVD evaluation of the same quantity (the independent oracle).
double resolvent_norm_svd(const Eigen::MatrixXcd& h, double lambda);

struct ResolventSweep {
    int mode = 0;
    double beta = 0.0;
    Subspace subspace = Subspace::full;
    std::vector<double> lambda_samples;
    std::vector<double> norms;
    double sup_norm = 0.0;
    double argmax_lambda = 0.0;
    bool window_was_doubled = false;
};

struct SupOptions {
    int coarse_points = 129;   // signed logarithmic grid
    double rel_tol = 1e-3;     // golden-section stop on lambda
    int workers = 1;
};

/// sup over real lambda of the resolvent norm on the imaginary axis:
/// coarse signed logarithmic grid on |lambda| <= 2 c6 |beta| (c6 = measured
/// ||M_n||), then golden-section refinement of every local maximum. The
/// window doubles if the argmax lands on its edge.
ResolventSweep pseudospectral_sup(const ModeOperator& op,
                                  Subspace subspace = Subspace::full,
                                  const SupOptions& opts = {});

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;  // of log y vs log x
    double r_squared = 0.0;
    std::vector<double> x, y;
};

/// Least-squares fit of log y against log x. Requires >= 4 strictly
/// increasing positive x and positive y.
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y);

struct SigmaModeEntry {
    int mode = 0;
    double beta = 0.0;
    double min_re_coarse = 0.0;
    double min_re_fine = 0.0;  // n_points doubled
    bool trusted = false;
    int n_points = 0;
};

struct SigmaResult {
    double alpha = 0.0;
    double sigma = 0.0;    // min over trusted modes, fine grid
    bool trusted = false;  // argmin mode trusted and no untrusted value below
    std::vector<SigmaModeEntry> per_mode;
};

struct SigmaOptions {
    int n_max = 3;
    int base_points = 0;        // 0: resolution ladder chosen from alpha
    double trust_rel_tol = 1e-6;
    int workers = 1;
};

/// Spectral lower bound Sigma(alpha): minimum over modes 1..n_max (Z_0
/// deflation at n = 1) of the smallest real part of sigma(H_{n, n alpha}).
/// Every eigenvalue is certified by an n_points-doubling comparison;
/// untrusted bottoms mark the alpha-point untrusted (in double precision
/// the machine-epsilon pseudospectrum swallows the true bottom once
/// |beta| is large enough, so high-alpha points legitimately fail).
SigmaResult spectral_bound_sigma(double alpha, const SigmaOptions& opts = {});

struct NumericalRangeReport {
    int mode = 0;
    double beta = 0.0;
    int samples = 0;
    double min_re = 0.0;
    double max_abs_im = 0.0;
    bool re_bound_ok = false;  // Re z >= |n|/2 - tol
    bool im_bound_ok = false;  // |Im z| <= c6 |beta| + tol
    double c8_hat = 0.0;       // |Im z| <= |alpha| (c8 sqrt(Re z) + c9)
    double c9_hat = 0.0;
};

/// Rayleigh-quotient containment check with unit vectors drawn across
/// smoothness scales (random combinations of the low -L_n eigenvectors).
NumericalRangeReport numerical_range_check(const ModeOperator& op, int sample_count,
                                           unsigned seed = 12345,
                                           Subspace subspace = Subspace::full);

}  // namespace oseen

#endif

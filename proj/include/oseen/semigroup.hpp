#ifndef OSEEN_SEMIGROUP_HPP
#define OSEEN_SEMIGROUP_HPP

#include <functional>
#include <vector>

#include "oseen/mode_operator.hpp"

namespace oseen {

struct PropagatorOptions {
    // Modes of -L_n above lambda_cut are dropped from the propagator basis;
    // they decay like e^{-tau lambda} and otherwise only inject the
    // machine-epsilon pseudospectrum of the grid-clustering stiffness into
    // the matrix exponential. 0 selects max(2000, 25 c6 |beta|, 4 |n|^2).
    double lambda_cut = 0.0;
};

// Propagator e^{-tau H_{n,beta}} realised in the eigenbasis of -L_n,
// truncated at lambda_cut, with scaling-and-squaring matrix exponentials.
class Propagator {
  public:
    Propagator(const ModeOperator& op, Subspace subspace = Subspace::full,
               const PropagatorOptions& opts = {});

    int dim() const { return static_cast<int>(h_trunc_.rows()); }
    double lambda_cut() const { return lambda_cut_; }
    double dropped_rate() const { return lambda_next_; }

    // ||e^{-tau H}||_{Z->Z} (truncated basis; the dropped diagonal block
    // contributes at most e^{-tau lambda_next}).
    double norm(double tau) const;

    // Dense propagator in the truncated eigenbasis and mapped back to
    // metric coordinates.
    Eigen::MatrixXcd matrix_metric(double tau) const;

    // Propagate a metric-coordinate vector.
    Eigen::VectorXcd apply_metric(const Eigen::VectorXcd& x, double tau) const;

    const Eigen::MatrixXcd& h_truncated() const { return h_trunc_; }
    const Eigen::MatrixXd& basis() const { return basis_; }

  private:
    Eigen::MatrixXd basis_;     // metric dim x m', orthonormal columns
    Eigen::MatrixXcd h_trunc_;  // m' x m'
    double lambda_cut_ = 0.0;
    double lambda_next_ = 0.0;  // smallest dropped -L_n eigenvalue
};

/// One-call operator norm of e^{-tau H} in the Z metric.
double propagator_norm(const ModeOperator& op, double tau,
                       Subspace subspace = Subspace::full,
                       const PropagatorOptions& opts = {});

struct DecayEnvelope {
    int mode = 0;
    double beta = 0.0;
    Subspace subspace = Subspace::full;
    std::vector<double> tau_samples;
    std::vector<double> norms;
    double c4_hat = 0.0;        // norm <= c4 |beta|^{2/3} e^{-c5 |beta|^{1/3} tau}
    double c5_hat = 0.0;
    double contraction_rate = 0.0;  // |n|/2 on Z, 1 on Z_0 at |n| = 1
    bool contraction_ok = false;    // norms <= e^{-rate tau} (1 + 1e-6)
    bool envelope_holds = false;    // pointwise, with the fitted constants
    double fit_r_squared = 0.0;
    double window_lo = 0.0, window_hi = 0.0;  // tau window of the slope fit
};

/// Fit the two-branch decay envelope to measured propagator norms. The
/// slope c5 comes from a least-squares line on the enhanced-decay window
/// (after the curve leaves the contraction branch, before it reaches the
/// resolution floor); c4 is then the smallest constant making the envelope
/// hold at every sample.
DecayEnvelope fit_decay_envelope(const ModeOperator& op, const std::vector<double>& taus,
                                 Subspace subspace = Subspace::full,
                                 const PropagatorOptions& opts = {});

struct ContourSpec {
    double x0 = 0.5;      // abscissa of the vertical segment
    double y0 = 0.0;      // half-height; 0 collapses the segment
    int vertical_points = 0;   // 0: chosen from y0 * tau
    int ray_panel_points = 16; // Gauss points per ray panel
    double target_rel = 1e-6;  // stop refining the segment at this change
    double tail_cut = 37.0;    // rays stop once e^{-(x0+s) tau} < e^{-tail_cut}
};

struct ContourResult {
    Eigen::MatrixXcd propagator;  // metric coordinates
    double tail_estimate = 0.0;   // norm of the last ray panel contribution
    int resolvent_evaluations = 0;
};

/// Inverse-Laplace contour evaluation of e^{-tau H}: trapezoid on the
/// vertical segment, geometric Gauss panels on the two 45-degree rays.
/// Verifies first that the computed spectrum lies strictly right of x0.
ContourResult laplace_contour_propagator(const ModeOperator& op, double tau,
                                         const ContourSpec& spec,
                                         Subspace subspace = Subspace::full);

/// e^{tau L} applied to one azimuthal mode through the explicit heat-kernel
/// representation (angular integral reduced by trapezoid quadrature).
/// tau below 1e-3 is rejected: the kernel is then too singular for the
/// fixed product rule and the matrix exponential should be used instead.
WeightedRadialFunction mehler_apply(const WeightedRadialFunction& w, double tau,
                                    int n_phi = 1024);

struct SmoothingReport {
    double p = 0.0, q = 0.0;
    bool gradient = false;
    std::vector<double> taus;
    std::vector<double> ratios;   // ||G^{-1/2} e^{tau L} w||_q / ||G^{-1/2} w||_p
    double fitted_exponent = 0.0; // of a(tau)^{-e}
    double expected_exponent = 0.0;
};

/// Short-time smoothing-rate measurement: a self-similar bump family of
/// width sqrt(a(tau)) saturates the L^p -> L^q bound, so the log-log slope
/// of the ratio against a(tau) recovers the blow-up exponent
/// 1/p - 1/q (+ 1/2 for the gradient variant).
SmoothingReport smoothing_check(const GridPtr& grid, double p, double q,
                                bool gradient = false,
                                const std::vector<double>& taus = {});

struct DuhamelReport {
    double alpha = 0.0;
    int samples = 0;
    double c0_hat = 0.0;      // max over runs/times of lhs^2 / int ||f||^2
    double refine_drift = 0.0;  // relative change under time-step halving
};

// Time-dependent vector field in polar components, one radial profile per
// azimuthal mode and component, with a scalar envelope in time.
struct TestVectorField {
    std::vector<WeightedRadialFunction> f_r, f_theta;  // modes 0..n_max
    std::function<double(double)> envelope;            // time factor
};

/// Empirical constant of the divergence-form Duhamel bound
///   || int_0^tau e^{(tau-s)(L - alpha Lambda)} div f ds ||_X^2
///      <= C0 int_0^tau ||f(s)||_X^2 ds
/// measured over a corpus of sampled vector fields.
DuhamelReport duhamel_div_bound_check(const GridPtr& grid, double alpha,
                                      const std::vector<TestVectorField>& fields,
                                      double t_final, int steps = 160);

}  // namespace oseen

#endif

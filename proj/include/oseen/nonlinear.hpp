#ifndef OSEEN_NONLINEAR_HPP
#define OSEEN_NONLINEAR_HPP

#include <optional>
#include <string>
#include <vector>

#include "oseen/biot_savart.hpp"
#include "oseen/spectral.hpp"

namespace oseen {

// Full perturbation state: circulation Reynolds number alpha, rescaled time
// tau, and the mode family of the perturbation w - alpha G (modes 0..n_max,
// negative modes by conjugation).
struct VortexState {
    double alpha = 0.0;
    double tau = 0.0;
    ModeField modes;
};

/// Reduce arbitrary initial data to the invariant class: the mean of the
/// perturbation is absorbed into the circulation (alpha <- alpha + mean),
/// and the first moment is removed by the spatial shift eta = p / alpha,
/// re-expanded on the polar grid. Throws when alpha + mean = 0 but the
/// moment is nonzero (the shift is undefined there).
VortexState normalize_perturbation(const ModeField& w0, double alpha);

/// Radial / non-axisymmetric splitting: (P_r w, (1 - P_r) w).
std::pair<ModeField, ModeField> split_radial(const VortexState& state);

/// Full time derivative of the mode family: linear part through the mode
/// operators, advection evaluated pseudospectrally in the angle with
/// truncation dealiasing; the mode-0 quadratic feedback is assembled in
/// divergence form so its discrete mean vanishes to quadrature accuracy.
ModeField nonlinear_rhs(const VortexState& state);

struct EvolveOptions {
    double dt_max = 5e-3;
    double cfl = 0.5;           // dt = min(dt_max, cfl / (1 + |alpha| c6 n_theta))
    int record_stride = 0;      // 0: about 400 records over the run
    double tau0 = 0.0;          // transient scale for the running M norm (0: skip)
    int n_phi = 0;              // 0: first power of two >= 3 n_theta + 1
    double lambda_cut = 0.0;    // propagator basis cut (0: auto)
    double blowup_factor = 10.0;
    unsigned seed = 0;          // echoed into outputs; the scheme is deterministic
};

struct TrajectoryRecord {
    double alpha = 0.0;
    double dt = 0.0;
    std::vector<double> taus;
    std::vector<double> norm_r, norm_perp;  // X norms of the split parts
    std::vector<double> m_values;           // running sup of ||w_r|| + e^{tau/tau0} ||w_perp||
    std::vector<double> energy;             // E[w] = -<w, L w>_X
    std::vector<double> cl_log_margin;      // log ||w||_X - log(Carlen-Loss bound)
    double mean_drift = 0.0;                // max |mean| over the run
    double moment_drift = 0.0;              // max |first moment| over the run
    bool resolution_alarm = false;          // top mode carried > 1e-6 of the energy
    std::string note;
};

/// Integrate the perturbation system to time T. The linear part of every
/// mode (diffusion and rotation) advances by its exact exponential in the
/// truncated -L_n eigenbasis; the quadratic advection is handled by a
/// two-stage exponential integrator. Aborts when the state leaves the
/// Carlen-Loss a priori ball by blowup_factor (numerical instability: the
/// true solution is global).
TrajectoryRecord evolve(const VortexState& state, double t_final,
                        const EvolveOptions& opts = {});

struct RelaxationEntry {
    double alpha = 0.0;
    double rho = 0.0;        // fitted decay rate of ||w_perp||
    double r_squared = 0.0;
    double rho_scaled = 0.0; // rho log(alpha) / alpha^{1/3}
    double rate_r = 0.0;     // fitted decay rate of ||w_r||
    double window_lo = 0.0, window_hi = 0.0;
};

struct RelaxationFit {
    std::vector<RelaxationEntry> entries;
    ScalingFit rho_fit;        // log rho vs log alpha
    double rho_scaled_spread = 0.0;  // (max - min) / mid of rho_scaled
};

/// Decay-rate measurement over an alpha sweep: per run, a least-squares
/// rate of log ||w_perp|| on the window [2 tau0, 6 tau0] with tau0 from the
/// fitted envelope constants; refuses fits with r^2 < 0.95.
RelaxationFit measure_relaxation(const std::vector<std::pair<double, TrajectoryRecord>>& runs,
                                 double c5_hat, double c7_hat);

struct EnergyReport {
    double energy = 0.0;       // E[w]
    double grad_norm2 = 0.0;   // ||grad w||_X^2
    double xi_norm2 = 0.0;     // ||xi w||_X^2
    double norm2 = 0.0;        // ||w||_X^2
    bool coercivity_ok = false;   // the three-term lower bound of the space
    bool gap_ok = false;          // E >= ||w||^2 / 2 on X_0, >= ||w||^2 on X_1
};

/// Quadrature evaluation of the energy functional and its coercivity
/// bounds; `space` selects which constants apply.
EnergyReport energy_inequality_check(const ModeField& w, CorpusSpace space);

}  // namespace oseen

#endif

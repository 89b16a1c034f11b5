#ifndef OSEEN_BIOT_SAVART_HPP
#define OSEEN_BIOT_SAVART_HPP

#include <vector>

#include "oseen/mode_operator.hpp"

namespace oseen {

// Real 2-d field as an azimuthal-mode family: stored modes 0..n_max with
// w_{-n} = conj(w_n), so w(r, theta) = w_0 + 2 Re sum_{n>=1} w_n e^{i n theta}.
class ModeField {
  public:
    ModeField(GridPtr grid, int n_max);

    int n_max() const { return static_cast<int>(modes_.size()) - 1; }
    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXcd& scaled(int n) const { return modes_.at(n); }
    Eigen::VectorXcd& scaled(int n) { return modes_.at(n); }
    WeightedRadialFunction mode(int n) const {
        return WeightedRadialFunction::from_scaled(grid_, n, modes_.at(n));
    }
    void set_mode(const WeightedRadialFunction& w);

    double x_norm() const;  // ||w||_X^2 = sum_n ||w_n||_Z^2 over n in Z

    // physical values on a (node, angle) tensor grid, theta_k = 2 pi k / n_phi
    Eigen::MatrixXd physical_slice(int n_phi) const;

    // mean int w dxi and first moment int xi w dxi
    double mean() const;
    Eigen::Vector2d first_moment() const;

  private:
    GridPtr grid_;
    std::vector<Eigen::VectorXcd> modes_;  // scaled values, modes 0..n_max
};

struct ModeVelocity {
    int mode = 0;
    Eigen::VectorXcd u_r;      // physical values on public nodes
    Eigen::VectorXcd u_theta;
    // limits at r = 0 (zero except for |mode| = 1, where u is finite)
    std::complex<double> u_r_origin{0.0, 0.0};
    std::complex<double> u_theta_origin{0.0, 0.0};
};

/// Velocity of one vorticity mode through the mode streamfunction:
/// u_r = (i n / r) Psi, u_theta = -Psi' for n != 0 (Psi the full Green
/// solve); for n = 0 the flow is purely azimuthal with
/// u_theta = (1/r) int_0^r s w(s) ds.
ModeVelocity velocity_from_mode(const WeightedRadialFunction& w);

/// Discrete divergence residual (1/r)(r u_r)' + (i n / r) u_theta, reported
/// relative to the velocity magnitude.
double divergence_residual(const ModeVelocity& v, const RadialGrid& grid);

/// L^p norm over the plane of the physical field (mode family), theta by
/// trapezoid, radius by the grid quadrature. p = inf is the max over the
/// tensor grid with one Richardson-extrapolated off-grid probe near the
/// azimuthal-speed maximiser.
double lp_norm(const ModeField& w, double p, int n_phi = 0);

/// Same for the velocity field of the family.
double velocity_lp_norm(const ModeField& w, double p, int n_phi = 0);

/// Direct 2-d Biot-Savart quadrature of the convolution integral at one
/// point, in polar coordinates centred at the singularity (the Jacobian
/// cancels the kernel pole). The low-resolution cross-check oracle.
Eigen::Vector2d biot_savart_direct(const ModeField& w, const Eigen::Vector2d& x,
                                   int n_s = 220, int n_phi = 256);

/// Velocity at a point from the mode-wise reconstruction (for comparison
/// against biot_savart_direct).
Eigen::Vector2d velocity_at_point(const ModeField& w, const Eigen::Vector2d& x);

struct HlsReport {
    double p = 0.0, q = 0.0;
    double lhs = 0.0, rhs = 0.0;  // rhs only for the explicit-constant form
    double ratio = 0.0;
};

/// ||u||_{L^q} / ||w||_{L^p} with 1 < p < 2 < q < inf, 1/q = 1/p - 1/2.
HlsReport check_hls_ratio(const ModeField& w, double p, double q);

/// ||u||_inf against the explicit two-term bound
///   inf_R [ A(q) R^{1-2/q} ||w||_q + B(p) R^{1-2/p} ||w||_p ],
/// minimised numerically over the split radius; ratio must be < 1.
HlsReport check_hls_uniform(const ModeField& w, double p, double q);

/// ||u||_inf <= C ||w||_{L1 cap L2} (1 + log_+ (||w||_L3 / ||w||_{L1 cap L2}))^{1/2}:
/// returns the empirical C.
double check_log_bound(const ModeField& w);

/// ||w1 u2||_{L2} <= C ||w1||_2 ||w2||_{L1 cap L2} (1 + log_+(||w1||_3/||w1||_2))^{1/2}:
/// returns the empirical C.
double check_product_bound(const ModeField& w1, const ModeField& w2);

/// Skew-symmetry defect of Lambda on a pair of mode families:
/// |<Lambda w1, w2>_X + <w1, Lambda w2>_X| / (||w1|| ||w2||).
double lambda_skew_defect(const ModeField& w1, const ModeField& w2);

/// Fixed-seed random corpus inside X: coefficients on the first
/// `levels` Hermite radial functions per mode |n| <= mode_cap, optionally
/// constrained to X_0 (zero mean) or X_1 (zero mean and first moment).
enum class CorpusSpace { x, x0, x1 };
std::vector<ModeField> random_corpus(const GridPtr& grid, int count, unsigned seed,
                                     CorpusSpace space = CorpusSpace::x0,
                                     int mode_cap = 4, int levels = 12);

/// Scaled Hermite radial function r^{|n|} L_j^{(|n|)}(r^2/4) e^{-r^2/8}
/// (eigenfunction of -L_n at (|n| + 2j)/2), unit Z-norm.
Eigen::VectorXcd hermite_mode(const RadialGrid& grid, int n, int j);

}  // namespace oseen

#endif

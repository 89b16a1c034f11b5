#ifndef OSEEN_MODE_OPERATOR_HPP
#define OSEEN_MODE_OPERATOR_HPP

#include <complex>
#include <memory>
#include <optional>

#include "oseen/radial_function.hpp"

namespace oseen {

enum class Subspace { full, z0 };

// Dense discretisation of the one-dimensional mode operators for azimuthal
// wavenumber n:
//
//   L_n  = d_rr + (r/2 + 1/r) d_r + (1 - n^2/r^2)     (selfadjoint in Z)
//   M_n w = phi w - g Omega_n[w]                      (bounded symmetric)
//   H_{n,beta} = -L_n + i beta M_n
//
// All matrices are stored in Z-metric coordinates: with the diagonal map
// S = diag(sqrt(8 pi^2 W_i r_i)) acting on interior psi-values, the stored
// neg_l() equals S (-L_n) S^{-1} and is symmetric by construction (the
// discretisation is the quadrature Galerkin form of the operator, assembled
// from the energy integrals; symmetry is exact, not approximate).
//
// The origin behaviour is imposed through the basis: psi(0) = 0 for
// |n| >= 1 (profiles vanish like r^{|n|}), while for n = 0 the r = 0 value
// is an unconstrained dof eliminated by static condensation (the weak form
// needs no condition at a vanishing-weight endpoint). Far field closes with
// psi(R_max) = 0.
//
// Omega_n[.] is the coupling kernel
//   Omega_n[w](r) = (1/4|n|) [ int_0^r (r'/r)^{|n|} r' w dr'
//                            + int_r^inf (r/r')^{|n|} r' w dr' ],
// which is half the Green kernel of  -X'' - X'/r + n^2 X / r^2 = w ; the
// streamfunction of the mode (used for velocity reconstruction) is the full
// Green solve, i.e. 2 Omega_n[w]. Both are realised through one factorised
// BVP operator with a Robin closure  r X' + |n| X = 0  at R_max, which is
// exact for sources supported inside the domain.
class ModeOperator {
  public:
    int mode() const { return mode_; }
    double beta() const { return beta_; }
    const GridPtr& grid() const { return grid_; }
    bool has_coupling() const { return m_sym_ != nullptr; }

    // Z-metric matrices on interior nodes (size N-1).
    const Eigen::MatrixXd& neg_l() const { return *neg_l_sym_; }
    const Eigen::MatrixXd& m() const;  // throws if n == 0

    // H = -L_n + i beta M_n in metric coordinates; for beta == 0 or n == 0
    // this is the real matrix neg_l() promoted to complex.
    Eigen::MatrixXcd h_matrix() const;

    // Same operator restricted to the requested subspace (z0 deflates the
    // r g direction; only meaningful for |n| = 1).
    Eigen::MatrixXcd h_matrix(Subspace s) const;
    Eigen::MatrixXd neg_l(Subspace s) const;
    Eigen::MatrixXd m(Subspace s) const;

    // Unit vector (metric coordinates) spanning the deflated direction r g.
    Eigen::VectorXd z0_direction() const;

    // Operator norm ||M_n||_{Z->Z} (dense SVD, cached).
    double m_norm() const;

    // Share the assembled matrices under a different beta.
    ModeOperator with_beta(double beta) const;

    // Strong (collocation) application of -L_n to a sampled profile; used
    // for residual identities where the quadrature form's nodal error near
    // the clustered ends would dominate.
    WeightedRadialFunction apply_neg_l(const WeightedRadialFunction& w) const;

    // Strong application of M_n (BVP solve for the coupling kernel).
    WeightedRadialFunction apply_m(const WeightedRadialFunction& w) const;

    // Kernel solves on public nodes (input/output physical values).
    //   solve_streamfunction: -X'' - X'/r + n^2 X / r^2 = w_phys
    //   omega:                the half-kernel coupling integral
    Eigen::VectorXcd solve_streamfunction(const Eigen::VectorXcd& w_phys) const;
    Eigen::VectorXcd omega(const Eigen::VectorXcd& w_phys) const;

    friend ModeOperator assemble_H(GridPtr grid, int n, double beta);

  private:
    int mode_ = 0;
    double beta_ = 0.0;
    GridPtr grid_;
    std::shared_ptr<const Eigen::MatrixXd> neg_l_sym_;
    std::shared_ptr<const Eigen::MatrixXd> m_sym_;  // null for n = 0
    // collocation BVP factor for function-level Green solves (the weak form
    // backs the symmetric matrices; the strong form is the accurate solver)
    std::shared_ptr<const Eigen::PartialPivLU<Eigen::MatrixXd>> bvp_strong_;
    mutable std::optional<double> m_norm_cache_;
};

/// Discretise -L_n (quadrature Galerkin form; beta = 0).
ModeOperator assemble_L_n(GridPtr grid, int n);

/// Discretise M_n (requires n != 0).
ModeOperator assemble_M_n(GridPtr grid, int n);

/// Discretise H_{n,beta} = -L_n + i beta M_n (requires n != 0).
ModeOperator assemble_H(GridPtr grid, int n, double beta);

/// Coupling kernel by per-point split-interval Gauss quadrature of the
/// explicit integral; the independent oracle for the BVP route.
Eigen::VectorXcd omega_via_kernel_quadrature(const RadialGrid& grid, int n,
                                             const Eigen::VectorXcd& w_phys,
                                             int panel_points = 24);

/// Householder deflation of the direction q (unit vector, metric coords):
/// returns Q^T A Q where Q spans q-perp.
Eigen::MatrixXcd deflate_direction(const Eigen::MatrixXcd& a, const Eigen::VectorXd& q);
Eigen::MatrixXd deflate_direction(const Eigen::MatrixXd& a, const Eigen::VectorXd& q);

/// Row-major complex dump of a metric-coordinate operator matrix, plus a
/// small JSON sidecar describing grid and mode; see README for the format.
void dump_operator(const ModeOperator& op, const std::string& path_prefix);

}  // namespace oseen

#endif
